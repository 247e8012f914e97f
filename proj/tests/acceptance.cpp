// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if
// every criterion passes.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>

#include "csl/ensemble.hpp"
#include "csl/exclusion.hpp"
#include "csl/io.hpp"
#include "csl/master.hpp"
#include "csl/series.hpp"
#include "csl/stats.hpp"
#include "csl/trace_dynamics.hpp"

using namespace csl;
namespace fs = std::filesystem;
using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& what, const std::string& measured, double seconds) {
  if (!pass) ++failures;
  std::printf("criterion %2d: %s  %s | %s (%.1fs)\n", n, pass ? "PASS" : "FAIL", what.c_str(), measured.c_str(),
              seconds);
  std::fflush(stdout);
}

std::string f(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

// Ordinary least squares slope.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

void criterion1() {
  Timer t;
  const mp r("1e-7"), gamma("4.455e-37");
  const mp oracle = gamma / pow(4 * boost::math::constants::pi<mp>() * r * r, mp(3) / 2);
  const double got = lambda_from_gamma(4.455e-37, 1e-7, 3);
  const double rel_target = std::abs(got / 1e-17 - 1.0);
  const double rel_oracle = std::abs(got / static_cast<double>(oracle) - 1.0);
  report(1, rel_target <= 1e-3 && rel_oracle <= 1e-14, "lambda_from_gamma(dim 3, r_C 1e-7 m, gamma 4.455e-37) = 1e-17 within 0.1%",
         f("lambda %.6e, rel. to 1e-17 %.2e, rel. to 50-digit oracle %.1e", got, rel_target, rel_oracle), t.seconds());
}

void criterion2() {
  Timer t;
  const CslParams p = CslParams::from_lambda(1e-17, 1e-7, 3, si::kNucleonMass, si::kNucleonMass, si::kHbar);
  const double rate = heating_rate(p, si::kNucleonMass);
  const double rel = std::abs(rate / 4.98e-45 - 1.0);
  report(2, rel <= 0.01, "heating_rate(dim 3, lambda 1e-17, r_C 1e-7 m, M = m0 = m_N) = 4.98e-45 W within 1%",
         f("rate %.4e W, rel. error %.2e", rate, rel), t.seconds());
}

void criterion3() {
  Timer t;
  const Grid1D grid = Grid1D::centered(512, 0.125);
  const CslParams p = CslParams::from_lambda(1.0, 1.0, 1);
  const double sep = 6.0;
  const double rate = decay_rate(sep, p);
  const double dt = 1e-3 / rate;
  const std::size_t n_steps = 3000, stride = 250, n_traj = 2000;
  const Wavefunction psi0 = two_gaussian_state(grid, std::sqrt(0.5), std::sqrt(0.5), -0.5 * sep, 0.5 * sep, 0.5);
  const RegionSpec regions = RegionSpec::halves(grid, 0.0);
  const Hamiltonian H = Hamiltonian::zero(grid);

  struct Out {
    std::vector<cplx> coherence;
    Wavefunction final_state;
  };
  auto one = [&](std::size_t i) {
    CslIntegrator integ(H, p, dt);
    NormalStream rng(3003, i);
    Wavefunction psi = psi0;
    std::vector<cplx> coh;
    auto sample = [&] {
      cplx l = 0, r = 0;
      for (std::size_t a = regions.left_begin; a < regions.left_end; ++a) l += psi[a];
      for (std::size_t b = regions.right_begin; b < regions.right_end; ++b) r += psi[b];
      coh.push_back(l * std::conj(r) * grid.dx() * grid.dx());
    };
    sample();
    for (std::size_t k = 1; k <= n_steps; ++k) {
      integ.step(psi, rng);
      if (k % stride == 0) sample();
    }
    return Out{coh, psi};
  };
  const auto runs = parallel_map(n_traj, one);

  const std::size_t n_samples = runs.front().coherence.size();
  std::vector<double> times, logc;
  for (std::size_t s = 0; s < n_samples; ++s) {
    cplx m = 0;
    for (const auto& r : runs) m += r.coherence[s];
    m /= static_cast<double>(n_traj);
    times.push_back(static_cast<double>(s * stride) * dt);
    logc.push_back(std::log(std::abs(m)));
  }
  const double fitted = -ols_slope(times, logc);
  const double rel = std::abs(fitted / rate - 1.0);

  DensityAccumulator acc(grid);
  for (const auto& r : runs) acc.add(r.final_state);
  const DensityMatrix rho_mc = acc.result();
  const DensityMatrix rho_me = evolve_master(DensityMatrix::pure(psi0), H, p, dt, n_steps);
  const double td = trace_distance(rho_mc, rho_me);
  report(3, rel <= 0.05 && td < 0.02,
         "ensemble coherence decays at decay_rate(6 r_C) within 5%; trace distance to master equation < 0.02 at 3/Gamma",
         f("Gamma %.5f, fitted %.5f (rel. %.3f), trace distance %.4f, 2000 traj, 512 sites", rate, fitted, rel, td),
         t.seconds());
}

BornRun born_run(double a2, std::uint64_t seed) {
  return born_experiment(std::sqrt(a2), std::sqrt(1.0 - a2), 6.0, CslParams::from_lambda(1.0, 1.0, 1), 2000, seed);
}

void criteria4and5() {
  Timer t;
  bool all = true;
  std::string detail;
  std::optional<BornRun> run03;
  std::uint64_t seed = 4000;
  for (double a2 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    try {
      BornRun run = born_run(a2, seed++);
      const auto& r = run.result;
      const double band = 3.0 * std::sqrt(a2 * (1.0 - a2) / 2000.0);
      const double undecided = static_cast<double>(r.n_undecided) / 2000.0;
      const bool ok = std::abs(r.f_left - a2) <= band && undecided < 0.01;
      all = all && ok;
      detail += f("%s|a|^2=%.1f: f_left %.4f (band +-%.4f, undecided %.4f)", detail.empty() ? "" : "; ", a2, r.f_left,
                  band, undecided);
      if (a2 == 0.3) run03 = std::move(run);
    } catch (const Error& e) {
      all = false;
      detail += f("%s|a|^2=%.1f: %s", detail.empty() ? "" : "; ", a2, e.what());
    }
  }
  report(4, all, "Born rule: f_left within 3 binomial sigma of |alpha|^2, undecided < 1%, n = 2000 each", detail,
         t.seconds());

  Timer t5;
  if (!run03) {
    report(5, false, "martingale: max standardised drift of E[P_left] <= 3", "no |alpha|^2 = 0.3 ensemble", t5.seconds());
    return;
  }
  const auto m = martingale_check(run03->p_left);
  report(5, m.pass, "martingale: max standardised drift of E[P_left] <= 3 on the |alpha|^2 = 0.3 ensemble",
         f("max drift %.3f SE at t = %.3f over %zu sampled times", m.max_deviation, m.worst_time,
           run03->p_left.times.size()),
         t5.seconds());
}

void criterion6() {
  Timer t;
  const Grid1D grid = Grid1D::centered(256, 0.25);
  const CslParams p = CslParams::from_lambda(1.0, 1.0, 1);
  const Hamiltonian H = Hamiltonian::free(grid);
  const Wavefunction psi0 = gaussian_packet(grid, 0.0, 3.0);
  TrajectoryConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_steps = 3000;
  cfg.snapshot_stride = 100;
  cfg.seed = 6006;
  cfg.observables = {Observable::Energy};
  const auto records = parallel_map(500, [&](std::size_t i) {
    TrajectoryConfig c = cfg;
    c.stream = i;
    return run_trajectory(psi0, H, p, c);
  });
  const HeatingFit fit = measure_heating(records);
  const double expected = heating_rate(p, 1.0);
  const double rel = std::abs(fit.slope / expected - 1.0);
  report(6, rel <= 0.10, "free-H ensemble energy slope within 10% of (lambda_1/4)(hbar^2/r_C^2)(m/m0^2)",
         f("slope %.5f +- %.5f, expected %.5f, rel. error %.3f, 500 traj", fit.slope, fit.standard_error, expected, rel),
         t.seconds());
}

void criterion7() {
  Timer t;
  NormalStream rng(7007, 0);
  td::System sys;
  for (int r = 0; r < 3; ++r)
    sys.push_back({"m" + std::to_string(r), 0.5 * td::random_hermitian(8, rng), 0.5 * td::random_hermitian(8, rng)});
  const td::TracePolynomial H = td::quartic_hamiltonian(3, 0.0, 1.0);
  const td::Matrix c0 = td::adler_millard(sys);
  const double e0 = td::trace_eval(H, sys).real();
  auto run = [&](double dt, std::size_t steps) {
    const td::System out = td::hamilton_flow(sys, H, dt, steps, td::FlowScheme::Leapfrog);
    return std::pair{(td::adler_millard(out) - c0).norm() / c0.norm(), std::abs(td::trace_eval(H, out).real() - e0)};
  };
  const auto [drift, e_err] = run(1e-3, 10000);
  const auto [drift_half, e_err_half] = run(5e-4, 20000);
  const double order = std::log2(drift / drift_half);
  const double e_order = std::log2(e_err / e_err_half);
  const bool order_ok = std::isfinite(order) && order >= 1.8 && order <= 2.2;
  report(7, drift < 1e-8 && order_ok,
         "Adler-Millard charge: relative drift < 1e-8 over 1e4 leapfrog steps and convergence order in [1.8, 2.2]",
         f("drift %.3e (dt/2: %.3e), charge order %.2f, energy-error order %.2f", drift, drift_half, order, e_order),
         t.seconds());
}

void criterion8() {
  Timer t;
  NormalStream rng(8008, 0);
  double worst = 0.0;
  for (int v = 0; v < 100; ++v) {
    td::MatrixFourVector dX;
    for (auto& m : dX.c) m = td::random_hermitian(4, rng);
    const double s0 = td::trace_line_element(dX);
    for (td::Axis ax : {td::Axis::X, td::Axis::Y, td::Axis::Z})
      for (int k = 0; k <= 40; ++k) {
        const double eta = -2.0 + 0.1 * k;
        const double s = td::trace_line_element(td::lorentz_boost(dX, eta, ax));
        worst = std::max(worst, std::abs(s - s0) / dX.scale());
      }
  }
  report(8, worst <= 1e-12, "trace line element invariant under boosts, eta in [-2, 2], |d ds^2| <= 1e-12 scale",
         f("max |d ds^2| / scale = %.2e over 100 vectors x 3 axes x 41 rapidities", worst), t.seconds());
}

void criterion9() {
  Timer t;
  const auto b = builtin_bounds();
  bool ge = false, interf = false;
  for (const auto& r : b) {
    if (r.name == "Ge-11keV" && r.lambda_max == 1e-11 && r.r_C_assumed == 1e-7) ge = true;
    if (r.kind == BoundKind::Interferometry && r.r_C_assumed == 1e-7 && r.lambda_max <= 1e-5 * (1 + 1e-12) &&
        r.lambda_max >= 1e-5 * (1 - 1e-12))
      interf = true;
  }
  const ModelPoint mpnt = csl_model_point();
  const auto grid = exclusion_grid(b, {mpnt.lambda, mpnt.lambda, 1}, {mpnt.r_C, mpnt.r_C, 1});
  const bool allowed = !grid.is_excluded(0, 0);
  report(9, ge && interf && allowed && mpnt.lambda == 1e-17 && mpnt.r_C == 1e-7,
         "builtin bounds carry Ge lambda < 1e-11 and 1e4 amu interferometry lambda <~ 1e-5 at 1e-5 cm; model point allowed",
         f("Ge row %s, interferometry row %s, model point (%.0e 1/s, %.0e m) %s", ge ? "present" : "missing",
           interf ? "present" : "missing", mpnt.lambda, mpnt.r_C, allowed ? "unexcluded" : "EXCLUDED"),
         t.seconds());
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> m;
  if (!fs::exists(dir)) return m;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) m[fs::relative(e.path(), dir).string()] = io::read_text(e.path().string());
  return m;
}

void criterion10() {
  Timer t;
  const fs::path root = fs::temp_directory_path() / "cslsim_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string grid = R"("grid": {"n_sites": 64, "dx": 0.25}, "params": {"lambda": 1.0, "r_C": 1.0})";
  const std::map<std::string, std::string> configs{
      {"trajectory", "{" + grid + R"(, "run": {"dt": 0.002, "n_steps": 50, "base_seed": 1}, "hamiltonian": {"kind": "free"}})"},
      {"ensemble", "{" + grid + R"(, "run": {"dt": 0.002, "n_steps": 50, "n_traj": 8, "base_seed": 2, "snapshot_stride": 10}})"},
      {"born", R"({"params": {"lambda": 1.0, "r_C": 1.0}, "grid": {"n_sites": 128, "dx": 0.25}, "run": {"n_traj": 16, "base_seed": 3}, "born": {"alpha2": 0.3, "dt_gamma": 0.002}})"},
      {"heating", "{" + grid + R"(, "run": {"dt": 0.002, "n_steps": 20, "n_traj": 100, "base_seed": 4, "snapshot_stride": 5}, "hamiltonian": {"kind": "free"}, "initial_state": {"kind": "gaussian", "sigma": 1.5}})"},
      {"master", "{" + grid + R"(, "run": {"dt": 0.01, "n_steps": 20, "snapshot_stride": 5}, "hamiltonian": {"kind": "free"}})"},
      {"exclusion", R"({})"},
      {"td-conserve", R"({"td": {"n": 4, "dofs": 2, "n_steps": 200, "dt": 0.01}, "run": {"base_seed": 5}})"},
      {"td-boost", R"({"td": {"n": 4, "n_vectors": 10, "n_eta": 9}, "run": {"base_seed": 6}})"}};
  bool all = true;
  std::string detail;
  std::size_t files = 0;
  for (const auto& [sub, cfg] : configs) {
    const fs::path cfg_path = root / (sub + ".json");
    io::write_text(cfg_path.string(), cfg);
    std::map<std::string, std::string> first;
    bool same = true;
    int run_index = 0;
    for (const char* workers : {"1", "4", "1"}) {
      const fs::path out = root / (sub + "_" + std::to_string(run_index++));
      const std::string cmd = std::string(CSLSIM_PATH) + " " + sub + " --config " + cfg_path.string() + " --workers " +
                              workers + " --out " + (out / "run").string() + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        same = false;
        detail += " " + sub + ":exit!=0";
        break;
      }
      const auto tree = read_tree(out);
      if (first.empty()) {
        first = tree;
        files += tree.size();
        if (tree.empty()) same = false;
      } else if (tree != first) {
        same = false;
      }
    }
    if (!same) detail += " " + sub + ":DIFFERS";
    all = all && same;
  }
  report(10, all, "every subcommand re-run with the same config and seed is byte-identical at 1 and 4 workers",
         f("8 subcommands, %zu output files compared over 3 runs each%s", files, detail.c_str()), t.seconds());
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criteria4and5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
