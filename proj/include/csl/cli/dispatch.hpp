#pragma once

#include <filesystem>
#include <iostream>
#include <utility>

#include "csl/cli/config.hpp"

namespace csl::cli {

enum ExitCode : int { kOk = 0, kNumericalFailure = 1, kConfigFailure = 2 };

/// Files produced by one run. Nothing touches the disk until commit(); a
/// failed commit removes whatever it already wrote.
class OutputSet {
 public:
  void add(std::string path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

  const std::vector<std::pair<std::string, std::string>>& files() const noexcept { return files_; }

  void commit() const {
    std::vector<std::string> written;
    try {
      for (const auto& [path, content] : files_) {
        const auto parent = std::filesystem::path(path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        written.push_back(path);
        io::write_text(path, content);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) std::filesystem::remove(p, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

namespace detail {

inline Json csv_meta(const RunConfig& c) {
  Json m{{"tool", "cslsim"}};
  for (const auto& [k, v] : c.echo.items()) m[k] = v;
  return m;
}

inline Hamiltonian build_hamiltonian(const RunConfig& c) {
  const auto& h = c.hamiltonian;
  const Grid1D& g = *c.grid;
  switch (h.kind) {
    case HamiltonianKind::Zero: return Hamiltonian::zero(g);
    case HamiltonianKind::Free: return Hamiltonian::free(g, c.params->m, c.params->hbar, h.kinetic);
    case HamiltonianKind::Harmonic:
      return Hamiltonian::harmonic(g, h.omega, h.center, c.params->m, c.params->hbar, h.kinetic);
    case HamiltonianKind::ExternalPotential: break;
  }
  throw config_error("hamiltonian.kind", "not available from the command line");
}

inline Wavefunction build_state(const RunConfig& c) {
  const auto& s = c.state;
  if (s.kind == StateBlock::Kind::Gaussian) return gaussian_packet(*c.grid, s.center, s.sigma, s.k0);
  return two_gaussian_state(*c.grid, s.alpha, s.beta, -0.5 * s.separation, 0.5 * s.separation, s.sigma);
}

inline TrajectoryConfig trajectory_config(const RunConfig& c, std::size_t stream) {
  TrajectoryConfig t;
  t.dt = c.run.dt;
  t.n_steps = c.run.n_steps;
  t.seed = c.run.base_seed;
  t.stream = stream;
  t.snapshot_stride = c.run.snapshot_stride;
  t.observables = c.observables;
  for (auto o : t.observables)
    if (o == Observable::RegionProbabilities) t.regions = RegionSpec::halves(*c.grid, 0.0);
  return t;
}

inline void run_trajectory_cmd(const RunConfig& c, OutputSet& out) {
  const Hamiltonian H = build_hamiltonian(c);
  const TrajectoryConfig tc = trajectory_config(c, 0);
  const TrajectoryRecord rec = run_trajectory(build_state(c), H, *c.params, tc);
  out.add(c.out + ".csv", io::trajectory_csv(rec, csv_meta(c)));
  Json side = io::trajectory_sidecar(rec, *c.params, *c.grid, tc, H);
  side["config"] = c.echo;
  out.add(c.out + ".json", io::json_text(side));
}

inline std::vector<TrajectoryRecord> run_ensemble(const RunConfig& c, const TrajectoryConfig& base) {
  const Hamiltonian H = build_hamiltonian(c);
  const Wavefunction psi0 = build_state(c);
  return parallel_map(
      c.run.n_traj,
      [&](std::size_t i) {
        TrajectoryConfig tc = base;
        tc.stream = i;
        return run_trajectory(psi0, H, *c.params, tc);
      },
      c.workers);
}

inline void run_ensemble_cmd(const RunConfig& c, OutputSet& out) {
  const TrajectoryConfig base = trajectory_config(c, 0);
  const auto records = run_ensemble(c, base);
  const auto& cols = records.front().columns;
  std::vector<std::string> header{"time"};
  for (const auto& name : cols) {
    header.push_back(name + "_mean");
    header.push_back(name + "_sd");
  }
  std::vector<EnsembleSeries> series;
  for (const auto& name : cols) series.push_back(collect_series(records, name));
  io::CsvWriter w(csv_meta(c), header);
  for (std::size_t k = 0; k < records.front().times.size(); ++k) {
    std::vector<double> row{records.front().times[k]};
    for (const auto& s : series) {
      row.push_back(s.mean_at(k));
      row.push_back(s.stddev_at(k));
    }
    w.row(row);
  }
  DensityAccumulator acc(*c.grid);
  for (const auto& r : records) acc.add(*r.final_state);
  const DensityMatrix rho = acc.result();
  Json meta = csv_meta(c);
  meta["time"] = records.front().times.back();
  out.add(c.out + ".csv", w.str());
  out.add(c.out + ".rho.csv", io::density_csv(rho, meta));
  out.add(c.out + ".rho.bin", io::density_binary(rho));
  out.add(c.out + ".json", io::json_text(Json{{"config", c.echo},
                                              {"density_time", records.front().times.back()},
                                              {"density_trace", rho.trace()},
                                              {"density_purity", rho.purity()}}));
}

inline void run_born_cmd(const RunConfig& c, OutputSet& out) {
  const cplx alpha(std::sqrt(c.born.alpha2), 0.0);
  const cplx beta(std::sqrt(1.0 - c.born.alpha2), 0.0);
  BornOptions opt = c.born.options;
  opt.workers = c.workers;
  const BornRun run = born_experiment(alpha, beta, c.born.separation, *c.params, c.run.n_traj, c.run.base_seed, opt);
  out.add(c.out + ".json", io::json_text(io::born_json(run.result, *c.params, Json{{"config", c.echo}})));
  out.add(c.out + ".decisions.csv", io::decisions_csv(run.decisions, csv_meta(c)));
}

inline void run_heating_cmd(const RunConfig& c, OutputSet& out) {
  TrajectoryConfig base = trajectory_config(c, 0);
  base.observables = {Observable::Energy};
  const auto records = run_ensemble(c, base);
  const HeatingFit fit = measure_heating(records);
  const double expected = heating_rate(*c.params, c.params->m);
  io::CsvWriter w(csv_meta(c), {"time", "mean_energy", "energy_se"});
  for (std::size_t k = 0; k < fit.times.size(); ++k) w.row({fit.times[k], fit.mean_energy[k], fit.energy_se[k]});
  out.add(c.out + ".csv", w.str());
  out.add(c.out + ".json", io::json_text(Json{{"slope", fit.slope},
                                              {"standard_error", fit.standard_error},
                                              {"expected_slope", expected},
                                              {"relative_error", (fit.slope - expected) / expected},
                                              {"trajectories", fit.trajectories},
                                              {"config", c.echo}}));
}

inline void run_master_cmd(const RunConfig& c, OutputSet& out) {
  const Hamiltonian H = build_hamiltonian(c);
  DensityMatrix rho = DensityMatrix::pure(build_state(c));
  const Grid1D& g = *c.grid;
  const std::size_t half = g.size() / 2;
  io::CsvWriter w(csv_meta(c), {"time", "trace", "purity", "coherence", "position_mean"});
  std::vector<double> xs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) xs[i] = g.x(i);
  auto sample = [&](double t) {
    w.row({t, rho.trace(), rho.purity(), std::abs(rho.block_sum(0, half, half, g.size())),
           rho.expectation_diagonal(xs)});
  };
  sample(0.0);
  std::size_t done = 0;
  while (done < c.run.n_steps) {
    const std::size_t chunk = std::min(c.run.snapshot_stride, c.run.n_steps - done);
    rho = evolve_master(rho, H, *c.params, c.run.dt, chunk);
    done += chunk;
    sample(static_cast<double>(done) * c.run.dt);
  }
  out.add(c.out + ".csv", w.str());
  out.add(c.out + ".rho.bin", io::density_binary(rho));
  out.add(c.out + ".json", io::json_text(Json{{"config", c.echo}, {"final_time", static_cast<double>(done) * c.run.dt}}));
}

inline void run_exclusion_cmd(const RunConfig& c, OutputSet& out) {
  const ExclusionGrid g = exclusion_grid(c.exclusion.records, c.exclusion.lambda_axis, c.exclusion.r_C_axis);
  const ModelPoint mp = csl_model_point();
  const BindingBound b = binding_bound(c.exclusion.records, mp.r_C);
  Json meta = csv_meta(c);
  meta["model_point"] = Json{{"lambda", mp.lambda}, {"r_C", mp.r_C}, {"excluded", mp.lambda > b.lambda_max}};
  out.add(c.out + ".csv", io::exclusion_csv(g, meta));
}

inline td::System random_system(const TdBlock& t, std::uint64_t seed) {
  NormalStream rng(seed, 0);
  td::System sys;
  for (std::size_t r = 0; r < t.dofs; ++r) {
    td::MatrixDegree d{"b" + std::to_string(r), t.amplitude * td::random_hermitian(t.n, rng),
                       t.amplitude * td::random_hermitian(t.n, rng)};
    sys.push_back(std::move(d));
  }
  return sys;
}

struct ConservationRun {
  double charge_drift = 0.0;  // ‖C(T) - C(0)‖_F / ‖C(0)‖_F
  double energy_error = 0.0;  // |H(T) - H(0)| / |H(0)|
};

inline ConservationRun conservation_run(const td::System& sys0, const td::TracePolynomial& H, double dt,
                                        std::size_t n_steps) {
  const td::Matrix c0 = td::adler_millard(sys0);
  const double e0 = td::trace_eval(H, sys0).real();
  const td::System sys = td::hamilton_flow(sys0, H, dt, n_steps, td::FlowScheme::Leapfrog);
  return {(td::adler_millard(sys) - c0).norm() / c0.norm(), std::abs(td::trace_eval(H, sys).real() - e0) / std::abs(e0)};
}

/// Convergence order from errors at step sizes dt and dt/2; NaN when either
/// error sits at round-off, where no order can be resolved.
inline double observed_order(double coarse, double fine, double floor = 1e-13) {
  if (!(coarse > floor) || !(fine > floor)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline void run_td_conserve_cmd(const RunConfig& c, OutputSet& out) {
  const auto& t = c.td;
  const td::System sys0 = random_system(t, c.run.base_seed);
  const td::TracePolynomial H = td::quartic_hamiltonian(t.dofs, t.quadratic, t.quartic);
  const ConservationRun coarse = conservation_run(sys0, H, t.dt, t.n_steps);
  const ConservationRun fine = conservation_run(sys0, H, 0.5 * t.dt, 2 * t.n_steps);
  out.add(c.out + ".json",
          io::json_text(Json{{"scheme", "leapfrog"},
                             {"charge_norm", td::adler_millard(sys0).norm()},
                             {"relative_charge_drift", coarse.charge_drift},
                             {"relative_charge_drift_half_dt", fine.charge_drift},
                             {"charge_drift_order", number_or_null(observed_order(coarse.charge_drift, fine.charge_drift))},
                             {"relative_energy_error", coarse.energy_error},
                             {"relative_energy_error_half_dt", fine.energy_error},
                             {"energy_error_order", number_or_null(observed_order(coarse.energy_error, fine.energy_error))},
                             {"drift_within_1e-8", coarse.charge_drift < 1e-8},
                             {"config", c.echo}}));
}

struct BoostReport {
  double max_relative_change = 0.0;  // max |Δds²| / scale
  double max_abs_change = 0.0;
  std::size_t evaluations = 0;
};

inline BoostReport boost_sweep(const TdBlock& t, std::uint64_t seed) {
  NormalStream rng(seed, 0);
  BoostReport rep;
  for (std::size_t v = 0; v < t.n_vectors; ++v) {
    td::MatrixFourVector dX;
    for (auto& m : dX.c) m = t.amplitude * td::random_hermitian(t.n, rng);
    const double s0 = td::trace_line_element(dX);
    const double scale = dX.scale();
    for (std::size_t k = 0; k < t.n_eta; ++k) {
      const double eta = t.eta_min + (t.eta_max - t.eta_min) * static_cast<double>(k) / static_cast<double>(t.n_eta - 1);
      for (auto axis : {td::Axis::X, td::Axis::Y, td::Axis::Z}) {
        const td::MatrixFourVector b = td::lorentz_boost(dX, eta, axis);
        // Boosted components are Hermitian up to rounding of cosh/sinh sums.
        const double d = std::abs(td::trace_line_element(b, 1e-9) - s0);
        rep.max_abs_change = std::max(rep.max_abs_change, d);
        rep.max_relative_change = std::max(rep.max_relative_change, d / scale);
        ++rep.evaluations;
      }
    }
  }
  return rep;
}

inline void run_td_boost_cmd(const RunConfig& c, OutputSet& out) {
  const BoostReport rep = boost_sweep(c.td, c.run.base_seed);
  out.add(c.out + ".json", io::json_text(Json{{"max_relative_change", rep.max_relative_change},
                                              {"max_abs_change", rep.max_abs_change},
                                              {"evaluations", rep.evaluations},
                                              {"within_1e-12", rep.max_relative_change <= 1e-12},
                                              {"config", c.echo}}));
}

}  // namespace detail

/// Runs one validated configuration and returns the files it would write.
inline OutputSet execute(const RunConfig& c) {
  OutputSet out;
  const std::string& s = c.subcommand;
  if (s == "trajectory")
    detail::run_trajectory_cmd(c, out);
  else if (s == "ensemble")
    detail::run_ensemble_cmd(c, out);
  else if (s == "born")
    detail::run_born_cmd(c, out);
  else if (s == "heating")
    detail::run_heating_cmd(c, out);
  else if (s == "master")
    detail::run_master_cmd(c, out);
  else if (s == "exclusion")
    detail::run_exclusion_cmd(c, out);
  else if (s == "td-conserve")
    detail::run_td_conserve_cmd(c, out);
  else if (s == "td-boost")
    detail::run_td_boost_cmd(c, out);
  else
    throw config_error("subcommand", "unknown subcommand '" + s + "'");
  return out;
}

/// Executes and writes outputs. 0 on success, 1 on a numerical or I/O
/// failure, 2 on a configuration error.
inline int dispatch(const RunConfig& c, std::ostream& err = std::cerr) {
  try {
    const OutputSet out = execute(c);
    out.commit();
    return kOk;
  } catch (const Error& e) {
    err << "cslsim " << c.subcommand << ": " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? kConfigFailure : kNumericalFailure;
  } catch (const std::exception& e) {
    err << "cslsim " << c.subcommand << ": " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace csl::cli
