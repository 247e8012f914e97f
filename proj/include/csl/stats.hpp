#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "csl/ensemble.hpp"
#include "csl/master.hpp"
#include "csl/regions.hpp"
#include "csl/sde.hpp"
#include "csl/series.hpp"

namespace csl {

struct BornOptions {
  std::size_t n_sites = 512;
  double dx_over_rc = 0.125;     // lattice spacing in units of r_C
  double sigma_over_rc = 0.5;    // |psi|² width of each lobe
  double dt_gamma = 1e-3;        // dt * Γ(separation)
  double t_max_gamma = 50.0;     // t_max * Γ(separation)
  double sample_gamma = 0.25;    // P_left sampling interval * Γ(separation)
  double epsilon = 0.01;
  unsigned workers = default_worker_count();
};

struct TrajectoryDecision {
  std::size_t index = 0;
  Decision decision = Decision::Undecided;
  double time = 0.0;  // first entry into a band; t_max when undecided
};

struct BornResult {
  cplx alpha, beta;
  double separation = 0.0;
  double decay_rate = 0.0;  // Γ(separation)
  double dt = 0.0;
  double t_max = 0.0;
  double epsilon = 0.01;
  std::size_t n_traj = 0;
  std::size_t n_left = 0, n_right = 0, n_undecided = 0;
  double f_left = 0.0, f_right = 0.0;
  double se_left = 0.0, se_right = 0.0;  // binomial standard errors
  double mean_collapse_time = 0.0;
  double sd_collapse_time = 0.0;
  std::uint64_t base_seed = 0;
};

struct BornRun {
  BornResult result;
  std::vector<TrajectoryDecision> decisions;
  EnsembleSeries p_left;  // stopped process, sampled every sample_gamma/Γ
  RegionSpec regions;
  Grid1D grid;
};

namespace detail {

struct BornTrajectory {
  TrajectoryDecision decision;
  std::vector<double> p_left;
};

}  // namespace detail

/// Runs n_traj pure-collapse (H = 0) trajectories from
/// alpha|G_left> + beta|G_right>, lobes at -separation/2 and +separation/2,
/// each until P_left enters an epsilon band or t_max = t_max_gamma/Γ.
/// Trajectory i uses noise stream (base_seed, i).
inline BornRun born_experiment(cplx alpha, cplx beta, double separation, const CslParams& params, std::size_t n_traj,
                               std::uint64_t base_seed, const BornOptions& opt = {}) {
  params.validate();
  require(std::abs(std::norm(alpha) + std::norm(beta) - 1.0) <= 1e-10, ErrorCode::InvalidArgument,
          "born_experiment: |alpha|² + |beta|² must equal 1");
  require(separation >= 6.0 * params.r_C, ErrorCode::InvalidArgument,
          "born_experiment: separation must be at least 6 r_C");
  require(params.gamma > 0.0, ErrorCode::InvalidArgument, "born_experiment: needs a collapse coupling gamma > 0");
  require(n_traj >= 1, ErrorCode::InvalidArgument, "born_experiment: needs at least one trajectory");

  const Grid1D grid = Grid1D::centered(opt.n_sites, opt.dx_over_rc * params.r_C);
  require(grid.span() >= 16.0 * params.r_C, ErrorCode::InvalidArgument, "born_experiment: grid span below 16 r_C");
  require(0.5 * separation + 8.0 * opt.sigma_over_rc * params.r_C <= 0.5 * grid.span(),
          ErrorCode::InvalidArgument, "born_experiment: lobes do not fit on the grid");

  const double sigma = opt.sigma_over_rc * params.r_C;
  const Wavefunction psi0 = two_gaussian_state(grid, alpha, beta, -0.5 * separation, 0.5 * separation, sigma);
  const RegionSpec regions = RegionSpec::halves(grid, 0.0, opt.epsilon);
  const Hamiltonian H = Hamiltonian::zero(grid);

  const double rate = decay_rate(separation, params);
  const double dt = opt.dt_gamma / rate;
  const auto max_steps = static_cast<std::size_t>(std::ceil(opt.t_max_gamma / opt.dt_gamma));
  const auto sample_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.sample_gamma / opt.dt_gamma)));
  const std::size_t n_samples = max_steps / sample_stride + 1;

  auto run_one = [&](std::size_t i) {
    CslIntegrator integrator(H, params, dt);
    NormalStream rng(base_seed, i);
    Wavefunction psi = psi0;
    detail::BornTrajectory out;
    out.decision.index = i;
    out.p_left.reserve(n_samples);
    double p = left_probability(psi, regions);
    out.p_left.push_back(p);
    Decision d = classify(p, regions.epsilon);
    std::size_t k = 0;
    while (d == Decision::Undecided && k < max_steps) {
      integrator.step(psi, rng);
      ++k;
      p = left_probability(psi, regions);
      d = classify(p, regions.epsilon);
      if (k % sample_stride == 0) out.p_left.push_back(p);
    }
    out.decision.decision = d;
    out.decision.time = static_cast<double>(k) * dt;
    // Stopped process: hold the value reached at the decision.
    while (out.p_left.size() < n_samples) out.p_left.push_back(p);
    return out;
  };

  auto trajectories = parallel_map(n_traj, run_one, opt.workers);

  BornRun run{{}, {}, {}, regions, grid};
  BornResult& r = run.result;
  r.alpha = alpha;
  r.beta = beta;
  r.separation = separation;
  r.decay_rate = rate;
  r.dt = dt;
  r.t_max = static_cast<double>(max_steps) * dt;
  r.epsilon = opt.epsilon;
  r.n_traj = n_traj;
  r.base_seed = base_seed;
  run.p_left.times.resize(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) run.p_left.times[s] = static_cast<double>(s * sample_stride) * dt;

  double t_sum = 0.0, t_sq = 0.0;
  for (auto& t : trajectories) {
    switch (t.decision.decision) {
      case Decision::Left: ++r.n_left; break;
      case Decision::Right: ++r.n_right; break;
      case Decision::Undecided: ++r.n_undecided; break;
    }
    if (t.decision.decision != Decision::Undecided) {
      t_sum += t.decision.time;
      t_sq += t.decision.time * t.decision.time;
    }
    run.decisions.push_back(t.decision);
    run.p_left.values.push_back(std::move(t.p_left));
  }
  const double n = static_cast<double>(n_traj);
  r.f_left = static_cast<double>(r.n_left) / n;
  r.f_right = static_cast<double>(r.n_right) / n;
  r.se_left = std::sqrt(r.f_left * (1.0 - r.f_left) / n);
  r.se_right = std::sqrt(r.f_right * (1.0 - r.f_right) / n);
  const double decided = static_cast<double>(r.n_left + r.n_right);
  if (decided > 0) {
    r.mean_collapse_time = t_sum / decided;
    r.sd_collapse_time = decided > 1 ? std::sqrt(std::max(0.0, (t_sq - t_sum * t_sum / decided) / (decided - 1.0))) : 0.0;
  }
  require(static_cast<double>(r.n_undecided) <= 0.01 * n, ErrorCode::Undecidable,
          std::to_string(r.n_undecided) + " of " + std::to_string(n_traj) + " trajectories undecided at t_max");
  return run;
}

struct MartingaleReport {
  double max_deviation = 0.0;  // in standard errors of the ensemble mean
  double worst_time = 0.0;
  double initial = 0.0;
  bool pass = true;            // max_deviation <= 3
};

/// Worst standardised departure of the ensemble mean of P_left(t) from
/// its initial value.
inline MartingaleReport martingale_check(const EnsembleSeries& p_left, double threshold = 3.0) {
  p_left.validate();
  require(p_left.trajectories() >= 2 && !p_left.times.empty(), ErrorCode::InsufficientData,
          "martingale_check needs at least two trajectories and one sample");
  MartingaleReport rep;
  rep.initial = p_left.mean_at(0);
  const double sqrt_n = std::sqrt(static_cast<double>(p_left.trajectories()));
  for (std::size_t k = 0; k < p_left.times.size(); ++k) {
    const double dev = std::abs(p_left.mean_at(k) - rep.initial);
    const double se = p_left.stddev_at(k) / sqrt_n;
    double z = 0.0;
    if (se > 0.0)
      z = dev / se;
    else if (dev > 0.0)
      z = std::numeric_limits<double>::infinity();
    if (z > rep.max_deviation) {
      rep.max_deviation = z;
      rep.worst_time = p_left.times[k];
    }
  }
  rep.pass = rep.max_deviation <= threshold;
  return rep;
}

struct CollapseTimeStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::size_t n_decided = 0;
  std::size_t n_total = 0;
};

namespace detail {

// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

/// Summary of first-decision times. Needs at least 90% of the ensemble
/// decided.
inline CollapseTimeStats collapse_time_stats(const std::vector<TrajectoryDecision>& decisions) {
  require(!decisions.empty(), ErrorCode::InsufficientData, "collapse_time_stats: empty ensemble");
  std::vector<double> t;
  for (const auto& d : decisions)
    if (d.decision != Decision::Undecided) t.push_back(d.time);
  require(static_cast<double>(t.size()) >= 0.9 * static_cast<double>(decisions.size()), ErrorCode::InsufficientData,
          "collapse_time_stats: fewer than 90% of trajectories decided");
  std::sort(t.begin(), t.end());
  CollapseTimeStats s;
  s.n_decided = t.size();
  s.n_total = decisions.size();
  double sum = 0.0;
  for (double v : t) sum += v;
  s.mean = sum / static_cast<double>(t.size());
  s.median = detail::quantile_sorted(t, 0.5);
  s.q1 = detail::quantile_sorted(t, 0.25);
  s.q3 = detail::quantile_sorted(t, 0.75);
  return s;
}

/// Same, from sampled P_left series: the decision time of a trajectory is
/// the first sample inside a band.
inline CollapseTimeStats collapse_time_stats(const EnsembleSeries& p_left, const RegionSpec& regions) {
  p_left.validate();
  std::vector<TrajectoryDecision> decisions;
  for (std::size_t i = 0; i < p_left.trajectories(); ++i) {
    TrajectoryDecision d{i, Decision::Undecided, 0.0};
    for (std::size_t k = 0; k < p_left.times.size(); ++k) {
      const Decision c = classify(p_left.values[i][k], regions.epsilon);
      if (c != Decision::Undecided) {
        d = {i, c, p_left.times[k]};
        break;
      }
    }
    decisions.push_back(d);
  }
  return collapse_time_stats(decisions);
}

/// Number of trajectories that, after first reaching an epsilon band,
/// later come back inside (2 epsilon, 1 - 2 epsilon).
inline std::size_t count_reentries(const EnsembleSeries& p_left, double epsilon) {
  p_left.validate();
  std::size_t violations = 0;
  for (const auto& v : p_left.values) {
    bool decided = false;
    for (double p : v) {
      if (!decided) {
        decided = classify(p, epsilon) != Decision::Undecided;
      } else if (p > 2.0 * epsilon && p < 1.0 - 2.0 * epsilon) {
        ++violations;
        break;
      }
    }
  }
  return violations;
}

}  // namespace csl
