#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csl/hamiltonian.hpp"
#include "csl/kernel.hpp"
#include "csl/regions.hpp"
#include "csl/rng.hpp"

namespace csl {

/// Per-site Wiener increments for one step: i.i.d. N(0, dt/dx), the lattice
/// form of a delta-correlated field with E[dW(x)dW(x')] = δ(x - x') dt.
struct NoiseField {
  Grid1D grid;
  std::vector<double> dW;
};

inline void fill_noise(std::span<double> dW, double dt, double dx, NormalStream& rng) {
  const double sd = std::sqrt(dt / dx);
  for (auto& w : dW) w = sd * rng();
}

inline NoiseField sample_noise(const Grid1D& grid, double dt, NormalStream& rng) {
  require(dt > 0.0, ErrorCode::InvalidArgument, "sample_noise: dt must be positive");
  NoiseField noise{grid, std::vector<double>(grid.size())};
  fill_noise(noise.dW, dt, grid.dx(), rng);
  return noise;
}

struct NoisePotential {
  std::vector<double> field;  // A(q)
  double expectation = 0.0;   // <A> in the current state
};

/// A(q) = (sqrt(gamma)/m0) m sum_i g(q - x_i) dW_i dx and its expectation.
/// The collapse noise acts on psi as multiplication by A(q) - <A>.
inline NoisePotential smeared_noise_potential(const Wavefunction& psi, const NoiseField& noise,
                                              const std::vector<double>& kernel, const CslParams& params) {
  require_same_grid(psi.grid(), noise.grid, "smeared_noise_potential");
  require_size(psi.grid(), noise.dW.size(), "smeared_noise_potential");
  require_size(psi.grid(), kernel.size(), "smeared_noise_potential");
  NoisePotential out;
  out.field = convolve(psi.grid(), noise.dW, kernel);
  const double c = params.noise_coupling();
  double mean = 0.0;
  for (std::size_t i = 0; i < out.field.size(); ++i) {
    out.field[i] *= c;
    mean += std::norm(psi[i]) * out.field[i];
  }
  out.expectation = mean * psi.grid().dx();
  return out;
}

namespace detail {

// D(q) = c [K(0) - 2 (K*rho)(q) + sum rho (K*rho) dx], given K*rho already.
inline void assemble_drift(std::span<const double> rho, std::span<const double> k_rho, double k0, double coeff,
                           double dx, std::span<double> out) {
  double mixed = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) mixed += rho[i] * k_rho[i];
  mixed *= dx;
  for (std::size_t i = 0; i < rho.size(); ++i) out[i] = std::max(0.0, coeff * (k0 - 2.0 * k_rho[i] + mixed));
}

}  // namespace detail

/// D(q) = (gamma m²/2m0²) sum_x [g(q - x) - gbar(x)]² dx with
/// gbar(x) = sum_q' |psi(q')|² g(q' - x) dx, evaluated through the lattice
/// overlap K = g*g. Non-negative by construction; round-off below zero is
/// clipped.
inline std::vector<double> collapse_drift_potential(const Wavefunction& psi, const std::vector<double>& kernel,
                                                    const CslParams& params) {
  const Grid1D& grid = psi.grid();
  require_size(grid, kernel.size(), "collapse_drift_potential");
  const auto overlap = kernel_overlap(grid, kernel);
  const auto rho = psi.density();
  const auto k_rho = convolve(grid, rho, overlap);
  std::vector<double> d(grid.size());
  const double coeff = params.gamma * params.m * params.m / (2.0 * params.m0 * params.m0);
  detail::assemble_drift(rho, k_rho, overlap[0], coeff, grid.dx(), d);
  return d;
}

/// Strang: half kinetic step, collapse (and potential phase) in position
/// space, half kinetic step. Explicit: one Euler-Maruyama update with H
/// applied directly.
enum class StepScheme { Strang, Explicit };

inline const char* to_string(StepScheme s) { return s == StepScheme::Strang ? "strang" : "explicit"; }

struct StepOptions {
  StepScheme scheme = StepScheme::Strang;
  double max_norm_drift = 1e-2;
};

/// Euler-Maruyama integrator for the single-particle collapse equation
///   dpsi = [-(i/hbar) H dt + (A - <A>) - D dt] psi
/// with explicit renormalisation after every step. Caches kernels, FFT
/// plans and scratch space, so an instance belongs to a single thread.
class CslIntegrator {
 public:
  CslIntegrator(const Hamiltonian& H, const CslParams& params, double dt, StepOptions options = {})
      : H_(H), params_(params), dt_(dt), options_(options) {
    params_.validate();
    require(params_.dim == 1, ErrorCode::InvalidArgument, "trajectory dynamics run on a 1D lattice (params.dim = 1)");
    require(dt > 0.0 && std::isfinite(dt), ErrorCode::InvalidArgument, "dt must be positive");
    const Grid1D& grid = H_.grid;
    const std::size_t n = grid.size();
    collapse_ = params_.gamma > 0.0;
    if (collapse_) {
      kernel_ = gaussian_kernel(grid, params_.r_C, 1);
      overlap_ = kernel_overlap(grid, kernel_);
      noise_conv_.emplace(grid, kernel_);
      drift_conv_.emplace(grid, overlap_);
      drift_coeff_ = params_.gamma * params_.m * params_.m / (2.0 * params_.m0 * params_.m0);
    }
    if (H_.has_kinetic()) {
      if (options_.scheme == StepScheme::Strang)
        half_kinetic_.emplace(H_, 0.5 * dt_);
      else
        fft_.emplace(n);
    }
    if (H_.has_potential() && options_.scheme == StepScheme::Strang) {
      potential_phase_.resize(n);
      for (std::size_t i = 0; i < n; ++i) potential_phase_[i] = std::polar(1.0, -H_.potential[i] * dt_ / H_.hbar);
    }
    dW_.resize(n);
    a_.resize(n);
    rho_.resize(n);
    k_rho_.resize(n);
    d_.resize(n);
  }

  const Grid1D& grid() const noexcept { return H_.grid; }
  double dt() const noexcept { return dt_; }
  const Hamiltonian& hamiltonian() const noexcept { return H_; }
  const CslParams& params() const noexcept { return params_; }

  /// Draws fresh increments from rng and advances psi by one step.
  /// Returns the pre-renormalisation drift |‖psi'‖ - 1|.
  double step(Wavefunction& psi, NormalStream& rng) {
    if (collapse_) fill_noise(dW_, dt_, grid().dx(), rng);
    return advance(psi);
  }

  /// Same with caller-provided increments.
  double step(Wavefunction& psi, std::span<const double> dW) {
    require_size(grid(), dW.size(), "csl_step");
    std::copy(dW.begin(), dW.end(), dW_.begin());
    return advance(psi);
  }

 private:
  double advance(Wavefunction& psi) {
    require_same_grid(grid(), psi.grid(), "csl_step");
    auto& amps = psi.mutable_amps();
    const std::span<cplx> a(amps);
    if (options_.scheme == StepScheme::Strang) {
      if (half_kinetic_) half_kinetic_->apply(a);
      if (collapse_) apply_collapse(a);
      if (!potential_phase_.empty())
        for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= potential_phase_[i];
    } else {
      std::vector<cplx> h_psi;
      if (H_.has_kinetic() || H_.has_potential()) h_psi = apply_hamiltonian(H_, a, fft_ ? &*fft_ : nullptr);
      if (collapse_) apply_collapse(a);
      const cplx f(0.0, -dt_ / H_.hbar);
      for (std::size_t i = 0; i < h_psi.size(); ++i) amps[i] += f * h_psi[i];
    }
    const double norm = checked_norm(psi);
    if (options_.scheme == StepScheme::Strang && half_kinetic_) half_kinetic_->apply(a);
    psi.renormalize();
    return std::abs(norm - 1.0);
  }

  // psi <- psi + (A - <A>) psi - D psi dt, with A, <A>, D evaluated on the
  // incoming psi.
  void apply_collapse(std::span<cplx> psi) {
    const double dx = grid().dx();
    for (std::size_t i = 0; i < psi.size(); ++i) rho_[i] = std::norm(psi[i]);
    noise_conv_->apply(dW_, a_);
    const double c = params_.noise_coupling();
    double mean = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      a_[i] *= c;
      mean += rho_[i] * a_[i];
    }
    mean *= dx;
    drift_conv_->apply(rho_, k_rho_);
    detail::assemble_drift(rho_, k_rho_, overlap_[0], drift_coeff_, dx, d_);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= 1.0 + (a_[i] - mean) - d_[i] * dt_;
  }

  double checked_norm(const Wavefunction& psi) const {
    const double n2 = psi.norm_squared();
    require(std::isfinite(n2), ErrorCode::NonFinite, "state became non-finite");
    const double n = std::sqrt(n2);
    require(std::abs(n - 1.0) <= options_.max_norm_drift, ErrorCode::StepTooLarge,
            "pre-renormalisation norm drift " + std::to_string(std::abs(n - 1.0)) + " exceeds " +
                std::to_string(options_.max_norm_drift) + "; reduce dt");
    return n;
  }

  Hamiltonian H_;
  CslParams params_;
  double dt_;
  StepOptions options_;
  bool collapse_ = false;
  double drift_coeff_ = 0.0;
  std::vector<double> kernel_, overlap_;
  std::optional<Convolver> noise_conv_, drift_conv_;
  std::optional<KineticPropagator> half_kinetic_;
  std::optional<detail::ComplexFft> fft_;
  std::vector<cplx> potential_phase_;
  std::vector<double> dW_, a_, rho_, k_rho_, d_;
};

/// One integrator step on a copy of psi.
inline Wavefunction csl_step(const Wavefunction& psi, const Hamiltonian& H, const CslParams& params,
                             const NoiseField& noise, double dt, StepOptions options = {}) {
  require_same_grid(psi.grid(), noise.grid, "csl_step");
  CslIntegrator integrator(H, params, dt, options);
  Wavefunction out = psi;
  integrator.step(out, noise.dW);
  return out;
}

enum class Observable { Norm, PositionMean, PositionVariance, Energy, RegionProbabilities };

inline const char* to_string(Observable o) {
  switch (o) {
    case Observable::Norm: return "norm";
    case Observable::PositionMean: return "position_mean";
    case Observable::PositionVariance: return "position_variance";
    case Observable::Energy: return "energy";
    case Observable::RegionProbabilities: return "region_probabilities";
  }
  return "?";
}

struct TrajectoryConfig {
  double dt = 1e-3;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t snapshot_stride = 1;
  std::vector<Observable> observables{Observable::Norm};
  std::optional<RegionSpec> regions;  // required for RegionProbabilities
  bool keep_snapshots = false;
  StepOptions step{};

  void validate(const Grid1D& grid) const {
    require(dt > 0.0 && std::isfinite(dt), ErrorCode::InvalidArgument, "TrajectoryConfig: dt must be positive");
    require(snapshot_stride >= 1, ErrorCode::InvalidArgument, "TrajectoryConfig: snapshot_stride must be >= 1");
    for (auto o : observables)
      if (o == Observable::RegionProbabilities) {
        require(regions.has_value(), ErrorCode::InvalidArgument,
                "TrajectoryConfig: region probabilities requested without regions");
        regions->validate(grid);
      }
  }
};

/// Observables sampled on the schedule t = k dt for k a multiple of the
/// snapshot stride, plus the final step.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> series;  // one per column
  std::vector<Wavefunction> snapshots;
  std::optional<Wavefunction> final_state;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  const std::vector<double>& column(std::string_view name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (columns[c] == name) return series[c];
    throw Error(ErrorCode::InvalidArgument, "trajectory record has no column '" + std::string(name) + "'");
  }
  bool has_column(std::string_view name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  }
};

namespace detail {

inline std::vector<std::string> column_names(const std::vector<Observable>& obs) {
  std::vector<std::string> cols;
  for (auto o : obs) {
    if (o == Observable::RegionProbabilities) {
      cols.emplace_back("p_left");
      cols.emplace_back("p_right");
    } else {
      cols.emplace_back(to_string(o));
    }
  }
  return cols;
}

}  // namespace detail

/// Integrates one trajectory. The result is a deterministic function of
/// (psi0, H, params, config); the noise comes from stream
/// (config.seed, config.stream).
inline TrajectoryRecord run_trajectory(const Wavefunction& psi0, const Hamiltonian& H, const CslParams& params,
                                       const TrajectoryConfig& config) {
  require_same_grid(psi0.grid(), H.grid, "run_trajectory");
  config.validate(psi0.grid());
  CslIntegrator integrator(H, params, config.dt, config.step);
  NormalStream rng(config.seed, config.stream);
  detail::ComplexFft energy_fft(psi0.size());

  TrajectoryRecord rec;
  rec.seed = config.seed;
  rec.stream = config.stream;
  rec.columns = detail::column_names(config.observables);
  rec.series.resize(rec.columns.size());

  Wavefunction psi = psi0;
  auto sample = [&](std::size_t k) {
    rec.times.push_back(static_cast<double>(k) * config.dt);
    std::size_t c = 0;
    for (auto o : config.observables) {
      switch (o) {
        case Observable::Norm: rec.series[c++].push_back(std::sqrt(psi.norm_squared())); break;
        case Observable::PositionMean: rec.series[c++].push_back(psi.position_mean()); break;
        case Observable::PositionVariance: rec.series[c++].push_back(psi.position_variance()); break;
        case Observable::Energy: rec.series[c++].push_back(energy(H, psi, &energy_fft)); break;
        case Observable::RegionProbabilities:
          rec.series[c++].push_back(left_probability(psi, *config.regions));
          rec.series[c++].push_back(right_probability(psi, *config.regions));
          break;
      }
    }
    if (config.keep_snapshots) rec.snapshots.push_back(psi);
  };

  sample(0);
  for (std::size_t k = 1; k <= config.n_steps; ++k) {
    try {
      integrator.step(psi, rng);
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(k) + ": " + e.detail());
    }
    if (k % config.snapshot_stride == 0 || k == config.n_steps) sample(k);
  }
  rec.final_state = psi;
  return rec;
}

}  // namespace csl
