#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "csl/hamiltonian.hpp"
#include "csl/rng.hpp"
#include "csl/series.hpp"

namespace csl {

/// Off-diagonal decay rate for two positions a distance d apart:
///   Γ(d) = λ_dim (m/m0)² (1 - exp(-d²/4r_C²)).
inline double decay_rate(double d, const CslParams& params) {
  require(d >= 0.0, ErrorCode::InvalidArgument, "decay_rate: separation must be >= 0");
  const double ratio = params.m / params.m0;
  return params.lambda() * ratio * ratio * (1.0 - std::exp(-d * d / (4.0 * params.r_C * params.r_C)));
}

/// dE/dt = (dim λ_dim / 4) (hbar²/r_C²) (M/m0²). At dim = 3 this is the
/// usual 3λ/4 law; each dimension contributes one quarter.
inline double heating_rate(const CslParams& params, double M) {
  require(M > 0.0, ErrorCode::InvalidArgument, "heating_rate: mass must be positive");
  params.validate();
  return params.dim * params.lambda() / 4.0 * params.hbar * params.hbar / (params.r_C * params.r_C) * M /
         (params.m0 * params.m0);
}

/// Position-basis density matrix ρ(x_a, x_b), normalised as
/// sum_a ρ(x_a, x_a) dx = 1. The operator on l² is ρ dx.
class DensityMatrix {
 public:
  static constexpr double kHermiticityTol = 1e-12;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kPositivityTol = 1e-8;

  DensityMatrix(Grid1D grid, Eigen::MatrixXcd rho) : grid_(grid), rho_(std::move(rho)) {
    require(rho_.rows() == static_cast<Eigen::Index>(grid_.size()) && rho_.cols() == rho_.rows(),
            ErrorCode::GridMismatch, "DensityMatrix: matrix shape does not match the grid");
  }

  static DensityMatrix pure(const Wavefunction& psi) {
    const auto n = static_cast<Eigen::Index>(psi.size());
    Eigen::Map<const Eigen::VectorXcd> v(psi.amps().data(), n);
    return DensityMatrix(psi.grid(), v * v.adjoint());
  }

  const Grid1D& grid() const noexcept { return grid_; }
  const Eigen::MatrixXcd& elements() const noexcept { return rho_; }
  Eigen::MatrixXcd& mutable_elements() noexcept { return rho_; }
  std::size_t size() const noexcept { return grid_.size(); }

  double trace() const { return rho_.diagonal().real().sum() * grid_.dx(); }

  /// Tr ρ² with the dx measure.
  double purity() const { return rho_.squaredNorm() * grid_.dx() * grid_.dx(); }

  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

  /// Eigenvalues of the operator ρ dx, ascending.
  Eigen::VectorXd spectrum() const {
    const Eigen::MatrixXcd h = 0.5 * (rho_ + rho_.adjoint()) * grid_.dx();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  double min_eigenvalue() const { return spectrum().minCoeff(); }

  /// Hermiticity (relative to the largest element), unit trace and, when
  /// asked, numerical positivity.
  void validate(bool check_positivity = true) const {
    require(rho_.allFinite(), ErrorCode::NonFinite, "density matrix has non-finite entries");
    const double scale = std::max(1.0, rho_.cwiseAbs().maxCoeff());
    require(hermiticity_error() <= kHermiticityTol * scale, ErrorCode::InvalidArgument,
            "density matrix is not Hermitian");
    require(std::abs(trace() - 1.0) <= kTraceTol, ErrorCode::InvalidArgument,
            "density matrix trace " + std::to_string(trace()) + " differs from 1");
    if (check_positivity) {
      const double lo = min_eigenvalue();
      require(lo >= -kPositivityTol, ErrorCode::PositivityViolation,
              "density matrix eigenvalue " + std::to_string(lo) + " below -1e-8");
    }
  }

  /// <O> for a multiplication operator O(x).
  double expectation_diagonal(const std::vector<double>& o) const {
    double s = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) s += o[i] * rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    return s * grid_.dx();
  }

  /// sum_{a in [lb,le), b in [rb,re)} ρ_ab dx²: the coherence between two
  /// regions, α β* for a two-lobe pure state.
  cplx block_sum(std::size_t lb, std::size_t le, std::size_t rb, std::size_t re) const {
    const auto blk = rho_.block(static_cast<Eigen::Index>(lb), static_cast<Eigen::Index>(rb),
                                static_cast<Eigen::Index>(le - lb), static_cast<Eigen::Index>(re - rb));
    return blk.sum() * grid_.dx() * grid_.dx();
  }

 private:
  Grid1D grid_;
  Eigen::MatrixXcd rho_;
};

/// ½ Σ |eig(ρ₁ - ρ₂)| of the dx-weighted operators.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_grid(a.grid(), b.grid(), "trace_distance");
  const Eigen::MatrixXcd diff = a.elements() - b.elements();
  const Eigen::MatrixXcd h = 0.5 * (diff + diff.adjoint()) * a.grid().dx();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// <H> = Tr(H ρ) dx, applying H to each column of ρ.
inline double energy(const Hamiltonian& H, const DensityMatrix& rho) {
  require_same_grid(H.grid, rho.grid(), "energy");
  const auto n = static_cast<Eigen::Index>(rho.size());
  detail::ComplexFft fft(rho.size());
  double e = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const std::span<const cplx> col(rho.elements().col(c).data(), rho.size());
    const auto h_col = apply_hamiltonian(H, col, &fft);
    e += h_col[static_cast<std::size_t>(c)].real();
  }
  return e * rho.grid().dx();
}

struct MasterOptions {
  bool check_positivity = true;
};

/// Integrates dρ/dt = -(i/hbar)[H, ρ] - Γ(x_a - x_b) ρ.
///
/// The collapse generator acts element-wise in the position basis, so with
/// H = 0 the step is the exact exponential. With a kinetic term the
/// evolution is Strang-split around the exact kinetic conjugation.
inline DensityMatrix evolve_master(const DensityMatrix& rho0, const Hamiltonian& H, const CslParams& params,
                                   double dt, std::size_t n_steps, MasterOptions options = {}) {
  require_same_grid(rho0.grid(), H.grid, "evolve_master");
  require(dt > 0.0, ErrorCode::InvalidArgument, "evolve_master: dt must be positive");
  params.validate();
  const Grid1D& grid = rho0.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());

  // Element-wise propagator over time tau: damping times potential phase.
  auto elementwise = [&](double tau) {
    Eigen::MatrixXcd f(n, n);
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index a = 0; a < n; ++a) {
        const double d = std::abs(grid.min_image(static_cast<double>(a - b) * grid.dx()));
        double phase = 0.0;
        if (H.has_potential())
          phase = -(H.potential[static_cast<std::size_t>(a)] - H.potential[static_cast<std::size_t>(b)]) * tau / H.hbar;
        f(a, b) = std::polar(std::exp(-decay_rate(d, params) * tau), phase);
      }
    return f;
  };

  DensityMatrix rho = rho0;
  Eigen::MatrixXcd& m = rho.mutable_elements();

  if (!H.has_kinetic()) {
    // Both factors commute: the whole interval is one exact exponential.
    if (n_steps > 0) m.array() *= elementwise(dt * static_cast<double>(n_steps)).array();
  } else {
    const Eigen::MatrixXcd factor = elementwise(dt);
    // rho <- U rho U†, U = exp(-i T tau / hbar).
    auto conjugate = [&](KineticPropagator& U) {
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index c = 0; c < n; ++c) U.apply(std::span<cplx>(m.col(c).data(), static_cast<std::size_t>(n)));
        m = m.adjoint().eval();
      }
      m = (0.5 * (m + m.adjoint())).eval();
    };
    KineticPropagator half(H, 0.5 * dt);
    KineticPropagator full(H, dt);
    if (n_steps > 0) {
      conjugate(half);
      for (std::size_t s = 0; s < n_steps; ++s) {
        m.array() *= factor.array();
        conjugate(s + 1 < n_steps ? full : half);
      }
    }
  }
  require(m.allFinite(), ErrorCode::NonFinite, "evolve_master produced non-finite entries");
  if (options.check_positivity) {
    const double lo = rho.min_eigenvalue();
    require(lo >= -DensityMatrix::kPositivityTol, ErrorCode::PositivityViolation,
            "evolve_master: eigenvalue " + std::to_string(lo) + " below -1e-8");
  }
  return rho;
}

/// Running mean of |psi><psi|; states must be added in a fixed order for
/// bit-reproducible output.
class DensityAccumulator {
 public:
  explicit DensityAccumulator(const Grid1D& grid)
      : grid_(grid), sum_(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()),
                                                 static_cast<Eigen::Index>(grid.size()))) {}

  void add(const Wavefunction& psi) {
    require_same_grid(grid_, psi.grid(), "DensityAccumulator");
    Eigen::Map<const Eigen::VectorXcd> v(psi.amps().data(), static_cast<Eigen::Index>(psi.size()));
    sum_.noalias() += v * v.adjoint();
    ++count_;
  }

  std::size_t count() const noexcept { return count_; }

  DensityMatrix result() const {
    require(count_ > 0, ErrorCode::InsufficientData, "no states accumulated");
    return DensityMatrix(grid_, sum_ / static_cast<double>(count_));
  }

 private:
  Grid1D grid_;
  Eigen::MatrixXcd sum_;
  std::size_t count_ = 0;
};

/// Mean over trajectories of |psi_i(t_k)><psi_i(t_k)|, where snapshots[i]
/// is trajectory i's snapshot list.
inline DensityMatrix ensemble_average(const std::vector<std::vector<Wavefunction>>& snapshots,
                                      std::size_t time_index) {
  require(snapshots.size() >= 2, ErrorCode::InsufficientData, "ensemble_average needs at least two trajectories");
  const std::size_t len = snapshots.front().size();
  for (const auto& s : snapshots)
    require(s.size() == len, ErrorCode::ScheduleMismatch, "trajectories have different snapshot schedules");
  require(time_index < len, ErrorCode::ScheduleMismatch, "time index beyond the snapshot schedule");
  DensityAccumulator acc(snapshots.front()[time_index].grid());
  for (const auto& s : snapshots) acc.add(s[time_index]);
  return acc.result();
}

inline DensityMatrix ensemble_average(const std::vector<TrajectoryRecord>& records, std::size_t time_index) {
  std::vector<std::vector<Wavefunction>> snaps;
  snaps.reserve(records.size());
  for (const auto& r : records) {
    if (!snaps.empty())
      require(r.times == records.front().times, ErrorCode::ScheduleMismatch, "records do not share a schedule");
    snaps.push_back(r.snapshots);
  }
  return ensemble_average(snaps, time_index);
}

struct HeatingFit {
  double slope = 0.0;
  double standard_error = 0.0;
  std::size_t trajectories = 0;
  std::vector<double> times;
  std::vector<double> mean_energy;
  std::vector<double> energy_se;  // standard error of the mean per time
};

/// Least-squares slope of the ensemble-mean energy against time, with a
/// bootstrap (resampling whole trajectories) standard error.
inline HeatingFit measure_heating(const EnsembleSeries& energies, std::size_t n_boot = 400,
                                  std::uint64_t boot_seed = 0x6865617469ull) {
  energies.validate();
  require(energies.trajectories() >= 100, ErrorCode::InsufficientData,
          "measure_heating needs at least 100 trajectories, got " + std::to_string(energies.trajectories()));
  require(energies.times.size() >= 2, ErrorCode::InsufficientData, "measure_heating needs at least two times");
  HeatingFit fit;
  fit.trajectories = energies.trajectories();
  fit.times = energies.times;
  fit.mean_energy = energies.mean();
  fit.energy_se.resize(energies.times.size());
  const double sqrt_n = std::sqrt(static_cast<double>(energies.trajectories()));
  for (std::size_t k = 0; k < energies.times.size(); ++k) fit.energy_se[k] = energies.stddev_at(k) / sqrt_n;
  fit.slope = least_squares_slope(energies.times, fit.mean_energy);

  Philox4x32 rng(boot_seed, 0);
  const std::size_t n = energies.trajectories();
  std::vector<double> mean(energies.times.size());
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t b = 0; b < n_boot; ++b) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& row = energies.values[static_cast<std::size_t>(rng() % n)];
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += row[k];
    }
    for (auto& v : mean) v /= static_cast<double>(n);
    const double s = least_squares_slope(energies.times, mean);
    s1 += s;
    s2 += s * s;
  }
  const double nb = static_cast<double>(n_boot);
  fit.standard_error = std::sqrt(std::max(0.0, (s2 - s1 * s1 / nb) / (nb - 1.0)));
  return fit;
}

inline HeatingFit measure_heating(const std::vector<TrajectoryRecord>& records) {
  return measure_heating(collect_series(records, "energy"));
}

}  // namespace csl
