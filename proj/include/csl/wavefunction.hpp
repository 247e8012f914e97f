#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "csl/grid.hpp"

namespace csl {

using cplx = std::complex<double>;

/// Single-particle lattice state with sum_i |amps_i|^2 dx = 1.
class Wavefunction {
 public:
  /// Normalises the given amplitudes; an all-zero or non-finite input is
  /// rejected here rather than downstream.
  Wavefunction(Grid1D grid, std::vector<cplx> amps) : grid_(grid), amps_(std::move(amps)) {
    require_size(grid_, amps_.size(), "Wavefunction");
    const double n2 = raw_norm_squared();
    require(std::isfinite(n2), ErrorCode::NonFinite, "Wavefunction: non-finite amplitude");
    require(n2 > 0.0, ErrorCode::InvalidArgument, "Wavefunction: zero state cannot be normalised");
    scale(1.0 / std::sqrt(n2));
  }

  const Grid1D& grid() const noexcept { return grid_; }
  const std::vector<cplx>& amps() const noexcept { return amps_; }
  std::size_t size() const noexcept { return amps_.size(); }
  const cplx& operator[](std::size_t i) const noexcept { return amps_[i]; }

  double norm_squared() const noexcept { return raw_norm_squared(); }

  std::vector<double> density() const {
    std::vector<double> rho(amps_.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(amps_[i]);
    return rho;
  }

  /// Probability on the half-open site range [begin, end).
  double probability(std::size_t begin, std::size_t end) const noexcept {
    double s = 0.0;
    for (std::size_t i = begin; i < end && i < amps_.size(); ++i) s += std::norm(amps_[i]);
    return s * grid_.dx();
  }

  double position_mean() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) s += grid_.x(i) * std::norm(amps_[i]);
    return s * grid_.dx();
  }

  double position_variance() const noexcept {
    const double mu = position_mean();
    double s = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      const double d = grid_.x(i) - mu;
      s += d * d * std::norm(amps_[i]);
    }
    return s * grid_.dx();
  }

  /// <this|other> with the dx measure.
  cplx inner(const Wavefunction& other) const {
    require_same_grid(grid_, other.grid_, "inner");
    cplx s = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
    return s * grid_.dx();
  }

  // Raw access for in-place integrators. Callers must restore the norm.
  std::vector<cplx>& mutable_amps() noexcept { return amps_; }

  /// Rescales to unit norm and returns the norm (not squared) before.
  double renormalize() {
    const double n2 = raw_norm_squared();
    require(std::isfinite(n2), ErrorCode::NonFinite, "renormalize: non-finite amplitude");
    require(n2 > 0.0, ErrorCode::NonFinite, "renormalize: state collapsed to zero");
    const double n = std::sqrt(n2);
    scale(1.0 / n);
    return n;
  }

 private:
  double raw_norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s * grid_.dx();
  }
  void scale(double f) noexcept {
    for (auto& a : amps_) a *= f;
  }

  Grid1D grid_;
  std::vector<cplx> amps_;
};

/// Gaussian packet with |psi|^2 standard deviation sigma, centred at
/// `center` (periodic minimum image) and carrying mean wavenumber k0.
inline std::vector<cplx> gaussian_amplitudes(const Grid1D& grid, double center, double sigma, double k0 = 0.0) {
  require(sigma > 0.0, ErrorCode::InvalidArgument, "gaussian packet width must be positive");
  std::vector<cplx> a(grid.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = grid.min_image(grid.x(i) - center);
    a[i] = std::exp(-d * d / (4.0 * sigma * sigma)) * std::polar(1.0, k0 * d);
  }
  return a;
}

inline Wavefunction gaussian_packet(const Grid1D& grid, double center, double sigma, double k0 = 0.0) {
  return Wavefunction(grid, gaussian_amplitudes(grid, center, sigma, k0));
}

/// alpha|G_left> + beta|G_right>, each Gaussian normalised on its own
/// before superposing; the sum is normalised once more, which only matters
/// when the packets overlap.
inline Wavefunction two_gaussian_state(const Grid1D& grid, cplx alpha, cplx beta, double center_left,
                                       double center_right, double sigma) {
  const Wavefunction left = gaussian_packet(grid, center_left, sigma);
  const Wavefunction right = gaussian_packet(grid, center_right, sigma);
  std::vector<cplx> a(grid.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = alpha * left[i] + beta * right[i];
  return Wavefunction(grid, std::move(a));
}

inline Wavefunction position_eigenstate(const Grid1D& grid, std::size_t site) {
  require(site < grid.size(), ErrorCode::InvalidArgument, "position_eigenstate: site out of range");
  std::vector<cplx> a(grid.size(), 0.0);
  a[site] = 1.0;
  return Wavefunction(grid, std::move(a));
}

}  // namespace csl
