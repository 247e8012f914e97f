#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "csl/error.hpp"

namespace csl {

// SI reference values used by the rate formulas and the exclusion module.
namespace si {
inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kNucleonMass = 1.67492749804e-27;  // kg (neutron)
}  // namespace si

/// Uniform periodic lattice x_i = x_min + i*dx, i = 0..n_sites-1.
class Grid1D {
 public:
  static constexpr std::size_t kMinSites = 8;

  Grid1D(std::size_t n_sites, double dx, double x_min)
      : n_sites_(n_sites), dx_(dx), x_min_(x_min) {
    require(n_sites >= kMinSites, ErrorCode::InvalidArgument,
            "grid needs at least 8 sites, got " + std::to_string(n_sites));
    require(std::isfinite(dx) && dx > 0.0, ErrorCode::InvalidArgument, "grid spacing must be positive");
    require(std::isfinite(x_min), ErrorCode::InvalidArgument, "x_min must be finite");
  }

  /// Grid of n sites centred on the origin: x_min = -n*dx/2.
  static Grid1D centered(std::size_t n_sites, double dx) {
    return Grid1D(n_sites, dx, -0.5 * static_cast<double>(n_sites) * dx);
  }

  std::size_t size() const noexcept { return n_sites_; }
  double dx() const noexcept { return dx_; }
  double x_min() const noexcept { return x_min_; }
  double span() const noexcept { return static_cast<double>(n_sites_) * dx_; }
  double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }

  /// Shortest signed periodic displacement equivalent to d.
  double min_image(double d) const noexcept {
    const double L = span();
    return d - L * std::nearbyint(d / L);
  }

  /// Displacement represented by offset index k in a displacement-indexed
  /// array (k and k - n are the same lattice vector).
  double offset(std::size_t k) const noexcept { return min_image(static_cast<double>(k) * dx_); }

  /// Nearest site to coordinate x (periodic).
  std::size_t site_of(double x) const noexcept {
    const auto n = static_cast<long long>(n_sites_);
    long long k = std::llround((x - x_min_) / dx_) % n;
    if (k < 0) k += n;
    return static_cast<std::size_t>(k);
  }

  friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
    return a.n_sites_ == b.n_sites_ && a.dx_ == b.dx_ && a.x_min_ == b.x_min_;
  }

 private:
  std::size_t n_sites_;
  double dx_;
  double x_min_;
};

inline void require_same_grid(const Grid1D& a, const Grid1D& b, const char* where) {
  require(a == b, ErrorCode::GridMismatch, std::string(where) + ": operands live on different grids");
}

inline void require_size(const Grid1D& g, std::size_t n, const char* where) {
  require(g.size() == n, ErrorCode::GridMismatch,
          std::string(where) + ": expected " + std::to_string(g.size()) + " sites, got " + std::to_string(n));
}

/// λ_d = γ / (4π r_C²)^(d/2). Reduces to the usual three-dimensional
/// decay constant at d = 3 and gives γ/(2√π r_C) in one dimension.
inline double lambda_from_gamma(double gamma, double r_C, int dim) {
  require(gamma >= 0.0 && r_C > 0.0, ErrorCode::InvalidArgument, "lambda_from_gamma: needs gamma >= 0, r_C > 0");
  require(dim >= 1 && dim <= 3, ErrorCode::InvalidArgument, "lambda_from_gamma: dim must be 1, 2 or 3");
  return gamma / std::pow(4.0 * std::numbers::pi * r_C * r_C, 0.5 * dim);
}

inline double gamma_from_lambda(double lambda, double r_C, int dim) {
  require(lambda >= 0.0 && r_C > 0.0, ErrorCode::InvalidArgument, "gamma_from_lambda: needs lambda >= 0, r_C > 0");
  require(dim >= 1 && dim <= 3, ErrorCode::InvalidArgument, "gamma_from_lambda: dim must be 1, 2 or 3");
  return lambda * std::pow(4.0 * std::numbers::pi * r_C * r_C, 0.5 * dim);
}

/// Collapse-model constants. Simulation units default to hbar = m0 = m = 1.
/// gamma may be zero (plain Schrodinger evolution); everything else must
/// be strictly positive.
struct CslParams {
  double gamma = 0.0;
  double r_C = 1.0;
  double m0 = 1.0;
  double m = 1.0;
  double hbar = 1.0;
  int dim = 1;

  static CslParams from_lambda(double lambda, double r_C, int dim = 1, double m = 1.0, double m0 = 1.0,
                               double hbar = 1.0) {
    CslParams p{gamma_from_lambda(lambda, r_C, dim), r_C, m0, m, hbar, dim};
    p.validate();
    return p;
  }

  void validate() const {
    require(std::isfinite(gamma) && gamma >= 0.0, ErrorCode::InvalidArgument, "params.gamma must be >= 0");
    require(std::isfinite(r_C) && r_C > 0.0, ErrorCode::InvalidArgument, "params.r_C must be > 0");
    require(std::isfinite(m0) && m0 > 0.0, ErrorCode::InvalidArgument, "params.m0 must be > 0");
    require(std::isfinite(m) && m > 0.0, ErrorCode::InvalidArgument, "params.m must be > 0");
    require(std::isfinite(hbar) && hbar > 0.0, ErrorCode::InvalidArgument, "params.hbar must be > 0");
    require(dim >= 1 && dim <= 3, ErrorCode::InvalidArgument, "params.dim must be 1, 2 or 3");
  }

  double lambda() const { return lambda_from_gamma(gamma, r_C, dim); }

  /// Coupling of the smeared noise potential, (sqrt(gamma)/m0) * m.
  double noise_coupling() const { return std::sqrt(gamma) * m / m0; }
};

}  // namespace csl
