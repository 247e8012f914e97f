#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "csl/fft.hpp"
#include "csl/grid.hpp"

namespace csl {

/// Smearing function g(x) = (2π r_C²)^(-dim/2) exp(-x²/2r_C²), sampled in
/// displacement order: entry k holds g at the minimum-image displacement
/// k*dx, so entry 0 is the centre and g(x_j - x_i) = kernel[(j - i) mod n].
/// For dim > 1 this is the radial profile only.
inline std::vector<double> gaussian_kernel(const Grid1D& grid, double r_C, int dim) {
  require(dim >= 1 && dim <= 3, ErrorCode::InvalidArgument, "gaussian_kernel: dim must be 1, 2 or 3");
  require(std::isfinite(r_C) && r_C >= 2.0 * grid.dx(), ErrorCode::KernelUnresolvable,
          "gaussian_kernel: r_C = " + std::to_string(r_C) + " is below 2*dx = " + std::to_string(2.0 * grid.dx()));
  const double norm = std::pow(2.0 * std::numbers::pi * r_C * r_C, -0.5 * dim);
  std::vector<double> g(grid.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double d = grid.offset(k);
    g[k] = norm * std::exp(-d * d / (2.0 * r_C * r_C));
  }
  return g;
}

/// Circular convolution against a fixed displacement-indexed kernel:
///   out_j = sum_i field_i * kernel[(j - i) mod n] * dx.
/// Holds the kernel spectrum and FFT buffers; one instance per thread.
class Convolver {
 public:
  Convolver(const Grid1D& grid, std::span<const double> kernel)
      : grid_(grid), rfft_(grid.size()), cfft_(grid.size()), kernel_spec_(grid.size() / 2 + 1),
        kernel_spec_full_(grid.size()) {
    require_size(grid, kernel.size(), "Convolver");
    const double n = static_cast<double>(grid.size());
    const double scale = grid.dx() / n;
    auto re = rfft_.real();
    std::copy(kernel.begin(), kernel.end(), re.begin());
    rfft_.forward();
    auto spec = rfft_.spectrum();
    for (std::size_t k = 0; k < spec.size(); ++k) kernel_spec_[k] = spec[k] * scale;

    auto buf = cfft_.data();
    for (std::size_t k = 0; k < kernel.size(); ++k) buf[k] = kernel[k];
    cfft_.forward();
    for (std::size_t k = 0; k < buf.size(); ++k) kernel_spec_full_[k] = buf[k] * scale;
  }

  const Grid1D& grid() const noexcept { return grid_; }

  void apply(std::span<const double> field, std::span<double> out) {
    require_size(grid_, field.size(), "convolve");
    require_size(grid_, out.size(), "convolve");
    auto re = rfft_.real();
    std::copy(field.begin(), field.end(), re.begin());
    rfft_.forward();
    auto spec = rfft_.spectrum();
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= kernel_spec_[k];
    rfft_.backward();
    std::copy(re.begin(), re.end(), out.begin());
  }

  void apply(std::span<const std::complex<double>> field, std::span<std::complex<double>> out) {
    require_size(grid_, field.size(), "convolve");
    require_size(grid_, out.size(), "convolve");
    auto buf = cfft_.data();
    std::copy(field.begin(), field.end(), buf.begin());
    cfft_.forward();
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= kernel_spec_full_[k];
    cfft_.backward();
    std::copy(buf.begin(), buf.end(), out.begin());
  }

 private:
  Grid1D grid_;
  detail::RealFft rfft_;
  detail::ComplexFft cfft_;
  std::vector<std::complex<double>> kernel_spec_;
  std::vector<std::complex<double>> kernel_spec_full_;
};

template <class T>
std::vector<T> convolve(const Grid1D& grid, std::span<const T> field, std::span<const double> kernel) {
  require_size(grid, field.size(), "convolve");
  Convolver conv(grid, kernel);
  std::vector<T> out(field.size());
  conv.apply(field, std::span<T>(out));
  return out;
}

inline std::vector<double> convolve(const Grid1D& grid, const std::vector<double>& field,
                                    const std::vector<double>& kernel) {
  return convolve<double>(grid, std::span<const double>(field), std::span<const double>(kernel));
}

inline std::vector<std::complex<double>> convolve(const Grid1D& grid,
                                                  const std::vector<std::complex<double>>& field,
                                                  const std::vector<double>& kernel) {
  return convolve<std::complex<double>>(grid, std::span<const std::complex<double>>(field),
                                        std::span<const double>(kernel));
}

/// Lattice overlap K(d) = sum_i g(x_i) g(x_i - d) dx, displacement-indexed.
/// This is the noise correlation function of the smeared Wiener field, so
/// it (not its continuum limit) is what the drift term must use.
inline std::vector<double> kernel_overlap(const Grid1D& grid, const std::vector<double>& kernel) {
  // g is even, so g(x - d) summed against g(x) is a plain convolution.
  return convolve(grid, kernel, kernel);
}

}  // namespace csl
