#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <utility>

namespace csl::detail {

// FFTW's planner is not re-entrant; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans are always created with FFTW_ESTIMATE so that the chosen algorithm,
// and hence every output bit, does not depend on timing measurements.
class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    buf_ = fftw_alloc_complex(n_);
    const int len = static_cast<int>(n_);
    forward_ = fftw_plan_dft_1d(len, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(len, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;
  ComplexFft(ComplexFft&& o) noexcept { swap(o); }
  ComplexFft& operator=(ComplexFft&& o) noexcept {
    swap(o);
    return *this;
  }
  ~ComplexFft() { release(); }

  std::size_t size() const noexcept { return n_; }

  std::span<std::complex<double>> data() noexcept {
    return {reinterpret_cast<std::complex<double>*>(buf_), n_};
  }

  void forward() noexcept { fftw_execute(forward_); }
  /// Unnormalised inverse transform.
  void backward() noexcept { fftw_execute(backward_); }

 private:
  void swap(ComplexFft& o) noexcept {
    std::swap(n_, o.n_);
    std::swap(buf_, o.buf_);
    std::swap(forward_, o.forward_);
    std::swap(backward_, o.backward_);
  }
  void release() noexcept {
    if (!buf_) return;
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buf_);
    buf_ = nullptr;
  }

  std::size_t n_ = 0;
  fftw_complex* buf_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    real_ = fftw_alloc_real(n_);
    spec_ = fftw_alloc_complex(n_ / 2 + 1);
    const int len = static_cast<int>(n_);
    forward_ = fftw_plan_dft_r2c_1d(len, real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(len, spec_, real_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& o) noexcept { swap(o); }
  RealFft& operator=(RealFft&& o) noexcept {
    swap(o);
    return *this;
  }
  ~RealFft() { release(); }

  std::size_t size() const noexcept { return n_; }
  std::span<double> real() noexcept { return {real_, n_}; }
  std::span<std::complex<double>> spectrum() noexcept {
    return {reinterpret_cast<std::complex<double>*>(spec_), n_ / 2 + 1};
  }

  void forward() noexcept { fftw_execute(forward_); }
  /// Unnormalised inverse; destroys the spectrum buffer.
  void backward() noexcept { fftw_execute(backward_); }

 private:
  void swap(RealFft& o) noexcept {
    std::swap(n_, o.n_);
    std::swap(real_, o.real_);
    std::swap(spec_, o.spec_);
    std::swap(forward_, o.forward_);
    std::swap(backward_, o.backward_);
  }
  void release() noexcept {
    if (!real_) return;
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
    real_ = nullptr;
  }

  std::size_t n_ = 0;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace csl::detail
