#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "csl/fft.hpp"
#include "csl/wavefunction.hpp"

namespace csl {

enum class HamiltonianKind { Zero, Free, Harmonic, ExternalPotential };

/// Spectral: exact continuum dispersion hbar²k²/2m on the lattice momenta.
/// Stencil: 3-point finite difference, dispersion (hbar²/m dx²)(1 - cos k dx).
enum class KineticScheme { Spectral, Stencil };

inline const char* to_string(HamiltonianKind k) {
  switch (k) {
    case HamiltonianKind::Zero: return "zero";
    case HamiltonianKind::Free: return "free";
    case HamiltonianKind::Harmonic: return "harmonic";
    case HamiltonianKind::ExternalPotential: return "external-potential";
  }
  return "?";
}

inline const char* to_string(KineticScheme s) { return s == KineticScheme::Spectral ? "spectral" : "stencil"; }

/// H = T + V on a periodic lattice. The Zero kind has neither term and is
/// what the pure-collapse experiments run with.
struct Hamiltonian {
  HamiltonianKind kind = HamiltonianKind::Zero;
  KineticScheme kinetic = KineticScheme::Spectral;
  Grid1D grid;
  double mass = 1.0;
  double hbar = 1.0;
  double omega = 0.0;   // harmonic only
  double center = 0.0;  // harmonic only
  std::vector<double> potential{};  // per site, empty when V = 0

  bool has_kinetic() const noexcept { return kind != HamiltonianKind::Zero; }
  bool has_potential() const noexcept { return !potential.empty(); }

  static Hamiltonian zero(const Grid1D& grid) {
    return Hamiltonian{.kind = HamiltonianKind::Zero, .grid = grid};
  }

  static Hamiltonian free(const Grid1D& grid, double mass = 1.0, double hbar = 1.0,
                          KineticScheme scheme = KineticScheme::Spectral) {
    require(mass > 0.0 && hbar > 0.0, ErrorCode::InvalidArgument, "Hamiltonian: mass and hbar must be positive");
    return Hamiltonian{.kind = HamiltonianKind::Free, .kinetic = scheme, .grid = grid, .mass = mass, .hbar = hbar};
  }

  static Hamiltonian harmonic(const Grid1D& grid, double omega, double center = 0.0, double mass = 1.0,
                              double hbar = 1.0, KineticScheme scheme = KineticScheme::Spectral) {
    require(omega > 0.0, ErrorCode::InvalidArgument, "Hamiltonian: harmonic frequency must be positive");
    Hamiltonian h = free(grid, mass, hbar, scheme);
    h.kind = HamiltonianKind::Harmonic;
    h.omega = omega;
    h.center = center;
    h.potential.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = grid.min_image(grid.x(i) - center);
      h.potential[i] = 0.5 * mass * omega * omega * d * d;
    }
    return h;
  }

  static Hamiltonian external(const Grid1D& grid, std::vector<double> potential, double mass = 1.0,
                              double hbar = 1.0, KineticScheme scheme = KineticScheme::Spectral) {
    require_size(grid, potential.size(), "Hamiltonian::external");
    Hamiltonian h = free(grid, mass, hbar, scheme);
    h.kind = HamiltonianKind::ExternalPotential;
    h.potential = std::move(potential);
    return h;
  }

  /// Lattice wavenumber of FFT bin j; the Nyquist bin maps to -π/dx.
  static double wavenumber(const Grid1D& grid, std::size_t j) {
    const auto n = static_cast<long long>(grid.size());
    auto jj = static_cast<long long>(j);
    if (jj >= n / 2) jj -= n;
    return 2.0 * std::numbers::pi * static_cast<double>(jj) / grid.span();
  }

  /// Kinetic energy of a plane wave with wavenumber k under this scheme.
  double kinetic_symbol(double k) const {
    if (!has_kinetic()) return 0.0;
    if (kinetic == KineticScheme::Spectral) return hbar * hbar * k * k / (2.0 * mass);
    const double dx = grid.dx();
    return hbar * hbar / (mass * dx * dx) * (1.0 - std::cos(k * dx));
  }

  std::vector<double> kinetic_spectrum() const {
    std::vector<double> t(grid.size());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = kinetic_symbol(wavenumber(grid, j));
    return t;
  }
};

/// H psi on the lattice. Both kinetic schemes are evaluated through the FFT
/// with their exact lattice symbols; the stencil symbol is algebraically the
/// 3-point Laplacian.
inline std::vector<cplx> apply_hamiltonian(const Hamiltonian& H, std::span<const cplx> psi,
                                           detail::ComplexFft* fft = nullptr) {
  require_size(H.grid, psi.size(), "apply_hamiltonian");
  std::vector<cplx> out(psi.size(), 0.0);
  if (H.has_kinetic()) {
    std::optional<detail::ComplexFft> local;
    if (!fft) local.emplace(psi.size());
    detail::ComplexFft& f = fft ? *fft : *local;
    auto buf = f.data();
    std::copy(psi.begin(), psi.end(), buf.begin());
    f.forward();
    const double inv_n = 1.0 / static_cast<double>(psi.size());
    for (std::size_t j = 0; j < buf.size(); ++j)
      buf[j] *= H.kinetic_symbol(Hamiltonian::wavenumber(H.grid, j)) * inv_n;
    f.backward();
    std::copy(buf.begin(), buf.end(), out.begin());
  }
  if (H.has_potential())
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += H.potential[i] * psi[i];
  return out;
}

inline std::vector<cplx> apply_hamiltonian(const Hamiltonian& H, const Wavefunction& psi) {
  require_same_grid(H.grid, psi.grid(), "apply_hamiltonian");
  return apply_hamiltonian(H, std::span<const cplx>(psi.amps()));
}

/// <psi|H|psi> (real part; the imaginary part is round-off for Hermitian H).
inline double energy(const Hamiltonian& H, const Wavefunction& psi, detail::ComplexFft* fft = nullptr) {
  require_same_grid(H.grid, psi.grid(), "energy");
  const auto hpsi = apply_hamiltonian(H, std::span<const cplx>(psi.amps()), fft);
  double e = 0.0;
  for (std::size_t i = 0; i < hpsi.size(); ++i) e += (std::conj(psi[i]) * hpsi[i]).real();
  return e * psi.grid().dx();
}

/// Exact kinetic propagator exp(-i T tau / hbar), diagonal in momentum.
class KineticPropagator {
 public:
  KineticPropagator(const Hamiltonian& H, double tau) : fft_(H.grid.size()), phase_(H.grid.size()) {
    const double inv_n = 1.0 / static_cast<double>(H.grid.size());
    for (std::size_t j = 0; j < phase_.size(); ++j)
      phase_[j] = std::polar(inv_n, -H.kinetic_symbol(Hamiltonian::wavenumber(H.grid, j)) * tau / H.hbar);
  }

  void apply(std::span<cplx> psi) {
    auto buf = fft_.data();
    std::copy(psi.begin(), psi.end(), buf.begin());
    fft_.forward();
    for (std::size_t j = 0; j < buf.size(); ++j) buf[j] *= phase_[j];
    fft_.backward();
    std::copy(buf.begin(), buf.end(), psi.begin());
  }

 private:
  detail::ComplexFft fft_;
  std::vector<cplx> phase_;
};

}  // namespace csl
