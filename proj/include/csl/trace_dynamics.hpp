#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "csl/error.hpp"
#include "csl/rng.hpp"

namespace csl::td {

using Matrix = Eigen::MatrixXcd;
using cplx = std::complex<double>;

/// One bosonic matrix degree of freedom: configuration q and momentum p.
struct MatrixDegree {
  std::string label;
  Matrix q;
  Matrix p;

  Eigen::Index dim() const { return q.rows(); }

  void validate() const {
    require(q.rows() >= 2 && q.rows() == q.cols() && p.rows() == q.rows() && p.cols() == q.cols(),
            ErrorCode::InvalidArgument, label + ": q and p must be equal N x N matrices with N >= 2");
    require(q.allFinite() && p.allFinite(), ErrorCode::NonFinite, label + ": non-finite entries");
  }
};

using System = std::vector<MatrixDegree>;

enum class Slot { Q, P };

struct VarRef {
  std::size_t dof = 0;
  Slot slot = Slot::Q;
  friend bool operator==(const VarRef&, const VarRef&) = default;
};

/// Index into the polynomial's table of constant matrices.
struct FixedRef {
  std::size_t index = 0;
};

using Factor = std::variant<VarRef, FixedRef>;

inline VarRef q(std::size_t r) { return {r, Slot::Q}; }
inline VarRef p(std::size_t r) { return {r, Slot::P}; }

struct Term {
  cplx coefficient{1.0, 0.0};
  std::vector<Factor> factors;  // ordered product; empty means identity
};

/// P = Tr(sum_t c_t F_t1 F_t2 ... F_tk).
class TracePolynomial {
 public:
  TracePolynomial& add(cplx coefficient, std::vector<Factor> factors) {
    terms_.push_back({coefficient, std::move(factors)});
    return *this;
  }

  /// Registers a constant matrix and returns a reference usable in factors.
  FixedRef add_fixed(Matrix m) {
    fixed_.push_back(std::move(m));
    return {fixed_.size() - 1};
  }

  const std::vector<Term>& terms() const noexcept { return terms_; }
  const std::vector<Matrix>& fixed() const noexcept { return fixed_; }

  /// True when no term mixes momenta with anything else, i.e.
  /// H = T(p) + V(q, fixed).
  bool separable() const {
    for (const auto& t : terms_) {
      bool has_p = false, has_other = false;
      for (const auto& f : t.factors) {
        const auto* v = std::get_if<VarRef>(&f);
        if (v && v->slot == Slot::P)
          has_p = true;
        else
          has_other = true;
      }
      if (has_p && has_other) return false;
    }
    return true;
  }

  /// Terms whose factors are all momenta (kinetic) or free of momenta.
  TracePolynomial part(bool momentum_terms) const {
    TracePolynomial out;
    out.fixed_ = fixed_;
    for (const auto& t : terms_) {
      bool has_p = false;
      for (const auto& f : t.factors)
        if (const auto* v = std::get_if<VarRef>(&f); v && v->slot == Slot::P) has_p = true;
      if (has_p == momentum_terms) out.terms_.push_back(t);
    }
    return out;
  }

 private:
  std::vector<Term> terms_;
  std::vector<Matrix> fixed_;
};

namespace detail {

inline const Matrix& resolve(const Factor& f, const TracePolynomial& P, const System& sys) {
  if (const auto* v = std::get_if<VarRef>(&f)) {
    require(v->dof < sys.size(), ErrorCode::UnboundVariable,
            "variable refers to degree of freedom " + std::to_string(v->dof) + " but only " +
                std::to_string(sys.size()) + " are bound");
    return v->slot == Slot::Q ? sys[v->dof].q : sys[v->dof].p;
  }
  const auto idx = std::get<FixedRef>(f).index;
  require(idx < P.fixed().size(), ErrorCode::UnboundVariable, "fixed matrix " + std::to_string(idx) + " is not defined");
  return P.fixed()[idx];
}

inline Eigen::Index system_dim(const TracePolynomial& P, const System& sys) {
  if (!sys.empty()) return sys.front().dim();
  require(!P.fixed().empty(), ErrorCode::UnboundVariable, "no matrices bound");
  return P.fixed().front().rows();
}

// Ordered product of factors[begin..end) with wrap-around, skipping `skip`.
inline Matrix cyclic_product(const std::vector<Factor>& factors, std::size_t start, std::size_t count,
                             const TracePolynomial& P, const System& sys, Eigen::Index n) {
  Matrix acc = Matrix::Identity(n, n);
  for (std::size_t j = 0; j < count; ++j) acc = acc * resolve(factors[(start + j) % factors.size()], P, sys);
  return acc;
}

}  // namespace detail

inline cplx trace_eval(const TracePolynomial& P, const System& sys) {
  const Eigen::Index n = detail::system_dim(P, sys);
  cplx total = 0.0;
  for (const auto& t : P.terms()) {
    const Matrix m = detail::cyclic_product(t.factors, 0, t.factors.size(), P, sys, n);
    total += t.coefficient * m.trace();
  }
  return total;
}

/// Trace derivative defined by δP = Tr(δv · ∂P/∂v). For every occurrence of
/// v at position j in a term F_1...F_k, cyclicity moves δv to the front and
/// contributes F_{j+1} ... F_k F_1 ... F_{j-1}.
inline Matrix trace_derivative(const TracePolynomial& P, VarRef var, const System& sys) {
  require(var.dof < sys.size(), ErrorCode::UnboundVariable,
          "derivative variable refers to degree of freedom " + std::to_string(var.dof));
  const Eigen::Index n = sys[var.dof].dim();
  Matrix g = Matrix::Zero(n, n);
  for (const auto& t : P.terms()) {
    const std::size_t k = t.factors.size();
    for (std::size_t j = 0; j < k; ++j) {
      const auto* v = std::get_if<VarRef>(&t.factors[j]);
      if (!v || !(*v == var)) continue;
      g += t.coefficient * detail::cyclic_product(t.factors, j + 1, k - 1, P, sys, n);
    }
  }
  return g;
}

/// Adler-Millard charge of the bosonic sector, sum_r [q_r, p_r].
inline Matrix adler_millard(const System& sys) {
  require(!sys.empty(), ErrorCode::InvalidArgument, "adler_millard: empty system");
  const Eigen::Index n = sys.front().dim();
  Matrix c = Matrix::Zero(n, n);
  for (const auto& d : sys) c += d.q * d.p - d.p * d.q;
  return c;
}

enum class FlowScheme { Auto, Leapfrog, Rk4 };

inline const char* to_string(FlowScheme s) {
  switch (s) {
    case FlowScheme::Auto: return "auto";
    case FlowScheme::Leapfrog: return "leapfrog";
    case FlowScheme::Rk4: return "rk4";
  }
  return "?";
}

namespace detail {

inline void require_finite(const System& sys, std::size_t step) {
  for (const auto& d : sys)
    require(d.q.allFinite() && d.p.allFinite(), ErrorCode::NonFinite,
            "hamilton_flow: non-finite state at step " + std::to_string(step));
}

// Time derivative (dq/dt, dp/dt) = (∂H/∂p, -∂H/∂q) for every dof.
inline System vector_field(const TracePolynomial& H, const System& sys) {
  System out = sys;
  for (std::size_t r = 0; r < sys.size(); ++r) {
    out[r].q = trace_derivative(H, p(r), sys);
    out[r].p = -trace_derivative(H, q(r), sys);
  }
  return out;
}

inline System axpy(const System& x, double a, const System& y) {
  System out = x;
  for (std::size_t r = 0; r < x.size(); ++r) {
    out[r].q += a * y[r].q;
    out[r].p += a * y[r].p;
  }
  return out;
}

}  // namespace detail

/// Evolves q̇_r = ∂H/∂p_r, ṗ_r = -∂H/∂q_r with trace derivatives.
/// Separable H uses kick-drift-kick leapfrog; anything else falls back to
/// classical RK4 (FlowScheme::Auto).
inline System hamilton_flow(System sys, const TracePolynomial& H, double dt, std::size_t n_steps,
                            FlowScheme scheme = FlowScheme::Auto) {
  require(!sys.empty(), ErrorCode::InvalidArgument, "hamilton_flow: empty system");
  for (const auto& d : sys) {
    d.validate();
    require(d.dim() == sys.front().dim(), ErrorCode::InvalidArgument, "hamilton_flow: dofs differ in dimension");
  }
  require(dt > 0.0 && std::isfinite(dt), ErrorCode::InvalidArgument, "hamilton_flow: dt must be positive");
  if (scheme == FlowScheme::Auto) scheme = H.separable() ? FlowScheme::Leapfrog : FlowScheme::Rk4;
  require(scheme != FlowScheme::Leapfrog || H.separable(), ErrorCode::InvalidArgument,
          "hamilton_flow: leapfrog needs a separable Hamiltonian");

  if (scheme == FlowScheme::Leapfrog) {
    const TracePolynomial kinetic = H.part(true);
    const TracePolynomial potential = H.part(false);
    auto kick = [&](double h) {
      std::vector<Matrix> force(sys.size());
      for (std::size_t r = 0; r < sys.size(); ++r) force[r] = trace_derivative(potential, q(r), sys);
      for (std::size_t r = 0; r < sys.size(); ++r) sys[r].p -= h * force[r];
    };
    auto drift = [&](double h) {
      std::vector<Matrix> vel(sys.size());
      for (std::size_t r = 0; r < sys.size(); ++r) vel[r] = trace_derivative(kinetic, p(r), sys);
      for (std::size_t r = 0; r < sys.size(); ++r) sys[r].q += h * vel[r];
    };
    for (std::size_t s = 0; s < n_steps; ++s) {
      kick(0.5 * dt);
      drift(dt);
      kick(0.5 * dt);
      detail::require_finite(sys, s + 1);
    }
    return sys;
  }

  for (std::size_t s = 0; s < n_steps; ++s) {
    const System k1 = detail::vector_field(H, sys);
    const System k2 = detail::vector_field(H, detail::axpy(sys, 0.5 * dt, k1));
    const System k3 = detail::vector_field(H, detail::axpy(sys, 0.5 * dt, k2));
    const System k4 = detail::vector_field(H, detail::axpy(sys, dt, k3));
    for (std::size_t r = 0; r < sys.size(); ++r) {
      sys[r].q += (dt / 6.0) * (k1[r].q + 2.0 * k2[r].q + 2.0 * k3[r].q + k4[r].q);
      sys[r].p += (dt / 6.0) * (k1[r].p + 2.0 * k2[r].p + 2.0 * k3[r].p + k4[r].p);
    }
    detail::require_finite(sys, s + 1);
  }
  return sys;
}

/// Sum over dofs of Tr(p²/2) + c_2 Tr(q²)/2 + c_4 Tr(q⁴)/4.
inline TracePolynomial quartic_hamiltonian(std::size_t n_dofs, double quadratic, double quartic) {
  TracePolynomial H;
  for (std::size_t r = 0; r < n_dofs; ++r) {
    H.add(0.5, {p(r), p(r)});
    if (quadratic != 0.0) H.add(0.5 * quadratic, {q(r), q(r)});
    if (quartic != 0.0) H.add(0.25 * quartic, {q(r), q(r), q(r), q(r)});
  }
  return H;
}

/// Non-commuting coordinate differentials (dt̂, dx̂, dŷ, dẑ).
struct MatrixFourVector {
  std::array<Matrix, 4> c;

  const Matrix& t() const { return c[0]; }
  const Matrix& x() const { return c[1]; }
  const Matrix& y() const { return c[2]; }
  const Matrix& z() const { return c[3]; }

  /// Σ ‖component‖_F², the natural magnitude of ds².
  double scale() const {
    double s = 0.0;
    for (const auto& m : c) s += m.squaredNorm();
    return s;
  }
};

enum class Axis { X = 1, Y = 2, Z = 3 };

/// ds² = Tr[dt̂² - dx̂² - dŷ² - dẑ²]; real for Hermitian components.
inline double trace_line_element(const MatrixFourVector& dX, double hermiticity_tol = 1e-12) {
  const Eigen::Index n = dX.c[0].rows();
  for (const auto& m : dX.c) {
    require(m.rows() == n && m.cols() == n, ErrorCode::InvalidArgument, "trace_line_element: components differ in size");
    const double err = (m - m.adjoint()).cwiseAbs().maxCoeff();
    require(err <= hermiticity_tol * std::max(1.0, m.cwiseAbs().maxCoeff()), ErrorCode::NonHermitian,
            "trace_line_element: component is not Hermitian");
  }
  cplx s = (dX.c[0] * dX.c[0]).trace();
  for (int k = 1; k < 4; ++k) s -= (dX.c[k] * dX.c[k]).trace();
  return s.real();
}

/// Boost with rapidity eta along one spatial axis; the other two spatial
/// components are untouched.
inline MatrixFourVector lorentz_boost(const MatrixFourVector& dX, double eta, Axis axis) {
  require(std::isfinite(eta), ErrorCode::InvalidArgument, "lorentz_boost: rapidity must be finite");
  const double ch = std::cosh(eta), sh = std::sinh(eta);
  const auto a = static_cast<std::size_t>(axis);
  MatrixFourVector out = dX;
  out.c[0] = ch * dX.c[0] - sh * dX.c[a];
  out.c[a] = -sh * dX.c[0] + ch * dX.c[a];
  return out;
}

/// Random matrix with i.i.d. standard complex Gaussian entries.
inline Matrix random_matrix(Eigen::Index n, NormalStream& rng) {
  Matrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = rng();
      m(i, j) = cplx(re, rng());
    }
  return m;
}

inline Matrix random_hermitian(Eigen::Index n, NormalStream& rng) {
  const Matrix a = random_matrix(n, rng);
  return 0.5 * (a + a.adjoint());
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix.
inline Matrix random_unitary(Eigen::Index n, NormalStream& rng) {
  const Matrix a = random_matrix(n, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix qm = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx d = r(i, i);
    qm.col(i) *= std::abs(d) > 0 ? d / std::abs(d) : cplx(1.0);
  }
  return qm;
}

}  // namespace csl::td
