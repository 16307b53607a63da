#pragma once

// Semidirect product Lie-Poisson space H (+) L1(H) at finite dimension n:
// a Hilbert vector v paired with a trace-class slot rho, dual to the semidirect
// product of gl(n) acting naturally on the abelian algebra C^n.
//
//   {f, g}(v, rho) = Re[ tr(rho [f_rho, g_rho]) + <v | f_rho g_v - g_rho f_v> ]
//   v-dot   = -(h_rho)^* v
//   rho-dot = [h_rho, rho] + |h_v><v|
//
// <u|w> = u^H w. Derivatives are real-Frechet:
//   df[dv, drho] = Re( <dv | f_v> + tr(drho f_rho) ).

#include <lpext/poisson.hpp>

#include <random>
#include <string>
#include <vector>
#include <utility>

namespace lpext::qm {

using CMat = Mat<cdouble>;
using CVec = Vec<cdouble>;

struct QState {
  CVec v;
  CMat rho;

  Eigen::Index n() const { return v.size(); }

  void check() const {
    require(rho.rows() == v.size() && rho.cols() == v.size(), ErrorKind::invalid_input,
            "rho must be n x n for a vector of length n");
  }

  template <class Rng>
  static QState random(Eigen::Index n, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    QState s{CVec(n), CMat(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) s.v(i) = cdouble(nd(rng), nd(rng));
    for (Eigen::Index i = 0; i < s.rho.size(); ++i) s.rho(i) = cdouble(nd(rng), nd(rng));
    return s;
  }
};

struct QGradient {
  CVec d_v;
  CMat d_rho;
};

/// Coordinates in the generic semidirect layout: (conj(v), rho row-major).
/// Conjugating v turns Re<v|w> into the bilinear Re(c^T w).
inline CVec to_coords(const QState& s) {
  s.check();
  CVec c(s.n() + s.n() * s.n());
  c << s.v.conjugate(), flatten<cdouble>(s.rho);
  return c;
}

inline QState state_from_coords(const CVec& c, Eigen::Index n) {
  require(c.size() == n + n * n, ErrorKind::invalid_input, "qm coordinate length mismatch");
  return {c.head(n).conjugate(), unflatten<cdouble>(c.tail(n * n), n, n)};
}

inline CVec gradient_to_coords(const QGradient& g) {
  const Eigen::Index n = g.d_v.size();
  CVec c(n + n * n);
  c << g.d_v, flatten<cdouble>(g.d_rho);
  return c;
}

inline QGradient gradient_from_coords(const CVec& c, Eigen::Index n) {
  return {c.head(n), unflatten<cdouble>(c.tail(n * n), n, n)};
}

using QFunction = SmoothFunction<cdouble>;

inline QFunction make_function(Eigen::Index n, std::function<double(const QState&)> eval,
                               std::function<QGradient(const QState&)> grad = nullptr) {
  QFunction f;
  f.eval = [n, eval](const CVec& c) { return eval(state_from_coords(c, n)); };
  if (grad) f.grad = [n, grad](const CVec& c) { return gradient_to_coords(grad(state_from_coords(c, n))); };
  return f;
}

inline DualPairing<cdouble> state_pairing(Eigen::Index n) {
  return direct_sum(DualPairing<cdouble>::identity(n), trace_pairing<cdouble>(n));
}

inline QGradient qm_gradient(const QFunction& f, const QState& s) {
  return gradient_from_coords(functional_derivative(f, to_coords(s), state_pairing(s.n())), s.n());
}

inline double qm_bracket(const QFunction& f, const QFunction& g, const QState& s) {
  const QGradient df = qm_gradient(f, s), dg = qm_gradient(g, s);
  const cdouble rho_term = (s.rho * (df.d_rho * dg.d_rho - dg.d_rho * df.d_rho)).trace();
  const cdouble v_term = s.v.dot(df.d_rho * dg.d_v - dg.d_rho * df.d_v);  // v^H (...)
  return (rho_term + v_term).real();
}

/// Right-hand side of Hamilton's equations. The rank-one term is |h_v><v|, the
/// form obtained from the bracket.
inline QState qm_hamilton_rhs(const QFunction& h, const QState& s) {
  const QGradient dh = qm_gradient(h, s);
  return {-dh.d_rho.adjoint() * s.v, dh.d_rho * s.rho - s.rho * dh.d_rho + dh.d_v * s.v.adjoint()};
}

/// df(s)[ds] for a tangent direction ds.
inline double qm_directional(const QFunction& f, const QState& s, const QState& ds) {
  const QGradient df = qm_gradient(f, s);
  return (ds.v.dot(df.d_v) + (ds.rho * df.d_rho).trace()).real();
}

/// Real and imaginary parts of every coordinate of v and rho, with analytic
/// gradients; a spanning family of linear observables.
inline std::vector<std::pair<std::string, QFunction>> coordinate_functions(Eigen::Index n) {
  std::vector<std::pair<std::string, QFunction>> out;
  const cdouble i(0, 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.emplace_back("re v" + std::to_string(k), make_function(
        n, [k](const QState& s) { return s.v(k).real(); },
        [n, k](const QState&) { return QGradient{CVec::Unit(n, k), CMat::Zero(n, n)}; }));
    out.emplace_back("im v" + std::to_string(k), make_function(
        n, [k](const QState& s) { return s.v(k).imag(); },
        [n, k, i](const QState&) { return QGradient{CVec(i * CVec::Unit(n, k)), CMat::Zero(n, n)}; }));
  }
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      CMat e = CMat::Zero(n, n);
      e(b, a) = 1.0;
      const std::string tag = std::to_string(a) + std::to_string(b);
      out.emplace_back("re rho" + tag, make_function(
          n, [a, b](const QState& s) { return s.rho(a, b).real(); },
          [n, e](const QState&) { return QGradient{CVec::Zero(n), e}; }));
      out.emplace_back("im rho" + tag, make_function(
          n, [a, b](const QState& s) { return s.rho(a, b).imag(); },
          [n, e, i](const QState&) { return QGradient{CVec::Zero(n), CMat(-i * e)}; }));
    }
  return out;
}

/// max over coordinate observables f of |df(s)[rhs] - {f, h}(s)|.
inline double rhs_consistency(const QFunction& h, const QState& s) {
  const QState rhs = qm_hamilton_rhs(h, s);
  double r = 0.0;
  for (const auto& [name, f] : coordinate_functions(s.n()))
    r = std::max(r, std::abs(qm_directional(f, s, rhs) - qm_bracket(f, h, s)));
  return r;
}

/// Semidirect data: n = C^n abelian (identity pairing), h = gl(n) (trace
/// pairing), phi(E_ab) = E_ab acting on C^n, omega = 0.
inline ExtensionSpec<cdouble> qm_spec(Eigen::Index n) {
  DerivationValuedMap<cdouble> phi(n, n * n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) phi.on_basis(gl_index(n, a, b))(a, b) = cdouble(1);
  return ExtensionSpec<cdouble>(abelian<cdouble>(n), gl<cdouble>(n), BilinearMapToN<cdouble>(n, n * n),
                                std::move(phi), DualPairing<cdouble>::identity(n), trace_pairing<cdouble>(n));
}

/// The element b of L1(H) with tr(b x) = <x v | w> for all x, using the inner
/// product linear in its first slot: <u | w> = w^H u. Here b = v w^H.
inline CMat representing_element(const CVec& v, const CVec& w) { return v * w.adjoint(); }

/// Max over the elementary basis of |tr(b E_ij) - <E_ij v | w>|.
inline double representing_residual(const CVec& v, const CVec& w) {
  const Eigen::Index n = v.size();
  const CMat b = representing_element(v, w);
  double r = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      CMat x = CMat::Zero(n, n);
      x(i, j) = 1.0;
      const cdouble functional = w.dot(x * v);  // w^H (x v)
      r = std::max(r, std::abs((b * x).trace() - functional));
    }
  return r;
}

// ---------------------------------------------------------------------------
// Built-in Hamiltonians

namespace hamiltonians {

/// h = Re tr(rho H0).
inline QFunction linear_rho(const CMat& h0) {
  const Eigen::Index n = h0.rows();
  return make_function(
      n, [h0](const QState& s) { return (s.rho * h0).trace().real(); },
      [h0, n](const QState&) { return QGradient{CVec::Zero(n), h0}; });
}

/// h = 1/2 <v | A v>, A hermitian.
inline QFunction quadratic_v(const CMat& a) {
  const Eigen::Index n = a.rows();
  require(max_abs(CMat(a - a.adjoint())) < tol::construction, ErrorKind::invalid_input, "A must be hermitian");
  return make_function(
      n, [a](const QState& s) { return 0.5 * s.v.dot(a * s.v).real(); },
      [a, n](const QState& s) { return QGradient{a * s.v, CMat::Zero(n, n)}; });
}

/// h = Re tr(rho H0) + 1/2 <v | A v> + lambda Re <v | rho v>.
inline QFunction coupled(const CMat& h0, const CMat& a, double lambda) {
  const Eigen::Index n = h0.rows();
  require(a.rows() == n, ErrorKind::invalid_input, "H0 and A must have the same size");
  require(max_abs(CMat(a - a.adjoint())) < tol::construction, ErrorKind::invalid_input, "A must be hermitian");
  return make_function(
      n,
      [h0, a, lambda](const QState& s) {
        return (s.rho * h0).trace().real() + 0.5 * s.v.dot(a * s.v).real() + lambda * s.v.dot(s.rho * s.v).real();
      },
      [h0, a, lambda](const QState& s) {
        return QGradient{a * s.v + lambda * (s.rho + s.rho.adjoint()) * s.v, h0 + lambda * s.v * s.v.adjoint()};
      });
}

}  // namespace hamiltonians

}  // namespace lpext::qm
