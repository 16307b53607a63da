#pragma once

// Lie-Poisson brackets {f, g}(b) = <b, [Df(b), Dg(b)]> and Hamiltonian fields
// X_h(b) = -ad^*_{Dh(b)} b on predual models, the product structure, and the
// bracket and field of an extension n + h written through (omega, phi).
//
// Pairings are stored predual-first. Functions are real valued; on complex
// spaces the derivative Df(b) is the algebra element x with
//   df(b)[db] = Re <db, x>   for every predual direction db,
// so all bracket values are real parts.

#include <lpext/extension.hpp>

#include <functional>
#include <string>
#include <utility>

namespace lpext {

template <Scalar T>
struct SmoothFunction {
  std::function<double(const Vec<T>&)> eval;
  /// Analytic derivative as an algebra element; empty means finite differences.
  std::function<Vec<T>(const Vec<T>&)> grad;
  double fd_step = tol::fd_step;

  double operator()(const Vec<T>& b) const { return eval(b); }
};

namespace detail {

inline double checked(double v) {
  require(std::isfinite(v), ErrorKind::numeric_domain, "function evaluation is not finite");
  return v;
}

/// Coordinate gradient dF with df[db] = Re(dF^T db), by central differences.
template <Scalar T>
Vec<T> fd_coordinate_gradient(const std::function<double(const Vec<T>&)>& f, const Vec<T>& b, double step) {
  const double h = step * std::max(1.0, b.norm());
  Vec<T> d(b.size());
  Vec<T> p = b;
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    const T orig = p(k);
    p(k) = orig + T(h);
    const double fp = checked(f(p));
    p(k) = orig - T(h);
    const double fm = checked(f(p));
    const double dre = (fp - fm) / (2 * h);
    if constexpr (is_complex<T>::value) {
      p(k) = orig + T(0, h);
      const double gp = checked(f(p));
      p(k) = orig - T(0, h);
      const double gm = checked(f(p));
      d(k) = T(dre, -(gp - gm) / (2 * h));
    } else {
      d(k) = dre;
    }
    p(k) = orig;
  }
  return d;
}

}  // namespace detail

/// Df(b): the analytic gradient when supplied, otherwise central differences in
/// each (realified) predual coordinate followed by a gram solve.
template <Scalar T>
Vec<T> functional_derivative(const SmoothFunction<T>& f, const Vec<T>& b, const DualPairing<T>& pairing) {
  require(b.size() == pairing.dim(), ErrorKind::invalid_input, "point does not match pairing dimension");
  if (f.grad) {
    Vec<T> g = f.grad(b);
    require(g.size() == b.size(), ErrorKind::invalid_input, "analytic gradient has the wrong length");
    require(g.allFinite(), ErrorKind::numeric_domain, "analytic gradient is not finite");
    return g;
  }
  return pairing.solve(detail::fd_coordinate_gradient<T>(f.eval, b, f.fd_step));
}

template <Scalar T>
double lie_poisson_bracket(const SmoothFunction<T>& f, const SmoothFunction<T>& g, const Vec<T>& b,
                           const LiePoissonSpace<T>& space) {
  const Vec<T> x = functional_derivative(f, b, space.pairing);
  const Vec<T> y = functional_derivative(g, b, space.pairing);
  return real_part(space.pairing.pair(b, space.algebra.bracket(x, y)));
}

template <Scalar T>
Vec<T> hamiltonian_vector_field(const SmoothFunction<T>& h, const Vec<T>& b, const LiePoissonSpace<T>& space) {
  return -ad_star(space, functional_derivative(h, b, space.pairing), b);
}

/// Directional derivative df(b)[v] for a predual direction v.
template <Scalar T>
double directional_derivative(const SmoothFunction<T>& f, const Vec<T>& b, const Vec<T>& v,
                              const DualPairing<T>& pairing) {
  return real_part(pairing.pair(v, functional_derivative(f, b, pairing)));
}

// ---------------------------------------------------------------------------
// Function algebra

template <Scalar T>
SmoothFunction<T> operator*(const SmoothFunction<T>& f, const SmoothFunction<T>& g) {
  SmoothFunction<T> out;
  out.eval = [f, g](const Vec<T>& b) { return f.eval(b) * g.eval(b); };
  if (f.grad && g.grad)
    out.grad = [f, g](const Vec<T>& b) -> Vec<T> { return f.eval(b) * g.grad(b) + g.eval(b) * f.grad(b); };
  return out;
}

template <Scalar T>
SmoothFunction<T> operator+(const SmoothFunction<T>& f, const SmoothFunction<T>& g) {
  SmoothFunction<T> out;
  out.eval = [f, g](const Vec<T>& b) { return f.eval(b) + g.eval(b); };
  if (f.grad && g.grad) out.grad = [f, g](const Vec<T>& b) -> Vec<T> { return f.grad(b) + g.grad(b); };
  return out;
}

template <Scalar T>
SmoothFunction<T> scaled(const SmoothFunction<T>& f, double s) {
  SmoothFunction<T> out;
  out.eval = [f, s](const Vec<T>& b) { return s * f.eval(b); };
  if (f.grad) out.grad = [f, s](const Vec<T>& b) -> Vec<T> { return s * f.grad(b); };
  return out;
}

/// Same evaluator, analytic gradient dropped.
template <Scalar T>
SmoothFunction<T> without_gradient(SmoothFunction<T> f) {
  f.grad = nullptr;
  return f;
}

// ---------------------------------------------------------------------------
// Built-in functions addressable by name from configs

namespace functions {

/// f(b) = Re <b, x0>.
template <Scalar T>
SmoothFunction<T> linear(const Vec<T>& x0, const DualPairing<T>& pairing) {
  SmoothFunction<T> f;
  f.eval = [x0, pairing](const Vec<T>& b) { return real_part(pairing.pair(b, x0)); };
  f.grad = [x0](const Vec<T>&) { return x0; };
  return f;
}

/// f(b) = 1/2 Re(b^T A b).
template <Scalar T>
SmoothFunction<T> quadratic(const Mat<T>& a, const DualPairing<T>& pairing) {
  require(a.rows() == pairing.dim() && a.cols() == pairing.dim(), ErrorKind::invalid_input,
          "quadratic form dimension mismatch");
  const Mat<T> sym = (a + a.transpose()) / T(2);
  SmoothFunction<T> f;
  f.eval = [sym](const Vec<T>& b) { return real_part((b.transpose() * sym * b)(0, 0)) / 2; };
  f.grad = [sym, pairing](const Vec<T>& b) { return pairing.solve(sym * b); };
  return f;
}

/// f(B) = Re sum_k coeffs[k] tr(B^k) on row-major n x n matrix coordinates.
template <Scalar T>
SmoothFunction<T> trace_poly(const std::vector<T>& coeffs, Eigen::Index n, const DualPairing<T>& pairing) {
  require(pairing.dim() == n * n, ErrorKind::invalid_input, "trace_poly needs an n*n dimensional space");
  SmoothFunction<T> f;
  f.eval = [coeffs, n](const Vec<T>& b) {
    const Mat<T> m = unflatten<T>(b, n, n);
    Mat<T> p = Mat<T>::Identity(n, n);
    T s(0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      s += coeffs[k] * p.trace();
      p = p * m;
    }
    return real_part(s);
  };
  f.grad = [coeffs, n, pairing](const Vec<T>& b) {
    const Mat<T> m = unflatten<T>(b, n, n);
    Mat<T> g = Mat<T>::Zero(n, n), p = Mat<T>::Identity(n, n);
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
      g += coeffs[k] * T(double(k)) * p;
      p = p * m;
    }
    // d tr(B^k) = k tr(B^{k-1} dB): coordinate gradient is the transpose.
    return pairing.solve(flatten<T>(Mat<T>(g.transpose())));
  };
  return f;
}

/// Rigid body energy sum_i b_i^2 / (2 I_i).
template <Scalar T>
SmoothFunction<T> rigid_body(const Vec<T>& inertia, const DualPairing<T>& pairing) {
  for (Eigen::Index i = 0; i < inertia.size(); ++i)
    require(std::abs(inertia(i)) > 0, ErrorKind::invalid_input, "inertia must be nonzero");
  const Vec<T> inv = inertia.cwiseInverse();
  SmoothFunction<T> f;
  f.eval = [inv](const Vec<T>& b) { return real_part((b.array().square() * inv.array()).sum()) / 2; };
  f.grad = [inv, pairing](const Vec<T>& b) { return pairing.solve(Vec<T>(b.cwiseProduct(inv))); };
  return f;
}

template <Scalar T>
SmoothFunction<T> constant(double value) {
  SmoothFunction<T> f;
  f.eval = [value](const Vec<T>&) { return value; };
  f.grad = [](const Vec<T>& b) { return Vec<T>::Zero(b.size()); };
  return f;
}

}  // namespace functions

// ---------------------------------------------------------------------------
// Product structure on P1 x P2 (coordinates of P1 first)

template <Scalar T>
SmoothFunction<T> freeze_second(const SmoothFunction<T>& f, const Vec<T>& p2, Eigen::Index d1) {
  SmoothFunction<T> out;
  out.fd_step = f.fd_step;
  out.eval = [f, p2](const Vec<T>& b1) {
    Vec<T> b(b1.size() + p2.size());
    b << b1, p2;
    return f.eval(b);
  };
  if (f.grad)
    out.grad = [f, p2, d1](const Vec<T>& b1) -> Vec<T> {
      Vec<T> b(b1.size() + p2.size());
      b << b1, p2;
      return f.grad(b).head(d1);
    };
  return out;
}

template <Scalar T>
SmoothFunction<T> freeze_first(const SmoothFunction<T>& f, const Vec<T>& p1, Eigen::Index d2) {
  SmoothFunction<T> out;
  out.fd_step = f.fd_step;
  out.eval = [f, p1](const Vec<T>& b2) {
    Vec<T> b(p1.size() + b2.size());
    b << p1, b2;
    return f.eval(b);
  };
  if (f.grad)
    out.grad = [f, p1, d2](const Vec<T>& b2) -> Vec<T> {
      Vec<T> b(p1.size() + b2.size());
      b << p1, b2;
      return f.grad(b).tail(d2);
    };
  return out;
}

/// f o pr_1 on P1 x P2.
template <Scalar T>
SmoothFunction<T> pullback_first(const SmoothFunction<T>& f1, Eigen::Index d1, Eigen::Index d2) {
  SmoothFunction<T> out;
  out.eval = [f1, d1](const Vec<T>& b) { return f1.eval(Vec<T>(b.head(d1))); };
  if (f1.grad)
    out.grad = [f1, d1, d2](const Vec<T>& b) -> Vec<T> {
      Vec<T> g = Vec<T>::Zero(d1 + d2);
      g.head(d1) = f1.grad(Vec<T>(b.head(d1)));
      return g;
    };
  return out;
}

/// f o pr_2 on P1 x P2.
template <Scalar T>
SmoothFunction<T> pullback_second(const SmoothFunction<T>& f2, Eigen::Index d1, Eigen::Index d2) {
  SmoothFunction<T> out;
  out.eval = [f2, d2](const Vec<T>& b) { return f2.eval(Vec<T>(b.tail(d2))); };
  if (f2.grad)
    out.grad = [f2, d1, d2](const Vec<T>& b) -> Vec<T> {
      Vec<T> g = Vec<T>::Zero(d1 + d2);
      g.tail(d2) = f2.grad(Vec<T>(b.tail(d2)));
      return g;
    };
  return out;
}

/// {f, g}(p1, p2) = {f_{p2}, g_{p2}}_1(p1) + {f_{p1}, g_{p1}}_2(p2), where f_{p2}
/// freezes the second argument.
template <Scalar T>
double product_bracket(const SmoothFunction<T>& f, const SmoothFunction<T>& g, const Vec<T>& p1, const Vec<T>& p2,
                       const LiePoissonSpace<T>& s1, const LiePoissonSpace<T>& s2) {
  require(p1.size() == s1.dim() && p2.size() == s2.dim(), ErrorKind::invalid_input, "product point dimension mismatch");
  const double first = lie_poisson_bracket(freeze_second(f, p2, s1.dim()), freeze_second(g, p2, s1.dim()), p1, s1);
  const double second = lie_poisson_bracket(freeze_first(f, p1, s2.dim()), freeze_first(g, p1, s2.dim()), p2, s2);
  return first + second;
}

// ---------------------------------------------------------------------------
// Extension bracket and field on c + a

/// A function of (c, a), given on concatenated coordinates; its gradient is the
/// pair (df/dc, df/da) in n + h coordinates.
template <Scalar T>
using ExtensionFunction = SmoothFunction<T>;

template <Scalar T>
std::pair<Vec<T>, Vec<T>> partial_derivatives(const ExtensionFunction<T>& f, const Vec<T>& c_a,
                                              const ExtensionSpec<T>& spec) {
  require(c_a.size() == spec.dim(), ErrorKind::invalid_input, "point does not match extension dimension");
  const Vec<T> d = functional_derivative(f, c_a, spec.sum_pairing());
  return {d.head(spec.dim_n()), d.tail(spec.dim_h())};
}

/// {f, g}(c, a) = <a, [fa, ga]> + <c, [fc, gc] - phi(ga) fc + phi(fa) gc + omega(fa, ga)>.
template <Scalar T>
double extension_poisson_bracket(const ExtensionFunction<T>& f, const ExtensionFunction<T>& g, const Vec<T>& c_a,
                                 const ExtensionSpec<T>& spec) {
  const auto [fc, fa] = partial_derivatives(f, c_a, spec);
  const auto [gc, ga] = partial_derivatives(g, c_a, spec);
  const Vec<T> c = c_a.head(spec.dim_n()), a = c_a.tail(spec.dim_h());
  const Vec<T> n_part = spec.n.bracket(fc, gc) - spec.phi(ga) * fc + spec.phi(fa) * gc + spec.omega(fa, ga);
  return real_part(spec.h_pairing.pair(a, spec.h.bracket(fa, ga)) + spec.n_pairing.pair(c, n_part));
}

/// X_h(c, a) = -ad^*_{(dh/dc, dh/da)}(c, a), concatenated (c-dot, a-dot).
template <Scalar T>
Vec<T> extension_hamiltonian_field(const ExtensionFunction<T>& h, const Vec<T>& c_a, const ExtensionSpec<T>& spec) {
  const auto [hc, ha] = partial_derivatives(h, c_a, spec);
  Vec<T> x(spec.dim());
  x << hc, ha;
  return -coadjoint_extension(spec, x, c_a);
}

}  // namespace lpext
