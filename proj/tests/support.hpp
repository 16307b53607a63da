#pragma once

// Random generators and independent oracles shared by the test binaries.
// Oracles recompute quantities from raw definitions (structure-constant sums,
// pairing loops, finite differences) rather than through library shortcuts.

#include <lpext/common.hpp>
#include <lpext/algebra.hpp>
#include <lpext/extension.hpp>

#include <complex>
#include <functional>
#include <random>

namespace lpext::test {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

template <Scalar T>
T draw(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  if constexpr (is_complex<T>::value)
    return T(nd(rng), nd(rng));
  else
    return nd(rng);
}

template <Scalar T>
Vec<T> rand_vec(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  Vec<T> v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = draw<T>(rng, scale);
  return v;
}

template <Scalar T>
Mat<T> rand_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  Mat<T> m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = draw<T>(rng, scale);
  return m;
}

/// [x, y] straight from the structure-constant sum.
template <Scalar T>
Vec<T> raw_bracket(const LieAlgebra<T>& alg, const Vec<T>& x, const Vec<T>& y) {
  const Eigen::Index n = alg.dim();
  Vec<T> out = Vec<T>::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) out(k) += alg.constants()(k, i, j) * x(i) * y(j);
  return out;
}

/// Max Jacobi violation over all basis triples, using raw_bracket.
template <Scalar T>
double raw_jacobi(const LieAlgebra<T>& alg) {
  const Eigen::Index n = alg.dim();
  double r = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) {
        const Vec<T> ei = alg.basis(i), ej = alg.basis(j), ek = alg.basis(k);
        const Vec<T> s = raw_bracket(alg, raw_bracket(alg, ei, ej), ek) + raw_bracket(alg, raw_bracket(alg, ej, ek), ei) +
                         raw_bracket(alg, raw_bracket(alg, ek, ei), ej);
        r = std::max(r, s.cwiseAbs().maxCoeff());
      }
  return r;
}

/// b' with b'^T G y = b^T G [x, y] for all basis y: solves G^T b' = r with
/// r_j = <b, [x, e_j]> by a fresh full-pivot LU.
template <Scalar T>
Vec<T> brute_ad_star(const LieAlgebra<T>& alg, const Mat<T>& gram, const Vec<T>& x, const Vec<T>& b) {
  const Eigen::Index n = alg.dim();
  Vec<T> r(n);
  for (Eigen::Index j = 0; j < n; ++j) r(j) = (b.transpose() * gram * raw_bracket(alg, x, alg.basis(j)))(0, 0);
  return Mat<T>(gram.transpose()).fullPivLu().solve(r);
}

/// Coordinate gradient of a real function by central differences, with
/// d_k = d/d(re b_k) - i d/d(im b_k) on complex coordinates, so that
/// df[db] = Re(d^T db).
template <Scalar T>
Vec<T> fd_gradient(const std::function<double(const Vec<T>&)>& f, const Vec<T>& b, double h = 1e-6) {
  Vec<T> d(b.size());
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    Vec<T> p = b, m = b;
    p(k) += T(h);
    m(k) -= T(h);
    const double re = (f(p) - f(m)) / (2 * h);
    if constexpr (is_complex<T>::value) {
      Vec<T> pi = b, mi = b;
      pi(k) += T(0, h);
      mi(k) -= T(0, h);
      d(k) = T(re, -(f(pi) - f(mi)) / (2 * h));
    } else {
      d(k) = re;
    }
  }
  return d;
}

inline Eigen::Vector3d cross(const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a.cross(b); }

/// Sine of the largest principal angle between the column spans of a and b
/// (both of full column rank): the spectral norm of the difference of the
/// orthogonal projectors, built from Householder QR.
template <Scalar T>
double principal_sine(const Mat<T>& a, const Mat<T>& b) {
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  const Mat<T> qa = Eigen::HouseholderQR<Mat<T>>(a).householderQ() * Mat<T>::Identity(a.rows(), a.cols());
  const Mat<T> qb = Eigen::HouseholderQR<Mat<T>>(b).householderQ() * Mat<T>::Identity(b.rows(), b.cols());
  return Mat<T>(qa * qa.adjoint() - qb * qb.adjoint()).operatorNorm();
}

/// Extension data with every value drawn at random: generally incompatible.
template <Scalar T>
ExtensionSpec<T> random_spec(const LieAlgebra<T>& n, const LieAlgebra<T>& h, std::mt19937_64& rng, bool random_omega,
                             bool random_phi, double scale = 1.0) {
  const Eigen::Index dn = n.dim(), dh = h.dim();
  BilinearMapToN<T> om(dn, dh);
  if (random_omega)
    for (Eigen::Index i = 0; i < dh; ++i)
      for (Eigen::Index j = i + 1; j < dh; ++j) om.set(i, j, rand_vec<T>(dn, rng, scale));
  DerivationValuedMap<T> ph(dn, dh);
  if (random_phi)
    for (Eigen::Index i = 0; i < dh; ++i) ph.on_basis(i) = rand_mat<T>(dn, dn, rng, scale);
  return ExtensionSpec<T>(n, h, std::move(om), std::move(ph));
}

/// phi(e_i) = ad(e_i) of so(3) acting on R^3: the vector representation.
inline DerivationValuedMap<double> so3_vector_rep() {
  const auto h = so3<double>();
  DerivationValuedMap<double> ph(3, 3);
  for (Eigen::Index i = 0; i < 3; ++i) ph.on_basis(i) = h.ad(h.basis(i));
  return ph;
}

inline ExtensionSpec<double> euclidean3_spec() {
  return ExtensionSpec<double>(abelian<double>(3), so3<double>(), BilinearMapToN<double>(3, 3), so3_vector_rep());
}

/// gl(n) acting on itself by ad, omega = 0.
template <Scalar T>
ExtensionSpec<T> adjoint_semidirect(Eigen::Index n) {
  const auto g = gl<T>(n);
  DerivationValuedMap<T> ph(g.dim(), g.dim());
  for (Eigen::Index i = 0; i < g.dim(); ++i) ph.on_basis(i) = g.ad(g.basis(i));
  return ExtensionSpec<T>(g, g, BilinearMapToN<T>(g.dim(), g.dim()), std::move(ph));
}

}  // namespace lpext::test
