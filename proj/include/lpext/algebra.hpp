#pragma once

// Finite-dimensional Lie algebras given by structure constants, nondegenerate
// pairings against a predual model, and the coadjoint action.

#include <lpext/common.hpp>

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace lpext {

/// Dense rank-3 array indexed (a, i, j), row-major in the last index.
template <Scalar T>
class Rank3 {
 public:
  Rank3() = default;
  Rank3(Eigen::Index d0, Eigen::Index d1, Eigen::Index d2)
      : d0_(d0), d1_(d1), d2_(d2), data_(static_cast<std::size_t>(d0 * d1 * d2), T(0)) {}

  T& operator()(Eigen::Index a, Eigen::Index i, Eigen::Index j) { return data_[index(a, i, j)]; }
  const T& operator()(Eigen::Index a, Eigen::Index i, Eigen::Index j) const {
    return data_[index(a, i, j)];
  }

  Eigen::Index dim0() const { return d0_; }
  Eigen::Index dim1() const { return d1_; }
  Eigen::Index dim2() const { return d2_; }

  /// Column (., i, j) as a vector of length dim0.
  Vec<T> fiber(Eigen::Index i, Eigen::Index j) const {
    Vec<T> v(d0_);
    for (Eigen::Index a = 0; a < d0_; ++a) v(a) = (*this)(a, i, j);
    return v;
  }

 private:
  std::size_t index(Eigen::Index a, Eigen::Index i, Eigen::Index j) const {
    return static_cast<std::size_t>((a * d1_ + i) * d2_ + j);
  }

  Eigen::Index d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<T> data_;
};

template <Scalar T>
struct Triplet {
  Eigen::Index k, i, j;
  T value;
};

enum class Validation { strict, unchecked };

struct StructureReport {
  double antisymmetry = 0.0;
  double jacobi = 0.0;
};

/// Lie algebra with basis e_0..e_{n-1} and [e_i, e_j] = sum_k c(k, i, j) e_k.
///
/// Constants are stored densely; a per-pair list of nonzero entries speeds up
/// brackets of basis vectors. With Validation::strict construction rejects
/// constants that are not exactly antisymmetric or whose Jacobi residual
/// exceeds tol::construction.
template <Scalar T>
class LieAlgebra {
 public:
  LieAlgebra() = default;

  LieAlgebra(std::string name, Rank3<T> constants, std::vector<std::string> labels = {},
             Validation validation = Validation::strict)
      : name_(std::move(name)), c_(std::move(constants)), labels_(std::move(labels)) {
    const Eigen::Index n = c_.dim0();
    require(n > 0, ErrorKind::invalid_input, "Lie algebra dimension must be positive");
    require(c_.dim1() == n && c_.dim2() == n, ErrorKind::invalid_input,
            "structure constants must be dim x dim x dim");
    if (labels_.empty())
      for (Eigen::Index i = 0; i < n; ++i) labels_.push_back("e" + std::to_string(i));
    require(static_cast<Eigen::Index>(labels_.size()) == n, ErrorKind::invalid_input,
            "basis label count does not match dimension");
    index_nonzeros();
    if (validation == Validation::strict) {
      const StructureReport r = check_structure();
      require(r.antisymmetry == 0.0, ErrorKind::invalid_input,
              "structure constants of '" + name_ + "' are not antisymmetric");
      require(r.jacobi < tol::construction, ErrorKind::invalid_input,
              "structure constants of '" + name_ + "' violate the Jacobi identity (residual " +
                  std::to_string(r.jacobi) + ")");
    }
  }

  /// Builds from the antisymmetric half: each (k, i, j, v) also sets c(k, j, i) = -v.
  static LieAlgebra from_triplets(std::string name, Eigen::Index dim,
                                  const std::vector<Triplet<T>>& triplets,
                                  std::vector<std::string> labels = {},
                                  Validation validation = Validation::strict) {
    require(dim > 0, ErrorKind::invalid_input, "Lie algebra dimension must be positive");
    Rank3<T> c(dim, dim, dim);
    for (const auto& t : triplets) {
      require(t.k >= 0 && t.k < dim && t.i >= 0 && t.i < dim && t.j >= 0 && t.j < dim,
              ErrorKind::invalid_input, "structure-constant index out of range");
      require(t.i != t.j || t.value == T(0), ErrorKind::invalid_input,
              "diagonal structure constant must vanish");
      c(t.k, t.i, t.j) = t.value;
      c(t.k, t.j, t.i) = -t.value;
    }
    return LieAlgebra(std::move(name), std::move(c), std::move(labels), validation);
  }

  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return c_.dim0(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Rank3<T>& constants() const { return c_; }
  static constexpr bool is_complex_field = is_complex<T>::value;
  std::string field() const { return is_complex_field ? "complex" : "real"; }

  /// Nonzero (k, value) entries of [e_i, e_j].
  const std::vector<std::pair<Eigen::Index, T>>& basis_bracket(Eigen::Index i, Eigen::Index j) const {
    return nz_[static_cast<std::size_t>(i * dim() + j)];
  }

  Vec<T> bracket(const Vec<T>& x, const Vec<T>& y) const {
    check_element(x);
    check_element(y);
    Vec<T> out = Vec<T>::Zero(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (x(i) == T(0)) continue;
      for (Eigen::Index j = 0; j < dim(); ++j) {
        const T w = x(i) * y(j);
        if (w == T(0)) continue;
        for (const auto& [k, v] : basis_bracket(i, j)) out(k) += v * w;
      }
    }
    return out;
  }

  /// Matrix of ad_x = [x, .].
  Mat<T> ad(const Vec<T>& x) const {
    check_element(x);
    Mat<T> m = Mat<T>::Zero(dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (x(i) == T(0)) continue;
      for (Eigen::Index j = 0; j < dim(); ++j)
        for (const auto& [k, v] : basis_bracket(i, j)) m(k, j) += x(i) * v;
    }
    return m;
  }

  Vec<T> basis(Eigen::Index i) const { return Vec<T>::Unit(dim(), i); }

  /// Max-norm antisymmetry and Jacobi violations over all basis index combinations.
  StructureReport check_structure() const {
    const Eigen::Index n = dim();
    StructureReport r;
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          r.antisymmetry = std::max(r.antisymmetry, std::abs(c_(k, i, j) + c_(k, j, i)));
    Vec<T> acc(n);
    auto add_nested = [&](Eigen::Index i, Eigen::Index j, Eigen::Index k) {
      for (const auto& [l, v] : basis_bracket(i, j))
        for (const auto& [m, w] : basis_bracket(l, k)) acc(m) += v * w;
    };
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
          acc.setZero();
          add_nested(i, j, k);
          add_nested(j, k, i);
          add_nested(k, i, j);
          r.jacobi = std::max(r.jacobi, max_abs(acc));
        }
    return r;
  }

  /// Upper bound C with |[x, y]| <= C |x| |y| (Euclidean coordinate norms).
  double bracket_norm_bound() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < dim(); ++i) {
      const double n = ad(basis(i)).operatorNorm();
      s += n * n;
    }
    return std::sqrt(s);
  }

  void check_element(const Vec<T>& x) const {
    require(x.size() == dim(), ErrorKind::invalid_input,
            "element of length " + std::to_string(x.size()) + " does not belong to '" + name_ +
                "' of dimension " + std::to_string(dim()));
  }

 private:
  void index_nonzeros() {
    const Eigen::Index n = dim();
    nz_.assign(static_cast<std::size_t>(n * n), {});
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
          if (c_(k, i, j) != T(0)) nz_[static_cast<std::size_t>(i * n + j)].emplace_back(k, c_(k, i, j));
  }

  std::string name_;
  Rank3<T> c_;
  std::vector<std::string> labels_;
  std::vector<std::vector<std::pair<Eigen::Index, T>>> nz_;
};

template <Scalar T>
StructureReport check_structure(const LieAlgebra<T>& alg) {
  return alg.check_structure();
}

template <Scalar T>
Vec<T> bracket_eval(const LieAlgebra<T>& alg, const Vec<T>& x, const Vec<T>& y) {
  return alg.bracket(x, y);
}

/// Complex-bilinear (never sesquilinear) pairing <b, x> = b^T G x between a
/// predual coordinate vector b and an algebra coordinate vector x.
template <Scalar T>
class DualPairing {
 public:
  DualPairing() = default;

  explicit DualPairing(Mat<T> gram) : gram_(std::move(gram)) {
    require(gram_.rows() > 0 && gram_.rows() == gram_.cols(), ErrorKind::invalid_input,
            "pairing gram must be square and nonempty");
    Eigen::JacobiSVD<Mat<T>> svd(gram_);
    const auto& s = svd.singularValues();
    require(s(s.size() - 1) > tol::pairing_cond * s(0), ErrorKind::pairing_degenerate,
            "pairing gram is singular or ill-conditioned");
    lu_ = Eigen::PartialPivLU<Mat<T>>(gram_);
    lu_t_ = Eigen::PartialPivLU<Mat<T>>(gram_.transpose());
  }

  static DualPairing identity(Eigen::Index n) { return DualPairing(Mat<T>::Identity(n, n)); }

  Eigen::Index dim() const { return gram_.rows(); }
  const Mat<T>& gram() const { return gram_; }

  T pair(const Vec<T>& b, const Vec<T>& x) const {
    require(b.size() == dim() && x.size() == dim(), ErrorKind::invalid_input,
            "pairing dimension mismatch");
    return (b.transpose() * gram_ * x)(0, 0);
  }

  /// x with G x = rhs, i.e. the algebra element representing the functional rhs.
  Vec<T> solve(const Vec<T>& rhs) const { return lu_.solve(rhs); }
  /// b with G^T b = rhs, i.e. the predual element representing the functional rhs.
  Vec<T> solve_transpose(const Vec<T>& rhs) const { return lu_t_.solve(rhs); }

  /// Predual coordinates of the adjoint A^* b of a linear map A on algebra
  /// coordinates (domain pairing `dom`, this pairing on the codomain).
  Vec<T> adjoint_apply(const Mat<T>& a, const Vec<T>& b, const DualPairing& dom) const {
    return dom.solve_transpose(a.transpose() * (gram_.transpose() * b));
  }

  /// Matrix of the adjoint of A: predual(codomain) -> predual(domain).
  Mat<T> adjoint_matrix(const Mat<T>& a, const DualPairing& dom) const {
    return dom.lu_t_.solve(a.transpose() * gram_.transpose());
  }

 private:
  Mat<T> gram_;
  Eigen::PartialPivLU<Mat<T>> lu_;
  Eigen::PartialPivLU<Mat<T>> lu_t_;
};

/// Component-wise pairing of U + W against U* + W*: block-diagonal gram.
template <Scalar T>
DualPairing<T> direct_sum(const DualPairing<T>& a, const DualPairing<T>& b) {
  Mat<T> g = Mat<T>::Zero(a.dim() + b.dim(), a.dim() + b.dim());
  g.topLeftCorner(a.dim(), a.dim()) = a.gram();
  g.bottomRightCorner(b.dim(), b.dim()) = b.gram();
  return DualPairing<T>(std::move(g));
}

/// A Lie algebra together with the pairing that identifies its predual model.
template <Scalar T>
struct LiePoissonSpace {
  LieAlgebra<T> algebra;
  DualPairing<T> pairing;

  LiePoissonSpace(LieAlgebra<T> alg, DualPairing<T> p) : algebra(std::move(alg)), pairing(std::move(p)) {
    require(algebra.dim() == pairing.dim(), ErrorKind::invalid_input,
            "pairing dimension does not match algebra dimension");
  }
  explicit LiePoissonSpace(LieAlgebra<T> alg)
      : algebra(std::move(alg)), pairing(DualPairing<T>::identity(algebra.dim())) {}

  Eigen::Index dim() const { return algebra.dim(); }
};

/// The unique b' with <b', y> = <b, [x, y]> for all y.
template <Scalar T>
Vec<T> ad_star(const LieAlgebra<T>& alg, const DualPairing<T>& pairing, const Vec<T>& x,
               const Vec<T>& b) {
  require(pairing.dim() == alg.dim() && b.size() == alg.dim(), ErrorKind::invalid_input,
          "ad_star dimension mismatch");
  return pairing.adjoint_apply(alg.ad(x), b, pairing);
}

template <Scalar T>
Vec<T> ad_star(const LiePoissonSpace<T>& space, const Vec<T>& x, const Vec<T>& b) {
  return ad_star(space.algebra, space.pairing, x, b);
}

/// Orthonormal basis (columns) of the center, as the nullspace of the stacked
/// maps eta -> [eta, e_j].
template <Scalar T>
Mat<T> center_of(const LieAlgebra<T>& alg) {
  const Eigen::Index n = alg.dim();
  Mat<T> stacked = Mat<T>::Zero(n * n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (const auto& [k, v] : alg.basis_bracket(i, j)) stacked(j * n + k, i) = v;
  return nullspace<T>(stacked);
}

/// Lie algebra direct sum with the first summand's coordinates first.
template <Scalar T>
LieAlgebra<T> direct_sum(const LieAlgebra<T>& a, const LieAlgebra<T>& b) {
  const Eigen::Index na = a.dim(), n = a.dim() + b.dim();
  Rank3<T> c(n, n, n);
  for (Eigen::Index k = 0; k < na; ++k)
    for (Eigen::Index i = 0; i < na; ++i)
      for (Eigen::Index j = 0; j < na; ++j) c(k, i, j) = a.constants()(k, i, j);
  for (Eigen::Index k = 0; k < b.dim(); ++k)
    for (Eigen::Index i = 0; i < b.dim(); ++i)
      for (Eigen::Index j = 0; j < b.dim(); ++j) c(na + k, na + i, na + j) = b.constants()(k, i, j);
  std::vector<std::string> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  return LieAlgebra<T>(a.name() + "+" + b.name(), std::move(c), std::move(labels), Validation::unchecked);
}

// ---------------------------------------------------------------------------
// Named constructors

template <Scalar T = double>
LieAlgebra<T> so3() {
  return LieAlgebra<T>::from_triplets("so3", 3,
                                      {{2, 0, 1, T(1)}, {0, 1, 2, T(1)}, {1, 2, 0, T(1)}},
                                      {"e1", "e2", "e3"});
}

/// Heisenberg algebra h3 with basis (p, q, z), [p, q] = z.
template <Scalar T = double>
LieAlgebra<T> heisenberg() {
  return LieAlgebra<T>::from_triplets("heisenberg", 3, {{2, 0, 1, T(1)}}, {"p", "q", "z"});
}

template <Scalar T = double>
LieAlgebra<T> abelian(Eigen::Index n) {
  return LieAlgebra<T>::from_triplets("abelian" + std::to_string(n), n, {});
}

/// Index of the elementary matrix E_ab in the row-major basis of gl(n).
inline Eigen::Index gl_index(Eigen::Index n, Eigen::Index a, Eigen::Index b) { return a * n + b; }

/// gl(n) in the elementary basis E_ab (row-major), scaled commutator
/// sign * (XY - YX). sign = -1 gives the negative-commutator algebra.
template <Scalar T = double>
LieAlgebra<T> gl(Eigen::Index n, double sign = 1.0) {
  require(n > 0, ErrorKind::invalid_input, "gl(n) needs n > 0");
  const Eigen::Index d = n * n;
  Rank3<T> c(d, d, d);
  // [E_ab, E_cd] = delta_bc E_ad - delta_da E_cb
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index cc = 0; cc < n; ++cc)
        for (Eigen::Index dd = 0; dd < n; ++dd) {
          const Eigen::Index i = gl_index(n, a, b), j = gl_index(n, cc, dd);
          if (b == cc) c(gl_index(n, a, dd), i, j) += T(sign);
          if (dd == a) c(gl_index(n, cc, b), i, j) -= T(sign);
        }
  std::vector<std::string> labels;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      labels.push_back("E" + std::to_string(a + 1) + std::to_string(b + 1));
  return LieAlgebra<T>((sign < 0 ? "gl_neg" : "gl") + std::to_string(n), std::move(c), std::move(labels));
}

/// Trace pairing tr(B X) on gl(n) coordinates: G[(a,b),(c,d)] = delta_ad delta_bc.
template <Scalar T = double>
DualPairing<T> trace_pairing(Eigen::Index n) {
  Mat<T> g = Mat<T>::Zero(n * n, n * n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) g(gl_index(n, a, b), gl_index(n, b, a)) = T(1);
  return DualPairing<T>(std::move(g));
}

/// Lie algebra of block-diagonal matrices M_{n1} + M_{n2} + ..., basis the
/// elementary matrices of each block in order.
template <Scalar T = double>
LieAlgebra<T> matrix_blocks(const std::vector<Eigen::Index>& sizes) {
  require(!sizes.empty(), ErrorKind::invalid_input, "matrix_blocks needs at least one block");
  LieAlgebra<T> out = gl<T>(sizes.front());
  for (std::size_t b = 1; b < sizes.size(); ++b) out = direct_sum(out, gl<T>(sizes[b]));
  return out;
}

template <Scalar T = double>
DualPairing<T> matrix_blocks_trace_pairing(const std::vector<Eigen::Index>& sizes) {
  DualPairing<T> out = trace_pairing<T>(sizes.front());
  for (std::size_t b = 1; b < sizes.size(); ++b) out = direct_sum(out, trace_pairing<T>(sizes[b]));
  return out;
}

}  // namespace lpext
