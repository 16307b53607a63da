#pragma once

// Short sequences 0 -> U -> V -> W -> 0 of finite-dimensional spaces: exactness
// reports, dual maps, and the central-projector splitting of block-diagonal
// matrix *-algebras.

#include <lpext/algebra.hpp>

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lpext {

/// Linear map target x source. Pairings identify the duals of both ends.
template <Scalar T>
struct LinearMapRec {
  Mat<T> matrix;
  DualPairing<T> source_pairing;
  DualPairing<T> target_pairing;

  explicit LinearMapRec(Mat<T> m)
      : matrix(std::move(m)),
        source_pairing(DualPairing<T>::identity(matrix.cols())),
        target_pairing(DualPairing<T>::identity(matrix.rows())) {}
  LinearMapRec(Mat<T> m, DualPairing<T> src, DualPairing<T> tgt)
      : matrix(std::move(m)), source_pairing(std::move(src)), target_pairing(std::move(tgt)) {
    require(source_pairing.dim() == matrix.cols() && target_pairing.dim() == matrix.rows(), ErrorKind::invalid_input,
            "map shape does not match its pairings");
  }

  Eigen::Index source_dim() const { return matrix.cols(); }
  Eigen::Index target_dim() const { return matrix.rows(); }
};

template <Scalar T>
struct SequenceSpec {
  LinearMapRec<T> first;
  LinearMapRec<T> second;
  /// Optional Lie structures on U, V, W for the homomorphism check.
  std::optional<LieAlgebra<T>> source_algebra, middle_algebra, target_algebra;

  SequenceSpec(LinearMapRec<T> f, LinearMapRec<T> s) : first(std::move(f)), second(std::move(s)) {
    require(second.source_dim() == first.target_dim(), ErrorKind::invalid_input,
            "sequence maps are not composable");
  }
};

struct ExactnessReport {
  Eigen::Index first_rank = 0, first_source_dim = 0;
  Eigen::Index second_rank = 0, second_target_dim = 0;
  bool injective = false;
  bool surjective = false;
  double composition = 0.0;  // |second * first|
  double im_ker = 0.0;       // sine of the largest principal angle; 1 if dims differ
  std::optional<double> first_homomorphism, second_homomorphism;

  bool exact(double angle_tol = tol::subspace_angle) const {
    return injective && surjective && im_ker < angle_tol &&
           (!first_homomorphism || *first_homomorphism < tol::verification) &&
           (!second_homomorphism || *second_homomorphism < tol::verification);
  }
};

/// max |M [x, y] - [M x, M y]| over basis pairs.
template <Scalar T>
double homomorphism_residual(const Mat<T>& m, const LieAlgebra<T>& src, const LieAlgebra<T>& tgt) {
  require(m.cols() == src.dim() && m.rows() == tgt.dim(), ErrorKind::invalid_input, "homomorphism shape mismatch");
  double r = 0.0;
  for (Eigen::Index i = 0; i < src.dim(); ++i)
    for (Eigen::Index j = i + 1; j < src.dim(); ++j) {
      const Vec<T> lhs = m * src.bracket(src.basis(i), src.basis(j));
      const Vec<T> rhs = tgt.bracket(Vec<T>(m.col(i)), Vec<T>(m.col(j)));
      r = std::max(r, max_abs(Vec<T>(lhs - rhs)));
    }
  return r;
}

/// sin of the largest principal angle between two subspaces given by
/// orthonormal bases; 1 when their dimensions differ.
template <Scalar T>
double subspace_distance(const Mat<T>& qa, const Mat<T>& qb) {
  if (qa.cols() != qb.cols()) return 1.0;
  if (qa.cols() == 0) return 0.0;
  const Mat<T> diff = qa - qb * (qb.adjoint() * qa);
  return diff.operatorNorm();
}

template <Scalar T>
ExactnessReport check_exact_sequence(const SequenceSpec<T>& seq) {
  ExactnessReport r;
  const Mat<T>& a = seq.first.matrix;
  const Mat<T>& b = seq.second.matrix;
  r.first_source_dim = a.cols();
  r.first_rank = numerical_rank(a);
  r.injective = r.first_rank == a.cols();
  r.second_target_dim = b.rows();
  r.second_rank = numerical_rank(b);
  r.surjective = r.second_rank == b.rows();
  r.composition = max_abs(Mat<T>(b * a));
  r.im_ker = subspace_distance<T>(orthonormal_span(a), nullspace(b));
  if (seq.source_algebra && seq.middle_algebra)
    r.first_homomorphism = homomorphism_residual(a, *seq.source_algebra, *seq.middle_algebra);
  if (seq.middle_algebra && seq.target_algebra)
    r.second_homomorphism = homomorphism_residual(b, *seq.middle_algebra, *seq.target_algebra);
  return r;
}

/// Adjoint map target* -> source* with <dual(y), x>_source = <y, m x>_target.
/// The dual spaces are paired back through the transposed grams.
template <Scalar T>
LinearMapRec<T> dual_map(const LinearMapRec<T>& m) {
  Mat<T> d = m.target_pairing.adjoint_matrix(m.matrix, m.source_pairing);
  return LinearMapRec<T>(std::move(d), DualPairing<T>(m.target_pairing.gram().transpose()),
                         DualPairing<T>(m.source_pairing.gram().transpose()));
}

/// 0 -> W* -> V* -> U* -> 0.
template <Scalar T>
SequenceSpec<T> dual_sequence(const SequenceSpec<T>& seq) {
  return SequenceSpec<T>(dual_map(seq.second), dual_map(seq.first));
}

/// Residual of a dual map carrying a designated predual subspace of its
/// source (columns of `from`) into one of its target (columns of `into`).
template <Scalar T>
double predual_preservation(const Mat<T>& dual_matrix, const Mat<T>& from, const Mat<T>& into) {
  const Mat<T> q = orthonormal_span(into);
  const Mat<T> proj = complement_projector(q, dual_matrix.rows());
  const Mat<T> img = proj * dual_matrix * orthonormal_span(from);
  return img.size() == 0 ? 0.0 : img.colwise().norm().maxCoeff();
}

/// Random exact sequence: injective first map U -> V, second map a quotient of
/// V onto V / im(first) composed with a random isomorphism. Grams are random
/// and well conditioned.
template <Scalar T, class Rng>
SequenceSpec<T> random_exact_sequence(Eigen::Index dim_u, Eigen::Index dim_w, Rng& rng) {
  std::normal_distribution<double> nd;
  auto draw = [&](Eigen::Index r, Eigen::Index c) {
    Mat<T> m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if constexpr (is_complex<T>::value) m(i) = T(nd(rng), nd(rng));
      else m(i) = nd(rng);
    }
    return m;
  };
  auto gram = [&](Eigen::Index n) { return DualPairing<T>(Mat<T>(Mat<T>::Identity(n, n) * T(n) + draw(n, n))); };
  const Eigen::Index dim_v = dim_u + dim_w;
  Mat<T> first = draw(dim_v, dim_u);
  while (numerical_rank(first) < dim_u) first = draw(dim_v, dim_u);
  const Mat<T> comp = nullspace(Mat<T>(first.adjoint()));  // orthonormal complement of im(first)
  Mat<T> iso = draw(dim_w, dim_w) + Mat<T>::Identity(dim_w, dim_w) * T(dim_w);
  Mat<T> second = iso * comp.adjoint();
  const DualPairing<T> gu = gram(dim_u), gv = gram(dim_v), gw = gram(dim_w);
  return SequenceSpec<T>(LinearMapRec<T>(std::move(first), gu, gv), LinearMapRec<T>(std::move(second), gv, gw));
}

// ---------------------------------------------------------------------------
// Central splitting of block-diagonal matrix *-algebras

struct WStarSplitReport {
  Mat<cdouble> z;             // central projector
  double idempotent = 0.0;    // |z^2 - z|
  double self_adjoint = 0.0;  // |z^* - z|
  double central = 0.0;       // max |z x - x z| over the basis
  double image = 0.0;         // distance between z g and the ideal
  double complement_ideal = 0.0;  // (1 - z) g closed under left/right products
  double cross_product = 0.0;     // max |x y|, |y x| for x in z g, y in (1 - z) g
  double bracket_split = 0.0;     // [x, y] vs [x1, y1] + [x2, y2]
  double quotient_iso = 0.0;      // pi restricted to (1 - z) g: rank defect + product defect

  double max_residual() const {
    return std::max({idempotent, self_adjoint, central, image, complement_ideal, cross_product, bracket_split,
                     quotient_iso});
  }
};

/// `sizes` lists the diagonal blocks of g; `ideal` lists the diagonal
/// positions spanned by the ideal, which must be a union of whole blocks.
/// `random_draws` adds random-element checks of the product and bracket
/// identities on top of the basis checks.
template <class Rng>
WStarSplitReport wstar_central_split(const std::vector<Eigen::Index>& sizes, const std::vector<Eigen::Index>& ideal,
                                     Rng& rng, int random_draws = 20) {
  using CM = Mat<cdouble>;
  require(!sizes.empty(), ErrorKind::invalid_input, "no blocks given");
  Eigen::Index total = 0;
  std::vector<Eigen::Index> offset;
  for (auto s : sizes) {
    require(s > 0, ErrorKind::invalid_input, "block sizes must be positive");
    offset.push_back(total);
    total += s;
  }
  std::vector<bool> selected(static_cast<std::size_t>(total), false);
  for (auto p : ideal) {
    require(p >= 0 && p < total, ErrorKind::invalid_input, "ideal position out of range");
    selected[static_cast<std::size_t>(p)] = true;
  }
  std::vector<bool> block_in(sizes.size());
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const auto first = selected.begin() + offset[b];
    const auto last = first + sizes[b];
    const bool all = std::all_of(first, last, [](bool x) { return x; });
    const bool none = std::none_of(first, last, [](bool x) { return x; });
    require(all || none, ErrorKind::unsupported_presentation, "ideal selection is not a union of blocks");
    block_in[b] = all;
  }

  // basis of g: elementary matrices inside each block; ideal part and complement part
  std::vector<CM> basis, ideal_basis, comp_basis;
  for (std::size_t b = 0; b < sizes.size(); ++b)
    for (Eigen::Index i = 0; i < sizes[b]; ++i)
      for (Eigen::Index j = 0; j < sizes[b]; ++j) {
        CM e = CM::Zero(total, total);
        e(offset[b] + i, offset[b] + j) = 1.0;
        basis.push_back(e);
        (block_in[b] ? ideal_basis : comp_basis).push_back(e);
      }

  WStarSplitReport r;
  r.z = CM::Zero(total, total);
  for (std::size_t b = 0; b < sizes.size(); ++b)
    if (block_in[b]) r.z.block(offset[b], offset[b], sizes[b], sizes[b]).setIdentity();
  const CM one = CM::Identity(total, total);
  const CM zc = one - r.z;
  r.idempotent = max_abs(CM(r.z * r.z - r.z));
  r.self_adjoint = max_abs(CM(r.z.adjoint() - r.z));

  auto vec_of = [](const std::vector<CM>& ms) {
    CM out(ms.empty() ? 0 : ms.front().size(), static_cast<Eigen::Index>(ms.size()));
    for (std::size_t k = 0; k < ms.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Vec<cdouble>>(ms[k].data(), ms[k].size());
    return out;
  };
  std::vector<CM> z_images;
  for (const auto& e : basis) {
    r.central = std::max(r.central, max_abs(CM(r.z * e - e * r.z)));
    z_images.push_back(r.z * e);
  }
  r.image = subspace_distance<cdouble>(orthonormal_span(vec_of(z_images)), orthonormal_span(vec_of(ideal_basis)));

  // (1 - z) g must absorb products from both sides.
  for (const auto& x : basis)
    for (const auto& y : comp_basis) {
      r.complement_ideal = std::max(r.complement_ideal, max_abs(CM(r.z * (x * y))));
      r.complement_ideal = std::max(r.complement_ideal, max_abs(CM(r.z * (y * x))));
    }

  std::normal_distribution<double> nd;
  auto random_element = [&]() {
    CM m = CM::Zero(total, total);
    for (const auto& e : basis) m += cdouble(nd(rng), nd(rng)) * e;
    return m;
  };
  auto update_products = [&](const CM& x, const CM& y) {
    // x in z g, y in (1 - z) g
    r.cross_product = std::max({r.cross_product, max_abs(CM(x * y)), max_abs(CM(y * x))});
  };
  for (const auto& x : ideal_basis)
    for (const auto& y : comp_basis) update_products(x, y);
  for (int k = 0; k < random_draws; ++k) {
    const CM x = random_element(), y = random_element();
    update_products(r.z * x, zc * y);
    const CM x1 = r.z * x, x2 = zc * x, y1 = r.z * y, y2 = zc * y;
    const CM full = x * y - y * x;
    const CM split = (x1 * y1 - y1 * x1) + (x2 * y2 - y2 * x2);
    r.bracket_split = std::max(r.bracket_split, max_abs(CM(full - split)));
  }

  // pi: g -> h = g / z g, realized as compression to the complementary blocks.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index p = 0; p < total; ++p)
    if (!selected[static_cast<std::size_t>(p)]) keep.push_back(p);
  auto pi = [&](const CM& m) {
    CM out(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
      for (std::size_t j = 0; j < keep.size(); ++j) out(i, j) = m(keep[i], keep[j]);
    return out;
  };
  std::vector<CM> images;
  for (const auto& y : comp_basis) images.push_back(pi(y));
  // h is block diagonal, so its dimension is the number of complement basis elements
  const Eigen::Index hdim = static_cast<Eigen::Index>(comp_basis.size());
  const CM image_mat = images.empty() ? CM(0, 0) : vec_of(images);
  r.quotient_iso = static_cast<double>(hdim - numerical_rank(image_mat));
  for (const auto& x : comp_basis)
    for (const auto& y : comp_basis) {
      r.quotient_iso = std::max(r.quotient_iso, max_abs(CM(pi(x * y) - pi(x) * pi(y))));
      r.quotient_iso = std::max(r.quotient_iso, max_abs(CM(pi(x.adjoint()) - pi(x).adjoint())));
    }
  return r;
}

}  // namespace lpext
