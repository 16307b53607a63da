#pragma once

// Lie algebra extensions n + h twisted by a skew map omega: h x h -> n and a
// derivation-valued map phi: h -> aut(n).
//
//   [(z, e), (z', e')] = ([z, z'] + phi(e) z' - phi(e') z + omega(e, e'), [e, e'])
//
// Coordinates on the sum are always n first, then h.

#include <lpext/algebra.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lpext {

/// Skew bilinear map h x h -> n, omega(e_i, e_j) = sum_a w(a, i, j) f_a.
template <Scalar T>
class BilinearMapToN {
 public:
  BilinearMapToN() = default;
  BilinearMapToN(Eigen::Index dim_n, Eigen::Index dim_h) : w_(dim_n, dim_h, dim_h) {}

  /// Takes ownership of dense coefficients; they must be exactly skew.
  explicit BilinearMapToN(Rank3<T> w) : w_(std::move(w)) {
    require(w_.dim1() == w_.dim2(), ErrorKind::invalid_input, "omega must be dim_n x dim_h x dim_h");
    for (Eigen::Index a = 0; a < w_.dim0(); ++a)
      for (Eigen::Index i = 0; i < w_.dim1(); ++i)
        for (Eigen::Index j = 0; j < w_.dim2(); ++j)
          require(w_(a, i, j) == -w_(a, j, i), ErrorKind::invalid_input, "omega is not skew-symmetric");
  }

  /// Sets omega(e_i, e_j) = v and omega(e_j, e_i) = -v.
  void set(Eigen::Index i, Eigen::Index j, const Vec<T>& v) {
    require(i != j || v.isZero(0.0), ErrorKind::invalid_input, "omega(e_i, e_i) must vanish");
    for (Eigen::Index a = 0; a < dim_n(); ++a) {
      w_(a, i, j) = v(a);
      w_(a, j, i) = -v(a);
    }
  }

  Eigen::Index dim_n() const { return w_.dim0(); }
  Eigen::Index dim_h() const { return w_.dim1(); }
  const Rank3<T>& coeffs() const { return w_; }

  Vec<T> on_basis(Eigen::Index i, Eigen::Index j) const { return w_.fiber(i, j); }

  Vec<T> operator()(const Vec<T>& x, const Vec<T>& y) const {
    Vec<T> out = Vec<T>::Zero(dim_n());
    for (Eigen::Index i = 0; i < dim_h(); ++i) {
      if (x(i) == T(0)) continue;
      for (Eigen::Index j = 0; j < dim_h(); ++j) {
        const T s = x(i) * y(j);
        if (s == T(0)) continue;
        for (Eigen::Index a = 0; a < dim_n(); ++a) out(a) += w_(a, i, j) * s;
      }
    }
    return out;
  }

  /// Matrix of omega(x, .): h -> n.
  Mat<T> partial(const Vec<T>& x) const {
    Mat<T> m(dim_n(), dim_h());
    for (Eigen::Index j = 0; j < dim_h(); ++j) m.col(j) = (*this)(x, Vec<T>::Unit(dim_h(), j));
    return m;
  }

 private:
  Rank3<T> w_;
};

/// phi(e_i) = mats[i], acting on n coordinates.
template <Scalar T>
class DerivationValuedMap {
 public:
  DerivationValuedMap() = default;
  DerivationValuedMap(Eigen::Index dim_n, Eigen::Index dim_h)
      : mats_(static_cast<std::size_t>(dim_h), Mat<T>::Zero(dim_n, dim_n)), dim_n_(dim_n) {}
  DerivationValuedMap(std::vector<Mat<T>> mats, Eigen::Index dim_n) : mats_(std::move(mats)), dim_n_(dim_n) {
    for (const auto& m : mats_)
      require(m.rows() == dim_n_ && m.cols() == dim_n_, ErrorKind::invalid_input,
              "phi matrices must be dim_n x dim_n");
  }

  Eigen::Index dim_n() const { return dim_n_; }
  Eigen::Index dim_h() const { return static_cast<Eigen::Index>(mats_.size()); }
  const Mat<T>& on_basis(Eigen::Index i) const { return mats_[static_cast<std::size_t>(i)]; }
  Mat<T>& on_basis(Eigen::Index i) { return mats_[static_cast<std::size_t>(i)]; }
  const std::vector<Mat<T>>& matrices() const { return mats_; }

  Mat<T> operator()(const Vec<T>& x) const {
    Mat<T> m = Mat<T>::Zero(dim_n_, dim_n_);
    for (Eigen::Index i = 0; i < dim_h(); ++i)
      if (x(i) != T(0)) m += x(i) * on_basis(i);
    return m;
  }

  /// Matrix of x -> phi(x) zeta: h -> n.
  Mat<T> acting_on(const Vec<T>& zeta) const {
    Mat<T> m(dim_n_, dim_h());
    for (Eigen::Index i = 0; i < dim_h(); ++i) m.col(i) = on_basis(i) * zeta;
    return m;
  }

 private:
  std::vector<Mat<T>> mats_;
  Eigen::Index dim_n_ = 0;
};

/// The tuple (n, h, omega, phi) plus pairings identifying the preduals c of n and a of h.
template <Scalar T>
struct ExtensionSpec {
  LieAlgebra<T> n;
  LieAlgebra<T> h;
  BilinearMapToN<T> omega;
  DerivationValuedMap<T> phi;
  DualPairing<T> n_pairing;
  DualPairing<T> h_pairing;

  ExtensionSpec(LieAlgebra<T> n_alg, LieAlgebra<T> h_alg, BilinearMapToN<T> om, DerivationValuedMap<T> ph,
                std::optional<DualPairing<T>> np = std::nullopt, std::optional<DualPairing<T>> hp = std::nullopt)
      : n(std::move(n_alg)),
        h(std::move(h_alg)),
        omega(std::move(om)),
        phi(std::move(ph)),
        n_pairing(np ? std::move(*np) : DualPairing<T>::identity(n.dim())),
        h_pairing(hp ? std::move(*hp) : DualPairing<T>::identity(h.dim())) {
    require(omega.dim_n() == n.dim() && omega.dim_h() == h.dim(), ErrorKind::invalid_input,
            "omega dimensions do not match (n, h)");
    require(phi.dim_n() == n.dim() && phi.dim_h() == h.dim(), ErrorKind::invalid_input,
            "phi dimensions do not match (n, h)");
    require(n_pairing.dim() == n.dim() && h_pairing.dim() == h.dim(), ErrorKind::invalid_input,
            "pairing dimensions do not match (n, h)");
  }

  Eigen::Index dim_n() const { return n.dim(); }
  Eigen::Index dim_h() const { return h.dim(); }
  Eigen::Index dim() const { return n.dim() + h.dim(); }
  DualPairing<T> sum_pairing() const { return direct_sum(n_pairing, h_pairing); }
};

struct CompatibilityReport {
  double derivation = 0.0;
  double cocycle = 0.0;
  double representation = 0.0;
  /// The cocycle identity is evaluated as the full cyclic sum in (e, e', e'').
  std::string cocycle_convention = "cyclic";

  double max_residual() const { return std::max({derivation, cocycle, representation}); }
  Verdict verdict() const { return classify(max_residual()); }
};

/// Residuals of the three conditions making the twisted bracket a Lie bracket:
/// every phi(e_i) is a derivation of n, the cocycle identity
///   sum_cyc omega([e, e'], e'') - phi(e) omega(e', e'') = 0,
/// and ad_{omega(e, e')} + phi([e, e']) - [phi(e), phi(e')] = 0.
template <Scalar T>
CompatibilityReport check_compatibility(const ExtensionSpec<T>& spec) {
  const auto& n = spec.n;
  const auto& h = spec.h;
  const Eigen::Index dn = spec.dim_n(), dh = spec.dim_h();
  CompatibilityReport r;

  std::vector<Mat<T>> ad_n(static_cast<std::size_t>(dn));
  for (Eigen::Index p = 0; p < dn; ++p) ad_n[static_cast<std::size_t>(p)] = n.ad(n.basis(p));

  for (Eigen::Index i = 0; i < dh; ++i) {
    const Mat<T>& d = spec.phi.on_basis(i);
    for (Eigen::Index p = 0; p < dn; ++p) {
      const Mat<T>& adp = ad_n[static_cast<std::size_t>(p)];
      const Mat<T> res = d * adp - n.ad(d.col(p)) - adp * d;
      r.derivation = std::max(r.derivation, max_abs(res));
    }
  }

  std::vector<Vec<T>> w(static_cast<std::size_t>(dh * dh));
  for (Eigen::Index i = 0; i < dh; ++i)
    for (Eigen::Index j = 0; j < dh; ++j) w[static_cast<std::size_t>(i * dh + j)] = spec.omega.on_basis(i, j);
  auto om = [&](Eigen::Index i, Eigen::Index j) -> const Vec<T>& { return w[static_cast<std::size_t>(i * dh + j)]; };

  // omega is exactly skew and the h bracket exactly antisymmetric, so both
  // identities are alternating and ordered index sets suffice.
  Vec<T> acc(dn);
  auto add_term = [&](Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    for (const auto& [l, v] : h.basis_bracket(i, j)) acc += v * om(l, k);
    acc -= spec.phi.on_basis(k) * om(i, j);
  };
  for (Eigen::Index i = 0; i < dh; ++i)
    for (Eigen::Index j = i + 1; j < dh; ++j)
      for (Eigen::Index k = j + 1; k < dh; ++k) {
        acc.setZero();
        add_term(i, j, k);
        add_term(j, k, i);
        add_term(k, i, j);
        r.cocycle = std::max(r.cocycle, max_abs(acc));
      }

  for (Eigen::Index i = 0; i < dh; ++i)
    for (Eigen::Index j = i + 1; j < dh; ++j) {
      Mat<T> res = n.ad(om(i, j));
      for (const auto& [l, v] : h.basis_bracket(i, j)) res += v * spec.phi.on_basis(l);
      const Mat<T>& pi = spec.phi.on_basis(i);
      const Mat<T>& pj = spec.phi.on_basis(j);
      res -= pi * pj - pj * pi;
      r.representation = std::max(r.representation, max_abs(res));
    }
  return r;
}

/// A built extension keeps its defining data so that the coadjoint and
/// Poisson formulas can address the n and h blocks.
template <Scalar T>
struct Extension {
  LieAlgebra<T> algebra;
  ExtensionSpec<T> spec;
  CompatibilityReport report;

  DualPairing<T> pairing() const { return spec.sum_pairing(); }
  LiePoissonSpace<T> space() const { return LiePoissonSpace<T>(algebra, pairing()); }
};

/// Structure constants of the twisted bracket on n + h. Throws
/// invalid_extension when the compatibility residual is not below
/// tol::compat_pass unless `force` is set.
template <Scalar T>
Extension<T> build_extension(const ExtensionSpec<T>& spec, bool force = false) {
  CompatibilityReport rep = check_compatibility(spec);
  if (!force && rep.max_residual() >= tol::compat_pass)
    throw Error(ErrorKind::invalid_extension,
                "compatibility violated: derivation " + std::to_string(rep.derivation) + ", cocycle " +
                    std::to_string(rep.cocycle) + ", representation " + std::to_string(rep.representation));
  const Eigen::Index dn = spec.dim_n(), dh = spec.dim_h(), d = dn + dh;
  Rank3<T> c(d, d, d);
  for (Eigen::Index p = 0; p < dn; ++p)
    for (Eigen::Index q = 0; q < dn; ++q)
      for (const auto& [a, v] : spec.n.basis_bracket(p, q)) c(a, p, q) = v;
  for (Eigen::Index i = 0; i < dh; ++i) {
    const Mat<T>& m = spec.phi.on_basis(i);
    for (Eigen::Index q = 0; q < dn; ++q)
      for (Eigen::Index a = 0; a < dn; ++a) {
        c(a, dn + i, q) = m(a, q);
        c(a, q, dn + i) = -m(a, q);
      }
  }
  for (Eigen::Index i = 0; i < dh; ++i)
    for (Eigen::Index j = 0; j < dh; ++j) {
      for (Eigen::Index a = 0; a < dn; ++a) c(a, dn + i, dn + j) = spec.omega.coeffs()(a, i, j);
      for (const auto& [b, v] : spec.h.basis_bracket(i, j)) c(dn + b, dn + i, dn + j) = v;
    }
  std::vector<std::string> labels;
  for (const auto& l : spec.n.labels()) labels.push_back("n." + l);
  for (const auto& l : spec.h.labels()) labels.push_back("h." + l);
  LieAlgebra<T> alg(spec.n.name() + "(+)" + spec.h.name(), std::move(c), std::move(labels), Validation::unchecked);
  return Extension<T>{std::move(alg), spec, rep};
}

/// ad^*_{(zeta, eta)}(c, a) =
///   (ad^*_zeta c + phi(eta)^* c,  omega(eta, .)^* c - (phi(.) zeta)^* c + ad^*_eta a)
template <Scalar T>
Vec<T> coadjoint_extension(const ExtensionSpec<T>& spec, const Vec<T>& zeta_eta, const Vec<T>& c_a) {
  const Eigen::Index dn = spec.dim_n(), dh = spec.dim_h();
  require(zeta_eta.size() == dn + dh && c_a.size() == dn + dh, ErrorKind::invalid_input,
          "coadjoint_extension dimension mismatch");
  const Vec<T> zeta = zeta_eta.head(dn), eta = zeta_eta.tail(dh);
  const Vec<T> c = c_a.head(dn), a = c_a.tail(dh);
  const auto& np = spec.n_pairing;
  const auto& hp = spec.h_pairing;
  Vec<T> out(dn + dh);
  out.head(dn) = ad_star(spec.n, np, zeta, c) + np.adjoint_apply(spec.phi(eta), c, np);
  out.tail(dh) = np.adjoint_apply(spec.omega.partial(eta), c, hp) -
                 np.adjoint_apply(spec.phi.acting_on(zeta), c, hp) + ad_star(spec.h, hp, eta, a);
  return out;
}

struct ClosureReport {
  double phi_star = 0.0;        // phi(e)^* c leaving c
  double phi_dot_star = 0.0;    // (phi(.) z)^* c leaving a
  double omega_star = 0.0;      // omega(e, .)^* c leaving a
  double n_coadjoint = 0.0;     // ad^*_n c leaving c
  double h_coadjoint = 0.0;     // ad^*_h a leaving a

  double max_residual() const { return std::max({phi_star, phi_dot_star, omega_star, n_coadjoint, h_coadjoint}); }
};

/// Invariance of designated predual subspaces c (columns of c_sub, in n-predual
/// coordinates) and a (columns of a_sub) under the maps the predual theorem
/// constrains, measured as complement-projection norms over basis directions.
template <Scalar T>
ClosureReport check_predual_closure(const ExtensionSpec<T>& spec, const Mat<T>& c_sub, const Mat<T>& a_sub) {
  const Eigen::Index dn = spec.dim_n(), dh = spec.dim_h();
  require(c_sub.rows() == dn && a_sub.rows() == dh, ErrorKind::invalid_input, "subspace basis dimension mismatch");
  require(numerical_rank(c_sub) == c_sub.cols() && numerical_rank(a_sub) == a_sub.cols(),
          ErrorKind::invalid_input, "predual subspace bases must be linearly independent");
  const Mat<T> qc = orthonormal_span(c_sub), qa = orthonormal_span(a_sub);
  const Mat<T> pc = complement_projector(qc, dn), pa = complement_projector(qa, dh);
  const auto& np = spec.n_pairing;
  const auto& hp = spec.h_pairing;
  ClosureReport r;
  auto resid = [](const Mat<T>& proj, const Mat<T>& images) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < images.cols(); ++k) m = std::max(m, (proj * images.col(k)).norm());
    return m;
  };
  for (Eigen::Index i = 0; i < dh; ++i) {
    const Vec<T> e = spec.h.basis(i);
    r.phi_star = std::max(r.phi_star, resid(pc, np.adjoint_matrix(spec.phi.on_basis(i), np) * qc));
    r.omega_star = std::max(r.omega_star, resid(pa, np.adjoint_matrix(spec.omega.partial(e), hp) * qc));
    r.h_coadjoint = std::max(r.h_coadjoint, resid(pa, hp.adjoint_matrix(spec.h.ad(e), hp) * qa));
  }
  for (Eigen::Index p = 0; p < dn; ++p) {
    const Vec<T> z = spec.n.basis(p);
    r.phi_dot_star = std::max(r.phi_dot_star, resid(pa, np.adjoint_matrix(spec.phi.acting_on(z), hp) * qc));
    r.n_coadjoint = std::max(r.n_coadjoint, resid(pc, np.adjoint_matrix(spec.n.ad(z), np) * qc));
  }
  return r;
}

/// Section data of an ambient algebra: columns of `ideal` span n inside g,
/// columns of `map` are s(e_i). psi^{-1}(zeta, eta) = ideal * zeta + map * eta.
template <Scalar T>
struct Section {
  Mat<T> map;
  Mat<T> ideal;
  /// Optional projection g -> h; when present it must satisfy pi s = id and pi|n = 0.
  std::optional<Mat<T>> projection;
};

template <Scalar T>
struct SectionData {
  ExtensionSpec<T> spec;
  Mat<T> psi_inverse;  // g coordinates of (zeta, eta)
  Mat<T> psi;          // (zeta, eta) coordinates of g
};

/// omega(e, e') = [s e, s e'] - s[e, e'],  phi(e) = [s e, .] restricted to n.
/// The bracket on h is the quotient bracket pi[s e, s e'] unless `h_alg` is supplied.
template <Scalar T>
SectionData<T> section_to_data(const LieAlgebra<T>& g, const Section<T>& s,
                               const std::optional<LieAlgebra<T>>& h_alg = std::nullopt) {
  const Eigen::Index dg = g.dim(), dn = s.ideal.cols(), dh = s.map.cols();
  require(s.ideal.rows() == dg && s.map.rows() == dg, ErrorKind::invalid_input, "section rows must equal dim g");
  require(dn + dh == dg, ErrorKind::invalid_input, "dim n + dim h must equal dim g");
  Mat<T> psi_inv(dg, dg);
  psi_inv << s.ideal, s.map;
  require(numerical_rank(psi_inv) == dg, ErrorKind::invalid_input,
          "image of the section meets the ideal nontrivially");
  const Mat<T> psi = psi_inv.inverse();
  const Mat<T> to_n = psi.topRows(dn);
  const Mat<T> pi = psi.bottomRows(dh);
  if (s.projection) {
    require(s.projection->rows() == dh && s.projection->cols() == dg, ErrorKind::invalid_input,
            "projection must be dim h x dim g");
    require(max_abs(Mat<T>(*s.projection * s.map - Mat<T>::Identity(dh, dh))) < tol::construction,
            ErrorKind::invalid_input, "pi o s is not the identity");
    require(max_abs(Mat<T>(*s.projection * s.ideal)) < tol::construction, ErrorKind::invalid_input,
            "projection does not vanish on the ideal");
  }

  // [g, n] must stay in n.
  const Mat<T> off_ideal = complement_projector(orthonormal_span(s.ideal), dg);
  for (Eigen::Index a = 0; a < dg; ++a)
    for (Eigen::Index p = 0; p < dn; ++p) {
      const double r = (off_ideal * g.bracket(g.basis(a), s.ideal.col(p))).norm();
      require(r < tol::verification, ErrorKind::not_an_ideal,
              "span of the ideal basis is not invariant (residual " + std::to_string(r) + ")");
    }

  Rank3<T> cn(dn, dn, dn);
  for (Eigen::Index p = 0; p < dn; ++p)
    for (Eigen::Index q = p + 1; q < dn; ++q) {
      const Vec<T> v = to_n * g.bracket(s.ideal.col(p), s.ideal.col(q));
      for (Eigen::Index a = 0; a < dn; ++a) {
        cn(a, p, q) = v(a);
        cn(a, q, p) = -v(a);
      }
    }
  LieAlgebra<T> n_alg("ideal", std::move(cn), {}, Validation::unchecked);

  LieAlgebra<T> h;
  if (h_alg) {
    require(h_alg->dim() == dh, ErrorKind::invalid_input, "supplied h has the wrong dimension");
    h = *h_alg;
  } else {
    Rank3<T> ch(dh, dh, dh);
    for (Eigen::Index i = 0; i < dh; ++i)
      for (Eigen::Index j = i + 1; j < dh; ++j) {
        const Vec<T> v = pi * g.bracket(s.map.col(i), s.map.col(j));
        for (Eigen::Index a = 0; a < dh; ++a) {
          ch(a, i, j) = v(a);
          ch(a, j, i) = -v(a);
        }
      }
    h = LieAlgebra<T>("quotient", std::move(ch), {}, Validation::unchecked);
  }

  BilinearMapToN<T> omega(dn, dh);
  for (Eigen::Index i = 0; i < dh; ++i)
    for (Eigen::Index j = i + 1; j < dh; ++j) {
      const Vec<T> w = g.bracket(s.map.col(i), s.map.col(j)) - s.map * h.bracket(h.basis(i), h.basis(j));
      const double leak = (pi * w).norm();
      require(leak < tol::verification, ErrorKind::section_inconsistency,
              "omega(e_" + std::to_string(i) + ", e_" + std::to_string(j) + ") leaves the ideal (residual " +
                  std::to_string(leak) + ")");
      omega.set(i, j, to_n * w);
    }
  DerivationValuedMap<T> phi(dn, dh);
  for (Eigen::Index i = 0; i < dh; ++i)
    for (Eigen::Index p = 0; p < dn; ++p) phi.on_basis(i).col(p) = to_n * g.bracket(s.map.col(i), s.ideal.col(p));

  return SectionData<T>{ExtensionSpec<T>(std::move(n_alg), std::move(h), std::move(omega), std::move(phi)), psi_inv,
                        psi};
}

/// Data of the section s + lambda for a linear lambda: h -> n (dim_n x dim_h):
///   phi'(e)     = phi(e) + ad_{lambda e}
///   omega'(e,e') = omega(e,e') + phi(e) lambda e' - phi(e') lambda e + [lambda e, lambda e'] - lambda [e, e']
/// The result is isomorphic to the original via (zeta, eta) -> (zeta + lambda eta, eta).
template <Scalar T>
ExtensionSpec<T> change_section(const ExtensionSpec<T>& spec, const Mat<T>& lambda) {
  const Eigen::Index dn = spec.dim_n(), dh = spec.dim_h();
  require(lambda.rows() == dn && lambda.cols() == dh, ErrorKind::invalid_input, "lambda must be dim_n x dim_h");
  DerivationValuedMap<T> phi(dn, dh);
  for (Eigen::Index i = 0; i < dh; ++i)
    phi.on_basis(i) = spec.phi.on_basis(i) + spec.n.ad(Vec<T>(lambda.col(i)));
  BilinearMapToN<T> omega(dn, dh);
  for (Eigen::Index i = 0; i < dh; ++i)
    for (Eigen::Index j = i + 1; j < dh; ++j) {
      const Vec<T> li = lambda.col(i), lj = lambda.col(j);
      const Vec<T> w = spec.omega.on_basis(i, j) + spec.phi.on_basis(i) * lj - spec.phi.on_basis(j) * li +
                       spec.n.bracket(li, lj) - lambda * spec.h.bracket(spec.h.basis(i), spec.h.basis(j));
      omega.set(i, j, w);
    }
  return ExtensionSpec<T>(spec.n, spec.h, std::move(omega), std::move(phi), spec.n_pairing, spec.h_pairing);
}

}  // namespace lpext
