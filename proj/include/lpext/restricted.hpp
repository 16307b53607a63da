#pragma once

// Truncated model of the restricted algebra of block operators on
// H = H+ (+) H-, its predual, and the extension of the restricted Lie-Poisson
// space by the compact operators on H+.
//
// All four operator ideals collapse to full matrix spaces at finite rank; the
// block layout and the norms keep the distinction. Scalars are complex.
//
// The bracket on n = matrices on H+ is the NEGATIVE commutator
//   [r, r']_n = -(r r' - r' r),
// and every formula below uses it wherever an n-bracket appears.

#include <lpext/poisson.hpp>

#include <random>
#include <utility>

namespace lpext::restricted {

using CMat = Mat<cdouble>;
using CVec = Vec<cdouble>;

struct BlockDims {
  Eigen::Index plus = 0;
  Eigen::Index minus = 0;

  Eigen::Index total() const { return plus + minus; }
  /// Number of complex coordinates of one block operator.
  Eigen::Index coords() const { return total() * total(); }
  bool operator==(const BlockDims&) const = default;
};

/// 2 x 2 block matrix (pp, pm; mp, mm). The tag separates operators from preduals.
template <class Tag>
struct Blocks {
  CMat pp, mm, pm, mp;

  Blocks() = default;
  Blocks(CMat pp_, CMat mm_, CMat pm_, CMat mp_)
      : pp(std::move(pp_)), mm(std::move(mm_)), pm(std::move(pm_)), mp(std::move(mp_)) {
    require(pp.rows() == pp.cols() && mm.rows() == mm.cols() && pm.rows() == pp.rows() && pm.cols() == mm.rows() &&
                mp.rows() == mm.rows() && mp.cols() == pp.rows(),
            ErrorKind::invalid_input, "inconsistent block shapes");
  }

  static Blocks zero(BlockDims d) {
    return Blocks(CMat::Zero(d.plus, d.plus), CMat::Zero(d.minus, d.minus), CMat::Zero(d.plus, d.minus),
                  CMat::Zero(d.minus, d.plus));
  }

  static Blocks from_full(const CMat& m, BlockDims d) {
    require(m.rows() == d.total() && m.cols() == d.total(), ErrorKind::invalid_input, "full matrix has wrong size");
    return Blocks(m.topLeftCorner(d.plus, d.plus), m.bottomRightCorner(d.minus, d.minus),
                  m.topRightCorner(d.plus, d.minus), m.bottomLeftCorner(d.minus, d.plus));
  }

  /// Coordinates: pp, mm, pm, mp, each row-major.
  static Blocks from_coords(const CVec& v, BlockDims d) {
    require(v.size() == d.coords(), ErrorKind::invalid_input, "block coordinate vector has wrong length");
    Eigen::Index o = 0;
    auto take = [&](Eigen::Index r, Eigen::Index c) {
      CMat m = unflatten<cdouble>(v.segment(o, r * c), r, c);
      o += r * c;
      return m;
    };
    CMat pp = take(d.plus, d.plus);
    CMat mm = take(d.minus, d.minus);
    CMat pm = take(d.plus, d.minus);
    CMat mp = take(d.minus, d.plus);
    return Blocks(std::move(pp), std::move(mm), std::move(pm), std::move(mp));
  }

  template <class Rng>
  static Blocks random(BlockDims d, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    CVec v(d.coords());
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = cdouble(nd(rng), nd(rng));
    return from_coords(v, d);
  }

  /// Block-diagonal operator with diagonal entries `plus` on H+ and `minus` on H-.
  static Blocks diagonal(const CVec& plus, const CVec& minus) {
    BlockDims d{plus.size(), minus.size()};
    Blocks b = zero(d);
    b.pp.diagonal() = plus;
    b.mm.diagonal() = minus;
    return b;
  }

  BlockDims dims() const { return {pp.rows(), mm.rows()}; }

  CMat full() const {
    const BlockDims d = dims();
    CMat m(d.total(), d.total());
    m << pp, pm, mp, mm;
    return m;
  }

  CVec coords() const {
    CVec v(dims().coords());
    v << flatten<cdouble>(pp), flatten<cdouble>(mm), flatten<cdouble>(pm), flatten<cdouble>(mp);
    return v;
  }

  Blocks operator+(const Blocks& o) const { return Blocks(pp + o.pp, mm + o.mm, pm + o.pm, mp + o.mp); }
  Blocks operator-(const Blocks& o) const { return Blocks(pp - o.pp, mm - o.mm, pm - o.pm, mp - o.mp); }
  Blocks operator*(cdouble s) const { return Blocks(s * pp, s * mm, s * pm, s * mp); }
  Blocks operator-() const { return *this * cdouble(-1); }
};

struct OperatorTag {};
struct PredualTag {};
using BlockOperator = Blocks<OperatorTag>;
using BlockPredual = Blocks<PredualTag>;

inline void check_dims(BlockDims a, BlockDims b) {
  require(a == b, ErrorKind::invalid_input, "block dimension mismatch");
}

inline CMat commutator(const CMat& a, const CMat& b) { return a * b - b * a; }

/// Negative commutator, the bracket of n.
inline CMat n_bracket(const CMat& a, const CMat& b) { return b * a - a * b; }

/// |X+|_op + |X-|_op + |X+-|_HS + |X-+|_HS.
inline double block_norm(const BlockOperator& x) {
  auto op = [](const CMat& m) { return m.size() == 0 ? 0.0 : m.operatorNorm(); };
  return op(x.pp) + op(x.mm) + x.pm.norm() + x.mp.norm();
}

/// trace(s+ X+ + s- X- + s+- X-+ + s-+ X+-).
inline cdouble block_pairing(const BlockPredual& s, const BlockOperator& x) {
  check_dims(s.dims(), x.dims());
  return (s.pp * x.pp).trace() + (s.mm * x.mm).trace() + (s.pm * x.mp).trace() + (s.mp * x.pm).trace();
}

/// phi(X) rho = [X+, rho].
inline CMat restricted_phi(const BlockOperator& x, const CMat& rho) {
  require(rho.rows() == x.dims().plus && rho.cols() == x.dims().plus, ErrorKind::invalid_input,
          "rho must act on H+");
  return commutator(x.pp, rho);
}

/// omega(X, X') = X+- X'-+ - X'+- X-+.
inline CMat restricted_omega(const BlockOperator& x, const BlockOperator& xp) {
  check_dims(x.dims(), xp.dims());
  return x.pm * xp.mp - xp.pm * x.mp;
}

struct RestrictedElement {
  CMat rho;
  BlockOperator x;
};

/// [(rho, X), (rho', X')] =
///   ([rho, rho']_n + [X+, rho'] - [X'+, rho] + X+- X'-+ - X'+- X-+,  [X, X']).
inline RestrictedElement restricted_bracket(const RestrictedElement& a, const RestrictedElement& b) {
  check_dims(a.x.dims(), b.x.dims());
  // grouped so that swapping the arguments negates every term exactly
  const CMat twist = restricted_phi(a.x, b.rho) - restricted_phi(b.x, a.rho);
  CMat first = n_bracket(a.rho, b.rho) + twist + restricted_omega(a.x, b.x);
  return {std::move(first), BlockOperator::from_full(commutator(a.x.full(), b.x.full()), a.x.dims())};
}

struct DualMaps {
  CMat phi_star;             // phi(X)^* kappa = -[X+, kappa]
  BlockPredual phi_dot_star;  // (phi(.) rho)^* kappa = ([rho, kappa], 0; 0, 0)
  BlockPredual omega_star;    // omega(X, .)^* kappa = (0, kappa X+-; -X-+ kappa, 0)
};

inline DualMaps restricted_dual_maps(const BlockOperator& x, const CMat& rho, const CMat& kappa) {
  const BlockDims d = x.dims();
  require(rho.rows() == d.plus && rho.cols() == d.plus && kappa.rows() == d.plus && kappa.cols() == d.plus,
          ErrorKind::invalid_input, "rho and kappa must act on H+");
  DualMaps m;
  m.phi_star = -commutator(x.pp, kappa);
  m.phi_dot_star = BlockPredual::zero(d);
  m.phi_dot_star.pp = commutator(rho, kappa);
  m.omega_star = BlockPredual::zero(d);
  m.omega_star.pm = kappa * x.pm;
  m.omega_star.mp = -x.mp * kappa;
  return m;
}

/// Largest mismatch, over random (X, rho, kappa) and basis test elements,
/// between the closed-form dual maps and the pairings they must reproduce:
///   tr(phi_star E) = tr(kappa phi(X) E),  <phi_dot_star, Y> = tr(kappa phi(Y) rho),
///   <omega_star, Y> = tr(kappa omega(X, Y)).
template <class Rng>
double dual_maps_residual(BlockDims d, Rng& rng, int draws) {
  const Eigen::Index np = d.plus * d.plus, m = d.coords();
  std::normal_distribution<double> nd;
  auto rnd = [&](Eigen::Index r, Eigen::Index c) {
    CMat a(r, c);
    for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = cdouble(nd(rng), nd(rng));
    return a;
  };
  double r = 0.0;
  for (int t = 0; t < draws; ++t) {
    const BlockOperator x = BlockOperator::random(d, rng);
    const CMat rho = rnd(d.plus, d.plus), kappa = rnd(d.plus, d.plus);
    const DualMaps dm = restricted_dual_maps(x, rho, kappa);
    for (Eigen::Index p = 0; p < np; ++p) {
      const CMat e = unflatten<cdouble>(CVec::Unit(np, p), d.plus, d.plus);
      r = std::max(r, std::abs((dm.phi_star * e).trace() - (kappa * restricted_phi(x, e)).trace()));
    }
    for (Eigen::Index q = 0; q < m; ++q) {
      const BlockOperator y = BlockOperator::from_coords(CVec::Unit(m, q), d);
      r = std::max(r, std::abs(block_pairing(dm.phi_dot_star, y) - (kappa * restricted_phi(y, rho)).trace()));
      r = std::max(r, std::abs(block_pairing(dm.omega_star, y) - (kappa * restricted_omega(x, y)).trace()));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// States, functions, bracket and Hamiltonian field on K(H+) (+) L1(H, H+)

struct RestrictedState {
  CMat kappa;
  BlockPredual sigma;

  BlockDims dims() const { return sigma.dims(); }

  template <class Rng>
  static RestrictedState random(BlockDims d, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    CMat k(d.plus, d.plus);
    for (Eigen::Index i = 0; i < k.size(); ++i) k(i) = cdouble(nd(rng), nd(rng));
    return {std::move(k), BlockPredual::random(d, rng, scale)};
  }
};

/// Coordinates of (kappa, sigma) in the generic extension layout: kappa
/// (row-major) first, then the block coordinates of sigma.
inline CVec to_coords(const RestrictedState& s) {
  const BlockDims d = s.dims();
  require(s.kappa.rows() == d.plus && s.kappa.cols() == d.plus, ErrorKind::invalid_input, "kappa must act on H+");
  CVec v(d.plus * d.plus + d.coords());
  v << flatten<cdouble>(s.kappa), s.sigma.coords();
  return v;
}

inline RestrictedState state_from_coords(const CVec& v, BlockDims d) {
  require(v.size() == d.plus * d.plus + d.coords(), ErrorKind::invalid_input, "state coordinate length mismatch");
  return {unflatten<cdouble>(v.head(d.plus * d.plus), d.plus, d.plus),
          BlockPredual::from_coords(v.tail(d.coords()), d)};
}

/// Partial derivatives (df/dkappa, df/dsigma), defined by
///   df[dk, ds] = Re( tr(dk df/dkappa) + <ds, df/dsigma> ).
struct RestrictedGradient {
  CMat d_kappa;
  BlockOperator d_sigma;
};

inline CVec gradient_to_coords(const RestrictedGradient& g) {
  const BlockDims d = g.d_sigma.dims();
  CVec v(d.plus * d.plus + d.coords());
  v << flatten<cdouble>(g.d_kappa), g.d_sigma.coords();
  return v;
}

inline RestrictedGradient gradient_from_coords(const CVec& v, BlockDims d) {
  return {unflatten<cdouble>(v.head(d.plus * d.plus), d.plus, d.plus),
          BlockOperator::from_coords(v.tail(d.coords()), d)};
}

/// Functions of (kappa, sigma) live on the generic coordinates so that the
/// function algebra and finite-difference machinery apply unchanged.
using RestrictedFunction = SmoothFunction<cdouble>;

inline RestrictedFunction make_function(BlockDims d, std::function<double(const RestrictedState&)> eval,
                                        std::function<RestrictedGradient(const RestrictedState&)> grad = nullptr) {
  RestrictedFunction f;
  f.eval = [d, eval](const CVec& v) { return eval(state_from_coords(v, d)); };
  if (grad) f.grad = [d, grad](const CVec& v) { return gradient_to_coords(grad(state_from_coords(v, d))); };
  return f;
}

/// Gram of the block pairing in block coordinates.
inline CMat block_gram(BlockDims d) {
  const Eigen::Index m = d.coords();
  CMat g(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const BlockPredual s = BlockPredual::from_coords(CVec::Unit(m, i), d);
    for (Eigen::Index j = 0; j < m; ++j) g(i, j) = block_pairing(s, BlockOperator::from_coords(CVec::Unit(m, j), d));
  }
  return g;
}

inline DualPairing<cdouble> state_pairing(BlockDims d) {
  return direct_sum(trace_pairing<cdouble>(d.plus), DualPairing<cdouble>(block_gram(d)));
}

inline RestrictedGradient restricted_gradient(const RestrictedFunction& f, const RestrictedState& s) {
  return gradient_from_coords(functional_derivative(f, to_coords(s), state_pairing(s.dims())), s.dims());
}

/// {f, g}(kappa, sigma) = tr(sigma [fs, gs])
///   + tr(kappa ([fk, gk]_n - [P+ gs P+, fk] + [P+ fs P+, gk] + fs+- gs-+ - gs+- fs-+)).
inline double restricted_poisson_bracket(const RestrictedFunction& f, const RestrictedFunction& g,
                                         const RestrictedState& s) {
  const RestrictedGradient df = restricted_gradient(f, s), dg = restricted_gradient(g, s);
  const CMat& fk = df.d_kappa;
  const CMat& gk = dg.d_kappa;
  const BlockOperator& fs = df.d_sigma;
  const BlockOperator& gs = dg.d_sigma;
  const cdouble sigma_term = (s.sigma.full() * commutator(fs.full(), gs.full())).trace();
  const CMat inner = n_bracket(fk, gk) - commutator(gs.pp, fk) + commutator(fs.pp, gk) + fs.pm * gs.mp - gs.pm * fs.mp;
  return (sigma_term + (s.kappa * inner).trace()).real();
}

/// X_h(kappa, sigma) = -( [kappa, hk]_n + [kappa, P+ hs P+],
///   (0, kappa hs+-; -hs-+ kappa, 0) - ([hk, kappa], 0; 0, 0) + [sigma, hs] ).
inline RestrictedState restricted_hamiltonian_field(const RestrictedFunction& h, const RestrictedState& s) {
  const RestrictedGradient dh = restricted_gradient(h, s);
  const BlockDims d = s.dims();
  CMat k_dot = -(n_bracket(s.kappa, dh.d_kappa) + commutator(s.kappa, dh.d_sigma.pp));
  BlockPredual off = BlockPredual::zero(d);
  off.pm = s.kappa * dh.d_sigma.pm;
  off.mp = -dh.d_sigma.mp * s.kappa;
  BlockPredual diag = BlockPredual::zero(d);
  diag.pp = commutator(dh.d_kappa, s.kappa);
  const BlockPredual coad = BlockPredual::from_full(commutator(s.sigma.full(), dh.d_sigma.full()), d);
  return {std::move(k_dot), -(off - diag + coad)};
}

// ---------------------------------------------------------------------------
// Equivalent generic extension data

/// n = matrices on H+ with the negative commutator and the trace pairing,
/// h = block operators with the commutator and the block pairing, with
/// phi and omega evaluated on basis elements.
inline ExtensionSpec<cdouble> restricted_spec(BlockDims d) {
  require(d.plus > 0 && d.minus >= 0, ErrorKind::invalid_input, "restricted dims need n+ > 0");
  const Eigen::Index m = d.coords(), np = d.plus * d.plus;
  std::vector<BlockOperator> basis;
  basis.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis.push_back(BlockOperator::from_coords(CVec::Unit(m, i), d));

  Rank3<cdouble> c(m, m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const CVec v = BlockOperator::from_full(commutator(basis[i].full(), basis[j].full()), d).coords();
      for (Eigen::Index k = 0; k < m; ++k) c(k, i, j) = v(k);
    }
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < m; ++i) labels.push_back("X" + std::to_string(i));
  LieAlgebra<cdouble> h("block" + std::to_string(d.plus) + "_" + std::to_string(d.minus), std::move(c),
                        std::move(labels));

  DerivationValuedMap<cdouble> phi(np, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index p = 0; p < np; ++p)
      phi.on_basis(i).col(p) =
          flatten<cdouble>(restricted_phi(basis[i], unflatten<cdouble>(CVec::Unit(np, p), d.plus, d.plus)));
  BilinearMapToN<cdouble> omega(np, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) omega.set(i, j, flatten<cdouble>(restricted_omega(basis[i], basis[j])));

  return ExtensionSpec<cdouble>(gl<cdouble>(d.plus, -1.0), std::move(h), std::move(omega), std::move(phi),
                                trace_pairing<cdouble>(d.plus), DualPairing<cdouble>(block_gram(d)));
}

// ---------------------------------------------------------------------------
// Built-in functions

namespace functions {

/// f = Re( tr(kappa Y0) + <sigma, X0> ).
inline RestrictedFunction linear(const CMat& y0, const BlockOperator& x0) {
  const BlockDims d = x0.dims();
  return make_function(
      d, [y0, x0](const RestrictedState& s) { return ((s.kappa * y0).trace() + block_pairing(s.sigma, x0)).real(); },
      [y0, x0](const RestrictedState&) { return RestrictedGradient{y0, x0}; });
}

/// f = Re( sum_k a_k tr(kappa^k) + sum_k b_k tr(sigma^k) ), sigma as a full matrix.
inline RestrictedFunction trace_poly(BlockDims d, std::vector<cdouble> a, std::vector<cdouble> b) {
  auto value = [](const CMat& m, const std::vector<cdouble>& co) {
    CMat p = CMat::Identity(m.rows(), m.cols());
    cdouble s(0);
    for (const auto& ck : co) {
      s += ck * p.trace();
      p = p * m;
    }
    return s;
  };
  auto deriv = [](const CMat& m, const std::vector<cdouble>& co) {
    CMat g = CMat::Zero(m.rows(), m.cols()), p = CMat::Identity(m.rows(), m.cols());
    for (std::size_t k = 1; k < co.size(); ++k) {
      g += co[k] * double(k) * p;
      p = p * m;
    }
    return g;
  };
  return make_function(
      d,
      [a, b, value](const RestrictedState& s) { return (value(s.kappa, a) + value(s.sigma.full(), b)).real(); },
      [a, b, d, deriv](const RestrictedState& s) {
        return RestrictedGradient{deriv(s.kappa, a), BlockOperator::from_full(deriv(s.sigma.full(), b), d)};
      });
}

/// f = Re tr(kappa A sigma+ B): couples the two slots.
inline RestrictedFunction coupling(BlockDims d, const CMat& a, const CMat& b) {
  return make_function(
      d, [a, b](const RestrictedState& s) { return (s.kappa * a * s.sigma.pp * b).trace().real(); },
      [a, b, d](const RestrictedState& s) {
        RestrictedGradient g{(a * s.sigma.pp * b), BlockOperator::zero(d)};
        g.d_sigma.pp = b * s.kappa * a;
        return g;
      });
}

}  // namespace functions

}  // namespace lpext::restricted
