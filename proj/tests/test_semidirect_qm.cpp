#include "support.hpp"

#include <lpext/semidirect_qm.hpp>

#include <gtest/gtest.h>

using namespace lpext;
using namespace lpext::qm;
using lpext::test::make_rng;
using lpext::test::rand_mat;
using lpext::test::rand_vec;

namespace {

CMat hermitian(Eigen::Index n, std::mt19937_64& rng) {
  const CMat a = rand_mat<cdouble>(n, n, rng);
  return (a + a.adjoint()) / 2.0;
}

double max_abs_entry(const CMat& m) { return m.cwiseAbs().maxCoeff(); }
double max_abs_entry(const CVec& v) { return v.cwiseAbs().maxCoeff(); }

/// f = Re( <v | a> + tr(rho B) ): linear in both slots.
QFunction linear_function(const CVec& a, const CMat& b) {
  const Eigen::Index n = a.size();
  return make_function(
      n, [a, b](const QState& s) { return (s.v.dot(a) + (s.rho * b).trace()).real(); },
      [a, b](const QState&) { return QGradient{a, b}; });
}

std::vector<QFunction> named_hamiltonians(Eigen::Index n, std::mt19937_64& rng) {
  return {hamiltonians::linear_rho(hermitian(n, rng)), hamiltonians::quadratic_v(hermitian(n, rng)),
          hamiltonians::coupled(hermitian(n, rng), hermitian(n, rng), 0.7)};
}

}  // namespace

TEST(QState, CoordinatesRoundTrip) {
  auto rng = make_rng(101);
  const QState s = QState::random(3, rng);
  const QState r = state_from_coords(to_coords(s), 3);
  EXPECT_EQ(r.v, s.v);
  EXPECT_EQ(r.rho, s.rho);
  EXPECT_EQ(to_coords(s).head(3), CVec(s.v.conjugate()));
  QState bad{CVec::Zero(3), CMat::Zero(2, 2)};
  EXPECT_THROW(to_coords(bad), Error);
  EXPECT_THROW(state_from_coords(CVec::Zero(5), 2), Error);
}

TEST(Hamiltonians, GradientsMatchFiniteDifferences) {
  auto rng = make_rng(102);
  const Eigen::Index n = 3;
  const DualPairing<cdouble> p = state_pairing(n);
  for (const QFunction& h : named_hamiltonians(n, rng))
    for (int t = 0; t < 10; ++t) {
      const CVec b = to_coords(QState::random(n, rng));
      const CVec fd = p.gram().fullPivLu().solve(test::fd_gradient<cdouble>(h.eval, b));
      const CVec an = functional_derivative(h, b, p);
      EXPECT_LT(max_abs_entry(CVec(fd - an)), 1e-6 * std::max(1.0, max_abs_entry(an)));
    }
}

TEST(Hamiltonians, RejectNonHermitianOrMismatched) {
  auto rng = make_rng(103);
  const CMat a = rand_mat<cdouble>(3, 3, rng);
  EXPECT_THROW(hamiltonians::quadratic_v(a), Error);
  EXPECT_THROW(hamiltonians::coupled(hermitian(3, rng), a, 1.0), Error);
  EXPECT_THROW(hamiltonians::coupled(hermitian(3, rng), hermitian(2, rng), 1.0), Error);
}

TEST(Bracket, RhoOnlyFunctions) {
  auto rng = make_rng(104);
  const Eigen::Index n = 3;
  for (int t = 0; t < 20; ++t) {
    const QState s = QState::random(n, rng);
    const CMat b1 = rand_mat<cdouble>(n, n, rng), b2 = rand_mat<cdouble>(n, n, rng);
    const QFunction f = linear_function(CVec::Zero(n), b1);
    const QFunction g = linear_function(CVec::Zero(n), b2);
    EXPECT_NEAR(qm_bracket(f, g, s), (s.rho * (b1 * b2 - b2 * b1)).trace().real(), 1e-12);
  }
}

TEST(Bracket, VOnlyFunctionsCommute) {
  auto rng = make_rng(105);
  const Eigen::Index n = 3;
  for (int t = 0; t < 20; ++t) {
    const QState s = QState::random(n, rng);
    const QFunction f = hamiltonians::quadratic_v(hermitian(n, rng));
    const QFunction g = linear_function(rand_vec<cdouble>(n, rng), CMat::Zero(n, n));
    EXPECT_EQ(qm_bracket(f, g, s), 0.0);
  }
}

TEST(Bracket, MatchesGenericSemidirectBracket) {
  auto rng = make_rng(106);
  for (Eigen::Index n : {2, 3}) {
    const ExtensionSpec<cdouble> spec = qm_spec(n);
    EXPECT_EQ(check_compatibility(spec).max_residual(), 0.0);
    for (int t = 0; t < 30; ++t) {
      const QState s = QState::random(n, rng);
      const QFunction f = linear_function(rand_vec<cdouble>(n, rng), rand_mat<cdouble>(n, n, rng));
      const QFunction g = t % 2 ? linear_function(rand_vec<cdouble>(n, rng), rand_mat<cdouble>(n, n, rng))
                                : hamiltonians::coupled(hermitian(n, rng), hermitian(n, rng), 0.4);
      EXPECT_NEAR(qm_bracket(f, g, s), extension_poisson_bracket(f, g, to_coords(s), spec), 1e-10);
      EXPECT_LT(std::abs(qm_bracket(f, g, s) + qm_bracket(g, f, s)), 1e-12);
    }
  }
}

TEST(Bracket, ExplicitFormula) {
  // {f, g} = Re[ tr(rho [f_rho, g_rho]) + v^H (f_rho g_v - g_rho f_v) ] for linear f, g
  auto rng = make_rng(107);
  const Eigen::Index n = 3;
  for (int t = 0; t < 20; ++t) {
    const QState s = QState::random(n, rng);
    const CVec a1 = rand_vec<cdouble>(n, rng), a2 = rand_vec<cdouble>(n, rng);
    const CMat b1 = rand_mat<cdouble>(n, n, rng), b2 = rand_mat<cdouble>(n, n, rng);
    cdouble expect = (s.rho * (b1 * b2 - b2 * b1)).trace();
    const CVec w = b1 * a2 - b2 * a1;
    for (Eigen::Index k = 0; k < n; ++k) expect += std::conj(s.v(k)) * w(k);
    EXPECT_NEAR(qm_bracket(linear_function(a1, b1), linear_function(a2, b2), s), expect.real(), 1e-12);
  }
}

TEST(HamiltonRhs, LinearRhoHamiltonian) {
  auto rng = make_rng(108);
  const CMat h0 = hermitian(3, rng);
  const QState s = QState::random(3, rng);
  const QState r = qm_hamilton_rhs(hamiltonians::linear_rho(h0), s);
  EXPECT_LT(max_abs_entry(CVec(r.v + h0 * s.v)), 1e-13);
  EXPECT_LT(max_abs_entry(CMat(r.rho - (h0 * s.rho - s.rho * h0))), 1e-13);
}

TEST(HamiltonRhs, VOnlyHamiltonian) {
  auto rng = make_rng(109);
  const CMat a = hermitian(3, rng);
  const QState s = QState::random(3, rng);
  const QState r = qm_hamilton_rhs(hamiltonians::quadratic_v(a), s);
  EXPECT_EQ(r.v, CVec::Zero(3));
  const CVec hv = a * s.v;
  EXPECT_LT(max_abs_entry(CMat(r.rho - hv * s.v.adjoint())), 1e-13);
}

TEST(HamiltonRhs, ZeroHamiltonian) {
  auto rng = make_rng(110);
  const QState s = QState::random(3, rng);
  const QState r = qm_hamilton_rhs(linear_function(CVec::Zero(3), CMat::Zero(3, 3)), s);
  EXPECT_EQ(r.v, CVec::Zero(3));
  EXPECT_EQ(r.rho, CMat::Zero(3, 3));
}

TEST(HamiltonRhs, CoordinateTimeDerivativesEqualBrackets) {
  // d/dt Re v_k = Re v-dot_k and so on: read directly off the right-hand side
  auto rng = make_rng(111);
  const Eigen::Index n = 4;
  for (const QFunction& h : named_hamiltonians(n, rng))
    for (int t = 0; t < 50; ++t) {
      const QState s = QState::random(n, rng);
      const QState r = qm_hamilton_rhs(h, s);
      const auto coords = coordinate_functions(n);
      std::size_t idx = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        EXPECT_NEAR(qm_bracket(coords[idx++].second, h, s), r.v(k).real(), 1e-8);
        EXPECT_NEAR(qm_bracket(coords[idx++].second, h, s), r.v(k).imag(), 1e-8);
      }
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
          EXPECT_NEAR(qm_bracket(coords[idx++].second, h, s), r.rho(a, b).real(), 1e-8);
          EXPECT_NEAR(qm_bracket(coords[idx++].second, h, s), r.rho(a, b).imag(), 1e-8);
        }
      EXPECT_LT(rhs_consistency(h, s), 1e-8);
    }
}

TEST(HamiltonRhs, TransposedRankOneTermIsInconsistent) {
  // |v><h_v| in place of |h_v><v| breaks the bracket contract
  auto rng = make_rng(112);
  const CMat a = hermitian(3, rng);
  const QFunction h = hamiltonians::quadratic_v(a);
  const QState s = QState::random(3, rng);
  QState wrong = qm_hamilton_rhs(h, s);
  wrong.rho = s.v * CVec(a * s.v).adjoint();
  double r = 0.0;
  for (const auto& [name, f] : coordinate_functions(3))
    r = std::max(r, std::abs(qm_directional(f, s, wrong) - qm_bracket(f, h, s)));
  EXPECT_GT(r, 1e-3);
}

TEST(HamiltonRhs, MatchesGenericExtensionField) {
  auto rng = make_rng(113);
  const Eigen::Index n = 3;
  const ExtensionSpec<cdouble> spec = qm_spec(n);
  for (const QFunction& h : named_hamiltonians(n, rng))
    for (int t = 0; t < 10; ++t) {
      const QState s = QState::random(n, rng);
      const CVec generic = extension_hamiltonian_field(h, to_coords(s), spec);
      EXPECT_LT(max_abs_entry(CVec(to_coords(qm_hamilton_rhs(h, s)) - generic)), 1e-10);
    }
}

TEST(RepresentingElement, ReproducesFunctional) {
  auto rng = make_rng(114);
  for (int t = 0; t < 20; ++t) {
    const CVec v = rand_vec<cdouble>(4, rng), w = rand_vec<cdouble>(4, rng);
    EXPECT_LT(representing_residual(v, w), 1e-12);
    const CMat b = representing_element(v, w);
    // on a random x as well: tr(b x) = w^H x v
    const CMat x = rand_mat<cdouble>(4, 4, rng);
    cdouble functional = 0.0;
    const CVec xv = x * v;
    for (Eigen::Index k = 0; k < 4; ++k) functional += std::conj(w(k)) * xv(k);
    EXPECT_LT(std::abs((b * x).trace() - functional), 1e-12);
  }
}
