#include "support.hpp"

#include <lpext/poisson.hpp>

#include <gtest/gtest.h>

using namespace lpext;
using lpext::test::make_rng;
using lpext::test::rand_mat;
using lpext::test::rand_vec;

namespace {

template <Scalar T>
using BracketFn = std::function<double(const SmoothFunction<T>&, const SmoothFunction<T>&, const Vec<T>&)>;

/// {f, g} as a function of the point, differentiated by finite differences.
template <Scalar T>
SmoothFunction<T> bracket_function(const BracketFn<T>& br, const SmoothFunction<T>& f, const SmoothFunction<T>& g) {
  SmoothFunction<T> out;
  out.eval = [br, f, g](const Vec<T>& b) { return br(f, g, b); };
  return out;
}

template <Scalar T>
SmoothFunction<T> random_quadratic(Eigen::Index d, const DualPairing<T>& p, std::mt19937_64& rng) {
  return functions::quadratic<T>(rand_mat<T>(d, d, rng), p);
}

template <Scalar T>
SmoothFunction<T> random_linear(Eigen::Index d, const DualPairing<T>& p, std::mt19937_64& rng) {
  return functions::linear<T>(rand_vec<T>(d, rng), p);
}

/// Antisymmetry, Leibniz and Jacobi for one bracket over random polynomial triples.
template <Scalar T>
void check_axioms(const BracketFn<T>& br, Eigen::Index d, const DualPairing<T>& p, std::mt19937_64& rng, int draws,
                  const std::string& what) {
  for (int t = 0; t < draws; ++t) {
    const Vec<T> b = rand_vec<T>(d, rng);
    const SmoothFunction<T> f = random_quadratic<T>(d, p, rng) + random_linear<T>(d, p, rng);
    const SmoothFunction<T> g = random_quadratic<T>(d, p, rng);
    const SmoothFunction<T> h = random_linear<T>(d, p, rng) + random_quadratic<T>(d, p, rng);
    EXPECT_LT(std::abs(br(f, g, b) + br(g, f, b)), 1e-10) << what;
    EXPECT_LT(std::abs(br(f, f, b)), 1e-10) << what;

    const double leib = br(without_gradient(f * g), h, b) - f(b) * br(g, h, b) - br(f, h, b) * g(b);
    EXPECT_LT(std::abs(leib), 1e-6) << what;

    const double jac = br(bracket_function(br, f, g), h, b) + br(bracket_function(br, g, h), f, b) +
                       br(bracket_function(br, h, f), g, b);
    EXPECT_LT(std::abs(jac), 1e-5) << what;
  }
}

template <Scalar T>
BracketFn<T> lp_bracket(const LiePoissonSpace<T>& s) {
  return [s](const SmoothFunction<T>& f, const SmoothFunction<T>& g, const Vec<T>& b) {
    return lie_poisson_bracket(f, g, b, s);
  };
}

}  // namespace

TEST(FunctionalDerivative, LinearIsConstantElement) {
  auto rng = make_rng(41);
  const auto p = trace_pairing<double>(2);
  const Vec<double> x0 = rand_vec<double>(4, rng), b = rand_vec<double>(4, rng);
  EXPECT_EQ(functional_derivative(functions::linear<double>(x0, p), b, p), x0);
  EXPECT_LT((functional_derivative(without_gradient(functions::linear<double>(x0, p)), b, p) - x0).norm(), 1e-8);
}

TEST(FunctionalDerivative, HalfSquaredNormIsPoint) {
  auto rng = make_rng(42);
  const auto p = DualPairing<double>::identity(5);
  const Vec<double> b = rand_vec<double>(5, rng);
  const auto f = functions::quadratic<double>(Mat<double>::Identity(5, 5), p);
  EXPECT_LT((functional_derivative(f, b, p) - b).norm(), 1e-15);
  EXPECT_NEAR(f(b), 0.5 * b.squaredNorm(), 1e-14);
}

TEST(FunctionalDerivative, TraceCubeIsThreeRhoSquared) {
  auto rng = make_rng(43);
  for (Eigen::Index n : {2, 3}) {
    const auto p = trace_pairing<double>(n);
    const auto f = functions::trace_poly<double>({0.0, 0.0, 0.0, 1.0}, n, p);
    const Mat<double> rho = rand_mat<double>(n, n, rng);
    const Vec<double> b = flatten<double>(rho);
    EXPECT_NEAR(f(b), (rho * rho * rho).trace(), 1e-12);
    const Vec<double> expect = flatten<double>(Mat<double>(3.0 * rho * rho));
    const Vec<double> analytic = functional_derivative(f, b, p);
    EXPECT_LT((analytic - expect).norm(), 1e-12 * expect.norm());
    // independent finite differences, then the gram solve by hand
    const Vec<double> fd = p.gram().fullPivLu().solve(test::fd_gradient<double>(f.eval, b));
    EXPECT_LT((fd - expect).norm(), 1e-6 * expect.norm());
    const Vec<double> lib_fd = functional_derivative(without_gradient(f), b, p);
    EXPECT_LT((lib_fd - expect).norm(), 1e-6 * expect.norm());
  }
}

TEST(FunctionalDerivative, ComplexTraceCubeIsThreeRhoSquared) {
  auto rng = make_rng(44);
  const auto p = trace_pairing<cdouble>(2);
  const auto f = functions::trace_poly<cdouble>({0.0, 0.0, 0.0, 1.0}, 2, p);
  const Mat<cdouble> rho = rand_mat<cdouble>(2, 2, rng);
  const Vec<cdouble> b = flatten<cdouble>(rho);
  const Vec<cdouble> expect = flatten<cdouble>(Mat<cdouble>(cdouble(3.0) * rho * rho));
  EXPECT_LT((functional_derivative(f, b, p) - expect).norm(), 1e-12 * expect.norm());
  const Vec<cdouble> fd = p.gram().fullPivLu().solve(test::fd_gradient<cdouble>(f.eval, b));
  EXPECT_LT((fd - expect).norm(), 1e-6 * expect.norm());
  EXPECT_LT((functional_derivative(without_gradient(f), b, p) - expect).norm(), 1e-6 * expect.norm());
}

TEST(FunctionalDerivative, DirectionalConsistencyOfBuiltins) {
  auto rng = make_rng(45);
  const auto p = trace_pairing<double>(3);
  Vec<double> inertia(9);
  inertia << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const std::vector<SmoothFunction<double>> fs{
      functions::trace_poly<double>({1.0, -0.5, 0.25, 0.1}, 3, p), functions::rigid_body<double>(inertia, p),
      functions::quadratic<double>(rand_mat<double>(9, 9, rng), p), functions::linear<double>(rand_vec<double>(9, rng), p),
      functions::constant<double>(2.0)};
  for (const auto& f : fs)
    for (int t = 0; t < 10; ++t) {
      const Vec<double> b = rand_vec<double>(9, rng), v = rand_vec<double>(9, rng);
      const double h = 1e-6;
      const double fd = (f(Vec<double>(b + h * v)) - f(Vec<double>(b - h * v))) / (2 * h);
      const double scale = std::max(1.0, std::abs(fd));
      EXPECT_LT(std::abs(directional_derivative(f, b, v, p) - fd), 1e-5 * scale);
    }
}

TEST(FunctionalDerivative, NonFiniteEvaluationIsDomainError) {
  SmoothFunction<double> f;
  f.eval = [](const Vec<double>& b) { return std::log(b(0)); };
  try {
    functional_derivative<double>(f, Vec<double>::Zero(2), DualPairing<double>::identity(2));
    FAIL() << "expected numeric-domain";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numeric_domain);
  }
  f.grad = [](const Vec<double>& b) { return Vec<double>::Constant(b.size(), std::nan("")); };
  EXPECT_THROW(functional_derivative<double>(f, Vec<double>::Ones(2), DualPairing<double>::identity(2)), Error);
}

TEST(Bracket, LinearFunctionsGiveBracketOfElements) {
  auto rng = make_rng(46);
  const LiePoissonSpace<double> s(gl<double>(2), trace_pairing<double>(2));
  for (int t = 0; t < 20; ++t) {
    const Vec<double> x = rand_vec<double>(4, rng), y = rand_vec<double>(4, rng), b = rand_vec<double>(4, rng);
    const double expect = b.dot(s.pairing.gram() * test::raw_bracket(s.algebra, x, y));
    EXPECT_NEAR(lie_poisson_bracket(functions::linear<double>(x, s.pairing), functions::linear<double>(y, s.pairing), b, s),
                expect, 1e-12);
    // the bracket of linear functionals is the linear functional of [x, y] at every point
    const auto lin = functions::linear<double>(test::raw_bracket(s.algebra, x, y), s.pairing);
    EXPECT_NEAR(lin(b), expect, 1e-12);
  }
}

TEST(Bracket, So3CoordinateFunctions) {
  const LiePoissonSpace<double> s(so3<double>());
  const auto p = s.pairing;
  Vec<double> b(3);
  b << 0, 0, 5;
  const auto b1 = functions::linear<double>(Vec<double>::Unit(3, 0), p);
  const auto b2 = functions::linear<double>(Vec<double>::Unit(3, 1), p);
  EXPECT_DOUBLE_EQ(lie_poisson_bracket(b1, b2, b, s), 5.0);
  EXPECT_DOUBLE_EQ(lie_poisson_bracket(b2, b1, b, s), -5.0);
  EXPECT_EQ(lie_poisson_bracket(b1, b1, b, s), 0.0);
}

TEST(Bracket, CasimirsCommute) {
  auto rng = make_rng(47);
  const LiePoissonSpace<double> so(so3<double>());
  const auto norm2 = functions::quadratic<double>(Mat<double>::Identity(3, 3), so.pairing);
  const LiePoissonSpace<double> g(gl<double>(3), trace_pairing<double>(3));
  for (int t = 0; t < 20; ++t) {
    const Vec<double> b = rand_vec<double>(3, rng);
    EXPECT_LT(std::abs(lie_poisson_bracket(norm2, random_quadratic<double>(3, so.pairing, rng), b, so)), 1e-12);
    const Vec<double> m = rand_vec<double>(9, rng);
    for (int k = 1; k <= 3; ++k) {
      std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
      c.back() = 1.0;
      const auto cas = functions::trace_poly<double>(c, 3, g.pairing);
      EXPECT_LT(std::abs(lie_poisson_bracket(cas, random_quadratic<double>(9, g.pairing, rng), m, g)), 1e-10);
    }
  }
}

TEST(Bracket, AxiomsOnRealAlgebras) {
  auto rng = make_rng(48);
  const LiePoissonSpace<double> so(so3<double>());
  check_axioms<double>(lp_bracket(so), 3, so.pairing, rng, 10, "so3");
  const LiePoissonSpace<double> g(gl<double>(2), trace_pairing<double>(2));
  check_axioms<double>(lp_bracket(g), 4, g.pairing, rng, 10, "gl2");
  const LiePoissonSpace<double> hz(heisenberg<double>(),
                                   DualPairing<double>(Mat<double>(2.0 * Mat<double>::Identity(3, 3) +
                                                                   0.3 * rand_mat<double>(3, 3, rng))));
  check_axioms<double>(lp_bracket(hz), 3, hz.pairing, rng, 10, "heisenberg");
}

TEST(Bracket, AxiomsOnComplexAlgebra) {
  auto rng = make_rng(49);
  const LiePoissonSpace<cdouble> g(gl<cdouble>(2), trace_pairing<cdouble>(2));
  check_axioms<cdouble>(lp_bracket(g), 4, g.pairing, rng, 10, "gl2 complex");
}

TEST(HamiltonianField, LinearHamiltonianIsMinusAdStar) {
  auto rng = make_rng(50);
  const LiePoissonSpace<double> s(gl<double>(2), trace_pairing<double>(2));
  const Vec<double> x = rand_vec<double>(4, rng), b = rand_vec<double>(4, rng);
  const Vec<double> expect = -test::brute_ad_star(s.algebra, s.pairing.gram(), x, b);
  EXPECT_LT((hamiltonian_vector_field(functions::linear<double>(x, s.pairing), b, s) - expect).norm(), 1e-12);
}

TEST(HamiltonianField, RigidBodyEulerEquations) {
  auto rng = make_rng(51);
  const Eigen::Vector3d inertia(1.0, 2.0, 3.0);
  const LiePoissonSpace<double> s(so3<double>());
  // so(3) with the opposite orientation [e1, e2] = -e3
  const LiePoissonSpace<double> flipped(LieAlgebra<double>::from_triplets(
      "so3_flipped", 3, {{2, 0, 1, -1.0}, {0, 1, 2, -1.0}, {1, 2, 0, -1.0}}));
  const auto h = functions::rigid_body<double>(Vec<double>(inertia), s.pairing);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Vector3d b = rand_vec<double>(3, rng);
    const Eigen::Vector3d omega = b.cwiseQuotient(inertia);
    EXPECT_LT((hamiltonian_vector_field(h, Vec<double>(b), s) - Vec<double>(omega.cross(b))).norm(), 1e-13);
    EXPECT_LT((hamiltonian_vector_field(h, Vec<double>(b), flipped) - Vec<double>(b.cross(omega))).norm(), 1e-13);
  }
}

TEST(HamiltonianField, AbelianIsZero) {
  auto rng = make_rng(52);
  const LiePoissonSpace<double> s(abelian<double>(4));
  EXPECT_EQ(hamiltonian_vector_field(random_quadratic<double>(4, s.pairing, rng), rand_vec<double>(4, rng), s),
            Vec<double>::Zero(4));
}

TEST(HamiltonianField, ConsistentWithBracket) {
  auto rng = make_rng(53);
  const LiePoissonSpace<double> g(gl<double>(3), trace_pairing<double>(3));
  const LiePoissonSpace<cdouble> gc(gl<cdouble>(2), trace_pairing<cdouble>(2));
  for (int t = 0; t < 20; ++t) {
    const Vec<double> b = rand_vec<double>(9, rng);
    const auto f = random_quadratic<double>(9, g.pairing, rng);
    const auto h = functions::trace_poly<double>({0.0, 0.3, -0.2, 0.1}, 3, g.pairing) + random_quadratic<double>(9, g.pairing, rng);
    EXPECT_NEAR(directional_derivative(f, b, hamiltonian_vector_field(h, b, g), g.pairing), lie_poisson_bracket(f, h, b, g),
                1e-10);
    const Vec<cdouble> bc = rand_vec<cdouble>(4, rng);
    const auto fc = random_quadratic<cdouble>(4, gc.pairing, rng);
    const auto hc = random_quadratic<cdouble>(4, gc.pairing, rng);
    EXPECT_NEAR(directional_derivative(fc, bc, hamiltonian_vector_field(hc, bc, gc), gc.pairing),
                lie_poisson_bracket(fc, hc, bc, gc), 1e-10);
  }
}

TEST(Product, PullbacksFromDifferentFactorsCommute) {
  auto rng = make_rng(54);
  const LiePoissonSpace<double> s1(so3<double>());
  const LiePoissonSpace<double> s2(gl<double>(2), trace_pairing<double>(2));
  for (int t = 0; t < 20; ++t) {
    const Vec<double> p1 = rand_vec<double>(3, rng), p2 = rand_vec<double>(4, rng);
    const auto f1 = random_quadratic<double>(3, s1.pairing, rng), g1 = random_quadratic<double>(3, s1.pairing, rng);
    const auto g2 = functions::trace_poly<double>({0.0, 1.0, 0.5, 0.2}, 2, s2.pairing) + random_quadratic<double>(4, s2.pairing, rng);
    const auto f = pullback_first(f1, 3, 4), g = pullback_second(g2, 3, 4);
    EXPECT_LT(std::abs(product_bracket(f, g, p1, p2, s1, s2)), 1e-12);
    EXPECT_LT(std::abs(product_bracket(without_gradient(f), without_gradient(g), p1, p2, s1, s2)), 1e-12);
    EXPECT_NEAR(product_bracket(f, pullback_first(g1, 3, 4), p1, p2, s1, s2), lie_poisson_bracket(f1, g1, p1, s1), 1e-12);
    EXPECT_LT(std::abs(product_bracket(f, functions::constant<double>(3.0), p1, p2, s1, s2)), 1e-12);
  }
}

TEST(Product, MatchesDirectSumLiePoisson) {
  auto rng = make_rng(55);
  const LiePoissonSpace<double> s1(so3<double>());
  const LiePoissonSpace<double> s2(gl<double>(2), trace_pairing<double>(2));
  const LiePoissonSpace<double> sum(direct_sum(s1.algebra, s2.algebra), direct_sum(s1.pairing, s2.pairing));
  for (int t = 0; t < 20; ++t) {
    const Vec<double> p1 = rand_vec<double>(3, rng), p2 = rand_vec<double>(4, rng);
    Vec<double> p(7);
    p << p1, p2;
    const auto f = random_quadratic<double>(7, sum.pairing, rng), g = random_quadratic<double>(7, sum.pairing, rng);
    EXPECT_NEAR(product_bracket(f, g, p1, p2, s1, s2), lie_poisson_bracket(f, g, p, sum), 1e-11);
  }
  BracketFn<double> br = [s1, s2](const SmoothFunction<double>& f, const SmoothFunction<double>& g, const Vec<double>& b) {
    return product_bracket(f, g, Vec<double>(b.head(3)), Vec<double>(b.tail(4)), s1, s2);
  };
  check_axioms<double>(br, 7, sum.pairing, rng, 5, "product");
}

TEST(Product, DimensionMismatchThrows) {
  const LiePoissonSpace<double> s1(so3<double>());
  const auto f = functions::constant<double>(0.0);
  EXPECT_THROW(product_bracket<double>(f, f, Vec<double>::Zero(2), Vec<double>::Zero(3), s1, s1), Error);
}

namespace {

ExtensionSpec<double> heisenberg_data() {
  BilinearMapToN<double> om(1, 2);
  om.set(0, 1, Vec<double>::Ones(1));
  return ExtensionSpec<double>(abelian<double>(1), abelian<double>(2), std::move(om), DerivationValuedMap<double>(1, 2));
}

ExtensionSpec<double> weighted_e3(std::mt19937_64& rng) {
  ExtensionSpec<double> spec = change_section(test::euclidean3_spec(), rand_mat<double>(3, 3, rng));
  spec.n_pairing = DualPairing<double>(Mat<double>(2.0 * Mat<double>::Identity(3, 3) + 0.3 * rand_mat<double>(3, 3, rng)));
  spec.h_pairing = DualPairing<double>(Mat<double>(2.0 * Mat<double>::Identity(3, 3) + 0.3 * rand_mat<double>(3, 3, rng)));
  return spec;
}

}  // namespace

TEST(ExtensionBracket, ZeroDataIsSumOfComponents) {
  auto rng = make_rng(56);
  const ExtensionSpec<double> spec(so3<double>(), gl<double>(2), BilinearMapToN<double>(3, 4),
                                   DerivationValuedMap<double>(3, 4), std::nullopt, trace_pairing<double>(2));
  const LiePoissonSpace<double> s1(so3<double>()), s2(gl<double>(2), trace_pairing<double>(2));
  for (int t = 0; t < 10; ++t) {
    const Vec<double> p1 = rand_vec<double>(3, rng), p2 = rand_vec<double>(4, rng);
    Vec<double> p(7);
    p << p1, p2;
    const auto f = random_quadratic<double>(7, spec.sum_pairing(), rng);
    const auto g = random_quadratic<double>(7, spec.sum_pairing(), rng);
    EXPECT_NEAR(extension_poisson_bracket(f, g, p, spec), product_bracket(f, g, p1, p2, s1, s2), 1e-11);
    const auto h = random_quadratic<double>(7, spec.sum_pairing(), rng);
    Vec<double> expect(7);
    expect << hamiltonian_vector_field(freeze_second(h, p2, 3), p1, s1), hamiltonian_vector_field(freeze_first(h, p1, 4), p2, s2);
    EXPECT_LT((extension_hamiltonian_field(h, p, spec) - expect).norm(), 1e-12);
  }
}

TEST(ExtensionBracket, LinearFunctionsPairWithExtensionBracket) {
  auto rng = make_rng(57);
  const ExtensionSpec<double> spec = weighted_e3(rng);
  const Extension<double> ext = build_extension(spec);
  const DualPairing<double> p = spec.sum_pairing();
  for (int t = 0; t < 20; ++t) {
    const Vec<double> x = rand_vec<double>(6, rng), y = rand_vec<double>(6, rng), b = rand_vec<double>(6, rng);
    EXPECT_NEAR(extension_poisson_bracket(functions::linear<double>(x, p), functions::linear<double>(y, p), b, spec),
                b.dot(p.gram() * test::raw_bracket(ext.algebra, x, y)), 1e-11);
  }
}

TEST(ExtensionBracket, MatchesGenericOnBuiltAlgebra) {
  auto rng = make_rng(58);
  const std::vector<ExtensionSpec<double>> specs{weighted_e3(rng), heisenberg_data(),
                                                 change_section(test::adjoint_semidirect<double>(2), rand_mat<double>(4, 4, rng))};
  for (const auto& spec : specs) {
    const LiePoissonSpace<double> space = build_extension(spec).space();
    const Eigen::Index d = spec.dim();
    for (int t = 0; t < 20; ++t) {
      const Vec<double> b = rand_vec<double>(d, rng);
      const auto f = random_quadratic<double>(d, space.pairing, rng) + random_linear<double>(d, space.pairing, rng);
      const auto g = random_quadratic<double>(d, space.pairing, rng);
      EXPECT_NEAR(extension_poisson_bracket(f, g, b, spec), lie_poisson_bracket(f, g, b, space), 1e-10);
      EXPECT_LT(std::abs(extension_poisson_bracket(f, g, b, spec) + extension_poisson_bracket(g, f, b, spec)), 1e-10);
      EXPECT_LT((extension_hamiltonian_field(g, b, spec) - hamiltonian_vector_field(g, b, space)).norm(), 1e-10);
    }
  }
}

TEST(ExtensionBracket, AntisymmetryOnHundredDraws) {
  auto rng = make_rng(59);
  const ExtensionSpec<double> spec = weighted_e3(rng);
  for (int t = 0; t < 100; ++t) {
    const Vec<double> b = rand_vec<double>(6, rng);
    const auto f = random_quadratic<double>(6, spec.sum_pairing(), rng);
    const auto g = random_quadratic<double>(6, spec.sum_pairing(), rng);
    EXPECT_LT(std::abs(extension_poisson_bracket(f, g, b, spec) + extension_poisson_bracket(g, f, b, spec)), 1e-10);
  }
}

TEST(ExtensionBracket, Axioms) {
  auto rng = make_rng(60);
  const ExtensionSpec<double> spec = weighted_e3(rng);
  BracketFn<double> br = [spec](const SmoothFunction<double>& f, const SmoothFunction<double>& g, const Vec<double>& b) {
    return extension_poisson_bracket(f, g, b, spec);
  };
  check_axioms<double>(br, 6, spec.sum_pairing(), rng, 10, "extension");
}

TEST(ExtensionField, ConsistentWithBracketOnFiftyProbes) {
  auto rng = make_rng(61);
  const ExtensionSpec<double> spec = weighted_e3(rng);
  const DualPairing<double> p = spec.sum_pairing();
  for (int t = 0; t < 50; ++t) {
    const Vec<double> b = rand_vec<double>(6, rng);
    const auto h = random_quadratic<double>(6, p, rng);
    const auto f = random_quadratic<double>(6, p, rng) + random_linear<double>(6, p, rng);
    EXPECT_LT(std::abs(directional_derivative(f, b, extension_hamiltonian_field(h, b, spec), p) -
                       extension_poisson_bracket(f, h, b, spec)),
              1e-8);
  }
}

TEST(ExtensionField, HeisenbergKineticEnergyRotatesA) {
  // h = 1/2 <a, a>: c stays fixed and a rotates at rate c
  const ExtensionSpec<double> spec = heisenberg_data();
  Mat<double> w = Mat<double>::Zero(3, 3);
  w.bottomRightCorner(2, 2).setIdentity();
  const auto h = functions::quadratic<double>(w, spec.sum_pairing());
  Vec<double> b(3);
  b << 1.5, 2.0, -0.5;
  Vec<double> expect(3);
  expect << 0.0, 1.5 * -0.5, -1.5 * 2.0;
  EXPECT_LT((extension_hamiltonian_field(h, b, spec) - expect).norm(), 1e-14);
}
