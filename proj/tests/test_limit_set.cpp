#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "monoflow/limit_set.hpp"
#include "monoflow/rng.hpp"

using namespace monoflow;

namespace {

constexpr double pi = std::numbers::pi;

SystemDef config(const std::string& name) { return load_system(std::string(MONOFLOW_CONFIG_DIR) + "/" + name + ".json"); }

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

// Multipliers sorted by modulus, descending.
std::vector<double> moduli(const std::vector<std::complex<double>>& zs) {
  std::vector<double> m;
  for (const auto& z : zs) m.push_back(std::abs(z));
  std::sort(m.rbegin(), m.rend());
  return m;
}

}  // namespace

TEST(Hausdorff, KnownDistances) {
  const std::vector<Vector> a{vec({0, 0}), vec({1, 0})};
  const std::vector<Vector> b{vec({0, 0}), vec({1, 0}), vec({1, 2})};
  EXPECT_DOUBLE_EQ(hausdorff_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(hausdorff_distance(a, b), 2.0);
  EXPECT_DOUBLE_EQ(hausdorff_distance(b, a), 2.0);
}

TEST(Hausdorff, PolylineIgnoresSamplingPhase) {
  // Two samplings of the unit circle, offset by half a step of 2 pi / 100.
  std::vector<Vector> a, b;
  for (int k = 0; k <= 100; ++k) {
    const double t = 2 * pi * k / 100;
    a.push_back(vec({std::cos(t), std::sin(t)}));
    b.push_back(vec({std::cos(t + pi / 100), std::sin(t + pi / 100)}));
  }
  // Point sets: nearest sample is half a step of arc away, chord 2 sin(pi / 200).
  EXPECT_NEAR(hausdorff_distance(a, b), 2 * std::sin(pi / 200), 1e-12);
  // Polylines: only the sagitta 1 - cos(pi / 100) of each chord remains.
  EXPECT_NEAR(polyline_hausdorff(a, b), 1 - std::cos(pi / 100), 1e-9);
}

TEST(EstimateLimitSet, SinkCollapsesToOrigin) {
  const auto sys = config("sink");
  const auto est = estimate_limit_set(sys, vec({1, 1}), LimitDirection::Omega, 50, 5, 2);
  EXPECT_TRUE(est.converged);
  for (const auto& p : est.points) EXPECT_LT(p.norm(), 1e-10);
}

TEST(EstimateLimitSet, PlanarCycleLiesOnUnitCircle) {
  const auto sys = config("planar_cycle");
  const auto est = estimate_limit_set(sys, vec({0.1, 0}), LimitDirection::Omega, 60, 2 * pi, 3);
  EXPECT_TRUE(est.converged);
  EXPECT_EQ(est.window_gaps.size(), 2u);
  EXPECT_LT(est.hausdorff_gap, 1e-6);
  for (const auto& p : est.points) EXPECT_NEAR(p.norm(), 1.0, 1e-6);
}

TEST(EstimateLimitSet, AlphaOfSinkIsUnbounded) {
  const auto sys = config("sink");
  EXPECT_EQ(code_of([&] { estimate_limit_set(sys, vec({1, 1}), LimitDirection::Alpha, 200, 5); }), ErrorCode::AlphaUnbounded);
}

TEST(EstimateLimitSet, AlphaOfUnstableFocusInsideCycle) {
  // Backward from inside the cycle the orbit falls into the repelling origin.
  const auto sys = config("planar_cycle");
  const auto est = estimate_limit_set(sys, vec({0.5, 0}), LimitDirection::Alpha, 60, 2, 2);
  for (const auto& p : est.points) EXPECT_LT(p.norm(), 1e-8);
}

TEST(EstimateLimitSet, RejectsBadArguments) {
  const auto sys = config("sink");
  EXPECT_EQ(code_of([&] { estimate_limit_set(sys, vec({1, 1, 1}), LimitDirection::Omega, 1, 1); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { estimate_limit_set(sys, vec({1, 1}), LimitDirection::Omega, 0, 1); }), ErrorCode::InvalidArgument);
}

TEST(NonOrdering, DetectsOrderedPairs) {
  const Cone k = Cone::positive_orthant(2);
  const auto ordered = non_ordering_check({vec({0, 0}), vec({1, 1})}, k, 1e-6);
  EXPECT_FALSE(ordered.ok);
  EXPECT_EQ(ordered.interior_pairs, 1u);
  ASSERT_TRUE(ordered.worst_pair);
  EXPECT_NEAR(ordered.worst_pair->min_slack, 1.0, 1e-15);

  const auto antichain = non_ordering_check({vec({1, 0}), vec({0, 1}), vec({0.5, 0.5})}, k, 1e-6);
  EXPECT_TRUE(antichain.ok);
  EXPECT_TRUE(antichain.strict_ok);
  EXPECT_EQ(antichain.pairs_checked, 3u);

  const auto boundary = non_ordering_check({vec({0, 0}), vec({1, 0})}, k, 1e-6);
  EXPECT_TRUE(boundary.ok);
  EXPECT_FALSE(boundary.strict_ok);
  EXPECT_EQ(boundary.strict_pairs, 1u);
}

TEST(NonOrdering, RespectsConeOrientation) {
  const Cone k = Cone::orthant({1, -1});
  EXPECT_TRUE(non_ordering_check({vec({0, 0}), vec({1, 1})}, k, 1e-6).ok);
  EXPECT_FALSE(non_ordering_check({vec({0, 0}), vec({1, -1})}, k, 1e-6).ok);
}

TEST(Projection, ThetaIsIdempotentAndKillsDiagonal) {
  const Vector v = vec({1, 1, 1}).normalized();
  EXPECT_LT(theta(vec({1, 1, 1}), v).norm(), 1e-15);
  Rng rng = Rng::stream(3, "test.limit_set.theta");
  for (int k = 0; k < 200; ++k) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x(i) = rng.uniform(-10, 10);
    const Vector once = theta(x, v);
    EXPECT_LT((theta(once, v) - once).norm(), 1e-12);
    EXPECT_LT(std::abs(once.dot(v)), 1e-12);
  }
}

TEST(Projection, ComplementBasisIsOrthonormal) {
  const Vector v = vec({1, 2, 2}).normalized();
  const Matrix q = complement_basis(v);
  ASSERT_EQ(q.rows(), 3);
  ASSERT_EQ(q.cols(), 2);
  EXPECT_LT((q.transpose() * q - Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LT((q.transpose() * v).norm(), 1e-14);
}

TEST(Projection, AntichainProjectsInjectively) {
  const Cone k = Cone::positive_orthant(3);
  const std::vector<Vector> pts{vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})};
  const auto rep = project_and_check(pts, k);
  EXPECT_GT(rep.injectivity_margin, 0.5);
  EXPECT_EQ(rep.projected.size(), 3u);
  EXPECT_EQ(rep.projected.front().size(), 2);
  // Pairwise distances survive because the three points differ orthogonally to v.
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j)
      EXPECT_NEAR((rep.projected[i] - rep.projected[j]).norm(), std::sqrt(2.0), 1e-12);
}

TEST(Projection, OrderedPairCollapsesAlongDiagonal) {
  const Cone k = Cone::positive_orthant(3);
  const auto rep = project_and_check({vec({0, 0, 0}), vec({1, 1, 1})}, k, vec({1, 1, 1}).normalized());
  EXPECT_LT(rep.injectivity_margin, 1e-12);
}

TEST(Projection, RejectsNonInteriorDirection) {
  const Cone k = Cone::positive_orthant(2);
  EXPECT_EQ(code_of([&] { project_and_check({vec({1, 0}), vec({0, 1})}, k, vec({1, -1}).normalized()); }), ErrorCode::VNotInterior);
}

TEST(Newton, FindsRepressilatorEquilibrium) {
  const auto sys = config("repressilator");
  const auto eq = newton_equilibrium(sys, vec({1.5, 1.5, 1.5}));
  ASSERT_TRUE(eq.point);
  EXPECT_LT(eq.residual, 1e-9);
  // Symmetric equilibrium solves x (1 + x^4) = 10 on the diagonal.
  const double x = (*eq.point)(0);
  EXPECT_NEAR(x * (1 + std::pow(x, 4)), 10.0, 1e-8);
}

TEST(Classify, SinkIsEquilibrium) {
  const auto sys = config("sink");
  const auto est = estimate_limit_set(sys, vec({1, 1}), LimitDirection::Omega, 50, 5, 2);
  const auto cls = classify_limit_set(sys, est, sys.cone);
  EXPECT_EQ(cls.verdict, LimitVerdict::Equilibrium);
  ASSERT_TRUE(cls.equilibrium);
  EXPECT_LT(cls.equilibrium->norm(), 1e-9);
}

TEST(Classify, ThreeDimensionalCycleHasPeriodTwoPi) {
  const auto sys = config("planar_cycle_3d");
  const auto est = estimate_limit_set(sys, vec({0.3, 0.2, 0.1}), LimitDirection::Omega, 200, 20, 2);
  const auto cls = classify_limit_set(sys, est, sys.cone);
  ASSERT_EQ(cls.verdict, LimitVerdict::PeriodicOrbit);
  ASSERT_TRUE(cls.period);
  EXPECT_NEAR(*cls.period, 2 * pi, 1e-3);
  // Independent re-verification from other cloud points.
  for (std::size_t k = 0; k < est.points.size(); k += est.points.size() / 5) {
    const Vector back = flow_to(sys, est.points[k], *cls.period, IntegratorOptions{Method::DP54, 1e-3, 1e-11, 1e-13});
    EXPECT_LT((back - est.points[k]).norm(), 1e-4 * cls.diameter);
  }
}

TEST(Classify, PlanarCycleIsNotCalledPeriodicInTwoDimensions) {
  const auto sys = config("planar_cycle");
  const auto est = estimate_limit_set(sys, vec({0.3, 0.2}), LimitDirection::Omega, 200, 20, 2);
  const auto cls = classify_limit_set(sys, est, sys.cone);
  EXPECT_EQ(cls.verdict, LimitVerdict::Inconclusive);
  EXPECT_FALSE(cls.notes.empty());
}

TEST(Classify, CompetitiveCyclesAreUnordered) {
  for (const char* name : {"repressilator", "repressilator_asym", "goodwin"}) {
    const auto sys = config(name);
    const auto est = estimate_limit_set(sys, vec({0.3, 0.2, 0.1}), LimitDirection::Omega, 200, 20, 2);
    const auto cls = classify_limit_set(sys, est, sys.cone);
    ASSERT_EQ(cls.verdict, LimitVerdict::PeriodicOrbit) << name;
    const auto no = non_ordering_check(est.points, sys.cone, 1e-6);
    EXPECT_TRUE(no.ok) << name;
    EXPECT_TRUE(no.strict_ok) << name;
    EXPECT_GT(project_and_check(est.points, sys.cone).injectivity_margin, 0.0) << name;
  }
}

TEST(Classify, CloudThroughEquilibriumIsNeverPeriodic) {
  const auto sys = config("lv_competitive");
  const auto est = estimate_limit_set(sys, vec({0.3, 0.2, 0.1}), LimitDirection::Omega, 200, 20, 2);
  const auto cls = classify_limit_set(sys, est, sys.cone);
  EXPECT_NE(cls.verdict, LimitVerdict::PeriodicOrbit);
  if (cls.verdict == LimitVerdict::ContainsEquilibrium || cls.verdict == LimitVerdict::Equilibrium) {
    EXPECT_LT(cls.equilibrium_residual, 1e-9);
  }
}

TEST(Spectrum, EquilibriumMatchesDirectEigensolve) {
  const auto sys = config("planar_cycle");
  const auto rep = spectrum_at_equilibrium(sys, vec({0, 0}));
  // Jacobian at the origin is [[1, -1], [1, 1]] with eigenvalues 1 +- i.
  ASSERT_EQ(rep.values.size(), 2u);
  for (const auto& z : rep.values) {
    EXPECT_NEAR(z.real(), 1.0, 1e-10);
    EXPECT_NEAR(std::abs(z.imag()), 1.0, 1e-10);
  }
  EXPECT_TRUE(rep.hyperbolic);
  EXPECT_EQ(code_of([&] { spectrum_at_equilibrium(sys, vec({1, 1})); }), ErrorCode::NotEquilibrium);
}

TEST(Spectrum, RepressilatorEquilibriumAgainstClosedForm) {
  const auto sys = config("repressilator");
  const auto eq = newton_equilibrium(sys, vec({1.5, 1.5, 1.5}));
  ASSERT_TRUE(eq.point);
  const double x = (*eq.point)(0);
  // Circulant Jacobian: -1 on the diagonal, g = -40 x^3 / (1 + x^4)^2 cyclically.
  const double g = -40 * std::pow(x, 3) / std::pow(1 + std::pow(x, 4), 2);
  std::vector<std::complex<double>> expected;
  for (int k = 0; k < 3; ++k) expected.push_back(-1.0 + g * std::polar(1.0, 2 * pi * k / 3));
  const auto rep = spectrum_at_equilibrium(sys, *eq.point);
  ASSERT_EQ(rep.values.size(), 3u);
  for (const auto& z : expected) {
    double best = 1e300;
    for (const auto& w : rep.values) best = std::min(best, std::abs(z - w));
    EXPECT_LT(best, 1e-8);
  }
}

TEST(Floquet, PlanarCycleMultipliers) {
  const auto sys = config("planar_cycle");
  const auto rep = floquet_multipliers(sys, vec({1, 0}), 2 * pi);
  const auto m = moduli(rep.values);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(m[0], 1.0, 1e-6);
  EXPECT_NEAR(m[1] / std::exp(-4 * pi), 1.0, 1e-3);
  ASSERT_TRUE(rep.trivial_index);
  ASSERT_TRUE(rep.liouville_error);
  EXPECT_LT(*rep.liouville_error, 1e-4);
  EXPECT_TRUE(rep.hyperbolic);
}

TEST(Floquet, ThreeDimensionalCycleMultipliers) {
  const auto sys = config("planar_cycle_3d");
  const auto rep = floquet_multipliers(sys, vec({1, 0, 0}), 2 * pi);
  const auto m = moduli(rep.values);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_NEAR(m[0], 1.0, 1e-6);
  EXPECT_NEAR(m[1] / std::exp(-2 * pi), 1.0, 1e-3);
  EXPECT_NEAR(m[2] / std::exp(-4 * pi), 1.0, 1e-3);
  EXPECT_LT(*rep.liouville_error, 1e-4);
}

TEST(Floquet, RejectsNonPeriodicPoint) {
  const auto sys = config("planar_cycle");
  EXPECT_EQ(code_of([&] { floquet_multipliers(sys, vec({0.5, 0}), 2 * pi); }), ErrorCode::NotPeriodic);
}

TEST(FloquetProperties, DeterminantMatchesTraceIntegral) {
  // Liouville on the repressilator cycle found by the classifier.
  const auto sys = config("repressilator");
  const auto est = estimate_limit_set(sys, vec({0.3, 0.2, 0.1}), LimitDirection::Omega, 200, 20, 2);
  const auto cls = classify_limit_set(sys, est, sys.cone);
  ASSERT_TRUE(cls.period && cls.section_point);
  const auto mono = monodromy(sys, *cls.section_point, *cls.period, IntegratorOptions{Method::DP54, 1e-3, 1e-12, 1e-14});
  EXPECT_NEAR(mono.monodromy.determinant() / std::exp(mono.trace_integral), 1.0, 1e-4);
  const auto rep = floquet_multipliers(sys, *cls.section_point, *cls.period);
  ASSERT_TRUE(rep.trivial_index);
  EXPECT_NEAR(std::abs(rep.values[*rep.trivial_index] - 1.0), 0.0, 1e-4);
}
