#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace geoflow;
using oracle::pi;

namespace {

IsothermalMetric cos_torus() { return IsothermalMetric::torus({{1, 0, 0.1, 0.0}}); }

IsothermalMetric r2_disc() {
  Poly2 p;
  p.at(2, 0) = 1.0;
  p.at(0, 2) = 1.0;
  return IsothermalMetric::disc(p);
}

}  // namespace

TEST(Curvature, FlatTorusVanishes) {
  const auto g = IsothermalMetric::flat_torus();
  for (double x : {0.0, 1.3, 4.0}) EXPECT_EQ(curvature_at(g, x, 2.0 - x), 0.0);
}

TEST(Curvature, QuadraticDiscAtOrigin) { EXPECT_NEAR(curvature_at(r2_disc(), 0.0, 0.0), -4.0, 1e-15); }

TEST(Curvature, CosineTorusAtOrigin) {
  // lambda'' = -0.1 cos x1, so K = +0.1 e^{-0.2}.
  const double K = curvature_at(cos_torus(), 0.0, 0.0);
  EXPECT_NEAR(K, 0.1 * std::exp(-0.2), 1e-15);
  EXPECT_NEAR(K, 0.0818730753077982, 1e-12);
}

TEST(Curvature, MatchesFiniteDifferenceLaplacian) {
  const auto g = IsothermalMetric::torus({{1, 0, 0.1, 0.0}, {1, 2, 0.05, -0.03}, {0, 3, 0.0, 0.02}});
  const auto lam = [&](double a, double b) { return g.lambda(a, b); };
  for (auto [x, y] : {std::pair{0.3, 1.1}, {2.0, 5.5}, {4.4, 0.7}}) {
    const double fd = -std::exp(-2.0 * g.lambda(x, y)) * oracle::laplacian(lam, x, y);
    EXPECT_NEAR(curvature_at(g, x, y), fd, 1e-9);
  }
}

TEST(Curvature, OutsideDiscIsDomainError) {
  EXPECT_THROW(curvature_at(IsothermalMetric::euclidean_disc(), 1.0, 0.5), DomainError);
}

TEST(Lambda, DerivativesMatchFiniteDifferences) {
  Poly2 p;
  p.at(1, 0) = 0.2;
  p.at(1, 1) = -0.3;
  p.at(0, 3) = 0.15;
  const auto gd = IsothermalMetric::disc(p);
  const auto gt = IsothermalMetric::torus({{2, -1, 0.1, 0.2}, {0, 1, -0.05, 0.0}});
  for (const auto* g : {&gd, &gt}) {
    const double x = 0.31, y = -0.42;
    const auto grad = g->grad_lambda(x, y);
    EXPECT_NEAR(grad[0], oracle::d1([&](double t) { return g->lambda(t, y); }, x), 1e-10);
    EXPECT_NEAR(grad[1], oracle::d1([&](double t) { return g->lambda(x, t); }, y), 1e-10);
    EXPECT_NEAR(g->laplacian_lambda(x, y), oracle::laplacian([&](double a, double b) { return g->lambda(a, b); }, x, y),
                1e-7);
  }
}

TEST(Lambda, TorusIsPeriodic) {
  const auto g = IsothermalMetric::torus({{2, -1, 0.1, 0.2}, {3, 1, -0.05, 0.4}});
  EXPECT_NEAR(g.lambda(0.4, 1.2), g.lambda(0.4 + 2 * pi, 1.2 - 4 * pi), 1e-14);
}

TEST(Lambda, DiscRejectsComplexCoefficients) {
  EXPECT_THROW(IsothermalMetric::disc(Poly2::monomial(1, 0, cplx(0.0, 1.0))), DomainError);
}

TEST(GeodesicFlow, FlatTorusStraightLine) {
  const auto tr = geodesic_flow(IsothermalMetric::flat_torus(), {0, 0, 0}, pi, 1e-3);
  const auto& e = tr.points.back();
  EXPECT_NEAR(tr.t.back(), pi, 1e-15);
  EXPECT_NEAR(e.x1, pi, 1e-12);
  EXPECT_NEAR(e.x2, 0.0, 1e-15);
  EXPECT_NEAR(e.theta, 0.0, 1e-15);
}

TEST(GeodesicFlow, DiscDiameterReachesCentre) {
  const auto tr = geodesic_flow(IsothermalMetric::euclidean_disc(), {-1, 0, 0}, 1.0, 1e-3);
  EXPECT_FALSE(tr.exited);
  EXPECT_NEAR(tr.points.back().x1, 0.0, 1e-12);
  EXPECT_NEAR(tr.points.back().x2, 0.0, 1e-15);
}

TEST(GeodesicFlow, MatchesChristoffelIntegration) {
  const auto g = cos_torus();
  const PhasePoint p0{0.2, -0.1, 0.7};
  const auto tr = geodesic_flow(g, p0, 10.0, 1e-3);
  const double s = std::exp(-g.lambda(p0.x1, p0.x2));
  const auto ref = oracle::christoffel_geodesic(g, {p0.x1, p0.x2, s * std::cos(p0.theta), s * std::sin(p0.theta)}, 10.0);
  const double speed = std::exp(2.0 * g.lambda(ref[0], ref[1])) * (ref[2] * ref[2] + ref[3] * ref[3]);
  EXPECT_NEAR(speed, 1.0, 1e-10);
  const auto& e = tr.points.back();
  EXPECT_NEAR(e.x1, ref[0], 1e-9);
  EXPECT_NEAR(e.x2, ref[1], 1e-9);
  const double es = std::exp(g.lambda(ref[0], ref[1]));
  EXPECT_NEAR(std::cos(e.theta), es * ref[2], 1e-9);
  EXPECT_NEAR(std::sin(e.theta), es * ref[3], 1e-9);
}

TEST(GeodesicFlow, UnitSpeedAlongTrajectory) {
  const auto g = cos_torus();
  const auto tr = geodesic_flow(g, {1.0, 2.0, 2.2}, 10.0, 1e-3);
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < tr.points.size(); i += 97) {
    const double h = tr.t[i + 1] - tr.t[i];
    const auto& a = tr.points[i - 2];
    const auto& b = tr.points[i - 1];
    const auto& c = tr.points[i + 1];
    const auto& d = tr.points[i + 2];
    const double v1 = (a.x1 - 8 * b.x1 + 8 * c.x1 - d.x1) / (12 * h);
    const double v2 = (a.x2 - 8 * b.x2 + 8 * c.x2 - d.x2) / (12 * h);
    const double lam = g.lambda(tr.points[i].x1, tr.points[i].x2);
    worst = std::max(worst, std::abs(std::exp(2 * lam) * (v1 * v1 + v2 * v2) - 1.0));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(GeodesicFlow, Reversible) {
  const auto g = cos_torus();
  const auto fwd = geodesic_flow(g, {0.5, 0.5, 1.0}, 5.0, 1e-3).points.back();
  const auto back = geodesic_flow(g, {fwd.x1, fwd.x2, fwd.theta + pi}, 5.0, 1e-3).points.back();
  EXPECT_NEAR(back.x1, 0.5, 1e-8);
  EXPECT_NEAR(back.x2, 0.5, 1e-8);
  EXPECT_NEAR(std::remainder(back.theta - pi - 1.0, 2 * pi), 0.0, 1e-8);
}

TEST(GeodesicFlow, Preconditions) {
  EXPECT_THROW(geodesic_flow(IsothermalMetric::flat_torus(), {}, 1.0, 0.0), PreconditionError);
  EXPECT_THROW(geodesic_flow(IsothermalMetric::euclidean_disc(), {2, 0, 0}, 1.0, 1e-3), DomainError);
}

TEST(GeodesicFlow, StepBudgetRaisesTrappingError) {
  FlowOptions opt;
  opt.max_steps = 10;
  try {
    geodesic_flow(IsothermalMetric::euclidean_disc(), {0, 0, 0}, 0.9, 1e-3, opt);
    FAIL();
  } catch (const TrappingError& e) {
    EXPECT_EQ(e.partial.points.size(), 11u);
  }
}

TEST(ExitTime, Diameter) { EXPECT_NEAR(exit_time(IsothermalMetric::euclidean_disc(), {-1, 0, 0}), 2.0, 1e-10); }

TEST(ExitTime, ChordAtHalfDistance) {
  const double y = std::sqrt(0.75);
  EXPECT_NEAR(exit_time(IsothermalMetric::euclidean_disc(), {-y, 0.5, 0}), oracle::chord(0.5), 1e-10);
}

TEST(ExitTime, FromCentre) {
  for (double th : {0.0, 1.0, 4.0}) EXPECT_NEAR(exit_time(IsothermalMetric::euclidean_disc(), {0, 0, th}), 1.0, 1e-10);
}

TEST(ExitTime, NontrappingGuard) {
  EXPECT_THROW(exit_time(IsothermalMetric::euclidean_disc(), {0, 0, 0}, {1e-3, 0.5}), NontrappingViolation);
  EXPECT_THROW(exit_time(IsothermalMetric::flat_torus(), {0, 0, 0}), DomainError);
}

TEST(Volume, ElementAndTotals) {
  EXPECT_EQ(sm_volume_element(IsothermalMetric::flat_torus(), 1.0, 2.0), 1.0);
  const auto c = IsothermalMetric::disc(Poly2::constant(0.3));
  EXPECT_NEAR(sm_volume_element(c, 0.1, 0.2), std::exp(0.6), 1e-15);
  EXPECT_NEAR(TorusSpace(IsothermalMetric::flat_torus(), 16).volume(), 8 * pi * pi * pi, 1e-10);
  EXPECT_NEAR(DiscSpace(IsothermalMetric::euclidean_disc()).volume(), 2 * pi * pi, 1e-12);
}

TEST(Volume, QuadraticDiscMatchesQuadrature) {
  const auto g = r2_disc();
  const double ref = oracle::disc_sm_volume([&](double a, double b) { return g.lambda(a, b); });
  EXPECT_NEAR(ref, pi * pi * (std::exp(2.0) - 1.0), 1e-10);
  EXPECT_NEAR(DiscSpace(g).volume(), ref, 1e-10 * ref);
}

TEST(Convexity, EuclideanDiscIsStrictlyConvex) {
  const auto r = boundary_convexity(IsothermalMetric::euclidean_disc());
  EXPECT_TRUE(r.strictly_convex);
  EXPECT_NEAR(r.min_geodesic_curvature, 1.0, 1e-15);
  EXPECT_EQ(r.samples, 256);
}

TEST(Convexity, StrongInwardFactorLosesConvexity) {
  Poly2 p;
  p.at(2, 0) = -1.0;
  p.at(0, 2) = -1.0;
  EXPECT_FALSE(boundary_convexity(IsothermalMetric::disc(p)).strictly_convex);
}
