#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace geoflow;
using oracle::pi;
using Field = FourierField<DiscSpace>;

namespace {

IsothermalMetric bumpy() {
  Poly2 lam;
  lam.at(2, 0) = 0.15;
  lam.at(0, 2) = 0.15;
  lam.at(1, 0) = 0.05;
  return IsothermalMetric::disc(lam);
}

Poly2 radial_bump() {
  Poly2 p = Poly2::constant(1.0);
  p.at(2, 0) = -1.0;
  p.at(0, 2) = -1.0;
  return p;
}

}  // namespace

TEST(Fan, EuclideanChords) {
  const BoundaryFan fan(IsothermalMetric::euclidean_disc(), 8, 16);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 16; ++j) {
      const Ray& r = fan.ray(i, j);
      EXPECT_NEAR(r.tau, oracle::chord(std::sin(r.alpha)), 1e-6);
      EXPECT_EQ(r.steps % 2, 0);
      EXPECT_LE(r.tau / r.steps, 1e-3 + 1e-15);
    }
  EXPECT_EQ(fan.size(), 128u);
}

TEST(Fan, CachedExitTimesMatchDirectComputation) {
  const BoundaryFan fan(bumpy(), 6, 8);
  for (const auto& r : fan.rays()) EXPECT_NEAR(r.tau, exit_time(fan.metric(), r.start, {1e-3, 1e3}), 1e-8);
}

TEST(Fan, Preconditions) {
  EXPECT_THROW(BoundaryFan(IsothermalMetric::flat_torus(), 4, 4), DomainError);
  EXPECT_THROW(BoundaryFan(IsothermalMetric::euclidean_disc(), 0, 4), ConfigError);
}

TEST(RayTransform, DiameterOfOddFunctionVanishes) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  const auto f = Field::mode(sp, 1, 0, WeightedPoly::from(Poly2::monomial(1, 0)));
  EXPECT_NEAR(std::abs(ray_integral(f, {1.0, 0.0, pi})), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(ray_integral(f, {0.0, -1.0, pi / 2})), 0.0, 1e-12);
}

TEST(RayTransform, ConstantGivesChordLength) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  const auto one = Field::constant(sp, 1, 1.0);
  const BoundaryFan fan(sp->metric(), 4, 8);
  const auto I = ray_transform(SymTensorField(0, one), fan);
  for (std::size_t r = 0; r < fan.size(); ++r) EXPECT_NEAR(I[Eigen::Index(r)].real(), fan.rays()[r].tau, 1e-12);
}

TEST(RayTransform, PotentialFieldsIntegrateToZero) {
  const auto sp = DiscSpace::make(bumpy());
  const BoundaryFan fan(sp->metric(), 8, 8);
  for (int m : {1, 2}) {
    const auto pots = potential_basis(sp, m + 2, m, 2);
    ASSERT_FALSE(pots.empty());
    std::vector<const Field*> ptr;
    for (const auto& p : pots) ptr.push_back(&p);
    const auto R = ray_transform_batch(ptr, fan);
    double scale = 0.0;
    for (const auto& p : pots) scale = std::max(scale, norm(p));
    EXPECT_LE(R.cwiseAbs().maxCoeff(), 1e-6 * scale) << "m = " << m;
  }
}

TEST(RayTransform, NonnegativeFunctionHasNonnegativeTransform) {
  const auto sp = DiscSpace::make(bumpy());
  const auto f = Field::mode(sp, 1, 0, WeightedPoly::from(radial_bump()));
  const BoundaryFan fan(sp->metric(), 8, 8);
  const auto I = ray_transform(SymTensorField(0, f), fan);
  for (Eigen::Index r = 0; r < I.size(); ++r) {
    EXPECT_GE(I[r].real(), -1e-12);
    EXPECT_NEAR(I[r].imag(), 0.0, 1e-14);
  }
}

TEST(RayTransform, StaleFanIsRejected) {
  const BoundaryFan fan(IsothermalMetric::euclidean_disc(), 4, 4);
  const auto sp = DiscSpace::make(bumpy());
  EXPECT_THROW(ray_transform(SymTensorField(0, Field::constant(sp, 1, 1.0)), fan), StaleFan);
  EXPECT_NO_THROW(fan.require_metric(IsothermalMetric::euclidean_disc()));
}

TEST(RayTransform, EvaluateSumsModes) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  auto u = Field::mode(sp, 3, 1, WeightedPoly::from(Poly2::monomial(1, 0)));
  u.set(-1, WeightedPoly::from(Poly2::constant(2.0)));
  const double x = 0.3, y = -0.2, t = 0.7;
  EXPECT_NEAR(std::abs(evaluate(u, x, y, t) - (x * std::polar(1.0, t) + 2.0 * std::polar(1.0, -t))), 0.0, 1e-14);
}

TEST(SymTensor, BandOverflow) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  EXPECT_THROW(SymTensorField(1, Field::constant(sp, 3, 1.0)), BandOverflow);
  EXPECT_THROW(SymTensorField(2, Field::mode(sp, 5, 3, sp->constant(1.0))), BandOverflow);
  EXPECT_NO_THROW(SymTensorField(2, Field::mode(sp, 5, -2, sp->constant(1.0))));
  EXPECT_THROW(SymTensorField(-1, Field(sp, 1)), PreconditionError);
}

TEST(Santalo, EuclideanVolumeOnSmallFan) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  const BoundaryFan fan(sp->metric(), 4, 4);
  const auto r = santalo_integral(Field::constant(sp, 1, 1.0), fan);
  EXPECT_NEAR(r.fan_value.real(), 2 * pi * pi, 1e-9);
  EXPECT_NEAR(r.grid_value.real(), 2 * pi * pi, 1e-12);
}

TEST(Santalo, RadialBumpOnEuclideanDisc) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  const BoundaryFan fan(sp->metric(), 32, 32);
  const auto r = santalo_integral(Field::mode(sp, 1, 0, WeightedPoly::from(radial_bump())), fan);
  // int_SM (1 - r^2) = 2 pi * pi / 2.
  EXPECT_NEAR(r.grid_value.real(), pi * pi, 1e-12);
  EXPECT_LE(r.residual, 1e-3);
}

TEST(Santalo, NonflatDisc) {
  const auto g = bumpy();
  const auto sp = DiscSpace::make(g);
  const BoundaryFan fan(g, 48, 48);
  const auto r = santalo_integral(Field::constant(sp, 1, 1.0), fan);
  EXPECT_NEAR(r.grid_value.real(), oracle::disc_sm_volume([&](double x, double y) { return g.lambda(x, y); }), 1e-8);
  EXPECT_LE(r.residual, 1e-3);
}

TEST(Santalo, ZeroField) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  const BoundaryFan fan(sp->metric(), 4, 4);
  const auto r = santalo_integral(Field(sp, 1), fan);
  EXPECT_EQ(r.fan_value, cplx(0.0));
  EXPECT_EQ(r.grid_value, cplx(0.0));
}

TEST(Backprojection, ConstantDataGivesFullCircle) {
  const BoundaryFan fan(bumpy(), 16, 16);
  const Eigen::VectorXcd h = Eigen::VectorXcd::Ones(Eigen::Index(fan.size()));
  const auto bp = backproject_adjoint(h, fan, {{0.0, 0.0}, {0.5, 0.2}, {-0.3, 0.6}});
  for (const auto& v : bp.values) EXPECT_NEAR(std::abs(v - 2 * pi), 0.0, 1e-12);
  EXPECT_TRUE(bp.coverage_warnings.empty());
}

TEST(Backprojection, CoarseDirectionsWarn) {
  const BoundaryFan fan(IsothermalMetric::euclidean_disc(), 16, 16);
  const Eigen::VectorXcd h = Eigen::VectorXcd::Ones(Eigen::Index(fan.size()));
  const auto bp = backproject_adjoint(h, fan, {{0.1, 0.1}, {0.4, -0.5}}, {2, 1e-2});
  EXPECT_EQ(bp.coverage_warnings.size(), 2u);
  for (int c : bp.coverage) EXPECT_LE(c, 2);
}

TEST(Backprojection, Preconditions) {
  const BoundaryFan small(IsothermalMetric::euclidean_disc(), 8, 8);
  EXPECT_THROW(backproject_adjoint(Eigen::VectorXcd::Ones(64), small, {{0, 0}}), PreconditionError);
  const BoundaryFan fan(IsothermalMetric::euclidean_disc(), 16, 16);
  EXPECT_THROW(backproject_adjoint(Eigen::VectorXcd::Ones(3), fan, {{0, 0}}), PreconditionError);
}

TEST(Backprojection, PositiveDataStaysPositive) {
  const auto sp = DiscSpace::make(bumpy());
  const BoundaryFan fan(sp->metric(), 16, 16);
  const auto I = ray_transform(SymTensorField(0, Field::mode(sp, 1, 0, WeightedPoly::from(radial_bump()))), fan);
  const auto bp = backproject_adjoint(I, fan, {{0.0, 0.0}, {0.7, 0.0}, {-0.2, -0.8}});
  for (const auto& v : bp.values) EXPECT_GT(v.real(), 0.0);
}

TEST(Duality, RadialBump) {
  const auto sp = DiscSpace::make(bumpy(), {16, 32});
  const auto f = Field::mode(sp, 1, 0, WeightedPoly::from(radial_bump()));
  const BoundaryFan fan(sp->metric(), 32, 32);
  Eigen::VectorXcd h(Eigen::Index(fan.size()));
  for (std::size_t r = 0; r < fan.size(); ++r) h[Eigen::Index(r)] = 1.0 + 0.5 * std::cos(fan.rays()[r].phi);
  const auto d = duality_check(f, h, fan);
  EXPECT_LE(d.residual, 1e-3);
  EXPECT_GT(d.boundary_pairing.real(), 0.0);
}

TEST(Solenoidal, PotentialIsRemoved) {
  const auto sp = DiscSpace::make(bumpy());
  for (int m : {1, 2}) {
    const auto pots = potential_basis(sp, m + 2, m, 2);
    Field f = pots[1];
    f.axpy(cplx(0.5, -1.0), pots[3]);
    const auto s = solenoidal_project(SymTensorField(m, f), {2});
    EXPECT_LE(norm(s.field), 1e-8 * norm(f)) << "m = " << m;
  }
}

TEST(Solenoidal, DegreeZeroPassesThrough) {
  const auto sp = DiscSpace::make(bumpy());
  const auto f = Field::mode(sp, 1, 0, WeightedPoly::from(radial_bump()));
  const auto s = solenoidal_project(SymTensorField(0, f));
  EXPECT_TRUE(s.solenoidal);
  Field diff = s.field;
  diff -= f;
  EXPECT_EQ(norm(diff), 0.0);
}

TEST(Solenoidal, ResultIsOrthogonalToPotentials) {
  const auto sp = DiscSpace::make(bumpy());
  std::mt19937_64 rng(5);
  Field f(sp, 3);
  for (int k : {-1, 1}) f.set(k, WeightedPoly::from(random_poly(2, rng)));
  const auto s = solenoidal_project(SymTensorField(1, f));
  EXPECT_LE(s.solenoidal_residual, 1e-8);
  for (const auto& p : potential_basis(sp, 3, 1, 2))
    EXPECT_LE(std::abs(inner_product(s.field, p)), 1e-8 * norm(s.field) * norm(p));
}

TEST(Spectrum, MatchesRadonSingularValues) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  const BoundaryFan fan(sp->metric(), 32, 32);
  // Degrees 0..3 complete: multiplicity n + 1 of sqrt(2 / (n + 1)).
  const auto r = sinjectivity_spectrum(sp, 0, 10, fan);
  ASSERT_EQ(r.rank, 10);
  std::vector<double> expect;
  for (int n = 0; n <= 3; ++n)
    for (int j = 0; j <= n; ++j) expect.push_back(oracle::radon_singular_value(n));
  std::sort(expect.rbegin(), expect.rend());
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(r.singular_values[std::size_t(i)], expect[std::size_t(i)], 1e-6);
  EXPECT_NEAR(r.sigma_min, oracle::radon_singular_value(3), 1e-6);
}

TEST(Spectrum, PotentialsAreInvisible) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  const BoundaryFan fan(sp->metric(), 24, 24);
  const auto r = sinjectivity_spectrum(sp, 1, 8, fan);
  EXPECT_GT(r.sigma_min, 0.1);
  ASSERT_FALSE(r.potential_sigma.empty());
  for (double s : r.potential_sigma) EXPECT_LE(s, 1e-6);
  ASSERT_EQ(r.ladder.size(), 2u);
  EXPECT_GE(r.ladder[0].second, r.ladder[1].second - 1e-12);
}

TEST(Spectrum, Errors) {
  const auto sp = DiscSpace::make(IsothermalMetric::euclidean_disc());
  const BoundaryFan fan(sp->metric(), 8, 8);
  EXPECT_THROW(sinjectivity_spectrum(sp, 0, 0, fan), ConfigError);
  EXPECT_THROW(sinjectivity_spectrum(sp, 0, 40, fan), PreconditionError);
}
