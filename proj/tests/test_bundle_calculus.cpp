#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace geoflow;
using oracle::pi;
using Field = FourierField<TorusSpace>;

namespace {

std::shared_ptr<const TorusSpace> flat(int n = 16) { return TorusSpace::make(IsothermalMetric::flat_torus(), n); }
std::shared_ptr<const TorusSpace> bumpy(int n) {
  return TorusSpace::make(IsothermalMetric::torus({{1, 0, 0.1, 0.0}, {1, 1, 0.0, 0.05}}), n);
}

double max_diff(const Eigen::ArrayXcd& a, const Eigen::ArrayXcd& b) { return (a - b).abs().maxCoeff(); }

}  // namespace

TEST(ApplyOperator, VOnFiberMode) {
  const auto sp = flat();
  const auto u = Field::mode(sp, 3, 1, sp->constant(1.0));
  const auto v = apply_operator(Op::V, u);
  EXPECT_EQ(v.degrees(), std::vector<int>{1});
  EXPECT_LT(max_diff(v.get(1), sp->constant(cplx(0, 1))), 1e-15);
}

TEST(ApplyOperator, EtaPlusKillsConstants) {
  const auto sp = flat();
  EXPECT_TRUE(apply_operator(Op::EtaPlus, Field::constant(sp, 2, 3.0)).empty());
}

TEST(ApplyOperator, EtaPlusOnPlaneWave) {
  const auto sp = flat();
  const oracle::TrigField e{{{1, 0, 1.0}}};
  const auto out = apply_operator(Op::EtaPlus, Field::mode(sp, 2, 0, e.sample(*sp)));
  EXPECT_EQ(out.degrees(), std::vector<int>{1});
  EXPECT_LT(max_diff(out.get(1), cplx(0, 0.5) * e.sample(*sp)), 1e-14);
}

TEST(ApplyOperator, FlatEtaMatchesAnalyticDerivatives) {
  const auto sp = flat(24);
  const oracle::TrigField f{{{2, -1, {0.3, 1.0}}, {0, 3, {-0.7, 0.2}}, {-4, 5, {0.1, -0.4}}}};
  for (int k : {-2, 0, 3}) {
    const auto u = Field::mode(sp, 5, k, f.sample(*sp));
    EXPECT_LT(max_diff(apply_operator(Op::EtaPlus, u).get(k + 1), f.dz().sample(*sp)), 1e-12);
    EXPECT_LT(max_diff(apply_operator(Op::EtaMinus, u).get(k - 1), f.dzbar().sample(*sp)), 1e-12);
  }
}

TEST(ApplyOperator, NonflatEtaMatchesFiniteDifferences) {
  const auto sp = bumpy(32);
  const auto& g = sp->metric();
  const oracle::TrigField f{{{1, 2, {0.3, 1.0}}, {-2, 0, {0.5, 0.0}}}};
  const int k = 2;
  const auto u = Field::mode(sp, 4, k, f.sample(*sp));
  const auto up = apply_operator(Op::EtaPlus, u).get(k + 1);
  const auto dn = apply_operator(Op::EtaMinus, u).get(k - 1);
  const auto fz = f.dz(), fzb = f.dzbar();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sp->size(); i += 37) {
    const double x = sp->x1()[i], y = sp->x2()[i];
    const double l1 = oracle::d1([&](double t) { return g.lambda(t, y); }, x);
    const double l2 = oracle::d1([&](double t) { return g.lambda(x, t); }, y);
    const cplx lz = 0.5 * cplx(l1, -l2);
    const double e = std::exp(-g.lambda(x, y));
    worst = std::max(worst, std::abs(up[i] - e * (fz(x, y) - double(k) * lz * f(x, y))));
    worst = std::max(worst, std::abs(dn[i] - e * (fzb(x, y) + double(k) * std::conj(lz) * f(x, y))));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(ApplyOperator, DiscEtaMatchesFiniteDifferences) {
  Poly2 lam;
  lam.at(2, 0) = 0.5;
  lam.at(0, 2) = 0.5;
  lam.at(1, 0) = 0.2;
  const auto sp = DiscSpace::make(IsothermalMetric::disc(lam));
  std::mt19937_64 rng(3);
  const auto p = random_poly(3, rng);
  const int k = -1;
  const auto u = FourierField<DiscSpace>::mode(sp, 3, k, WeightedPoly::from(p));
  const auto up = apply_operator(Op::EtaPlus, u).get(k + 1);
  const auto dn = apply_operator(Op::EtaMinus, u).get(k - 1);
  const auto& g = sp->metric();
  auto re = [&](double a, double b) { return p(a, b).real(); };
  auto im = [&](double a, double b) { return p(a, b).imag(); };
  for (auto [x, y] : {std::pair{0.1, 0.2}, {-0.5, 0.3}, {0.6, -0.6}}) {
    auto dx = [&](auto f) { return oracle::d1([&](double t) { return f(t, y); }, x); };
    auto dy = [&](auto f) { return oracle::d1([&](double t) { return f(x, t); }, y); };
    const cplx px(dx(re), dx(im)), py(dy(re), dy(im));
    const cplx pz = 0.5 * (px - cplx(0, 1) * py), pzb = 0.5 * (px + cplx(0, 1) * py);
    const double l1 = dx([&](double a, double b) { return g.lambda(a, b); });
    const double l2 = dy([&](double a, double b) { return g.lambda(a, b); });
    const cplx lz = 0.5 * cplx(l1, -l2);
    const double e = std::exp(-g.lambda(x, y));
    EXPECT_NEAR(std::abs((*sp)(up, x, y) - e * (pz - double(k) * lz * p(x, y))), 0.0, 1e-9);
    EXPECT_NEAR(std::abs((*sp)(dn, x, y) - e * (pzb + double(k) * std::conj(lz) * p(x, y))), 0.0, 1e-9);
  }
}

TEST(ApplyOperator, XAndXperpDecompose) {
  const auto sp = bumpy(16);
  std::mt19937_64 rng(5);
  const auto u = random_torus_field(sp, 4, {3, 2, false}, rng);
  const auto ep = apply_operator(Op::EtaPlus, u), em = apply_operator(Op::EtaMinus, u);
  const double s = norm(u);
  EXPECT_LE(norm(apply_operator(Op::X, u) - (ep + em)), 1e-13 * s);
  EXPECT_LE(norm(apply_operator(Op::Xperp, u) - cplx(0, -1) * (ep - em)), 1e-13 * s);
}

TEST(ApplyOperator, EtaPlusRaisesDegreeByOne) {
  const auto sp = bumpy(16);
  std::mt19937_64 rng(9);
  const auto u = Field::mode(sp, 5, 2, random_trig_poly(*sp, 3, rng));
  EXPECT_EQ(apply_operator(Op::EtaPlus, u).degrees(), std::vector<int>{3});
  EXPECT_EQ(apply_operator(Op::EtaMinus, u).degrees(), std::vector<int>{1});
}

TEST(ApplyOperator, BandOverflowIsAnError) {
  const auto sp = flat();
  const auto top = Field::mode(sp, 2, 2, sp->constant(1.0));
  EXPECT_THROW(apply_operator(Op::EtaPlus, top), BandOverflow);
  EXPECT_THROW(apply_operator(Op::X, top), BandOverflow);
  EXPECT_NO_THROW(apply_operator(Op::EtaMinus, top));
  EXPECT_THROW(apply_operator(Op::Xperp, Field::mode(sp, 2, -2, sp->constant(1.0))), BandOverflow);
  EXPECT_THROW(Field::mode(sp, 2, 3, sp->constant(1.0)), BandOverflow);
}

TEST(ApplyOperator, RealityIsPreserved) {
  const auto sp = bumpy(16);
  std::mt19937_64 rng(2);
  const auto u = random_torus_field(sp, 5, {3, 3, true}, rng);
  EXPECT_TRUE(is_real(u));
  EXPECT_TRUE(is_real(apply_operator(Op::X, u)));
  EXPECT_TRUE(is_real(apply_operator(Op::Xperp, u)));
  const auto w = random_torus_field(sp, 5, {3, 3, false}, rng);
  EXPECT_FALSE(is_real(w));
}

TEST(InnerProduct, ConstantHasTorusVolume) {
  const auto sp = flat();
  const auto one = Field::constant(sp, 2, 1.0);
  EXPECT_NEAR(std::abs(inner_product(one, one) - 8 * pi * pi * pi), 0.0, 1e-10);
}

TEST(InnerProduct, FiberModesAreOrthogonal) {
  const auto sp = flat();
  const auto a = Field::mode(sp, 3, 1, sp->constant(1.0)), b = Field::mode(sp, 3, -2, sp->constant(1.0));
  EXPECT_EQ(inner_product(a, b), cplx(0.0));
}

TEST(InnerProduct, UnimodularWave) {
  const auto sp = flat();
  const auto u = Field::mode(sp, 1, 0, oracle::TrigField{{{1, 0, 1.0}}}.sample(*sp));
  EXPECT_NEAR(std::abs(inner_product(u, u) - 8 * pi * pi * pi), 0.0, 1e-10);
}

TEST(InnerProduct, MismatchedGridsAreRejected) {
  const auto a = Field::constant(flat(16), 2, 1.0), b = Field::constant(flat(32), 2, 1.0);
  EXPECT_THROW(inner_product(a, b), DomainError);
  EXPECT_THROW(inner_product(a, Field::constant(flat(16), 3, 1.0)), DomainError);
}

TEST(MixedNorm, SingleFiberMode) {
  const auto sp = flat();
  const auto u = Field::mode(sp, 3, 2, sp->constant(1.0));
  const double l2 = norm(u);
  EXPECT_NEAR(mixed_norm(u, 0.0).value, l2, 1e-12 * l2);
  EXPECT_NEAR(mixed_norm(u, -1.0).value, l2 / std::sqrt(5.0), 1e-12 * l2);
  EXPECT_FALSE(mixed_norm(u, 0.0).tail_flag);
  EXPECT_TRUE(mixed_norm(u.with_band(2), 0.0).tail_flag);
}

TEST(Project, Selectors) {
  const auto sp = flat();
  const auto one = sp->constant(1.0);
  auto u = Field::mode(sp, 3, 1, one);
  u.set(3, one);
  EXPECT_EQ(project(u, Selector::lambda(1)).degrees(), std::vector<int>{1});

  auto v = Field::constant(sp, 3, 2.0);
  v.set(1, one);
  const auto p0 = project(v, Selector::omega(0));
  EXPECT_EQ(p0.degrees(), std::vector<int>{0});
  EXPECT_LT(max_diff(p0.get(0), sp->constant(2.0)), 1e-15);

  auto w = Field::constant(sp, 3, 1.0);
  for (int k : {-2, -1, 1, 2}) w.set(k, sp->constant(0.5));
  EXPECT_EQ(project(w, Selector::tail_at_least(2)).degrees(), (std::vector<int>{-2, 2}));
  EXPECT_EQ(project_range(w, -1, 1).degrees(), (std::vector<int>{-1, 0, 1}));
}

TEST(Adjointness, FlatTorusIsExact) {
  const auto sp = flat(16);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    const auto u = random_torus_field(sp, 5, {4, 3, false}, rng);
    const auto w = random_torus_field(sp, 5, {4, 3, false}, rng);
    EXPECT_LE(adjointness_residual(u, w).max(), 1e-12);
  }
}

TEST(Adjointness, XOfOneIsZero) {
  const auto one = Field::constant(flat(), 2, 1.0);
  EXPECT_EQ(inner_product(apply_operator(Op::X, one), one), cplx(0.0));
}

TEST(Adjointness, NonflatDecaysUnderRefinement) {
  double prev = INFINITY;
  for (int n : {16, 32, 64}) {
    std::mt19937_64 rng(4);
    const auto sp = bumpy(n);
    const auto u = random_torus_field(sp, 5, {3, 3, false}, rng);
    const auto w = random_torus_field(sp, 5, {3, 3, false}, rng);
    const double r = adjointness_residual(u, w).max();
    EXPECT_LE(r, std::max(prev, 1e-12));
    prev = r;
  }
  EXPECT_LE(prev, 1e-10);
}

TEST(VerticalFields, GradientsAreCoefficientMaps) {
  const auto sp = flat();
  std::mt19937_64 rng(6);
  const auto u = random_torus_field(sp, 4, {2, 2, false}, rng);
  EXPECT_LE(norm(horizontal_gradient(u).z + apply_operator(Op::Xperp, u)), 0.0);
  EXPECT_LE(norm(vertical_gradient(u).z - apply_operator(Op::V, u)), 0.0);
}
