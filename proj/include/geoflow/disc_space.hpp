#pragma once

// Disc fields. A spatial coefficient is a finite sum  sum_s e^{-s lambda} p_s(x)
// with polynomial p_s. When lambda is a polynomial the operators eta_+-, V and
// multiplication by K map this class into itself exactly, so identities on
// the disc are limited by quadrature only.

#include "geoflow/errors.hpp"
#include "geoflow/metric2d.hpp"
#include "geoflow/poly2.hpp"

#include <Eigen/Core>
#include <boost/math/special_functions/legendre.hpp>

#include <map>
#include <memory>
#include <numbers>

namespace geoflow {

struct WeightedPoly {
  std::map<int, Poly2> terms;  ///< exponent s -> p_s, meaning e^{-s lambda} p_s

  static WeightedPoly from(Poly2 p, int s = 0) {
    WeightedPoly w;
    if (!p.empty()) w.terms.emplace(s, std::move(p));
    w.prune();
    return w;
  }

  bool empty() const { return terms.empty(); }

  WeightedPoly& axpy(cplx a, const WeightedPoly& o) {
    for (const auto& [s, p] : o.terms) terms[s].axpy(a, p);
    return prune();
  }
  WeightedPoly& operator+=(const WeightedPoly& o) { return axpy(1.0, o); }
  WeightedPoly& operator-=(const WeightedPoly& o) { return axpy(-1.0, o); }
  WeightedPoly& operator*=(cplx a) {
    for (auto& [s, p] : terms) p *= a;
    return *this;
  }
  friend WeightedPoly operator+(WeightedPoly a, const WeightedPoly& b) { return a += b; }
  friend WeightedPoly operator-(WeightedPoly a, const WeightedPoly& b) { return a -= b; }
  friend WeightedPoly operator*(cplx a, WeightedPoly w) { return w *= a; }
  friend WeightedPoly operator*(WeightedPoly w, cplx a) { return w *= a; }

  WeightedPoly conj() const {
    WeightedPoly out;
    for (const auto& [s, p] : terms) out.terms.emplace(s, p.conj());
    return out;
  }

  /// Removes exponents whose polynomial vanishes identically.
  WeightedPoly& prune() {
    for (auto it = terms.begin(); it != terms.end();) {
      it->second.trim();
      it = it->second.empty() ? terms.erase(it) : std::next(it);
    }
    return *this;
  }

  int max_degree() const {
    int d = -1;
    for (const auto& [s, p] : terms) d = std::max(d, p.degree());
    return d;
  }
};

struct DiscQuadrature {
  int n_radial = 40;
  int n_angular = 80;
};

class DiscSpace {
 public:
  using Function = WeightedPoly;
  static constexpr Domain domain = Domain::Disc;
  static constexpr int kMaxDegree = 96;

  DiscSpace(IsothermalMetric metric, DiscQuadrature q = {}) : metric_(std::move(metric)), quad_(q) {
    if (metric_.domain() != Domain::Disc) throw DomainError("DiscSpace needs a disc metric");
    if (q.n_radial < 2 || q.n_angular < 4) throw PreconditionError("disc quadrature too coarse");
    lam_ = metric_.lambda_poly();
    lam_z_ = lam_.dz();
    lam_zbar_ = lam_.dzbar();
    minus_lap_ = lam_.laplacian() * cplx(-1.0);

    const auto zeros = boost::math::legendre_p_zeros<double>(q.n_radial);
    std::vector<std::pair<double, double>> gl;  // (node on [-1,1], weight)
    for (double x : zeros) {
      const double dp = boost::math::legendre_p_prime(q.n_radial, x);
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      gl.emplace_back(x, w);
      if (x != 0.0) gl.emplace_back(-x, w);
    }
    const Eigen::Index N = Eigen::Index(gl.size()) * q.n_angular;
    Eigen::ArrayXd x1(N), x2(N), w(N);
    const double dphi = 2.0 * std::numbers::pi / q.n_angular;
    Eigen::Index i = 0;
    for (const auto& [xi, wi] : gl) {
      const double r = 0.5 * (1.0 + xi);
      for (int j = 0; j < q.n_angular; ++j, ++i) {
        const double phi = dphi * j;
        x1[i] = r * std::cos(phi);
        x2[i] = r * std::sin(phi);
        w[i] = 0.5 * wi * r * dphi;
      }
    }
    nodes_ = PowerTable(x1, x2, kMaxDegree);
    node_lam_ = Eigen::ArrayXd(N);
    for (Eigen::Index k = 0; k < N; ++k) node_lam_[k] = metric_.lambda(x1[k], x2[k]);
    weight_ = w * (2.0 * node_lam_).exp() * (2.0 * std::numbers::pi);
    x1_ = x1;
    x2_ = x2;

    Eigen::ArrayXd b1(q.n_angular), b2(q.n_angular);
    for (int j = 0; j < q.n_angular; ++j) {
      b1[j] = std::cos(dphi * j);
      b2[j] = std::sin(dphi * j);
    }
    ring_ = PowerTable(b1, b2, kMaxDegree);
    ring_lam_ = Eigen::ArrayXd(q.n_angular);
    for (int j = 0; j < q.n_angular; ++j) ring_lam_[j] = metric_.lambda(b1[j], b2[j]);
  }

  static std::shared_ptr<const DiscSpace> make(IsothermalMetric metric, DiscQuadrature q = {}) {
    return std::make_shared<const DiscSpace>(std::move(metric), q);
  }

  const IsothermalMetric& metric() const { return metric_; }
  const DiscQuadrature& quadrature() const { return quad_; }
  Eigen::Index size() const { return nodes_.size(); }
  const Eigen::ArrayXd& node_x1() const { return x1_; }
  const Eigen::ArrayXd& node_x2() const { return x2_; }
  /// Quadrature weights of the Liouville measure (fiber length folded in).
  const Eigen::ArrayXd& node_weight() const { return weight_; }
  std::string describe() const {
    return metric_.describe() + " nr=" + std::to_string(quad_.n_radial) + " nphi=" + std::to_string(quad_.n_angular);
  }

  bool compatible(const DiscSpace& o) const {
    return this == &o || (metric_ == o.metric_ && quad_.n_radial == o.quad_.n_radial &&
                          quad_.n_angular == o.quad_.n_angular);
  }

  const Poly2& lambda_z() const { return lam_z_; }
  const Poly2& lambda_zbar() const { return lam_zbar_; }

  Function zero() const { return {}; }
  Function constant(cplx c) const { return WeightedPoly::from(Poly2::constant(c)); }
  static bool is_zero(const Function& u) { return u.empty(); }
  static void axpy(Function& y, cplx a, const Function& x) { y.axpy(a, x); }

  Function eta_plus(const Function& u, int k) const {
    Function out;
    for (const auto& [s, p] : u.terms) {
      Poly2 q = p.dz();
      q.axpy(-double(s + k), lam_z_ * p);
      out.terms[s + 1] += q;
    }
    return out.prune();
  }

  Function eta_minus(const Function& u, int k) const {
    Function out;
    for (const auto& [s, p] : u.terms) {
      Poly2 q = p.dzbar();
      q.axpy(double(k - s), lam_zbar_ * p);
      out.terms[s + 1] += q;
    }
    return out.prune();
  }

  /// K u with K = -e^{-2 lambda} Laplacian(lambda).
  Function mul_curvature(const Function& u) const {
    Function out;
    for (const auto& [s, p] : u.terms) out.terms[s + 2] += minus_lap_ * p;
    return out.prune();
  }

  Eigen::ArrayXcd at_nodes(const Function& u) const { return evaluate_on(nodes_, node_lam_, u); }
  Eigen::ArrayXcd on_boundary_ring(const Function& u) const { return evaluate_on(ring_, ring_lam_, u); }

  cplx operator()(const Function& u, double x1, double x2) const {
    const double lam = metric_.lambda(x1, x2);
    cplx v = 0.0;
    for (const auto& [s, p] : u.terms) v += std::exp(-s * lam) * p(x1, x2);
    return v;
  }

  cplx inner(const Function& u, const Function& w) const {
    return (at_nodes(u) * at_nodes(w).conjugate() * weight_).sum();
  }
  double norm2(const Function& u) const { return (at_nodes(u).abs2() * weight_).sum(); }
  cplx integrate(const Function& u) const { return (at_nodes(u) * weight_).sum(); }
  double volume() const { return weight_.sum(); }

  double max_abs(const Function& u) const {
    if (u.empty()) return 0.0;
    return at_nodes(u).abs().maxCoeff();
  }
  double boundary_max_abs(const Function& u) const {
    if (u.empty()) return 0.0;
    return on_boundary_ring(u).abs().maxCoeff();
  }
  static Function conj(const Function& u) { return u.conj(); }

 private:
  static Eigen::ArrayXcd evaluate_on(const PowerTable& t, const Eigen::ArrayXd& lam, const Function& u) {
    Eigen::ArrayXcd out = Eigen::ArrayXcd::Zero(t.size());
    for (const auto& [s, p] : u.terms) {
      if (p.degree() > t.max_degree())
        throw DomainError("disc field degree " + std::to_string(p.degree()) + " exceeds tabulated powers");
      if (s == 0)
        out += t.evaluate(p);
      else
        out += t.evaluate(p) * (-double(s) * lam).exp();
    }
    return out;
  }

  IsothermalMetric metric_;
  DiscQuadrature quad_;
  Poly2 lam_, lam_z_, lam_zbar_, minus_lap_;
  PowerTable nodes_, ring_;
  Eigen::ArrayXd x1_, x2_, node_lam_, weight_, ring_lam_;
};

}  // namespace geoflow
