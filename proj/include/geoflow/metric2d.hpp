#pragma once

// Surfaces with metric e^{2 lambda} (dx1^2 + dx2^2) in isothermal coordinates,
// on the 2pi-periodic torus or on the Euclidean coordinate unit disc.

#include "geoflow/errors.hpp"
#include "geoflow/poly2.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace geoflow {

enum class Domain { Torus, Disc };

inline const char* to_string(Domain d) { return d == Domain::Torus ? "torus" : "disc"; }

/// One real Fourier term  a cos(p x1 + q x2) + b sin(p x1 + q x2).
struct TrigTerm {
  int p = 0;
  int q = 0;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
  friend bool operator==(const TrigTerm&, const TrigTerm&) = default;
};

struct PhasePoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double theta = 0.0;
};

class IsothermalMetric {
 public:
  static IsothermalMetric flat_torus() { return torus({}); }

  static IsothermalMetric torus(std::vector<TrigTerm> terms) {
    IsothermalMetric m;
    m.domain_ = Domain::Torus;
    m.trig_ = std::move(terms);
    return m;
  }

  static IsothermalMetric euclidean_disc() { return disc(Poly2{}); }

  /// lambda as a real bivariate polynomial in (x1, x2).
  static IsothermalMetric disc(Poly2 lambda) {
    IsothermalMetric m;
    m.domain_ = Domain::Disc;
    lambda.for_each_term([](int, int, cplx c) {
      if (c.imag() != 0.0) throw DomainError("disc conformal factor must have real coefficients");
    });
    m.poly_ = std::move(lambda);
    m.poly_.trim();
    m.poly_dx1_ = m.poly_.dx1();
    m.poly_dx2_ = m.poly_.dx2();
    m.poly_lap_ = m.poly_.laplacian();
    return m;
  }

  Domain domain() const { return domain_; }
  const std::vector<TrigTerm>& trig_terms() const { return trig_; }
  const Poly2& lambda_poly() const { return poly_; }

  bool is_flat() const {
    if (domain_ == Domain::Torus) {
      for (const auto& t : trig_)
        if ((t.p != 0 || t.q != 0) && (t.cos_coeff != 0.0 || t.sin_coeff != 0.0)) return false;
      return true;
    }
    return poly_.dx1().empty() && poly_.dx2().empty();
  }

  double lambda(double x1, double x2) const {
    if (domain_ == Domain::Disc) return poly_(x1, x2).real();
    double s = 0.0;
    for (const auto& t : trig_) {
      const double a = t.p * x1 + t.q * x2;
      s += t.cos_coeff * std::cos(a) + t.sin_coeff * std::sin(a);
    }
    return s;
  }

  std::array<double, 2> grad_lambda(double x1, double x2) const {
    if (domain_ == Domain::Disc) return {poly_dx1_(x1, x2).real(), poly_dx2_(x1, x2).real()};
    double g1 = 0.0, g2 = 0.0;
    for (const auto& t : trig_) {
      const double a = t.p * x1 + t.q * x2;
      const double d = -t.cos_coeff * std::sin(a) + t.sin_coeff * std::cos(a);
      g1 += t.p * d;
      g2 += t.q * d;
    }
    return {g1, g2};
  }

  double laplacian_lambda(double x1, double x2) const {
    if (domain_ == Domain::Disc) return poly_lap_(x1, x2).real();
    double s = 0.0;
    for (const auto& t : trig_) {
      const double a = t.p * x1 + t.q * x2;
      s -= double(t.p * t.p + t.q * t.q) * (t.cos_coeff * std::cos(a) + t.sin_coeff * std::sin(a));
    }
    return s;
  }

  bool contains(double x1, double x2, double tol = 1e-12) const {
    return domain_ == Domain::Torus || x1 * x1 + x2 * x2 <= 1.0 + tol;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(domain_) << ":";
    if (domain_ == Domain::Torus) {
      for (const auto& t : trig_) os << " [" << t.p << "," << t.q << "]c" << t.cos_coeff << "s" << t.sin_coeff;
    } else {
      poly_.for_each_term([&](int a, int b, cplx c) { os << " x1^" << a << "x2^" << b << "*" << c.real(); });
    }
    return os.str();
  }

  friend bool operator==(const IsothermalMetric& a, const IsothermalMetric& b) {
    return a.describe() == b.describe();
  }

 private:
  Domain domain_ = Domain::Torus;
  std::vector<TrigTerm> trig_;
  Poly2 poly_, poly_dx1_, poly_dx2_, poly_lap_;
};

/// Gaussian curvature  K = -e^{-2 lambda} Laplacian(lambda).
inline double curvature_at(const IsothermalMetric& g, double x1, double x2) {
  if (!g.contains(x1, x2)) throw DomainError("curvature_at: point outside the unit disc");
  return -std::exp(-2.0 * g.lambda(x1, x2)) * g.laplacian_lambda(x1, x2);
}

/// Density of the Liouville measure e^{2 lambda} dx1 dx2 dtheta.
inline double sm_volume_element(const IsothermalMetric& g, double x1, double x2) {
  return std::exp(2.0 * g.lambda(x1, x2));
}

namespace detail {

inline std::array<double, 3> geodesic_rhs(const IsothermalMetric& g, const std::array<double, 3>& s) {
  const double e = std::exp(-g.lambda(s[0], s[1]));
  const auto grad = g.grad_lambda(s[0], s[1]);
  const double c = std::cos(s[2]), sn = std::sin(s[2]);
  return {e * c, e * sn, e * (-grad[0] * sn + grad[1] * c)};
}

inline std::array<double, 3> rk4_step(const IsothermalMetric& g, const std::array<double, 3>& s, double h) {
  auto add = [](const std::array<double, 3>& a, const std::array<double, 3>& b, double f) {
    return std::array<double, 3>{a[0] + f * b[0], a[1] + f * b[1], a[2] + f * b[2]};
  };
  const auto k1 = geodesic_rhs(g, s);
  const auto k2 = geodesic_rhs(g, add(s, k1, 0.5 * h));
  const auto k3 = geodesic_rhs(g, add(s, k2, 0.5 * h));
  const auto k4 = geodesic_rhs(g, add(s, k3, h));
  std::array<double, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

inline double boundary_gap(const std::array<double, 3>& s) { return s[0] * s[0] + s[1] * s[1] - 1.0; }

inline std::array<double, 3> to_state(const PhasePoint& p) { return {p.x1, p.x2, p.theta}; }
inline PhasePoint to_point(const std::array<double, 3>& s) { return {s[0], s[1], s[2]}; }

/// Bisection on the sub-step length that lands on |x| = 1, starting inside.
inline double locate_exit(const IsothermalMetric& g, const std::array<double, 3>& inside, double h) {
  double lo = 0.0, hi = h;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (boundary_gap(rk4_step(g, inside, mid)) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline bool on_boundary_pointing_out(const PhasePoint& p) {
  const double gap = p.x1 * p.x1 + p.x2 * p.x2 - 1.0;
  return std::abs(gap) <= 1e-12 && p.x1 * std::cos(p.theta) + p.x2 * std::sin(p.theta) >= 0.0;
}

}  // namespace detail

struct Trajectory {
  std::vector<double> t;
  std::vector<PhasePoint> points;
  bool exited = false;  ///< disc only: stopped at |x| = 1
};

/// Raised when a disc geodesic exceeds the step budget before exiting.
class TrappingError : public Error {
 public:
  TrappingError(const std::string& what, Trajectory partial) : Error(what), partial(std::move(partial)) {}
  const char* kind() const noexcept override { return "trapping_error"; }
  Trajectory partial;
};

struct FlowOptions {
  std::size_t max_steps = 50'000'000;
};

/// Fixed-step RK4 integration of the geodesic flow in (x1, x2, theta).
inline Trajectory geodesic_flow(const IsothermalMetric& g, const PhasePoint& p0, double t_end, double dt,
                                const FlowOptions& opts = {}) {
  if (!(dt > 0.0)) throw PreconditionError("geodesic_flow: dt must be positive");
  if (!g.contains(p0.x1, p0.x2)) throw DomainError("geodesic_flow: start point outside the disc");
  Trajectory tr;
  tr.t.push_back(0.0);
  tr.points.push_back(p0);
  const bool disc = g.domain() == Domain::Disc;
  if (disc && detail::on_boundary_pointing_out(p0)) {
    tr.exited = true;
    return tr;
  }
  auto s = detail::to_state(p0);
  double t = 0.0;
  std::size_t steps = 0;
  while (t < t_end) {
    if (++steps > opts.max_steps)
      throw TrappingError("geodesic_flow: step budget exhausted before leaving the disc", std::move(tr));
    const double h = std::min(dt, t_end - t);
    auto next = detail::rk4_step(g, s, h);
    if (disc && detail::boundary_gap(next) > 0.0) {
      const double hs = detail::locate_exit(g, s, h);
      next = detail::rk4_step(g, s, hs);
      tr.t.push_back(t + hs);
      tr.points.push_back(detail::to_point(next));
      tr.exited = true;
      return tr;
    }
    s = next;
    t += h;
    tr.t.push_back(t);
    tr.points.push_back(detail::to_point(s));
  }
  return tr;
}

struct ExitOptions {
  double dt = 1e-3;
  double max_length = 1e3;
};

struct ExitResult {
  double tau = 0.0;
  PhasePoint exit;
};

/// Exit time and exit point of the disc geodesic through p0.
inline ExitResult exit_point(const IsothermalMetric& g, const PhasePoint& p0, const ExitOptions& opts = {}) {
  if (g.domain() != Domain::Disc) throw DomainError("exit_time is defined on the disc only");
  if (!g.contains(p0.x1, p0.x2)) throw DomainError("exit_time: start point outside the disc");
  if (detail::on_boundary_pointing_out(p0)) return {0.0, p0};
  auto s = detail::to_state(p0);
  double t = 0.0;
  while (t < opts.max_length) {
    const auto next = detail::rk4_step(g, s, opts.dt);
    if (detail::boundary_gap(next) > 0.0) {
      const double hs = detail::locate_exit(g, s, opts.dt);
      return {t + hs, detail::to_point(detail::rk4_step(g, s, hs))};
    }
    s = next;
    t += opts.dt;
  }
  throw NontrappingViolation("exit_time: geodesic did not leave the disc within max_length");
}

inline double exit_time(const IsothermalMetric& g, const PhasePoint& p0, const ExitOptions& opts = {}) {
  return exit_point(g, p0, opts).tau;
}

struct ConvexityReport {
  double min_geodesic_curvature = 0.0;
  bool strictly_convex = false;
  int samples = 0;
};

/// Geodesic curvature of |x| = 1 in the metric e^{2 lambda} delta, which is
/// e^{-lambda} (1 + d lambda / dr) on the unit circle; sampled, not certified.
inline ConvexityReport boundary_convexity(const IsothermalMetric& g, int samples = 256) {
  if (g.domain() != Domain::Disc) throw DomainError("boundary_convexity: disc only");
  ConvexityReport rep;
  rep.samples = samples;
  rep.min_geodesic_curvature = INFINITY;
  for (int i = 0; i < samples; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / samples;
    const double x1 = std::cos(phi), x2 = std::sin(phi);
    const auto grad = g.grad_lambda(x1, x2);
    const double kappa = std::exp(-g.lambda(x1, x2)) * (1.0 + x1 * grad[0] + x2 * grad[1]);
    rep.min_geodesic_curvature = std::min(rep.min_geodesic_curvature, kappa);
  }
  rep.strictly_convex = rep.min_geodesic_curvature > 0.0;
  return rep;
}

}  // namespace geoflow
