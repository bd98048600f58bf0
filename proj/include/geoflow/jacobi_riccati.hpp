#pragma once

// Scalar beta-Jacobi equation J'' + beta K(t) J = 0 along a unit-speed
// geodesic, conjugate times, terminator bracketing, Green solutions of the
// Riccati equation U' + U^2 + beta K = 0 and the index form.

#include "geoflow/errors.hpp"
#include "geoflow/metric2d.hpp"

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace geoflow {

class CurvatureProfile {
 public:
  static CurvatureProfile constant(double k, double length) {
    CurvatureProfile p([k](double) { return k; }, length, "constant K=" + fmt(k));
    p.max_abs_ = std::abs(k);
    p.period_ = length;
    p.constant_ = true;
    return p;
  }

  /// K(t) = a0 + sum_j (a_j cos(j w t) + b_j sin(j w t)), w = 2pi / period.
  static CurvatureProfile trig(double a0, std::vector<double> a, std::vector<double> b, double period) {
    const double w = 2.0 * std::numbers::pi / period;
    auto f = [a0, a, b, w](double t) {
      double s = a0;
      for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * std::cos(double(j + 1) * w * t);
      for (std::size_t j = 0; j < b.size(); ++j) s += b[j] * std::sin(double(j + 1) * w * t);
      return s;
    };
    CurvatureProfile p(f, period, "trig");
    p.period_ = period;
    p.max_abs_ = p.sampled_max_abs();
    return p;
  }

  /// K(t) = max(0, sin t), 2pi-periodic.
  static CurvatureProfile positive_sine(double length) {
    CurvatureProfile p([](double t) { return std::max(0.0, std::sin(t)); }, length, "max(0, sin t)");
    p.period_ = 2.0 * std::numbers::pi;
    p.max_abs_ = 1.0;
    return p;
  }

  /// Any callable; period 0 means not periodic (defined on [0, length]).
  static CurvatureProfile from_function(std::function<double(double)> k, double length, double period = 0.0,
                                        std::string label = "function") {
    CurvatureProfile p(std::move(k), length, std::move(label));
    p.period_ = period;
    p.max_abs_ = p.sampled_max_abs();
    return p;
  }

  /// Cubic B-spline through samples K(t0 + i dt), i = 0..n-1, on [0, (n-1) dt].
  static CurvatureProfile sampled(std::vector<double> samples, double dt, std::string label = "sampled") {
    if (samples.size() < 4) throw PreconditionError("sampled curvature profile needs at least 4 samples");
    auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        samples.data(), samples.size(), 0.0, dt);
    const double length = dt * double(samples.size() - 1);
    CurvatureProfile p([spline](double t) { return (*spline)(t); }, length, std::move(label));
    p.sample_dt_ = dt;
    p.interpolation_order_ = 3;
    p.max_abs_ = 0.0;
    for (double s : samples) p.max_abs_ = std::max(p.max_abs_, std::abs(s));
    return p;
  }

  /// Curvature along the geodesic through p0, sampled every dt up to length
  /// (or the disc exit) and interpolated by a cubic spline.
  static CurvatureProfile along_geodesic(const IsothermalMetric& g, const PhasePoint& p0, double length, double dt) {
    const auto tr = geodesic_flow(g, p0, length, dt);
    std::vector<double> ks;
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
      if (i + 1 == tr.points.size() && std::abs(tr.t[i] - dt * double(i)) > 1e-12) break;
      ks.push_back(curvature_at(g, tr.points[i].x1, tr.points[i].x2));
    }
    return sampled(std::move(ks), dt, "geodesic " + g.describe());
  }

  double operator()(double t) const {
    if (period_ > 0.0) return k_(t);
    if (t < -1e-12 || t > length_ + 1e-12)
      throw DomainError("curvature profile evaluated outside [0, " + fmt(length_) + "]");
    return k_(std::clamp(t, 0.0, length_));
  }

  double length() const { return length_; }
  double period() const { return period_; }
  bool periodic() const { return period_ > 0.0; }
  double max_abs() const { return max_abs_; }
  bool is_constant() const { return constant_; }
  double sample_dt() const { return sample_dt_; }
  int interpolation_order() const { return interpolation_order_; }
  const std::string& label() const { return label_; }

  /// K vanishes identically (sampled) within tol.
  bool flat(double tol = 1e-10) const { return max_abs_ <= tol; }

 private:
  CurvatureProfile(std::function<double(double)> k, double length, std::string label)
      : k_(std::move(k)), length_(length), label_(std::move(label)) {
    if (!(length > 0.0)) throw PreconditionError("curvature profile length must be positive");
  }

  double sampled_max_abs() const {
    const double span = period_ > 0.0 ? period_ : length_;
    double m = 0.0;
    for (int i = 0; i <= 4096; ++i) m = std::max(m, std::abs(k_(span * i / 4096.0)));
    return m;
  }

  static std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }

  std::function<double(double)> k_;
  double length_;
  double period_ = 0.0;
  double max_abs_ = 0.0;
  double sample_dt_ = 0.0;
  int interpolation_order_ = 0;
  bool constant_ = false;
  std::string label_;
};

/// Largest step allowed for RK4 on J'' + beta K J = 0.
inline double jacobi_step(const CurvatureProfile& p, double beta) {
  const double bk = beta * p.max_abs();
  return 1e-3 * std::min(1.0, bk > 0.0 ? 1.0 / std::sqrt(bk) : 1.0);
}

struct JacobiState {
  double J = 0.0;
  double Jp = 0.0;
};

namespace detail {

inline JacobiState jacobi_rk4(const CurvatureProfile& p, double beta, double t, const JacobiState& s, double h) {
  auto f = [&](double tt, double J, double Jp) { return std::array<double, 2>{Jp, -beta * p(tt) * J}; };
  const auto k1 = f(t, s.J, s.Jp);
  const auto k2 = f(t + 0.5 * h, s.J + 0.5 * h * k1[0], s.Jp + 0.5 * h * k1[1]);
  const auto k3 = f(t + 0.5 * h, s.J + 0.5 * h * k2[0], s.Jp + 0.5 * h * k2[1]);
  const auto k4 = f(t + h, s.J + h * k3[0], s.Jp + h * k3[1]);
  return {s.J + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          s.Jp + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

/// Rescales (J, J') when it leaves [1e-300, 1e100]; the ODE is linear.
inline void renormalize(JacobiState& s) {
  const double m = std::max(std::abs(s.J), std::abs(s.Jp));
  if (m > 1e100 || (m > 0.0 && m < 1e-300)) {
    s.J /= m;
    s.Jp /= m;
  }
}

inline int step_count(double span, double dt_max) { return std::max(1, int(std::ceil(std::abs(span) / dt_max - 1e-9))); }

}  // namespace detail

struct JacobiTrajectory {
  std::vector<double> t;
  std::vector<double> J;
  std::vector<double> Jp;
};

/// RK4 from t = 0 to t_end (default: the profile length) with the step rule
/// dt <= 1e-3 min(1, 1/sqrt(beta max|K|)).
inline JacobiTrajectory solve_beta_jacobi(const CurvatureProfile& p, double beta, JacobiState init,
                                          std::optional<double> t_end = std::nullopt) {
  if (beta < 0.0) throw PreconditionError("beta must be nonnegative");
  const double T = t_end.value_or(p.length());
  const int n = detail::step_count(T, jacobi_step(p, beta));
  const double h = T / n;
  JacobiTrajectory tr;
  tr.t.reserve(std::size_t(n) + 1);
  JacobiState s = init;
  tr.t.push_back(0.0);
  tr.J.push_back(s.J);
  tr.Jp.push_back(s.Jp);
  for (int i = 0; i < n; ++i) {
    s = detail::jacobi_rk4(p, beta, h * i, s, h);
    tr.t.push_back(h * (i + 1));
    tr.J.push_back(s.J);
    tr.Jp.push_back(s.Jp);
  }
  return tr;
}

/// First t in (0, horizon] with J(t) = 0 for J(0) = 0, J'(0) = 1, located by
/// bisection to 1e-8; empty if J keeps its sign.
inline std::optional<double> first_conjugate_time(const CurvatureProfile& p, double beta,
                                                  std::optional<double> horizon = std::nullopt) {
  if (beta < 0.0) throw PreconditionError("beta must be nonnegative");
  const double T = horizon.value_or(p.length());
  const int n = detail::step_count(T, jacobi_step(p, beta));
  const double h = T / n;
  JacobiState s{0.0, 1.0};
  for (int i = 0; i < n; ++i) {
    const double t0 = h * i;
    JacobiState next = detail::jacobi_rk4(p, beta, t0, s, h);
    if (next.J <= 0.0) {
      double lo = 0.0, hi = h;
      while (hi - lo > 1e-8 * 0.5) {
        const double mid = 0.5 * (lo + hi);
        if (detail::jacobi_rk4(p, beta, t0, s, mid).J <= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      return t0 + 0.5 * (lo + hi);
    }
    detail::renormalize(next);
    s = next;
  }
  return std::nullopt;
}

struct TerminatorEstimate {
  double beta_lower = 0.0;  ///< no conjugate point on the sampled profiles (relative to their horizons)
  double beta_upper = 0.0;  ///< a conjugate point was found: a certificate beta_Ter <= beta_upper
  int witness = -1;         ///< profile exhibiting the conjugate point at beta_upper
  std::optional<double> witness_time;
  bool none_up_to_max = false;  ///< no conjugate points up to beta_max
  int bisections = 0;
};

inline TerminatorEstimate estimate_terminator(const std::vector<CurvatureProfile>& profiles, double beta_max,
                                              double tol) {
  if (profiles.empty()) throw PreconditionError("estimate_terminator: empty profile list");
  if (!(beta_max > 0.0) || !(tol > 0.0)) throw PreconditionError("estimate_terminator: beta_max and tol must be positive");
  auto bad = [&](double beta, int& who, std::optional<double>& when) {
    for (std::size_t i = 0; i < profiles.size(); ++i)
      if (auto t = first_conjugate_time(profiles[i], beta)) {
        who = int(i);
        when = t;
        return true;
      }
    return false;
  };
  TerminatorEstimate r;
  int who = -1;
  std::optional<double> when;
  if (!bad(beta_max, who, when)) {
    r.beta_lower = r.beta_upper = beta_max;
    r.none_up_to_max = true;
    return r;
  }
  r.witness = who;
  r.witness_time = when;
  double lo = 0.0, hi = beta_max;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    int w = -1;
    std::optional<double> tm;
    if (bad(mid, w, tm)) {
      hi = mid;
      r.witness = w;
      r.witness_time = tm;
    } else {
      lo = mid;
    }
    ++r.bisections;
  }
  r.beta_lower = lo;
  r.beta_upper = hi;
  return r;
}

enum class GreenSide { Minus, Plus };

struct RiccatiRecord {
  double beta = 0.0;
  GreenSide side = GreenSide::Minus;
  double horizon = 0.0;
  std::vector<double> t;
  std::vector<double> U;
  double convergence = 0.0;  ///< |U_T(t0) - U_{2T}(t0)|
  std::vector<double> ladder_horizons;  ///< T/2, T, 2T
  std::vector<double> ladder_values;    ///< S_T(t0) along the ladder
  bool ladder_monotone = true;          ///< U- approximants increase, U+ approximants decrease (1e-9 slack)
  double riccati_residual = 0.0;        ///< max |U' + U^2 + beta K| at interior samples
  double extrapolated_at_t0 = 0.0;      ///< 2 U_{2T}(t0) - U_T(t0)
};

namespace detail {

/// U on a uniform grid t0 + i*dt, i = 0..m, from the linear solution with
/// J = 0 at distance `horizon` beyond the window (past it for U-, before it for U+).
inline std::vector<double> green_trace(const CurvatureProfile& p, double beta, GreenSide side, double t0, double dt,
                                       int m, double horizon) {
  const int extra = step_count(horizon, dt);
  std::vector<double> U(std::size_t(m) + 1);
  JacobiState s{0.0, 1.0};
  if (side == GreenSide::Minus) {
    const int last = m + extra;
    for (int i = last; i > 0; --i) {
      s = jacobi_rk4(p, beta, t0 + dt * i, s, -dt);
      if (s.J >= 0.0)
        throw PreconditionError("green_solutions: beta-conjugate point inside the horizon");
      renormalize(s);
      if (i - 1 <= m) U[std::size_t(i - 1)] = s.Jp / s.J;
    }
  } else {
    const int first = -extra;
    for (int i = first; i < m; ++i) {
      s = jacobi_rk4(p, beta, t0 + dt * i, s, dt);
      if (s.J <= 0.0) throw PreconditionError("green_solutions: beta-conjugate point inside the horizon");
      renormalize(s);
      if (i + 1 >= 0) U[std::size_t(i + 1)] = s.Jp / s.J;
    }
  }
  return U;
}

}  // namespace detail

inline double default_horizon(const CurvatureProfile& p, double beta) {
  return 20.0 / std::sqrt(beta * p.max_abs() + 1.0);
}

struct GreenPair {
  RiccatiRecord minus;
  RiccatiRecord plus;
  double window_start = 0.0;
  double dt = 0.0;
};

/// Green solutions U- and U+ sampled over one period (periodic profiles) or
/// the interior window [2T, L - 2T]. Values use horizon 2T; T and T/2 feed
/// the convergence ladder.
inline GreenPair green_solutions(const CurvatureProfile& p, double beta, std::optional<double> horizon = std::nullopt) {
  if (beta < 0.0) throw PreconditionError("beta must be nonnegative");
  const double T = horizon.value_or(default_horizon(p, beta));
  if (!(T > 0.0)) throw PreconditionError("green_solutions: horizon must be positive");
  double t0 = 0.0, span = 0.0;
  if (p.periodic()) {
    span = p.period();
  } else {
    t0 = 2.0 * T;
    span = p.length() - 4.0 * T;
    if (!(span > 0.0)) throw PreconditionError("green_solutions: profile shorter than four horizons");
  }
  const int m = detail::step_count(span, jacobi_step(p, beta));
  const double dt = span / m;

  GreenPair out;
  out.window_start = t0;
  out.dt = dt;
  for (GreenSide side : {GreenSide::Minus, GreenSide::Plus}) {
    RiccatiRecord r;
    r.beta = beta;
    r.side = side;
    r.horizon = 2.0 * T;
    r.U = detail::green_trace(p, beta, side, t0, dt, m, 2.0 * T);
    const auto UT = detail::green_trace(p, beta, side, t0, dt, 0, T);
    const auto Uh = detail::green_trace(p, beta, side, t0, dt, 0, 0.5 * T);
    r.t.resize(r.U.size());
    for (std::size_t i = 0; i < r.U.size(); ++i) r.t[i] = t0 + dt * double(i);
    r.ladder_horizons = {0.5 * T, T, 2.0 * T};
    r.ladder_values = {Uh[0], UT[0], r.U[0]};
    r.convergence = std::abs(UT[0] - r.U[0]);
    r.extrapolated_at_t0 = 2.0 * r.U[0] - UT[0];
    for (int i = 0; i + 1 < 3; ++i) {
      const double a = r.ladder_values[i], b = r.ladder_values[i + 1];
      if (side == GreenSide::Minus ? b < a - 1e-9 : b > a + 1e-9) r.ladder_monotone = false;
    }
    // Five-point centered derivative of the sampled U.
    for (std::size_t i = 2; i + 2 < r.U.size(); ++i) {
      const double du = (-r.U[i + 2] + 8.0 * r.U[i + 1] - 8.0 * r.U[i - 1] + r.U[i - 2]) / (12.0 * dt);
      const double res = std::abs(du + r.U[i] * r.U[i] + beta * p(r.t[i]));
      r.riccati_residual = std::max(r.riccati_residual, res);
    }
    (side == GreenSide::Minus ? out.minus : out.plus) = std::move(r);
  }
  return out;
}

struct HyperbolicityGap {
  double gap = 0.0;          ///< min_t (U+ - U-) after extrapolation in the horizon
  double raw_gap = 0.0;      ///< min_t (U+ - U-) at horizon 2T
  double convergence = 0.0;  ///< max of the two |U_T - U_{2T}|
  bool hyperbolic = false;   ///< gap > 10 * convergence
  bool rank_one = false;     ///< K vanishes along the profile: a parallel Jacobi field exists
  double ordering_violation = 0.0;  ///< max_t (U- - U+), positive if the ordering fails
};

/// The gap is sampled at n_samples points of the window; at each point U+-
/// are computed with horizons exactly T and 2T and extrapolated as
/// 2 U_{2T} - U_T, which removes the 1/T error of flat stretches.
inline HyperbolicityGap hyperbolicity_gap(const CurvatureProfile& p, double beta,
                                          std::optional<double> horizon = std::nullopt, int n_samples = 32) {
  const double T = horizon.value_or(default_horizon(p, beta));
  const GreenPair g = green_solutions(p, beta, T);
  HyperbolicityGap h;
  h.gap = h.raw_gap = INFINITY;
  h.ordering_violation = -INFINITY;
  for (std::size_t i = 0; i < g.minus.U.size(); ++i)
    h.ordering_violation = std::max(h.ordering_violation, g.minus.U[i] - g.plus.U[i]);
  const double span = g.dt * double(g.minus.U.size() - 1);
  for (int i = 0; i < std::max(1, n_samples); ++i) {
    const double t = g.window_start + span * i / std::max(1, n_samples);
    auto at = [&](GreenSide side, double H) { return detail::green_trace(p, beta, side, t, g.dt, 0, H)[0]; };
    const double m1 = at(GreenSide::Minus, T), m2 = at(GreenSide::Minus, 2.0 * T);
    const double p1 = at(GreenSide::Plus, T), p2 = at(GreenSide::Plus, 2.0 * T);
    h.raw_gap = std::min(h.raw_gap, p2 - m2);
    h.gap = std::min(h.gap, (2.0 * p2 - p1) - (2.0 * m2 - m1));
    h.convergence = std::max({h.convergence, std::abs(m2 - m1), std::abs(p2 - p1)});
  }
  h.hyperbolic = h.gap > 10.0 * h.convergence;
  h.rank_one = p.flat(1e-10);
  return h;
}

struct IndexFormResult {
  double min_eigenvalue = 0.0;
  bool positive = false;
  int n_modes = 0;
};

/// Minimum eigenvalue of int_0^L (w'^2 - beta K w^2) dt on the orthonormal
/// basis sqrt(2/L) sin(j pi t / L), j = 1..n_modes.
inline IndexFormResult index_form(const CurvatureProfile& p, double beta, double L, int n_modes) {
  if (!(L > 0.0) || n_modes < 1) throw PreconditionError("index_form needs L > 0 and n_modes >= 1");
  const int panels = std::max(32, 2 * n_modes);
  const int order = 16;
  const auto zeros = boost::math::legendre_p_zeros<double>(order);
  std::vector<std::pair<double, double>> gl;
  for (double x : zeros) {
    const double dp = boost::math::legendre_p_prime(order, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.emplace_back(x, w);
    if (x != 0.0) gl.emplace_back(-x, w);
  }
  std::vector<double> tq, wq;
  const double hp = L / panels;
  for (int q = 0; q < panels; ++q)
    for (const auto& [x, w] : gl) {
      tq.push_back(hp * (q + 0.5 * (1.0 + x)));
      wq.push_back(0.5 * hp * w);
    }
  Eigen::MatrixXd S(Eigen::Index(tq.size()), n_modes);
  for (std::size_t i = 0; i < tq.size(); ++i)
    for (int j = 0; j < n_modes; ++j)
      S(Eigen::Index(i), j) = std::sqrt(2.0 / L) * std::sin((j + 1) * std::numbers::pi * tq[i] / L);
  Eigen::VectorXd wk(Eigen::Index(tq.size()));
  for (std::size_t i = 0; i < tq.size(); ++i) wk[Eigen::Index(i)] = wq[i] * beta * p(tq[i]);
  Eigen::MatrixXd M = -(S.transpose() * wk.asDiagonal() * S);
  for (int j = 0; j < n_modes; ++j) {
    const double kj = (j + 1) * std::numbers::pi / L;
    M(j, j) += kj * kj;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  IndexFormResult r;
  r.n_modes = n_modes;
  r.min_eigenvalue = es.eigenvalues()[0];
  r.positive = r.min_eigenvalue > 0.0;
  return r;
}

struct GreenEqResidual {
  double residual = 0.0;
  double lhs = 0.0;  ///< int (z' - U z)^2
  double rhs = 0.0;  ///< int z'^2 - beta int K z^2
  bool degenerate = false;
};

/// |int (z' - U z)^2 - (int z'^2 - beta int K z^2)| / int z'^2 over one
/// period, by the trapezoid rule on the record's periodic sample grid.
/// z returns (z(t), z'(t)).
inline GreenEqResidual greeneq_residual(const CurvatureProfile& p, double beta, const RiccatiRecord& U,
                                        const std::function<std::array<double, 2>(double)>& z) {
  if (!p.periodic()) throw PreconditionError("greeneq_residual needs a periodic profile");
  if (U.t.size() < 3) throw PreconditionError("greeneq_residual: Riccati record has too few samples");
  const double dt = U.t[1] - U.t[0];
  if (std::abs(U.t.back() - U.t.front() - p.period()) > 1e-9 * p.period())
    throw PreconditionError("greeneq_residual: record does not cover one period");
  double lhs = 0.0, zp2 = 0.0, kz2 = 0.0;
  for (std::size_t i = 0; i + 1 < U.t.size(); ++i) {
    const auto [zz, zd] = z(U.t[i]);
    const double d = zd - U.U[i] * zz;
    lhs += d * d * dt;
    zp2 += zd * zd * dt;
    kz2 += p(U.t[i]) * zz * zz * dt;
  }
  GreenEqResidual r;
  r.lhs = lhs;
  r.rhs = zp2 - beta * kz2;
  const double scale = zp2 > 0.0 ? zp2 : std::max({std::abs(lhs), std::abs(beta * kz2)});
  if (scale <= 1e-300) {
    r.degenerate = true;
    return r;
  }
  r.residual = std::abs(r.lhs - r.rhs) / scale;
  return r;
}

}  // namespace geoflow
