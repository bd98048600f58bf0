#pragma once

// Reference computations that do not go through the library's numerics.

#include "geoflow/geoflow.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

namespace oracle {

using geoflow::cplx;
inline constexpr double pi = std::numbers::pi;

/// Finite sum of plane waves c e^{i(p x1 + q x2)}.
struct TrigField {
  struct Wave {
    int p, q;
    cplx c;
  };
  std::vector<Wave> waves;

  cplx operator()(double x1, double x2) const {
    cplx s = 0.0;
    for (const auto& w : waves) s += w.c * std::polar(1.0, w.p * x1 + w.q * x2);
    return s;
  }
  /// d/dz = (d/dx1 - i d/dx2) / 2
  TrigField dz() const {
    TrigField o;
    for (const auto& w : waves) o.waves.push_back({w.p, w.q, w.c * 0.5 * cplx(w.q, w.p)});
    return o;
  }
  /// d/dzbar = (d/dx1 + i d/dx2) / 2
  TrigField dzbar() const {
    TrigField o;
    for (const auto& w : waves) o.waves.push_back({w.p, w.q, w.c * 0.5 * cplx(-w.q, w.p)});
    return o;
  }
  Eigen::ArrayXcd sample(const geoflow::TorusSpace& sp) const {
    Eigen::ArrayXcd u(sp.size());
    for (Eigen::Index i = 0; i < sp.size(); ++i) u[i] = (*this)(sp.x1()[i], sp.x2()[i]);
    return u;
  }
};

/// Flat-torus Beurling multiplier on e^{i xi.x}.
inline cplx flat_beurling_coefficient(double xi1, double xi2) {
  return -cplx(xi2, xi1) / cplx(-xi2, xi1);
}

/// Fourth-order central differences.
inline double d1(const std::function<double(double)>& f, double x, double h = 1e-3) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}
inline double d2(const std::function<double(double)>& f, double x, double h = 1e-3) {
  return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h);
}

inline double laplacian(const std::function<double(double, double)>& f, double x1, double x2) {
  return d2([&](double t) { return f(t, x2); }, x1) + d2([&](double t) { return f(x1, t); }, x2);
}

inline double chord(double d) { return 2.0 * std::sqrt(1.0 - d * d); }

/// Volume of SM for the disc metric e^{2 lambda}|dx|^2: 2 pi int e^{2 lambda} dx, by nested Gauss-Kronrod.
inline double disc_sm_volume(const std::function<double(double, double)>& lambda) {
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [&](double r) {
    return gauss_kronrod<double, 61>::integrate(
               [&](double phi) { return std::exp(2.0 * lambda(r * std::cos(phi), r * std::sin(phi))); }, 0.0, 2 * pi, 0,
               1e-13) *
           r;
  };
  return 2.0 * pi * gauss_kronrod<double, 61>::integrate(inner, 0.0, 1.0, 0, 1e-13);
}

/// Geodesic equations in Christoffel form for e^{2 lambda}|dx|^2 on state (x1, x2, v1, v2), integrated with
/// adaptive Dormand-Prince.
inline std::array<double, 4> christoffel_geodesic(const geoflow::IsothermalMetric& g, std::array<double, 4> s,
                                                  double t_end) {
  namespace ode = boost::numeric::odeint;
  auto rhs = [&](const std::array<double, 4>& y, std::array<double, 4>& dy, double) {
    const auto gr = g.grad_lambda(y[0], y[1]);
    const double lv = gr[0] * y[2] + gr[1] * y[3];
    const double v2 = y[2] * y[2] + y[3] * y[3];
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = -2.0 * lv * y[2] + v2 * gr[0];
    dy[3] = -2.0 * lv * y[3] + v2 * gr[1];
  };
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<std::array<double, 4>>>(1e-13, 1e-13), rhs, s,
                          0.0, t_end, 1e-3);
  return s;
}

/// First positive zero of J'' + beta K J = 0, J(0) = 0, J'(0) = 1, on (0, t_max], by dense-output
/// Dormand-Prince and bisection on the interpolant.
inline std::optional<double> first_zero(const std::function<double(double)>& K, double beta, double t_max) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;
  auto rhs = [&](const State& y, State& dy, double t) {
    dy[0] = y[1];
    dy[1] = -beta * K(t) * y[0];
  };
  auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  stepper.initialize(State{0.0, 1.0}, 0.0, 1e-4);
  while (stepper.current_time() < t_max) {
    const double t0 = stepper.current_time();
    const double j0 = stepper.current_state()[0];
    stepper.do_step(rhs);
    const double t1 = std::min(stepper.current_time(), t_max);
    State s;
    stepper.calc_state(t1, s);
    if (t0 > 0.0 && j0 > 0.0 && s[0] <= 0.0) {
      double lo = t0, hi = t1;
      while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, s);
        (s[0] > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    if (t0 == 0.0 && s[0] <= 0.0) return t1;
  }
  return std::nullopt;
}

/// Smallest beta on the grid step, 2 step, ... <= beta_max whose first conjugate time is <= L.
inline std::optional<double> beta_scan(const std::function<double(double)>& K, double L, double beta_max,
                                       double step) {
  for (int i = 1; i * step <= beta_max + 1e-12; ++i)
    if (first_zero(K, i * step, L)) return i * step;
  return std::nullopt;
}

/// prod_{j < terms} C_3(m0 + 2j) in long double.
inline long double a3_partial(int m0, long terms) {
  long double p = 1.0L;
  for (long j = 0; j < terms; ++j) {
    const long double m = m0 + 2.0L * j;
    p *= std::sqrt(1.0L + 1.0L / ((m + 2) * (m + 2) * (2 * m + 1)));
  }
  return p;
}

/// Singular values of the disc Radon transform on polynomials of degree n, with f in L^2(SM) and ray data in
/// L^2(dalpha dphi): sqrt(2 / (n + 1)).
inline double radon_singular_value(int n) { return std::sqrt(2.0 / (n + 1)); }

}  // namespace oracle
