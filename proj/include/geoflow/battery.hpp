#pragma once

// Seeded pseudorandom test fields.

#include "geoflow/disc_space.hpp"
#include "geoflow/fourier_field.hpp"
#include "geoflow/torus_space.hpp"

#include <Eigen/Dense>

#include <random>

namespace geoflow {

struct TorusBattery {
  int x_bandwidth = 4;  ///< spatial wave numbers |p|, |q| <= x_bandwidth
  int k_max = 2;        ///< vertical degrees |k| <= k_max
  bool real = false;    ///< impose u_{-k} = conj(u_k)
};

/// Trigonometric polynomial sum_{|p|,|q|<=B} c_pq e^{i(p x1 + q x2)} with
/// standard complex Gaussian coefficients, sampled on the torus grid.
/// With exclude_mean the (0, 0) coefficient is zero.
inline Eigen::ArrayXcd random_trig_poly(const TorusSpace& sp, int bandwidth, std::mt19937_64& rng,
                                        bool exclude_mean = false) {
  std::normal_distribution<double> g;
  const int n = sp.n(), w = 2 * bandwidth + 1;
  Eigen::MatrixXcd C(w, w), E(n, w);
  for (int q = 0; q < w; ++q)
    for (int p = 0; p < w; ++p) {
      const double re = g(rng);
      C(p, q) = cplx(re, g(rng));
    }
  if (exclude_mean) C(bandwidth, bandwidth) = 0.0;
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < w; ++p) E(i, p) = std::polar(1.0, 2.0 * std::numbers::pi * i * (p - bandwidth) / n);
  const Eigen::MatrixXcd U = E * C * E.transpose();
  return Eigen::Map<const Eigen::ArrayXcd>(U.data(), U.size());
}

inline FourierField<TorusSpace> random_torus_field(const std::shared_ptr<const TorusSpace>& sp, int n_theta,
                                                   const TorusBattery& opt, std::mt19937_64& rng) {
  FourierField<TorusSpace> u(sp, n_theta);
  const int lo = opt.real ? 0 : -opt.k_max;
  for (int k = lo; k <= opt.k_max; ++k) {
    Eigen::ArrayXcd c = random_trig_poly(*sp, opt.x_bandwidth, rng);
    if (opt.real && k == 0) c = c.real().cast<cplx>();
    u.set(k, c);
    if (opt.real && k != 0) u.set(-k, c.conjugate());
  }
  return u;
}

/// Random polynomial of total degree <= degree with Gaussian coefficients.
inline Poly2 random_poly(int degree, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Poly2 p;
  for (int d = 0; d <= degree; ++d)
    for (int b = 0; b <= d; ++b) {
      const double re = g(rng);
      p.at(d - b, b) = cplx(re, g(rng));
    }
  return p;
}

/// 1 - x1^2 - x2^2
inline Poly2 boundary_defining_poly() {
  Poly2 p = Poly2::constant(1.0);
  p.at(2, 0) = -1.0;
  p.at(0, 2) = -1.0;
  return p;
}

struct DiscBattery {
  int degree = 4;
  int k_max = 2;
  bool vanish_on_boundary = false;  ///< multiply each coefficient by 1 - |x|^2
};

inline FourierField<DiscSpace> random_disc_field(const std::shared_ptr<const DiscSpace>& sp, int n_theta,
                                                 const DiscBattery& opt, std::mt19937_64& rng) {
  FourierField<DiscSpace> u(sp, n_theta);
  for (int k = -opt.k_max; k <= opt.k_max; ++k) {
    Poly2 p = random_poly(opt.degree, rng);
    if (opt.vanish_on_boundary) p = p * boundary_defining_poly();
    u.set(k, WeightedPoly::from(std::move(p)));
  }
  return u;
}

}  // namespace geoflow
