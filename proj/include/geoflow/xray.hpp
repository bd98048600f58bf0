#pragma once

// Geodesic ray transform on the disc. Rays are parametrized by the influx
// boundary: a boundary point at angle phi and an angle alpha in (-pi/2, pi/2)
// measured from the inner normal, so the initial direction is phi + pi + alpha.

#include "geoflow/disc_space.hpp"
#include "geoflow/errors.hpp"
#include "geoflow/fourier_field.hpp"
#include "geoflow/metric2d.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <string>
#include <vector>

namespace geoflow {

/// The fan was built for a different metric than the field being transformed.
class StaleFan : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "stale_fan"; }
};

struct Ray {
  double phi = 0.0;
  double alpha = 0.0;
  PhasePoint start;
  double tau = 0.0;     ///< exit time
  double weight = 0.0;  ///< cos(alpha) dalpha e^{lambda} dphi
  int steps = 0;        ///< even number of quadrature intervals, tau / steps <= max_step
};

struct FanOptions {
  double max_step = 1e-3;   ///< Simpson/RK4 step along each ray
  double exit_dt = 1e-3;    ///< RK4 step used to locate the exit
  double max_length = 1e3;  ///< nontrapping guard
};

/// Discretization of the influx boundary with Santalo weights: n_b boundary
/// angles phi_i = 2 pi i / n_b and n_a midpoint angles per boundary point.
class BoundaryFan {
 public:
  BoundaryFan(IsothermalMetric metric, int n_b, int n_a, FanOptions opt = {})
      : metric_(std::move(metric)), n_b_(n_b), n_a_(n_a), opt_(opt) {
    if (metric_.domain() != Domain::Disc) throw DomainError("BoundaryFan needs a disc metric");
    if (n_b < 1 || n_a < 1) throw ConfigError("fan sizes must be positive");
    const double dphi = 2.0 * std::numbers::pi / n_b, dalpha = std::numbers::pi / n_a;
    rays_.reserve(std::size_t(n_b) * n_a);
    for (int i = 0; i < n_b; ++i) {
      const double phi = dphi * i;
      const double c = std::cos(phi), s = std::sin(phi);
      for (int j = 0; j < n_a; ++j) {
        Ray r;
        r.phi = phi;
        r.alpha = -0.5 * std::numbers::pi + (j + 0.5) * dalpha;
        r.start = {c, s, phi + std::numbers::pi + r.alpha};
        r.tau = exit_time(metric_, r.start, {opt.exit_dt, opt.max_length});
        r.weight = std::cos(r.alpha) * dalpha * std::exp(metric_.lambda(c, s)) * dphi;
        r.steps = 2 * std::max(1, int(std::ceil(r.tau / (2.0 * opt.max_step))));
        rays_.push_back(r);
      }
    }
  }

  const IsothermalMetric& metric() const { return metric_; }
  int n_b() const { return n_b_; }
  int n_a() const { return n_a_; }
  std::size_t size() const { return rays_.size(); }
  const Ray& ray(int i, int j) const { return rays_[std::size_t(i) * n_a_ + j]; }
  const std::vector<Ray>& rays() const { return rays_; }
  const FanOptions& options() const { return opt_; }
  Eigen::VectorXd weights() const {
    Eigen::VectorXd w(Eigen::Index(rays_.size()));
    for (std::size_t r = 0; r < rays_.size(); ++r) w[Eigen::Index(r)] = rays_[r].weight;
    return w;
  }

  void require_metric(const IsothermalMetric& g) const {
    if (!(g == metric_)) throw StaleFan("ray cache was built for " + metric_.describe() + ", not " + g.describe());
  }

 private:
  IsothermalMetric metric_;
  int n_b_, n_a_;
  FanOptions opt_;
  std::vector<Ray> rays_;
};

/// A symmetric m-tensor seen as a function on SM: Fourier degrees |k| <= m
/// with k = m mod 2.
struct SymTensorField {
  int m = 0;
  FourierField<DiscSpace> field;
  bool solenoidal = false;
  double solenoidal_residual = 0.0;

  SymTensorField(int degree, FourierField<DiscSpace> f) : m(degree), field(std::move(f)) {
    if (m < 0) throw PreconditionError("tensor degree must be nonnegative");
    for (int k : field.degrees())
      if (std::abs(k) > m || (k - m) % 2 != 0)
        throw BandOverflow("a degree-" + std::to_string(m) + " tensor cannot carry Fourier degree " +
                           std::to_string(k));
  }
};

namespace detail {

/// Linear map from integrals of the features e^{-s lambda} e^{ik theta} x1^a x2^b
/// to ray transforms of a set of fields.
class FeatureMap {
 public:
  explicit FeatureMap(const std::vector<const FourierField<DiscSpace>*>& fields) {
    std::set<int> ss, ks;
    degree_ = 0;
    for (const auto* f : fields)
      for (const auto& [k, w] : f->coefficients()) {
        ks.insert(k);
        for (const auto& [s, p] : w.terms) {
          ss.insert(s);
          degree_ = std::max(degree_, p.degree());
        }
      }
    s_.assign(ss.begin(), ss.end());
    k_.assign(ks.begin(), ks.end());
    if (s_.empty()) s_ = {0};
    if (k_.empty()) k_ = {0};
    n_mono_ = Poly2::size_for(degree_);
    C_ = Eigen::MatrixXcd::Zero(Eigen::Index(s_.size() * k_.size() * n_mono_), Eigen::Index(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c)
      for (const auto& [k, w] : fields[c]->coefficients()) {
        const auto ki = std::size_t(std::lower_bound(k_.begin(), k_.end(), k) - k_.begin());
        for (const auto& [s, p] : w.terms) {
          const auto si = std::size_t(std::lower_bound(s_.begin(), s_.end(), s) - s_.begin());
          p.for_each_term([&](int a, int b, cplx v) {
            C_(Eigen::Index(index(si, ki, mono(a, b))), Eigen::Index(c)) += v;
          });
        }
      }
  }

  std::size_t size() const { return s_.size() * k_.size() * std::size_t(n_mono_); }
  const Eigen::MatrixXcd& coefficients() const { return C_; }

  /// acc += weight * features(x1, x2, theta); acc holds real parts then imaginary parts.
  void accumulate(double x1, double x2, double theta, double lambda, double weight, std::vector<double>& acc,
                  std::vector<double>& mono) const {
    mono.resize(std::size_t(n_mono_));
    std::size_t i = 0;
    double p2 = 1.0;
    for (int d = 0; d <= degree_; ++d) {
      // x1^{d-b} x2^b for b = 0..d, built from the previous degree.
      if (d == 0) {
        mono[i++] = 1.0;
        continue;
      }
      const std::size_t prev = std::size_t((d - 1) * d / 2);
      for (int b = 0; b < d; ++b) mono[i++] = mono[prev + std::size_t(b)] * x1;
      p2 = mono[prev + std::size_t(d - 1)] * x2;
      mono[i++] = p2;
    }
    const std::size_t half = size();
    for (std::size_t si = 0; si < s_.size(); ++si) {
      const double es = weight * (s_[si] == 0 ? 1.0 : std::exp(-s_[si] * lambda));
      for (std::size_t ki = 0; ki < k_.size(); ++ki) {
        const double cr = es * std::cos(k_[ki] * theta), ci = es * std::sin(k_[ki] * theta);
        double* re = acc.data() + index(si, ki, 0);
        double* im = re + half;
        for (int m = 0; m < n_mono_; ++m) {
          re[m] += cr * mono[std::size_t(m)];
          im[m] += ci * mono[std::size_t(m)];
        }
      }
    }
  }

  Eigen::RowVectorXcd combine(const std::vector<double>& acc) const {
    const std::size_t n = size();
    Eigen::RowVectorXcd f(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) f[Eigen::Index(i)] = cplx(acc[i], acc[i + n]);
    return f * C_;
  }

 private:
  std::size_t index(std::size_t si, std::size_t ki, int m) const {
    return (si * k_.size() + ki) * std::size_t(n_mono_) + std::size_t(m);
  }
  static int mono(int a, int b) { return (a + b) * (a + b + 1) / 2 + b; }

  std::vector<int> s_, k_;
  int degree_ = 0;
  int n_mono_ = 1;
  Eigen::MatrixXcd C_;
};

/// Composite Simpson along the geodesic from `start` for time tau in `steps`
/// (even) RK4 steps.
inline Eigen::RowVectorXcd integrate_ray(const IsothermalMetric& g, const FeatureMap& map, const PhasePoint& start,
                                         double tau, int steps, std::vector<double>& acc, std::vector<double>& mono) {
  std::fill(acc.begin(), acc.end(), 0.0);
  const double h = tau / steps;
  auto s = to_state(start);
  for (int q = 0; q <= steps; ++q) {
    const double w = (q == 0 || q == steps) ? 1.0 : (q % 2 ? 4.0 : 2.0);
    map.accumulate(s[0], s[1], s[2], g.lambda(s[0], s[1]), w * h / 3.0, acc, mono);
    if (q < steps) s = rk4_step(g, s, h);
  }
  return map.combine(acc);
}

}  // namespace detail

/// Ray transforms of several fields at once: entry (r, c) is the integral of
/// fields[c] along ray r.
inline Eigen::MatrixXcd ray_transform_batch(const std::vector<const FourierField<DiscSpace>*>& fields,
                                            const BoundaryFan& fan) {
  for (const auto* f : fields) fan.require_metric(f->space().metric());
  const detail::FeatureMap map(fields);
  Eigen::MatrixXcd out(Eigen::Index(fan.size()), Eigen::Index(fields.size()));
  std::vector<double> acc(2 * map.size()), mono;
  for (std::size_t r = 0; r < fan.size(); ++r) {
    const Ray& ray = fan.rays()[r];
    out.row(Eigen::Index(r)) = detail::integrate_ray(fan.metric(), map, ray.start, ray.tau, ray.steps, acc, mono);
  }
  return out;
}

inline Eigen::VectorXcd ray_transform(const SymTensorField& f, const BoundaryFan& fan) {
  return ray_transform_batch({&f.field}, fan).col(0);
}

/// Integral of u along the geodesic from an arbitrary start point to the exit.
inline cplx ray_integral(const FourierField<DiscSpace>& u, const PhasePoint& start, double max_step = 1e-3) {
  const auto& g = u.space().metric();
  const double tau = exit_time(g, start);
  const detail::FeatureMap map({&u});
  std::vector<double> acc(2 * map.size()), mono;
  const int steps = 2 * std::max(1, int(std::ceil(tau / (2.0 * max_step))));
  return detail::integrate_ray(g, map, start, tau, steps, acc, mono)[0];
}

/// u(x, theta) = sum_k u_k(x) e^{ik theta}.
inline cplx evaluate(const FourierField<DiscSpace>& u, double x1, double x2, double theta) {
  cplx v = 0.0;
  for (const auto& [k, w] : u.coefficients()) v += u.space()(w, x1, x2) * std::polar(1.0, k * theta);
  return v;
}

struct SantaloResult {
  cplx fan_value = 0.0;   ///< sum over rays of weight * integral along the ray
  cplx grid_value = 0.0;  ///< direct quadrature over SM
  double residual = 0.0;  ///< |fan - grid| / max(|grid|, 1e-300)
};

inline SantaloResult santalo_integral(const FourierField<DiscSpace>& g, const BoundaryFan& fan) {
  SantaloResult r;
  const Eigen::VectorXcd I = ray_transform_batch({&g}, fan).col(0);
  r.fan_value = (fan.weights().cast<cplx>().array() * I.array()).sum();
  if (g.has(0)) r.grid_value = g.space().integrate(g.coefficients().at(0));
  r.residual = std::abs(r.fan_value - r.grid_value) / std::max(std::abs(r.grid_value), 1e-300);
  return r;
}

struct BackprojectOptions {
  int n_theta = 0;    ///< directions per point; 0 means 2 * n_a
  double dt = 1e-2;   ///< RK4 step of the backward trace
};

struct BackprojectResult {
  std::vector<cplx> values;                ///< I_0^* h at each point
  std::vector<int> coverage;               ///< distinct fan cells hit from each point
  std::vector<std::size_t> coverage_warnings;  ///< points hit by fewer than 4 cells
};

namespace detail {

inline double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

/// Bicubic Catmull-Rom interpolation of ray data on the (phi, alpha) grid,
/// periodic in phi and edge-clamped in alpha.
inline cplx interpolate_ray_data(const Eigen::VectorXcd& h, const BoundaryFan& fan, double phi, double alpha) {
  const int nb = fan.n_b(), na = fan.n_a();
  const double u = phi / (2.0 * std::numbers::pi / nb);
  const double v = (alpha + 0.5 * std::numbers::pi) / (std::numbers::pi / na) - 0.5;
  const int i1 = int(std::floor(u)), j1 = int(std::floor(v));
  const double tu = u - i1, tv = v - j1;
  auto at = [&](int i, int j) {
    i = ((i % nb) + nb) % nb;
    j = std::clamp(j, 0, na - 1);
    return h[Eigen::Index(i) * na + j];
  };
  std::array<cplx, 4> col;
  for (int a = 0; a < 4; ++a) {
    const int i = i1 - 1 + a;
    const cplx p0 = at(i, j1 - 1), p1 = at(i, j1), p2 = at(i, j1 + 1), p3 = at(i, j1 + 2);
    col[std::size_t(a)] = cplx(catmull_rom(p0.real(), p1.real(), p2.real(), p3.real(), tv),
                               catmull_rom(p0.imag(), p1.imag(), p2.imag(), p3.imag(), tv));
  }
  return cplx(catmull_rom(col[0].real(), col[1].real(), col[2].real(), col[3].real(), tu),
              catmull_rom(col[0].imag(), col[1].imag(), col[2].imag(), col[3].imag(), tu));
}

}  // namespace detail

/// I_0^* h(x) = integral over the fiber at x of h#, the extension of h that is
/// constant along geodesics.
inline BackprojectResult backproject_adjoint(const Eigen::VectorXcd& h, const BoundaryFan& fan,
                                             const std::vector<std::array<double, 2>>& points,
                                             BackprojectOptions opt = {}) {
  if (fan.n_a() < 16) throw PreconditionError("backproject_adjoint needs n_a >= 16");
  if (std::size_t(h.size()) != fan.size()) throw PreconditionError("ray data size does not match the fan");
  const int nt = opt.n_theta > 0 ? opt.n_theta : 2 * fan.n_a();
  const auto& g = fan.metric();
  const double dphi = 2.0 * std::numbers::pi / fan.n_b(), dalpha = std::numbers::pi / fan.n_a();
  BackprojectResult out;
  out.values.resize(points.size());
  out.coverage.resize(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    cplx sum = 0.0;
    std::set<std::pair<int, int>> cells;
    for (int q = 0; q < nt; ++q) {
      const double theta = 2.0 * std::numbers::pi * q / nt;
      // Backward trace: follow -v to the entry point, then reverse.
      const auto ex = exit_point(g, {points[p][0], points[p][1], theta + std::numbers::pi}, {opt.dt, fan.options().max_length});
      double phi = std::atan2(ex.exit.x2, ex.exit.x1);
      if (phi < 0.0) phi += 2.0 * std::numbers::pi;
      double alpha = std::remainder(ex.exit.theta - phi, 2.0 * std::numbers::pi);
      alpha = std::clamp(alpha, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
      sum += detail::interpolate_ray_data(h, fan, phi, alpha);
      cells.emplace(int(std::lround(phi / dphi)) % fan.n_b(),
                    std::clamp(int(std::floor((alpha + 0.5 * std::numbers::pi) / dalpha)), 0, fan.n_a() - 1));
    }
    out.values[p] = sum * (2.0 * std::numbers::pi / nt);
    out.coverage[p] = int(cells.size());
    if (cells.size() < 4) out.coverage_warnings.push_back(p);
  }
  return out;
}

struct DualityResult {
  cplx boundary_pairing = 0.0;  ///< sum_rays w (I_0 f) conj(h)
  cplx interior_pairing = 0.0;  ///< int_M f conj(I_0^* h) e^{2 lambda} dx
  double residual = 0.0;        ///< |difference| / (||I_0 f|| ||h||) in the weighted boundary norm
};

/// Santalo duality (I_0 f, h) = (f, I_0^* h) for a function f on M (degree 0).
inline DualityResult duality_check(const FourierField<DiscSpace>& f, const Eigen::VectorXcd& h, const BoundaryFan& fan,
                                   BackprojectOptions opt = {}) {
  if (f.degrees() != std::vector<int>{0} && !f.empty()) throw PreconditionError("duality_check expects a function on M");
  const DiscSpace& sp = f.space();
  const Eigen::VectorXcd I = ray_transform_batch({&f}, fan).col(0);
  const Eigen::ArrayXd w = fan.weights().array();
  DualityResult r;
  r.boundary_pairing = (w * I.array() * h.array().conjugate()).sum();
  std::vector<std::array<double, 2>> pts(std::size_t(sp.size()));
  for (Eigen::Index i = 0; i < sp.size(); ++i) pts[std::size_t(i)] = {sp.node_x1()[i], sp.node_x2()[i]};
  const auto bp = backproject_adjoint(h, fan, pts, opt);
  const Eigen::ArrayXcd fx = sp.at_nodes(f.get(0));
  for (Eigen::Index i = 0; i < sp.size(); ++i)
    r.interior_pairing += fx[i] * std::conj(bp.values[std::size_t(i)]) * sp.node_weight()[i] / (2.0 * std::numbers::pi);
  const double scale = std::sqrt((w * I.array().abs2()).sum() * (w * h.array().abs2()).sum());
  r.residual = std::abs(r.boundary_pairing - r.interior_pairing) / std::max(scale, 1e-300);
  return r;
}

/// Potential fields X h, h = (1 - |x|^2) x1^a x2^b e^{ik theta} with |k| <= m - 1,
/// k = m - 1 mod 2, a + b <= degree.
inline std::vector<FourierField<DiscSpace>> potential_basis(const std::shared_ptr<const DiscSpace>& sp, int n_theta,
                                                            int m, int degree) {
  std::vector<FourierField<DiscSpace>> out;
  if (m < 1) return out;
  Poly2 bump = Poly2::constant(1.0);
  bump.at(2, 0) = -1.0;
  bump.at(0, 2) = -1.0;
  for (int d = 0; d <= degree; ++d)
    for (int b = 0; b <= d; ++b)
      for (int k = -(m - 1); k <= m - 1; k += 2) {
        auto h = FourierField<DiscSpace>::mode(sp, n_theta, k, WeightedPoly::from(bump * Poly2::monomial(d - b, b)));
        out.push_back(apply_operator(Op::X, h));
      }
  return out;
}

namespace detail {

/// Node values of every mode of u, stacked and multiplied by sqrt(weight).
inline Eigen::VectorXcd stacked_nodes(const FourierField<DiscSpace>& u, const std::vector<int>& ks) {
  const DiscSpace& sp = u.space();
  const Eigen::Index n = sp.size();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n * Eigen::Index(ks.size()));
  const Eigen::ArrayXd sw = sp.node_weight().sqrt();
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (u.has(ks[i])) v.segment(Eigen::Index(i) * n, n) = (sp.at_nodes(u.get(ks[i])) * sw).matrix();
  return v;
}

inline std::vector<int> tensor_modes(int m) {
  std::vector<int> ks;
  for (int k = -m; k <= m; k += 2) ks.push_back(k);
  return ks;
}

}  // namespace detail

struct SolenoidalOptions {
  int potential_degree = -1;  ///< degree of the polynomial factor of h; -1 picks the degree of f
};

/// f minus its least-squares projection onto the potential fields of
/// potential_basis (L^2(SM) inner product).
inline SymTensorField solenoidal_project(const SymTensorField& f, SolenoidalOptions opt = {}) {
  if (f.m == 0) {
    SymTensorField out = f;
    out.solenoidal = true;
    return out;
  }
  int deg = opt.potential_degree;
  if (deg < 0) {
    deg = 0;
    for (const auto& [k, w] : f.field.coefficients()) deg = std::max(deg, w.max_degree());
  }
  const auto pots = potential_basis(f.field.space_ptr(), f.field.n_theta(), f.m, deg);
  if (pots.size() < 4) throw ConfigError("solenoidal_project: potential basis has dimension below 4");
  const auto ks = detail::tensor_modes(f.m);
  Eigen::MatrixXcd P(f.field.space().size() * Eigen::Index(ks.size()), Eigen::Index(pots.size()));
  for (std::size_t j = 0; j < pots.size(); ++j) P.col(Eigen::Index(j)) = detail::stacked_nodes(pots[j], ks);
  const Eigen::VectorXcd y = detail::stacked_nodes(f.field, ks);
  const Eigen::VectorXcd c = P.colPivHouseholderQr().solve(y);
  FourierField<DiscSpace> fs = f.field;
  for (std::size_t j = 0; j < pots.size(); ++j) fs.axpy(-c[Eigen::Index(j)], pots[j]);
  SymTensorField out(f.m, std::move(fs));
  out.solenoidal = true;
  const double fn = norm(out.field);
  for (const auto& p : pots) {
    const double pn = norm(p);
    if (fn > 0.0 && pn > 0.0)
      out.solenoidal_residual = std::max(out.solenoidal_residual, std::abs(inner_product(out.field, p)) / (fn * pn));
  }
  return out;
}

/// Data-side norm of the spectrum. Uniform is dalpha e^{lambda} dphi, which on
/// the Euclidean disc is the weight (1 - s^2)^{-1/2} ds dphi of the classical
/// Radon SVD; Santalo adds the factor cos(alpha).
enum class DataWeight { Uniform, Santalo };

struct SpectrumOptions {
  DataWeight data_weight = DataWeight::Uniform;
  int potential_degree = -1;    ///< -1: basis degree + 2
  int injected_potentials = 3;  ///< normalized potential directions appended for the kernel check
  double rank_tol = 1e-10;      ///< relative eigenvalue cutoff of the solenoidal Gram matrix
  std::vector<int> ladder;      ///< basis sizes for the sigma_min trend; empty means {B/2, B}
};

struct SpectrumResult {
  int m = 0;
  int basis_size = 0;
  int rank = 0;
  std::vector<double> singular_values;  ///< of I_m on the solenoidal span, descending
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::vector<double> null_eigenvalues;  ///< Gram eigenvalues dropped as rank deficient (relative)
  std::vector<std::pair<int, double>> ladder;  ///< (B, sigma_min)
  std::vector<double> potential_sigma;   ///< ||I psi|| / sigma_max for unit potential directions psi
  std::vector<double> augmented_singular_values;
  int n_b = 0, n_a = 0;
};

/// Tensor basis x1^a x2^b e^{ik theta} ordered by total degree, then power of
/// x2, then k.
inline std::vector<FourierField<DiscSpace>> tensor_basis(const std::shared_ptr<const DiscSpace>& sp, int n_theta,
                                                         int m, int count) {
  std::vector<FourierField<DiscSpace>> out;
  const auto ks = detail::tensor_modes(m);
  for (int d = 0; int(out.size()) < count; ++d)
    for (int b = 0; b <= d && int(out.size()) < count; ++b)
      for (int k : ks) {
        if (int(out.size()) >= count) break;
        out.push_back(FourierField<DiscSpace>::mode(sp, n_theta, k, WeightedPoly::from(Poly2::monomial(d - b, b))));
      }
  return out;
}

/// Singular values of the weighted ray transform on the solenoidal projection
/// of the first B tensor basis elements.
inline SpectrumResult sinjectivity_spectrum(const std::shared_ptr<const DiscSpace>& sp, int m, int B,
                                            const BoundaryFan& fan, SpectrumOptions opt = {}) {
  if (B <= 0) throw ConfigError("sinjectivity_spectrum: basis size must be positive");
  if (m < 0) throw ConfigError("sinjectivity_spectrum: tensor degree must be nonnegative");
  const int n_theta = m + 2;
  auto basis = tensor_basis(sp, n_theta, m, B);
  int bdeg = 0;
  for (const auto& f : basis) bdeg = std::max(bdeg, f.coefficients().begin()->second.max_degree());
  const int resolution = bdeg + m + 1;
  if (fan.n_a() < 2 * resolution || fan.n_b() < 2 * resolution)
    throw PreconditionError("sinjectivity_spectrum: fan resolution must be at least twice the basis resolution");
  const int pdeg = opt.potential_degree >= 0 ? opt.potential_degree : bdeg + 2;
  const auto pots = potential_basis(sp, n_theta, m, pdeg);
  const auto ks = detail::tensor_modes(m);

  std::vector<const FourierField<DiscSpace>*> all;
  for (const auto& f : basis) all.push_back(&f);
  for (const auto& p : pots) all.push_back(&p);
  const Eigen::MatrixXcd R = ray_transform_batch(all, fan);
  Eigen::VectorXd sw = fan.weights();
  if (opt.data_weight == DataWeight::Uniform)
    for (std::size_t r = 0; r < fan.size(); ++r) sw[Eigen::Index(r)] /= std::cos(fan.rays()[r].alpha);
  sw = sw.cwiseSqrt();
  const Eigen::MatrixXcd Rf = sw.asDiagonal() * R.leftCols(B);
  const Eigen::MatrixXcd Rp = sw.asDiagonal() * R.rightCols(Eigen::Index(pots.size()));

  const Eigen::Index rows = sp->size() * Eigen::Index(ks.size());
  Eigen::MatrixXcd F(rows, B), P(rows, Eigen::Index(pots.size()));
  for (int i = 0; i < B; ++i) F.col(i) = detail::stacked_nodes(basis[std::size_t(i)], ks);
  for (std::size_t j = 0; j < pots.size(); ++j) P.col(Eigen::Index(j)) = detail::stacked_nodes(pots[j], ks);
  Eigen::MatrixXcd Cc = Eigen::MatrixXcd::Zero(Eigen::Index(pots.size()), B);
  if (!pots.empty()) Cc = P.colPivHouseholderQr().solve(F);
  const Eigen::MatrixXcd Fs = F - P * Cc;   // solenoidal projections at the nodes
  const Eigen::MatrixXcd Rs = Rf - Rp * Cc; // their ray transforms, by linearity

  SpectrumResult res;
  res.m = m;
  res.basis_size = B;
  res.n_b = fan.n_b();
  res.n_a = fan.n_a();
  auto sigma_for = [&](int b, bool record) {
    const Eigen::MatrixXcd G = Fs.leftCols(b).adjoint() * Fs.leftCols(b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (G + G.adjoint()));
    const double top = es.eigenvalues().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < b; ++i) {
      const double ev = es.eigenvalues()[i];
      if (ev > opt.rank_tol * top)
        keep.push_back(i);
      else if (record)
        res.null_eigenvalues.push_back(ev / top);
    }
    Eigen::MatrixXcd Q(b, Eigen::Index(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
      Q.col(Eigen::Index(c)) = es.eigenvectors().col(keep[c]) / std::sqrt(es.eigenvalues()[keep[c]]);
    const Eigen::MatrixXcd M = Rs.leftCols(b) * Q;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    return std::make_pair(M, Eigen::VectorXd(svd.singularValues()));
  };

  std::vector<int> ladder = opt.ladder;
  if (ladder.empty()) ladder = {std::max(1, B / 2), B};
  for (int b : ladder) {
    if (b < 1 || b > B) throw ConfigError("sinjectivity_spectrum: ladder sizes must lie in [1, B]");
    const auto [M, s] = sigma_for(b, false);
    res.ladder.emplace_back(b, s.size() ? s[s.size() - 1] : 0.0);
  }
  const auto [M, s] = sigma_for(B, true);
  res.rank = int(s.size());
  res.singular_values.assign(s.data(), s.data() + s.size());
  res.sigma_max = s.size() ? s[0] : 0.0;
  res.sigma_min = s.size() ? s[s.size() - 1] : 0.0;

  const int inj = std::min<int>(opt.injected_potentials, int(pots.size()));
  if (inj > 0) {
    Eigen::MatrixXcd aug(M.rows(), M.cols() + inj);
    aug.leftCols(M.cols()) = M;
    for (int j = 0; j < inj; ++j) {
      const double pn = P.col(j).norm();
      aug.col(M.cols() + j) = Rp.col(j) / pn;
      res.potential_sigma.push_back(Rp.col(j).norm() / pn / std::max(res.sigma_max, 1e-300));
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(aug);
    const Eigen::VectorXd sa = svd.singularValues();
    res.augmented_singular_values.assign(sa.data(), sa.data() + sa.size());
  }
  return res;
}

}  // namespace geoflow
