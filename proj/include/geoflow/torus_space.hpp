#pragma once

// Uniform n x n collocation grid on the 2pi-periodic torus with
// pseudospectral (FFT) derivatives.

#include "geoflow/errors.hpp"
#include "geoflow/metric2d.hpp"

#include <Eigen/Core>
#include <fftw3.h>

#include <complex>
#include <memory>
#include <numbers>

namespace geoflow {

/// Owns a pair of FFTW plans for complex n x n transforms. Plans are created
/// with FFTW_UNALIGNED so that fftw_execute_dft may be called on any buffer
/// from any thread.
class Spectral2D {
 public:
  explicit Spectral2D(int n) : n_(n) {
    Eigen::ArrayXcd a(n * n), b(n * n);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    fwd_ = fftw_plan_dft_2d(n, n, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    inv_ = fftw_plan_dft_2d(n, n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    wave_.resize(n);
    for (int i = 0; i < n; ++i) wave_[i] = (2 * i < n) ? i : (2 * i == n ? 0 : i - n);
  }
  Spectral2D(const Spectral2D&) = delete;
  Spectral2D& operator=(const Spectral2D&) = delete;
  ~Spectral2D() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  int n() const { return n_; }

  /// Applies the Fourier multiplier symbol(k1, k2) to grid values; index
  /// i1 + n*i2 holds the sample at (2pi i1/n, 2pi i2/n). Nyquist wave numbers
  /// are mapped to zero.
  template <class Symbol>
  Eigen::ArrayXcd multiplier(const Eigen::ArrayXcd& u, Symbol&& symbol) const {
    Eigen::ArrayXcd hat(u.size()), out(u.size());
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(u.data())),
                     reinterpret_cast<fftw_complex*>(hat.data()));
    const double scale = 1.0 / (double(n_) * n_);
    for (int i2 = 0; i2 < n_; ++i2)
      for (int i1 = 0; i1 < n_; ++i1) hat[i1 + n_ * i2] *= symbol(wave_[i1], wave_[i2]) * scale;
    fftw_execute_dft(inv_, reinterpret_cast<fftw_complex*>(hat.data()), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

 private:
  int n_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
  std::vector<int> wave_;
};

class TorusSpace {
 public:
  using Function = Eigen::ArrayXcd;
  static constexpr Domain domain = Domain::Torus;

  TorusSpace(IsothermalMetric metric, int n) : metric_(std::move(metric)), n_(n), fft_(n) {
    if (metric_.domain() != Domain::Torus) throw DomainError("TorusSpace needs a torus metric");
    if (n < 4) throw PreconditionError("torus grid needs n >= 4");
    const Eigen::Index N = Eigen::Index(n) * n;
    x1_.resize(N);
    x2_.resize(N);
    const double h = 2.0 * std::numbers::pi / n;
    for (int i2 = 0; i2 < n; ++i2)
      for (int i1 = 0; i1 < n; ++i1) {
        x1_[i1 + n * i2] = h * i1;
        x2_[i1 + n * i2] = h * i2;
      }
    lam_.resize(N);
    K_.resize(N);
    lam_z_.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      lam_[i] = metric_.lambda(x1_[i], x2_[i]);
      const auto g = metric_.grad_lambda(x1_[i], x2_[i]);
      lam_z_[i] = 0.5 * cplx(g[0], -g[1]);
      K_[i] = curvature_at(metric_, x1_[i], x2_[i]);
    }
    lam_zbar_ = lam_z_.conjugate();
    exp_lam_ = lam_.exp();
    exp_minus_lam_ = (-lam_).exp();
    exp_minus_2lam_ = (-2.0 * lam_).exp();
    weight_ = (2.0 * lam_).exp() * (h * h * 2.0 * std::numbers::pi);
  }

  static std::shared_ptr<const TorusSpace> make(IsothermalMetric metric, int n) {
    return std::make_shared<const TorusSpace>(std::move(metric), n);
  }

  const IsothermalMetric& metric() const { return metric_; }
  int n() const { return n_; }
  Eigen::Index size() const { return x1_.size(); }
  const Eigen::ArrayXd& x1() const { return x1_; }
  const Eigen::ArrayXd& x2() const { return x2_; }
  const Eigen::ArrayXd& lambda() const { return lam_; }
  const Eigen::ArrayXd& curvature() const { return K_; }
  std::string describe() const { return metric_.describe() + " n=" + std::to_string(n_); }

  bool compatible(const TorusSpace& o) const { return this == &o || (n_ == o.n_ && metric_ == o.metric_); }

  Function zero() const { return Function::Zero(size()); }
  Function constant(cplx c) const { return Function::Constant(size(), c); }
  static bool is_zero(const Function& u) { return (u == cplx(0.0)).all(); }
  static void axpy(Function& y, cplx a, const Function& x) { y += a * x; }

  template <class F>
  Function sample(F&& f) const {
    Function out(size());
    for (Eigen::Index i = 0; i < size(); ++i) out[i] = f(x1_[i], x2_[i]);
    return out;
  }

  Function dz(const Function& u) const {
    return fft_.multiplier(u, [](int k1, int k2) { return 0.5 * cplx(k2, k1); });
  }
  Function dzbar(const Function& u) const {
    return fft_.multiplier(u, [](int k1, int k2) { return 0.5 * cplx(-k2, k1); });
  }

  /// eta_+ on a mode-k coefficient: e^{-lambda} (d_z u - k lambda_z u).
  Function eta_plus(const Function& u, int k) const {
    return exp_minus_lam_ * (dz(u) - double(k) * lam_z_ * u);
  }
  /// eta_- on a mode-k coefficient: e^{-lambda} (d_zbar u + k lambda_zbar u).
  Function eta_minus(const Function& u, int k) const {
    return exp_minus_lam_ * (dzbar(u) + double(k) * lam_zbar_ * u);
  }

  /// Exact adjoint of u -> eta_plus(u, k) for the discrete weighted pairing.
  Function eta_plus_adjoint(const Function& b, int k) const {
    const Function y = exp_lam_ * b;
    return exp_minus_2lam_ * (-dzbar(y) - double(k) * lam_zbar_ * y);
  }
  /// Exact adjoint of u -> eta_minus(u, k) for the discrete weighted pairing.
  Function eta_minus_adjoint(const Function& b, int k) const {
    const Function y = exp_lam_ * b;
    return exp_minus_2lam_ * (-dz(y) + double(k) * lam_z_ * y);
  }

  Function mul_curvature(const Function& u) const { return K_ * u; }

  /// 2pi * sum u conj(w) e^{2 lambda} h^2: the fiber factor is folded in.
  cplx inner(const Function& u, const Function& w) const { return (u * w.conjugate() * weight_).sum(); }
  double norm2(const Function& u) const { return (u.abs2() * weight_).sum(); }

  /// e^{s lambda} sampled on the grid.
  Function exp_lambda(double s) const { return (s * lam_).exp().cast<cplx>(); }

  /// Integral of a mode-0 coefficient against the Liouville measure.
  cplx integrate(const Function& u) const { return (u * weight_).sum(); }
  double volume() const { return weight_.sum(); }

  static double max_abs(const Function& u) { return u.size() ? u.abs().maxCoeff() : 0.0; }
  static Function conj(const Function& u) { return u.conjugate(); }

 private:
  IsothermalMetric metric_;
  int n_;
  Spectral2D fft_;
  Eigen::ArrayXd x1_, x2_, lam_, K_, exp_lam_, exp_minus_lam_, exp_minus_2lam_, weight_;
  Eigen::ArrayXcd lam_z_, lam_zbar_;
};

}  // namespace geoflow
