#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

namespace geoflow {

using cplx = std::complex<double>;

/// Dense bivariate polynomial  sum_{a+b<=d} c_{ab} x1^a x2^b  with complex
/// coefficients. Coefficients are stored by total degree, then by the power
/// of x2.
class Poly2 {
 public:
  Poly2() = default;

  static Poly2 constant(cplx c) {
    Poly2 p;
    p.at(0, 0) = c;
    return p;
  }

  static Poly2 monomial(int a, int b, cplx c = 1.0) {
    Poly2 p;
    p.at(a, b) = c;
    return p;
  }

  /// Total degree; -1 for the zero polynomial with no storage.
  int degree() const { return degree_; }
  bool empty() const { return degree_ < 0; }

  cplx coeff(int a, int b) const {
    if (a < 0 || b < 0 || a + b > degree_) return 0.0;
    return c_[index(a, b)];
  }

  cplx& at(int a, int b) {
    if (a + b > degree_) grow(a + b);
    return c_[index(a, b)];
  }

  cplx operator()(double x1, double x2) const {
    // Horner in x1 for each power of x2 would need a different layout; the
    // direct sum is fine at the degrees used here.
    cplx sum = 0.0;
    double p2 = 1.0;
    for (int b = 0; b <= degree_; ++b) {
      double p1 = 1.0;
      for (int a = 0; a + b <= degree_; ++a) {
        sum += c_[index(a, b)] * (p1 * p2);
        p1 *= x1;
      }
      p2 *= x2;
    }
    return sum;
  }

  Poly2 dx1() const {
    Poly2 out;
    for (int d = 1; d <= degree_; ++d)
      for (int b = 0; b < d; ++b) {
        const int a = d - b;
        const cplx c = c_[index(a, b)];
        if (c != 0.0) out.at(a - 1, b) += c * double(a);
      }
    return out;
  }

  Poly2 dx2() const {
    Poly2 out;
    for (int d = 1; d <= degree_; ++d)
      for (int b = 1; b <= d; ++b) {
        const int a = d - b;
        const cplx c = c_[index(a, b)];
        if (c != 0.0) out.at(a, b - 1) += c * double(b);
      }
    return out;
  }

  /// d/dz = (d/dx1 - i d/dx2) / 2
  Poly2 dz() const {
    Poly2 out = dx1();
    out.axpy(cplx(0.0, -1.0), dx2());
    out *= 0.5;
    return out;
  }

  /// d/dzbar = (d/dx1 + i d/dx2) / 2
  Poly2 dzbar() const {
    Poly2 out = dx1();
    out.axpy(cplx(0.0, 1.0), dx2());
    out *= 0.5;
    return out;
  }

  Poly2 laplacian() const {
    Poly2 out = dx1().dx1();
    out += dx2().dx2();
    return out;
  }

  Poly2 conj() const {
    Poly2 out = *this;
    for (auto& c : out.c_) c = std::conj(c);
    return out;
  }

  /// this += s * other
  Poly2& axpy(cplx s, const Poly2& other) {
    if (other.degree_ > degree_) grow(other.degree_);
    for (std::size_t i = 0; i < other.c_.size(); ++i) c_[i] += s * other.c_[i];
    return *this;
  }

  Poly2& operator+=(const Poly2& o) { return axpy(1.0, o); }
  Poly2& operator-=(const Poly2& o) { return axpy(-1.0, o); }
  Poly2& operator*=(cplx s) {
    for (auto& c : c_) c *= s;
    return *this;
  }

  friend Poly2 operator+(Poly2 a, const Poly2& b) { return a += b; }
  friend Poly2 operator-(Poly2 a, const Poly2& b) { return a -= b; }
  friend Poly2 operator*(Poly2 a, cplx s) { return a *= s; }
  friend Poly2 operator*(cplx s, Poly2 a) { return a *= s; }

  friend Poly2 operator*(const Poly2& p, const Poly2& q) {
    Poly2 out;
    if (p.empty() || q.empty()) return out;
    out.grow(p.degree_ + q.degree_);
    for (int dp = 0; dp <= p.degree_; ++dp)
      for (int bp = 0; bp <= dp; ++bp) {
        const cplx cp = p.c_[index(dp - bp, bp)];
        if (cp == 0.0) continue;
        for (int dq = 0; dq <= q.degree_; ++dq)
          for (int bq = 0; bq <= dq; ++bq) {
            const cplx cq = q.c_[index(dq - bq, bq)];
            if (cq == 0.0) continue;
            out.c_[index(dp - bp + dq - bq, bp + bq)] += cp * cq;
          }
      }
    return out;
  }

  /// Drops trailing all-zero degrees.
  void trim(double tol = 0.0) {
    while (degree_ >= 0) {
      bool zero = true;
      for (int b = 0; b <= degree_; ++b)
        if (std::abs(c_[index(degree_ - b, b)]) > tol) zero = false;
      if (!zero) break;
      --degree_;
      c_.resize(static_cast<std::size_t>(size_for(degree_)));
    }
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : c_) m = std::max(m, std::abs(c));
    return m;
  }

  template <class F>
  void for_each_term(F&& f) const {
    for (int d = 0; d <= degree_; ++d)
      for (int b = 0; b <= d; ++b) {
        const cplx c = c_[index(d - b, b)];
        if (c != 0.0) f(d - b, b, c);
      }
  }

  static int size_for(int degree) { return (degree + 1) * (degree + 2) / 2; }

 private:
  static std::size_t index(int a, int b) {
    const int d = a + b;
    return static_cast<std::size_t>(d * (d + 1) / 2 + b);
  }

  void grow(int degree) {
    degree_ = degree;
    c_.resize(static_cast<std::size_t>(size_for(degree)), 0.0);
  }

  int degree_ = -1;
  std::vector<cplx> c_;
};

/// Powers x1^a, x2^b tabulated at a fixed node set, for fast evaluation of
/// many polynomials on the same nodes.
class PowerTable {
 public:
  PowerTable() = default;
  PowerTable(const Eigen::ArrayXd& x1, const Eigen::ArrayXd& x2, int max_degree) : x1_(x1), x2_(x2) {
    ensure(max_degree);
  }

  void ensure(int max_degree) {
    while (static_cast<int>(p1_.size()) <= max_degree) {
      if (p1_.empty()) {
        p1_.push_back(Eigen::ArrayXd::Ones(x1_.size()));
        p2_.push_back(Eigen::ArrayXd::Ones(x2_.size()));
      } else {
        p1_.push_back(p1_.back() * x1_);
        p2_.push_back(p2_.back() * x2_);
      }
    }
  }

  Eigen::Index size() const { return x1_.size(); }
  int max_degree() const { return static_cast<int>(p1_.size()) - 1; }

  Eigen::ArrayXcd evaluate(const Poly2& p) const {
    Eigen::ArrayXd re = Eigen::ArrayXd::Zero(x1_.size());
    Eigen::ArrayXd im = Eigen::ArrayXd::Zero(x1_.size());
    p.for_each_term([&](int a, int b, cplx c) {
      const Eigen::ArrayXd m = p1_.at(static_cast<std::size_t>(a)) * p2_.at(static_cast<std::size_t>(b));
      if (c.real() != 0.0) re += c.real() * m;
      if (c.imag() != 0.0) im += c.imag() * m;
    });
    Eigen::ArrayXcd out(x1_.size());
    out.real() = re;
    out.imag() = im;
    return out;
  }

 private:
  Eigen::ArrayXd x1_, x2_;
  std::vector<Eigen::ArrayXd> p1_, p2_;
};

}  // namespace geoflow
