#pragma once

// Functions on the unit sphere bundle SM stored as vertical Fourier series
//   u(x, theta) = sum_{|k| <= N} u_k(x) e^{i k theta}.
// The spatial coefficient type comes from the Space (TorusSpace or DiscSpace).

#include "geoflow/errors.hpp"
#include "geoflow/poly2.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace geoflow {

enum class Op { V, X, Xperp, EtaPlus, EtaMinus };

inline const char* to_string(Op op) {
  switch (op) {
    case Op::V: return "V";
    case Op::X: return "X";
    case Op::Xperp: return "Xperp";
    case Op::EtaPlus: return "eta_plus";
    case Op::EtaMinus: return "eta_minus";
  }
  return "?";
}

template <class Space>
class FourierField {
 public:
  using Function = typename Space::Function;
  using SpacePtr = std::shared_ptr<const Space>;

  FourierField(SpacePtr space, int n_theta) : space_(std::move(space)), n_(n_theta) {
    if (!space_) throw PreconditionError("FourierField needs a space");
    if (n_theta < 0) throw PreconditionError("N_theta must be nonnegative");
  }

  static FourierField constant(SpacePtr space, int n_theta, cplx c) {
    FourierField u(space, n_theta);
    u.set(0, space->constant(c));
    return u;
  }

  /// The field f(x) e^{i k theta}.
  static FourierField mode(SpacePtr space, int n_theta, int k, Function f) {
    FourierField u(std::move(space), n_theta);
    u.set(k, std::move(f));
    return u;
  }

  const Space& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  int n_theta() const { return n_; }

  bool empty() const { return c_.empty(); }
  bool has(int k) const { return c_.count(k) != 0; }
  int degree_lo() const { return c_.empty() ? 0 : c_.begin()->first; }
  int degree_hi() const { return c_.empty() ? 0 : c_.rbegin()->first; }
  /// Largest |k| with a stored coefficient.
  int max_abs_degree() const { return std::max(std::abs(degree_lo()), std::abs(degree_hi())); }
  std::vector<int> degrees() const {
    std::vector<int> ks;
    for (const auto& [k, f] : c_) ks.push_back(k);
    return ks;
  }

  Function get(int k) const {
    const auto it = c_.find(k);
    return it == c_.end() ? space_->zero() : it->second;
  }
  const std::map<int, Function>& coefficients() const { return c_; }

  /// Stores u_k; identically zero coefficients are dropped from the band.
  void set(int k, Function f) {
    check_degree(k);
    if (Space::is_zero(f))
      c_.erase(k);
    else
      c_[k] = std::move(f);
  }

  void add(int k, cplx a, const Function& f) {
    check_degree(k);
    auto it = c_.find(k);
    if (it == c_.end()) {
      Function g = space_->zero();
      Space::axpy(g, a, f);
      set(k, std::move(g));
    } else {
      Space::axpy(it->second, a, f);
      if (Space::is_zero(it->second)) c_.erase(it);
    }
  }

  FourierField& axpy(cplx a, const FourierField& o) {
    require_compatible(o);
    for (const auto& [k, f] : o.c_) add(k, a, f);
    return *this;
  }
  FourierField& operator+=(const FourierField& o) { return axpy(1.0, o); }
  FourierField& operator-=(const FourierField& o) { return axpy(-1.0, o); }
  FourierField& operator*=(cplx a) {
    if (a == 0.0) {
      c_.clear();
      return *this;
    }
    for (auto& [k, f] : c_) f = a * f;
    return *this;
  }
  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(cplx a, FourierField u) { return u *= a; }
  friend FourierField operator*(FourierField u, cplx a) { return u *= a; }

  /// Complex conjugate as a function on SM: (conj u)_k = conj(u_{-k}).
  FourierField conj() const {
    FourierField out(space_, n_);
    for (const auto& [k, f] : c_) out.c_[-k] = Space::conj(f);
    return out;
  }

  FourierField with_band(int n_theta) const {
    FourierField out(space_, n_theta);
    for (const auto& [k, f] : c_) out.set(k, f);
    return out;
  }

  void require_compatible(const FourierField& o) const {
    if (!space_->compatible(*o.space_)) throw DomainError("fields live on different metrics or grids");
    if (n_ != o.n_) throw DomainError("fields have different N_theta");
  }

 private:
  void check_degree(int k) const {
    if (std::abs(k) > n_)
      throw BandOverflow("degree " + std::to_string(k) + " outside [-" + std::to_string(n_) + ", " +
                         std::to_string(n_) + "]");
  }

  SpacePtr space_;
  int n_;
  std::map<int, Function> c_;
};

/// Z = z iv, a vertical vector field represented by its scalar coefficient.
template <class Space>
struct VerticalField {
  FourierField<Space> z;
};

template <class Space>
FourierField<Space> apply_operator(Op op, const FourierField<Space>& u) {
  const Space& sp = u.space();
  FourierField<Space> out(u.space_ptr(), u.n_theta());
  if (u.empty()) return out;
  const bool up = op != Op::V && op != Op::EtaMinus;
  const bool down = op != Op::V && op != Op::EtaPlus;
  if (up && u.degree_hi() >= u.n_theta())
    throw BandOverflow(std::string(to_string(op)) + " applied to a field with degree_hi = N_theta");
  if (down && u.degree_lo() <= -u.n_theta())
    throw BandOverflow(std::string(to_string(op)) + " applied to a field with degree_lo = -N_theta");

  // X = eta_+ + eta_-,  Xperp = -i (eta_+ - eta_-)
  cplx cp = 1.0, cm = 1.0;
  if (op == Op::Xperp) {
    cp = cplx(0.0, -1.0);
    cm = cplx(0.0, 1.0);
  }
  for (const auto& [k, f] : u.coefficients()) {
    if (op == Op::V) {
      out.add(k, cplx(0.0, double(k)), f);
      continue;
    }
    if (up) out.add(k + 1, cp, sp.eta_plus(f, k));
    if (down) out.add(k - 1, cm, sp.eta_minus(f, k));
  }
  return out;
}

template <class Space>
FourierField<Space> multiply_curvature(const FourierField<Space>& u) {
  FourierField<Space> out(u.space_ptr(), u.n_theta());
  for (const auto& [k, f] : u.coefficients()) out.set(k, u.space().mul_curvature(f));
  return out;
}

/// Horizontal and vertical gradients in 2D: grad^h u = -(Xperp u) iv, grad^v u = (V u) iv.
template <class Space>
VerticalField<Space> horizontal_gradient(const FourierField<Space>& u) {
  return {cplx(-1.0) * apply_operator(Op::Xperp, u)};
}
template <class Space>
VerticalField<Space> vertical_gradient(const FourierField<Space>& u) {
  return {apply_operator(Op::V, u)};
}

/// L^2(SM) pairing; the fiber integral is exact by Fourier orthogonality.
template <class Space>
cplx inner_product(const FourierField<Space>& u, const FourierField<Space>& w) {
  u.require_compatible(w);
  cplx s = 0.0;
  for (const auto& [k, f] : u.coefficients())
    if (w.has(k)) s += u.space().inner(f, w.coefficients().at(k));
  return s;
}

template <class Space>
double norm_squared(const FourierField<Space>& u) {
  double s = 0.0;
  for (const auto& [k, f] : u.coefficients()) s += u.space().norm2(f);
  return s;
}

template <class Space>
double norm(const FourierField<Space>& u) {
  return std::sqrt(norm_squared(u));
}

/// Norm of the single coefficient u_k e^{ik theta}.
template <class Space>
double mode_norm(const FourierField<Space>& u, int k) {
  return u.has(k) ? std::sqrt(u.space().norm2(u.coefficients().at(k))) : 0.0;
}

struct MixedNorm {
  double value = 0.0;
  /// The outermost stored degree |k| = N_theta carries energy, so the stored
  /// band may be truncating the series.
  bool tail_flag = false;
};

/// (sum_m <m>^{2s} ||u_m||^2)^{1/2} with <m> = (1 + m^2)^{1/2}, where u_m is
/// the degree-|m| spherical-harmonic part.
template <class Space>
MixedNorm mixed_norm(const FourierField<Space>& u, double s) {
  MixedNorm r;
  double sum = 0.0;
  for (const auto& [k, f] : u.coefficients()) {
    sum += std::pow(1.0 + double(k) * k, s) * u.space().norm2(f);
    if (std::abs(k) == u.n_theta()) r.tail_flag = true;
  }
  r.value = std::sqrt(sum);
  return r;
}

struct Selector {
  enum class Kind { Lambda, Omega, TailAtLeast };
  Kind kind;
  int index;
  static Selector lambda(int k) { return {Kind::Lambda, k}; }
  static Selector omega(int m) { return {Kind::Omega, m}; }
  static Selector tail_at_least(int m) { return {Kind::TailAtLeast, m}; }

  bool keeps(int k) const {
    switch (kind) {
      case Kind::Lambda: return k == index;
      case Kind::Omega: return std::abs(k) == index;
      case Kind::TailAtLeast: return std::abs(k) >= index;
    }
    return false;
  }
};

template <class Space>
FourierField<Space> project(const FourierField<Space>& u, const Selector& sel) {
  FourierField<Space> out(u.space_ptr(), u.n_theta());
  for (const auto& [k, f] : u.coefficients())
    if (sel.keeps(k)) out.set(k, f);
  return out;
}

/// Keeps degrees k with lo <= k <= hi.
template <class Space>
FourierField<Space> project_range(const FourierField<Space>& u, int lo, int hi) {
  FourierField<Space> out(u.space_ptr(), u.n_theta());
  for (const auto& [k, f] : u.coefficients())
    if (k >= lo && k <= hi) out.set(k, f);
  return out;
}

/// max_k max_x |u_{-k} - conj(u_k)| / max|u|; zero for a real field.
template <class Space>
double reality_residual(const FourierField<Space>& u) {
  double scale = 0.0, worst = 0.0;
  for (const auto& [k, f] : u.coefficients()) scale = std::max(scale, u.space().max_abs(f));
  if (scale == 0.0) return 0.0;
  for (const auto& [k, f] : u.coefficients()) {
    typename Space::Function d = u.get(-k);
    Space::axpy(d, -1.0, Space::conj(f));
    worst = std::max(worst, u.space().max_abs(d));
  }
  return worst / scale;
}

template <class Space>
bool is_real(const FourierField<Space>& u, double tol = 1e-13) {
  return reality_residual(u) <= tol;
}

struct AdjointnessReport {
  double eta = 0.0;    ///< |(eta_+ u, w) + (u, eta_- w)| / (|u||w|)
  double v = 0.0;      ///< |(V u, w) + (u, V w)| / (|u||w|)
  double x = 0.0;      ///< |(X u, w) + (u, X w)| / (|u||w|)
  double xperp = 0.0;  ///< |(Xperp u, w) + (u, Xperp w)| / (|u||w|)
  double max() const { return std::max({eta, v, x, xperp}); }
};

/// Skew-adjointness defects of eta_+/-eta_-, V, X and Xperp on a closed surface.
template <class Space>
AdjointnessReport adjointness_residual(const FourierField<Space>& u, const FourierField<Space>& w) {
  u.require_compatible(w);
  const double scale = std::max(norm(u) * norm(w), 1e-300);
  auto skew = [&](Op a, Op b) {
    return std::abs(inner_product(apply_operator(a, u), w) + inner_product(u, apply_operator(b, w))) / scale;
  };
  AdjointnessReport r;
  r.eta = skew(Op::EtaPlus, Op::EtaMinus);
  r.v = skew(Op::V, Op::V);
  r.x = skew(Op::X, Op::X);
  r.xperp = skew(Op::Xperp, Op::Xperp);
  return r;
}

}  // namespace geoflow
