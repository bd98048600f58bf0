#pragma once

// Numerical checks of the commutator formulas, the Pestov and
// Guillemin-Kazhdan energy identities, and the subelliptic ratio probes.

#include "geoflow/errors.hpp"
#include "geoflow/fourier_field.hpp"
#include "geoflow/metric2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <string>

namespace geoflow {

/// |lhs - rhs| / max(|terms|, 1e-300). A field whose terms are all below
/// 1e-13 (relative to the input) is flagged degenerate and gets residual 0.
struct IdentityResidual {
  double residual = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
  bool degenerate = false;
};

namespace detail {

inline IdentityResidual relative_residual(double lhs, double rhs, std::initializer_list<double> terms,
                                          double input_scale) {
  IdentityResidual r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.scale = 1e-300;
  for (double t : terms) r.scale = std::max(r.scale, std::abs(t));
  if (r.scale <= 1e-13 * input_scale) {
    r.degenerate = true;
    return r;
  }
  r.residual = std::abs(lhs - rhs) / r.scale;
  return r;
}

template <class Space>
void require_boundary_trace_zero(const FourierField<Space>& u, const char* who) {
  if constexpr (Space::domain == Domain::Disc) {
    double scale = 0.0, trace = 0.0;
    for (const auto& [k, f] : u.coefficients()) {
      scale = std::max(scale, u.space().max_abs(f));
      trace = std::max(trace, u.space().boundary_max_abs(f));
    }
    if (trace > 1e-10 * std::max(scale, 1e-300))
      throw PreconditionError(std::string(who) + ": disc field must vanish on the boundary ring");
  }
}

template <class Space>
FourierField<Space> op(Op o, const FourierField<Space>& u) {
  return apply_operator(o, u);
}

}  // namespace detail

/// Relative L^2 defects of [X,V] = Xperp, [X,Xperp] = -K V and [V,Xperp] = X on u.
template <class Space>
std::array<IdentityResidual, 3> commutator_residuals(const FourierField<Space>& u) {
  using detail::op;
  const double nu = norm(u);
  auto defect = [&](const FourierField<Space>& a, const FourierField<Space>& b, const FourierField<Space>& c) {
    const double d = norm(a - b - c);
    auto r = detail::relative_residual(d, 0.0, {norm(a), norm(b), norm(c)}, nu);
    return r;
  };
  const auto Vu = op(Op::V, u), Xu = op(Op::X, u), Pu = op(Op::Xperp, u);
  std::array<IdentityResidual, 3> out;
  out[0] = defect(op(Op::X, Vu), op(Op::V, Xu), Pu);
  out[1] = defect(op(Op::X, Pu), op(Op::Xperp, Xu), cplx(-1.0) * multiply_curvature(Vu));
  out[2] = defect(op(Op::V, Pu), op(Op::Xperp, Vu), Xu);
  return out;
}

/// ||VXu||^2 = ||XVu||^2 - (K Vu, Vu) + ||Xu||^2.
template <class Space>
IdentityResidual pestov_residual(const FourierField<Space>& u) {
  using detail::op;
  detail::require_boundary_trace_zero(u, "pestov_residual");
  const auto Vu = op(Op::V, u), Xu = op(Op::X, u);
  const double a = norm_squared(op(Op::V, Xu));
  const double b = norm_squared(op(Op::X, Vu));
  const double c = inner_product(multiply_curvature(Vu), Vu).real();
  const double d = norm_squared(Xu);
  return detail::relative_residual(a, b - c + d, {a, b, c, d}, norm_squared(u));
}

/// ||eta_- u||^2 = ||eta_+ u||^2 - (i/2)(K Vu, u).
template <class Space>
IdentityResidual gk_residual(const FourierField<Space>& u) {
  using detail::op;
  detail::require_boundary_trace_zero(u, "gk_residual");
  const double a = norm_squared(op(Op::EtaMinus, u));
  const double b = norm_squared(op(Op::EtaPlus, u));
  const cplx kvu = inner_product(multiply_curvature(op(Op::V, u)), u);
  const double c = (cplx(0.0, -0.5) * kvu).real();
  return detail::relative_residual(a, b + c, {a, b, c}, norm_squared(u));
}

/// 2k (||eta_+ u||^2 - ||eta_- u||^2) = i k (K Vu, u) for u in a single Lambda_k.
template <class Space>
IdentityResidual lambda_k_equivalence(const FourierField<Space>& u) {
  using detail::op;
  if (u.coefficients().size() > 1)
    throw PreconditionError("lambda_k_equivalence: field is not concentrated in one Lambda_k");
  if (u.empty() || u.degree_lo() == 0) return {};
  detail::require_boundary_trace_zero(u, "lambda_k_equivalence");
  const int k = u.degree_lo();
  const double p = norm_squared(op(Op::EtaPlus, u));
  const double m = norm_squared(op(Op::EtaMinus, u));
  const double lhs = 2.0 * k * (p - m);
  const double rhs = (cplx(0.0, double(k)) * inner_product(multiply_curvature(op(Op::V, u)), u)).real();
  return detail::relative_residual(lhs, rhs, {2.0 * k * p, 2.0 * k * m, rhs}, norm_squared(u));
}

/// Integral of u over SM (only the degree-0 coefficient contributes).
template <class Space>
cplx integrate_mode0(const FourierField<Space>& u) {
  return u.has(0) ? u.space().integrate(u.coefficients().at(0)) : cplx(0.0);
}

template <class Space>
double h1_norm(const FourierField<Space>& u) {
  using detail::op;
  return std::sqrt(norm_squared(u) + norm_squared(op(Op::X, u)) + norm_squared(op(Op::Xperp, u)) +
                   norm_squared(op(Op::V, u)));
}

struct RatioProbe {
  double value = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  bool kernel_direction = false;  ///< denominator below 1e-13 relative to the input
};

struct SubellipticRatio {
  RatioProbe pestov;  ///< ||u - mean u||_{H^1} / ||VXu||
  RatioProbe qm;      ///< ||u||_{H^1} / ||V T_{>=m+1} X u||
  int m = 0;
  bool qm_applicable = false;  ///< u lies in T_{>=m}
};

/// Exploratory measurements of the P = VX and Q_m = V T_{>=m+1} X lower
/// bounds; nothing is asserted about their size.
template <class Space>
SubellipticRatio subelliptic_ratio(const FourierField<Space>& u, int m) {
  using detail::op;
  auto probe = [&](double num, double den) {
    RatioProbe r;
    r.numerator = num;
    r.denominator = den;
    if (den < 1e-13 * std::max(norm(u), 1e-300))
      r.kernel_direction = true;
    else
      r.value = num / den;
    return r;
  };
  SubellipticRatio out;
  out.m = m;
  const cplx mean = integrate_mode0(u) / u.space().volume();
  FourierField<Space> centered = u;
  centered.add(0, -mean, u.space().constant(1.0));
  const auto Xu = op(Op::X, u);
  out.pestov = probe(h1_norm(centered), norm(op(Op::V, Xu)));
  out.qm_applicable = norm(u - project(u, Selector::tail_at_least(m))) <= 1e-13 * norm(u);
  if (out.qm_applicable)
    out.qm = probe(h1_norm(u), norm(op(Op::V, project(Xu, Selector::tail_at_least(m + 1)))));
  return out;
}

}  // namespace geoflow
