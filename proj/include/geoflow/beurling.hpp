#pragma once

// Beurling transform B_+ f = eta_+ v, where v in Lambda_{k+1} solves
//   eta_+^* eta_+ v = eta_+ f,
// so that eta_- (B_+ f) = -eta_+ f with B_+ f in the range of eta_+. On the
// torus the normal equations are solved matrix-free by conjugate gradients;
// on the disc v = (1 - |x|^2) p(x) and the weak form is solved by Galerkin.

#include "geoflow/battery.hpp"
#include "geoflow/cg.hpp"
#include "geoflow/disc_space.hpp"
#include "geoflow/errors.hpp"
#include "geoflow/fourier_field.hpp"
#include "geoflow/torus_space.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

namespace geoflow {

struct BeurlingOptions {
  double tol = 1e-10;
  int max_iter = 0;               ///< 0 means 10 x number of unknowns
  int disc_basis_degree = 16;     ///< v = (1 - |x|^2) * polynomial of this degree
  double kernel_threshold = 1e-8; ///< ||eta_+ h|| / ||h|| below this marks h as a kernel direction
};

/// Result of solving for the potential v of one B_+ step.
template <class Space>
struct PotentialSolve {
  typename Space::Function v;
  typename Space::Function out;  ///< eta_+ v
  int iterations = 0;
  double weak_residual = 0.0;  ///< relative residual of the normal / Galerkin equations
  std::vector<double> residual_history;
  int kernel_dim = 0;          ///< detected dimension of Ker(eta_+) on Lambda_{k+1}
  double inconsistency = 0.0;  ///< fraction of eta_+ f orthogonal to Ran(eta_+^*)
};

template <class Space>
class BeurlingSolver;

template <>
class BeurlingSolver<TorusSpace> {
 public:
  using Function = TorusSpace::Function;

  explicit BeurlingSolver(std::shared_ptr<const TorusSpace> sp, BeurlingOptions opt = {})
      : sp_(std::move(sp)), opt_(opt) {}

  const TorusSpace& space() const { return *sp_; }
  const std::shared_ptr<const TorusSpace>& space_ptr() const { return sp_; }
  const BeurlingOptions& options() const { return opt_; }

  /// f is the Lambda_k coefficient.
  PotentialSolve<TorusSpace> solve(const Function& f, int k) const {
    const TorusSpace& s = *sp_;
    const int j = k + 1;
    PotentialSolve<TorusSpace> r;
    Function b = s.eta_plus(f, k);

    // Ker(eta_+) on Lambda_j contains e^{j lambda}; the part of b along it
    // cannot be reached by eta_+^* and is removed before the solve.
    const Function h = s.exp_lambda(double(j));
    const double hn = std::sqrt(s.norm2(h));
    if (std::sqrt(s.norm2(s.eta_plus(h, j))) <= opt_.kernel_threshold * hn) {
      r.kernel_dim = 1;
      const double bn = std::sqrt(s.norm2(b));
      const cplx c = s.inner(b, h) / (hn * hn);
      b -= c * h;
      r.inconsistency = bn > 0.0 ? std::abs(c) * hn / bn : 0.0;
    }
    const auto A = [&](const Function& v) { return s.eta_plus_adjoint(s.eta_plus(v, j), j); };
    const auto inner = [&](const Function& a, const Function& c) { return s.inner(a, c); };
    const int cap = opt_.max_iter > 0 ? opt_.max_iter : int(10 * s.size());
    auto cg = conjugate_gradient(A, b, inner, opt_.tol, cap);
    r.v = std::move(cg.x);
    r.iterations = cg.iterations;
    r.residual_history = std::move(cg.residual_history);
    r.weak_residual = r.residual_history.empty() ? 0.0 : r.residual_history.back();
    r.out = s.eta_plus(r.v, j);
    return r;
  }

  /// Ker(eta_-) on Lambda_j: e^{-j lambda}.
  std::vector<Function> eta_minus_kernel(int j) const { return {sp_->exp_lambda(-double(j))}; }

 private:
  std::shared_ptr<const TorusSpace> sp_;
  BeurlingOptions opt_;
};

template <>
class BeurlingSolver<DiscSpace> {
 public:
  using Function = DiscSpace::Function;

  explicit BeurlingSolver(std::shared_ptr<const DiscSpace> sp, BeurlingOptions opt = {})
      : sp_(std::move(sp)), opt_(opt) {
    if (opt_.disc_basis_degree < 0) throw ConfigError("disc basis degree must be nonnegative");
    const Poly2 bump = boundary_defining_poly();
    for (int d = 0; d <= opt_.disc_basis_degree; ++d)
      for (int b = 0; b <= d; ++b) basis_.push_back(WeightedPoly::from(bump * Poly2::monomial(d - b, b)));
    phi_.resize(sp_->size(), Eigen::Index(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i) phi_.col(Eigen::Index(i)) = sp_->at_nodes(basis_[i]).matrix();
    sqrt_w_ = sp_->node_weight().sqrt();
  }

  const DiscSpace& space() const { return *sp_; }
  const std::shared_ptr<const DiscSpace>& space_ptr() const { return sp_; }
  const BeurlingOptions& options() const { return opt_; }
  std::size_t basis_size() const { return basis_.size(); }

  PotentialSolve<DiscSpace> solve(const Function& f, int k) const {
    const DiscSpace& s = *sp_;
    const int j = k + 1;
    const Factor& F = factor(j);
    PotentialSolve<DiscSpace> r;
    const Eigen::VectorXcd rhs_nodes = (s.at_nodes(s.eta_plus(f, k)) * s.node_weight()).matrix();
    const Eigen::VectorXcd b = phi_.adjoint() * rhs_nodes;
    if (b.norm() == 0.0) return r;
    const Eigen::VectorXcd y = F.R.adjoint().triangularView<Eigen::Lower>().solve(b);
    const Eigen::VectorXcd c = F.R.triangularView<Eigen::Upper>().solve(y);
    r.weak_residual = (F.A.adjoint() * (F.A * c) - b).norm() / b.norm();
    r.residual_history = {1.0, r.weak_residual};
    r.iterations = 1;
    for (std::size_t i = 0; i < basis_.size(); ++i) r.v.axpy(c[Eigen::Index(i)], basis_[i]);
    r.out = s.eta_plus(r.v, j);
    return r;
  }

  /// Ker(eta_-) on Lambda_j contains e^{-j lambda} z^a; the first few are returned.
  std::vector<Function> eta_minus_kernel(int j, int count = 4) const {
    std::vector<Function> out;
    Poly2 z = Poly2::constant(1.0);
    const Poly2 z1 = Poly2::monomial(1, 0) + Poly2::monomial(0, 1, cplx(0.0, 1.0));
    for (int a = 0; a < count; ++a) {
      out.push_back(WeightedPoly::from(z, j));
      z = z * z1;
    }
    return out;
  }

 private:
  struct Factor {
    Eigen::MatrixXcd A;  ///< sqrt(w) * eta_+ phi_i at the nodes
    Eigen::MatrixXcd R;
  };

  const Factor& factor(int j) const {
    auto it = cache_.find(j);
    if (it != cache_.end()) return it->second;
    Factor F;
    F.A.resize(sp_->size(), Eigen::Index(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i)
      F.A.col(Eigen::Index(i)) = (sp_->at_nodes(sp_->eta_plus(basis_[i], j)) * sqrt_w_).matrix();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(F.A);
    const Eigen::Index nb = F.A.cols();
    F.R = qr.matrixQR().topRows(nb).triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < nb; ++i)
      if (std::abs(F.R(i, i)) <= 1e-13 * std::abs(F.R(0, 0)))
        throw SolverError("disc Beurling basis is numerically rank deficient", {});
    return cache_.emplace(j, std::move(F)).first->second;
  }

  std::shared_ptr<const DiscSpace> sp_;
  BeurlingOptions opt_;
  std::vector<WeightedPoly> basis_;
  Eigen::MatrixXcd phi_;
  Eigen::ArrayXd sqrt_w_;
  mutable std::map<int, Factor> cache_;
};

template <class Space>
struct BeurlingStep {
  int k = 0;                   ///< input degree
  FourierField<Space> output;  ///< f_{k+2} (f_{k-2} for the mirror transform)
  FourierField<Space> potential;
  int iterations = 0;
  double residual = 0.0;       ///< ||eta_-(f_{k+2}) + eta_+ f_k|| / ||eta_+ f_k||
  double weak_residual = 0.0;
  double norm_ratio = 0.0;     ///< ||f_{k+2}|| / ||f_k||
  double input_norm = 0.0;
  double output_norm = 0.0;
  int kernel_dim = 0;
  double inconsistency = 0.0;
  std::vector<double> residual_history;
};

namespace detail {

template <class Space>
int single_degree(const FourierField<Space>& f, const char* who) {
  if (f.coefficients().size() > 1)
    throw PreconditionError(std::string(who) + ": input must lie in a single Lambda_k");
  return f.empty() ? 0 : f.degree_lo();
}

}  // namespace detail

/// One B_+ step on f in Lambda_k, k >= 0.
template <class Space>
BeurlingStep<Space> beurling_plus(const BeurlingSolver<Space>& solver, const FourierField<Space>& f, int k) {
  if (!f.empty() && (f.coefficients().size() > 1 || f.degree_lo() != k))
    throw PreconditionError("beurling_plus: input must lie in Lambda_" + std::to_string(k));
  if (k < 0) throw PreconditionError("beurling_plus: degree must be nonnegative");
  if (k + 2 > f.n_theta()) throw BandOverflow("beurling_plus: needs two degrees of band headroom");
  const Space& s = solver.space();
  BeurlingStep<Space> st{k, FourierField<Space>(f.space_ptr(), f.n_theta()),
                         FourierField<Space>(f.space_ptr(), f.n_theta())};
  st.input_norm = norm(f);
  if (f.empty()) return st;
  const auto fk = f.get(k);
  const auto rhs = s.eta_plus(fk, k);
  const double rhs_norm = std::sqrt(s.norm2(rhs));
  if (rhs_norm == 0.0) return st;
  auto sol = solver.solve(fk, k);
  st.output.set(k + 2, sol.out);
  st.potential.set(k + 1, sol.v);
  st.iterations = sol.iterations;
  st.weak_residual = sol.weak_residual;
  st.kernel_dim = sol.kernel_dim;
  st.inconsistency = sol.inconsistency;
  st.residual_history = std::move(sol.residual_history);
  auto defect = s.eta_minus(sol.out, k + 2);
  Space::axpy(defect, 1.0, rhs);
  st.residual = std::sqrt(s.norm2(defect)) / rhs_norm;
  st.output_norm = norm(st.output);
  st.norm_ratio = st.input_norm > 0.0 ? st.output_norm / st.input_norm : 0.0;
  return st;
}

template <class Space>
BeurlingStep<Space> beurling_plus(const BeurlingSolver<Space>& solver, const FourierField<Space>& f) {
  return beurling_plus(solver, f, detail::single_degree(f, "beurling_plus"));
}

/// Mirror transform on Lambda_{-k}: B_- f = conj(B_+ conj f).
template <class Space>
BeurlingStep<Space> beurling_minus(const BeurlingSolver<Space>& solver, const FourierField<Space>& f, int k) {
  auto st = beurling_plus(solver, f.conj(), -k);
  st.k = k;
  st.output = st.output.conj();
  st.potential = st.potential.conj();
  return st;
}

template <class Space>
struct FullStep {
  int m = 0;
  FourierField<Space> output;
  BeurlingStep<Space> plus;
  BeurlingStep<Space> minus;
  double norm_ratio = 0.0;
  double residual = 0.0;  ///< worst of the two defining-relation residuals
};

/// B(f_m + f_{-m}) = B_+ f_m + B_- f_{-m} for f in Omega_m.
template <class Space>
FullStep<Space> beurling_full(const BeurlingSolver<Space>& solver, const FourierField<Space>& f, int m) {
  for (int k : f.degrees())
    if (std::abs(k) != m) throw PreconditionError("beurling_full: input must lie in Omega_" + std::to_string(m));
  const auto plus_in = project(f, Selector::lambda(m));
  const auto minus_in = project(f, Selector::lambda(-m));  // for m = 0 both halves see f_0
  FullStep<Space> r{m, FourierField<Space>(f.space_ptr(), f.n_theta()), beurling_plus(solver, plus_in, m),
                    beurling_minus(solver, minus_in, -m)};
  r.output = r.plus.output + r.minus.output;
  const double fn = norm(f);
  r.norm_ratio = fn > 0.0 ? norm(r.output) / fn : 0.0;
  r.residual = std::max(r.plus.residual, r.minus.residual);
  return r;
}

/// Ker(eta_-) directions added to B_+ f must not decrease its norm.
struct MinimalityReport {
  int directions = 0;
  double min_relative_increase = 0.0;  ///< min (||g + h||^2 - ||g||^2) / ||g||^2 with ||h|| = step ||g||
  double max_cosine = 0.0;             ///< max |(g, h)| / (||g|| ||h||)
  double step = 1e-3;
};

template <class Space>
MinimalityReport minimality_check(const BeurlingSolver<Space>& solver, const BeurlingStep<Space>& st,
                                  int directions = 10, std::uint64_t seed = 7) {
  MinimalityReport rep;
  const int j = st.k + 2;
  if (st.output.empty()) return rep;
  const Space& s = solver.space();
  const auto g = st.output.get(j);
  const double gn2 = s.norm2(g);
  const auto ker = solver.eta_minus_kernel(j);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  rep.min_relative_increase = INFINITY;
  for (int d = 0; d < directions; ++d) {
    auto h = s.zero();
    for (const auto& e : ker) {
      const double re = nd(rng);
      Space::axpy(h, cplx(re, nd(rng)), e);
    }
    const double hn = std::sqrt(s.norm2(h));
    if (hn == 0.0) continue;
    const double scale = rep.step * std::sqrt(gn2) / hn;
    auto gh = g;
    Space::axpy(gh, scale, h);
    rep.min_relative_increase = std::min(rep.min_relative_increase, (s.norm2(gh) - gn2) / gn2);
    rep.max_cosine = std::max(rep.max_cosine, std::abs(s.inner(g, h)) / (std::sqrt(gn2) * hn));
    ++rep.directions;
  }
  if (rep.directions == 0) rep.min_relative_increase = 0.0;
  return rep;
}

enum class InvariantStart { Lambda, Omega };

template <class Space>
struct InvariantDistribution {
  FourierField<Space> w;
  int start_degree = 0;
  InvariantStart start = InvariantStart::Omega;
  std::vector<double> step_norms;      ///< ||w_{m0+2j}||, j = 0..J
  std::vector<double> step_residuals;  ///< defining-relation residual of each B step
  double input_norm = 0.0;
  double precondition_residual = 0.0;  ///< ||X_- f|| / ||f||
  double transport_residual = 0.0;     ///< ||X w restricted to degrees < m0 + 2J|| / ||f||
  MixedNorm mixed_norm_eps_001;        ///< mixed_norm(w, -1/2 - 0.01)
  MixedNorm mixed_norm_eps_01;         ///< mixed_norm(w, -1/2 - 0.1)
};

/// w = sum_{j=0}^{J} B^j f, for f in Lambda_{k0} with eta_- f = 0 or f in
/// Omega_{m0} with X_- f = 0.
template <class Space>
InvariantDistribution<Space> invariant_distribution(const BeurlingSolver<Space>& solver,
                                                    const FourierField<Space>& f, int j_max,
                                                    InvariantStart start) {
  InvariantDistribution<Space> r{FourierField<Space>(f.space_ptr(), f.n_theta())};
  r.start = start;
  r.input_norm = norm(f);
  if (j_max < 0) throw PreconditionError("invariant_distribution: J_max must be nonnegative");
  int m0 = 0;
  if (!f.empty()) m0 = start == InvariantStart::Lambda ? f.degree_lo() : f.max_abs_degree();
  r.start_degree = m0;
  if (2 * j_max + std::abs(m0) + 1 > f.n_theta())
    throw PreconditionError("invariant_distribution: N_theta = " + std::to_string(f.n_theta()) +
                            " is below the needed headroom 2*J_max + degree + 1 = " +
                            std::to_string(2 * j_max + std::abs(m0) + 1));
  if (f.empty()) return r;

  if (start == InvariantStart::Lambda) {
    if (f.coefficients().size() > 1 || m0 < 0)
      throw PreconditionError("invariant_distribution: Lambda start needs f in one Lambda_k with k >= 0");
    r.precondition_residual = norm(apply_operator(Op::EtaMinus, f)) / r.input_norm;
  } else {
    for (int k : f.degrees())
      if (std::abs(k) != m0) throw PreconditionError("invariant_distribution: Omega start needs f in one Omega_m");
    if (m0 >= 1) r.precondition_residual = norm(project(apply_operator(Op::X, f), Selector::omega(m0 - 1))) / r.input_norm;
  }
  if (r.precondition_residual > 1e-10)
    throw PreconditionError("invariant_distribution: starting field is not solenoidal (residual " +
                            std::to_string(r.precondition_residual) + ")");

  FourierField<Space> cur = f;
  r.w += cur;
  r.step_norms.push_back(norm(cur));
  for (int j = 1; j <= j_max; ++j) {
    const int deg = m0 + 2 * (j - 1);
    if (start == InvariantStart::Lambda) {
      auto st = beurling_plus(solver, cur, deg);
      r.step_residuals.push_back(st.residual);
      cur = std::move(st.output);
    } else {
      auto st = beurling_full(solver, cur, deg);
      r.step_residuals.push_back(st.residual);
      cur = std::move(st.output);
    }
    r.w += cur;
    r.step_norms.push_back(norm(cur));
  }
  const int top = m0 + 2 * j_max;
  const auto Xw = apply_operator(Op::X, r.w);
  FourierField<Space> low(Xw.space_ptr(), Xw.n_theta());
  for (const auto& [k, c] : Xw.coefficients())
    if (std::abs(k) < top) low.set(k, c);
  r.transport_residual = norm(low) / r.input_norm;
  r.mixed_norm_eps_001 = mixed_norm(r.w, -0.51);
  r.mixed_norm_eps_01 = mixed_norm(r.w, -0.6);
  return r;
}

struct ContractionRow {
  int k = 0;
  int trials = 0;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  double max_residual = 0.0;
};

struct SurveyOptions {
  int trials = 10;
  std::uint64_t seed = 1;
  int torus_bandwidth = 3;  ///< torus inputs avoid the zero wave vector
  int disc_degree = 4;
};

/// For each k, the largest ||B_+ f|| / ||f|| over seeded random f in Lambda_k.
template <class Space>
std::vector<ContractionRow> contraction_survey(const BeurlingSolver<Space>& solver, int n_theta,
                                               const std::vector<int>& ks, const SurveyOptions& opt) {
  std::vector<ContractionRow> rows;
  if (opt.trials < 1) return rows;
  std::mt19937_64 rng(opt.seed);
  for (int k : ks) {
    ContractionRow row{k, opt.trials, 0.0, INFINITY, 0.0};
    for (int t = 0; t < opt.trials; ++t) {
      typename Space::Function c;
      if constexpr (Space::domain == Domain::Torus)
        c = random_trig_poly(solver.space(), opt.torus_bandwidth, rng, true);
      else
        c = WeightedPoly::from(random_poly(opt.disc_degree, rng));
      const auto f = FourierField<Space>::mode(solver.space_ptr(), n_theta, k, std::move(c));
      const auto st = beurling_plus(solver, f, k);
      row.max_ratio = std::max(row.max_ratio, st.norm_ratio);
      row.min_ratio = std::min(row.min_ratio, st.norm_ratio);
      row.max_residual = std::max(row.max_residual, st.residual);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace geoflow
