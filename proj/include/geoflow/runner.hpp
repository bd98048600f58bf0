#pragma once

// Config-driven experiment runner behind the geoflow CLI.

#include "geoflow/battery.hpp"
#include "geoflow/beurling.hpp"
#include "geoflow/config.hpp"
#include "geoflow/constants.hpp"
#include "geoflow/identity_lab.hpp"
#include "geoflow/jacobi_riccati.hpp"
#include "geoflow/report.hpp"
#include "geoflow/xray.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <vector>

namespace geoflow {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"verify-identities", "beurling", "invariant", "terminator",
                                                 "riccati",           "xray",     "constants"};
  return names;
}

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;  ///< overrides the config seed
  bool write = true;
};

struct RunResult {
  int exit_code = 0;  ///< 0 pass, 1 a verdict failed, 2 usage or config error, 3 module error
  ExperimentReport report;
  std::string error_kind;
  std::string error_message;
  double wall_seconds = 0.0;
};

namespace detail {

inline double positive(Config& cfg, const std::string& key, double fallback) {
  const double v = cfg.get<double>(key, fallback);
  if (!(v > 0.0)) throw ConfigError("config field '" + key + "' must be positive");
  return v;
}

inline int at_least(Config& cfg, const std::string& key, int fallback, int lo) {
  const int v = cfg.get<int>(key, fallback);
  if (v < lo) throw ConfigError("config field '" + key + "' must be at least " + std::to_string(lo));
  return v;
}

inline IsothermalMetric parse_metric(Config& cfg, const char* forced_domain = nullptr) {
  const std::string domain = forced_domain ? cfg.get<std::string>("metric.domain", forced_domain)
                                           : cfg.get<std::string>("metric.domain", "torus");
  if (domain != "torus" && domain != "disc")
    throw ConfigError("config field 'metric.domain' must be torus or disc");
  if (forced_domain && domain != forced_domain)
    throw ConfigError("config field 'metric.domain': this subcommand needs " + std::string(forced_domain));
  if (domain == "torus") {
    static const std::regex re(R"(metric\.lambda\.(cos|sin)\[(-?\d+)\]\[(-?\d+)\])");
    std::map<std::pair<int, int>, TrigTerm> terms;
    for (const auto& [key, value] : cfg.with_prefix("metric.lambda.")) {
      std::smatch m;
      if (!std::regex_match(key, m, re)) throw ConfigError("config field '" + key + "': expected metric.lambda.cos[p][q] or metric.lambda.sin[p][q] on the torus");
      const int p = std::stoi(m[2]), q = std::stoi(m[3]);
      auto& t = terms[{p, q}];
      t.p = p;
      t.q = q;
      (m[1] == "cos" ? t.cos_coeff : t.sin_coeff) = cfg.require<double>(key);
    }
    std::vector<TrigTerm> list;
    for (const auto& [pq, t] : terms) list.push_back(t);
    return IsothermalMetric::torus(std::move(list));
  }
  static const std::regex re(R"(metric\.lambda\.poly\[(\d+)\]\[(\d+)\])");
  Poly2 p;
  for (const auto& [key, value] : cfg.with_prefix("metric.lambda.")) {
    std::smatch m;
    if (!std::regex_match(key, m, re)) throw ConfigError("config field '" + key + "': expected metric.lambda.poly[a][b] on the disc");
    p.at(std::stoi(m[1]), std::stoi(m[2])) = cfg.require<double>(key);
  }
  return IsothermalMetric::disc(std::move(p));
}

inline DiscQuadrature parse_quadrature(Config& cfg) {
  return {at_least(cfg, "disc.quad_radial", 40, 4), at_least(cfg, "disc.quad_angular", 80, 8)};
}

inline int parse_ntheta(Config& cfg, int fallback, int needed, const std::string& why) {
  const int n = at_least(cfg, "grid.ntheta", fallback, 1);
  if (n < needed)
    throw ConfigError("config field 'grid.ntheta': N_theta = " + std::to_string(n) + " is below the headroom " +
                      std::to_string(needed) + " needed by " + why);
  return n;
}

inline std::uint64_t parse_seed(Config& cfg) {
  return cfg.require<std::uint64_t>("seed", "for randomized experiments");
}

inline Json to_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline double curvature_max(const IsothermalMetric& g, const Eigen::ArrayXd& x1, const Eigen::ArrayXd& x2) {
  double k = -INFINITY;
  for (Eigen::Index i = 0; i < x1.size(); ++i) k = std::max(k, curvature_at(g, x1[i], x2[i]));
  return k;
}

// ---- verify-identities ---------------------------------------------------

template <class Space>
void identity_rows(const std::vector<FourierField<Space>>& battery, ExperimentReport& rep, double tol) {
  auto& t = rep.table("identities", {"trial", "comm_x_v", "comm_x_xperp", "comm_v_xperp", "pestov", "gk"});
  std::array<double, 5> worst{};
  for (std::size_t i = 0; i < battery.size(); ++i) {
    const auto c = commutator_residuals(battery[i]);
    const std::array<double, 5> r = {c[0].residual, c[1].residual, c[2].residual, pestov_residual(battery[i]).residual,
                                     gk_residual(battery[i]).residual};
    t.add({int(i), r[0], r[1], r[2], r[3], r[4]});
    for (int j = 0; j < 5; ++j) worst[std::size_t(j)] = std::max(worst[std::size_t(j)], r[std::size_t(j)]);
  }
  const char* names[] = {"comm_x_v", "comm_x_xperp", "comm_v_xperp", "pestov", "gk"};
  for (int j = 0; j < 5; ++j) rep.verdicts.push_back(make_verdict(std::string("max_") + names[j], worst[std::size_t(j)], "<=", tol));
}

inline void run_verify_identities(Config& cfg, ExperimentReport& rep) {
  const auto g = parse_metric(cfg);
  const int trials = at_least(cfg, "battery.trials", 50, 1);
  const int kmax = at_least(cfg, "battery.kmax", 2, 0);
  const int n_theta = parse_ntheta(cfg, 12, kmax + 2, "battery.kmax + 2 (two degree-raising operators)");
  const double tol = positive(cfg, "tol.residual", 1e-10);
  const auto seed = parse_seed(cfg);
  std::mt19937_64 rng(seed);
  if (g.domain() == Domain::Torus) {
    const int n = at_least(cfg, "grid.n", 32, 4);
    TorusBattery b{at_least(cfg, "battery.bandwidth", 4, 0), kmax, cfg.get<bool>("battery.real", false)};
    cfg.require_all_used();
    const auto sp = TorusSpace::make(g, n);
    std::vector<FourierField<TorusSpace>> battery;
    for (int i = 0; i < trials; ++i) battery.push_back(random_torus_field(sp, n_theta, b, rng));
    identity_rows(battery, rep, tol);
  } else {
    const auto q = parse_quadrature(cfg);
    DiscBattery b{at_least(cfg, "battery.degree", 4, 0), kmax, true};
    cfg.require_all_used();
    const auto sp = std::make_shared<const DiscSpace>(g, q);
    std::vector<FourierField<DiscSpace>> battery;
    for (int i = 0; i < trials; ++i) battery.push_back(random_disc_field(sp, n_theta, b, rng));
    identity_rows(battery, rep, tol);
  }
}

// ---- beurling --------------------------------------------------------------

template <class Space>
void contraction_rows(const BeurlingSolver<Space>& solver, int n_theta, const std::vector<int>& ks,
                      const SurveyOptions& so, double kmax_curv, double tol, ExperimentReport& rep) {
  const auto rows = contraction_survey(solver, n_theta, ks, so);
  auto& t = rep.table("contraction", {"k", "trials", "max_ratio", "min_ratio", "max_residual"});
  double worst = 0.0, worst_res = 0.0;
  for (const auto& r : rows) {
    t.add({r.k, r.trials, r.max_ratio, r.min_ratio, r.max_residual});
    worst = std::max(worst, r.max_ratio);
    worst_res = std::max(worst_res, r.max_residual);
  }
  rep.results["max_curvature"] = kmax_curv;
  rep.results["max_ratio"] = worst;
  rep.results["max_residual"] = worst_res;
  rep.results["contraction_asserted"] = kmax_curv <= 1e-12;
  if (kmax_curv <= 1e-12) rep.verdicts.push_back(make_verdict("max_ratio", worst, "<=", 1.0 + tol));
}

inline void run_beurling(Config& cfg, ExperimentReport& rep) {
  const auto g = parse_metric(cfg);
  const int kmin = at_least(cfg, "beurling.kmin", 0, 0);
  const int kmax = at_least(cfg, "beurling.kmax", 4, kmin);
  const int n_theta = parse_ntheta(cfg, 12, kmax + 2, "beurling.kmax + 2");
  SurveyOptions so;
  so.trials = at_least(cfg, "survey.trials", 10, 1);
  so.seed = parse_seed(cfg);
  BeurlingOptions bo;
  bo.tol = positive(cfg, "tol.solver", 1e-10);
  const double tol = positive(cfg, "tol.contraction", 1e-6);
  std::vector<int> ks;
  for (int k = kmin; k <= kmax; ++k) ks.push_back(k);
  if (g.domain() == Domain::Torus) {
    const int n = at_least(cfg, "grid.n", 32, 4);
    so.torus_bandwidth = at_least(cfg, "survey.bandwidth", 3, 1);
    cfg.require_all_used();
    const auto sp = TorusSpace::make(g, n);
    contraction_rows(BeurlingSolver<TorusSpace>(sp, bo), n_theta, ks, so, sp->curvature().maxCoeff(), tol, rep);
  } else {
    const auto q = parse_quadrature(cfg);
    so.disc_degree = at_least(cfg, "survey.degree", 4, 0);
    bo.disc_basis_degree = at_least(cfg, "disc.basis_degree", 16, 1);
    cfg.require_all_used();
    const auto sp = std::make_shared<const DiscSpace>(g, q);
    contraction_rows(BeurlingSolver<DiscSpace>(sp, bo), n_theta, ks, so, curvature_max(g, sp->node_x1(), sp->node_x2()),
                     tol, rep);
  }
}

// ---- invariant -------------------------------------------------------------

template <class Space>
void invariant_rows(const BeurlingSolver<Space>& solver, const FourierField<Space>& f, int jmax, double tol,
                    ExperimentReport& rep) {
  const auto r = invariant_distribution(solver, f, jmax, InvariantStart::Omega);
  auto& t = rep.table("steps", {"j", "degree", "norm", "norm_over_input", "step_residual"});
  for (std::size_t j = 0; j < r.step_norms.size(); ++j)
    t.add({int(j), r.start_degree + 2 * int(j), r.step_norms[j], r.step_norms[j] / r.input_norm,
           j == 0 ? Json(0.0) : Json(r.step_residuals[j - 1])});
  double direct = 0.0;
  for (int k : r.w.degrees()) direct += std::pow(1.0 + double(k) * k, -0.6) * std::pow(mode_norm(r.w, k), 2);
  rep.results["input_norm"] = r.input_norm;
  rep.results["transport_residual"] = r.transport_residual;
  rep.results["precondition_residual"] = r.precondition_residual;
  rep.results["mixed_norm_s_-0.51"] = {{"value", r.mixed_norm_eps_001.value}, {"tail_flag", r.mixed_norm_eps_001.tail_flag}};
  rep.results["mixed_norm_s_-0.6"] = {{"value", r.mixed_norm_eps_01.value}, {"tail_flag", r.mixed_norm_eps_01.tail_flag}};
  rep.results["mixed_norm_s_-0.6_direct"] = std::sqrt(direct);
  rep.verdicts.push_back(make_verdict("transport_residual", r.transport_residual, "<=", tol));
  rep.verdicts.push_back(make_verdict("mixed_norm_s_-0.6_finite", r.mixed_norm_eps_01.value, "<", INFINITY));
}

inline void run_invariant(Config& cfg, ExperimentReport& rep) {
  const auto g = parse_metric(cfg);
  const int jmax = at_least(cfg, "invariant.jmax", 5, 0);
  const std::string fname = cfg.get<std::string>("invariant.f", g.domain() == Domain::Torus ? "cos_x1" : "constant");
  if (fname != "cos_x1" && fname != "constant") throw ConfigError("config field 'invariant.f' must be cos_x1 or constant");
  if (fname == "cos_x1" && g.domain() != Domain::Torus) throw ConfigError("config field 'invariant.f': cos_x1 needs the torus");
  const int n_theta = parse_ntheta(cfg, 12, 2 * jmax + 1, "invariant.jmax (2*J_max + degree + 1)");
  const double tol = positive(cfg, "tol.transport", 1e-8);
  BeurlingOptions bo;
  bo.tol = positive(cfg, "tol.solver", 1e-12);
  if (g.domain() == Domain::Torus) {
    const int n = at_least(cfg, "grid.n", 32, 4);
    cfg.require_all_used();
    const auto sp = TorusSpace::make(g, n);
    Eigen::ArrayXcd c = fname == "cos_x1" ? Eigen::ArrayXcd(sp->sample([](double x1, double) { return std::cos(x1); }))
                                          : Eigen::ArrayXcd(sp->constant(1.0));
    invariant_rows(BeurlingSolver<TorusSpace>(sp, bo), FourierField<TorusSpace>::mode(sp, n_theta, 0, c), jmax, tol, rep);
  } else {
    const auto q = parse_quadrature(cfg);
    bo.disc_basis_degree = at_least(cfg, "disc.basis_degree", 16, 1);
    cfg.require_all_used();
    const auto sp = std::make_shared<const DiscSpace>(g, q);
    invariant_rows(BeurlingSolver<DiscSpace>(sp, bo), FourierField<DiscSpace>::constant(sp, n_theta, 1.0), jmax, tol, rep);
  }
}

// ---- terminator / riccati --------------------------------------------------

inline CurvatureProfile parse_profile(Config& cfg) {
  const std::string kind = cfg.get<std::string>("profile.kind", "constant");
  if (kind == "constant")
    return CurvatureProfile::constant(cfg.get<double>("profile.k", 1.0), positive(cfg, "profile.length", std::numbers::pi));
  if (kind == "positive_sine") return CurvatureProfile::positive_sine(positive(cfg, "profile.length", 2.0 * std::numbers::pi));
  if (kind == "trig")
    return CurvatureProfile::trig(cfg.get<double>("profile.a0", 0.0), cfg.get<std::vector<double>>("profile.a", {}),
                                  cfg.get<std::vector<double>>("profile.b", {}),
                                  positive(cfg, "profile.period", 2.0 * std::numbers::pi));
  throw ConfigError("config field 'profile.kind' must be constant, positive_sine or trig");
}

inline void run_terminator(Config& cfg, ExperimentReport& rep) {
  const auto p = parse_profile(cfg);
  const double beta_max = positive(cfg, "terminator.beta_max", 2.0);
  const double tol = positive(cfg, "terminator.tol", 1e-3);
  const int scan = at_least(cfg, "terminator.scan_points", 0, 0);
  cfg.require_all_used();
  const auto est = estimate_terminator({p}, beta_max, tol);
  rep.results["profile"] = p.label();
  rep.results["beta_lower"] = est.beta_lower;
  rep.results["beta_upper"] = est.beta_upper;
  rep.results["none_up_to_max"] = est.none_up_to_max;
  rep.results["witness_time"] = est.witness_time ? Json(*est.witness_time) : Json();
  rep.results["bisections"] = est.bisections;
  if (!est.none_up_to_max) rep.verdicts.push_back(make_verdict("bracket_width", est.beta_upper - est.beta_lower, "<=", tol));
  if (scan > 0) {
    auto& t = rep.table("scan", {"beta", "conjugate_time"});
    double last_good = 0.0, first_bad = INFINITY;
    for (int i = 1; i <= scan; ++i) {
      const double beta = beta_max * i / scan;
      const auto c = first_conjugate_time(p, beta);
      t.add({beta, c ? Json(*c) : Json()});
      if (c && !std::isfinite(first_bad)) first_bad = beta;
      if (!c && !std::isfinite(first_bad)) last_good = beta;
    }
    rep.results["scan_last_clear"] = last_good;
    rep.results["scan_first_conjugate"] = first_bad;
    const double hi = est.none_up_to_max ? INFINITY : est.beta_upper;
    const double disagreement = std::max({0.0, est.beta_lower - first_bad, last_good - hi});
    rep.verdicts.push_back(make_verdict("scan_disagreement", disagreement, "<=", 0.0));
  }
}

inline void run_riccati(Config& cfg, ExperimentReport& rep) {
  const auto p = parse_profile(cfg);
  const auto betas = cfg.get<std::vector<double>>("riccati.beta", {1.0});
  for (double b : betas)
    if (b < 0.0) throw ConfigError("config field 'riccati.beta' must be nonnegative");
  const double horizon = cfg.get<double>("riccati.horizon", 0.0);
  if (horizon < 0.0) throw ConfigError("config field 'riccati.horizon' must be nonnegative (0 picks the default)");
  const int samples = at_least(cfg, "riccati.samples", 32, 2);
  const int trials = at_least(cfg, "greeneq.trials", 20, 0);
  const int modes = at_least(cfg, "greeneq.modes", 3, 1);
  const double tol = positive(cfg, "tol.greeneq", 1e-7);
  std::uint64_t seed = 0;
  if (trials > 0) {
    if (!p.periodic()) throw ConfigError("config field 'greeneq.trials': the energy identity needs a periodic profile");
    seed = parse_seed(cfg);
  }
  cfg.require_all_used();
  const auto T = horizon > 0.0 ? std::optional<double>(horizon) : std::nullopt;
  auto& t = rep.table("green", {"beta", "U_minus_t0", "U_plus_t0", "gap", "raw_gap", "convergence", "hyperbolic",
                                "rank_one", "ladder_monotone", "riccati_residual", "greeneq_max"});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double beta : betas) {
    const auto gp = green_solutions(p, beta, T);
    const auto gap = hyperbolicity_gap(p, beta, T, samples);
    double worst = 0.0;
    for (int i = 0; i < trials; ++i) {
      std::vector<double> a(static_cast<std::size_t>(modes)), b(static_cast<std::size_t>(modes));
      for (int j = 0; j < modes; ++j) {
        a[std::size_t(j)] = nd(rng);
        b[std::size_t(j)] = nd(rng);
      }
      const double w = 2.0 * std::numbers::pi / p.period();
      auto z = [&](double s) {
        double v = 0.0, d = 0.0;
        for (int j = 0; j < modes; ++j) {
          const double f = (j + 1) * w;
          v += a[std::size_t(j)] * std::cos(f * s) + b[std::size_t(j)] * std::sin(f * s);
          d += f * (-a[std::size_t(j)] * std::sin(f * s) + b[std::size_t(j)] * std::cos(f * s));
        }
        return std::array<double, 2>{v, d};
      };
      worst = std::max({worst, greeneq_residual(p, beta, gp.minus, z).residual, greeneq_residual(p, beta, gp.plus, z).residual});
    }
    const bool monotone = gp.minus.ladder_monotone && gp.plus.ladder_monotone;
    t.add({beta, gp.minus.U.front(), gp.plus.U.front(), gap.gap, gap.raw_gap, gap.convergence, gap.hyperbolic,
           gap.rank_one, monotone, std::max(gp.minus.riccati_residual, gp.plus.riccati_residual), worst});
    const std::string tag = "beta=" + Config::format(beta);
    rep.verdicts.push_back(make_verdict("ladder_monotone[" + tag + "]", monotone ? 1.0 : 0.0, ">=", 1.0));
    if (trials > 0) rep.verdicts.push_back(make_verdict("greeneq_max[" + tag + "]", worst, "<=", tol));
  }
}

// ---- xray ------------------------------------------------------------------

inline void run_xray(Config& cfg, ExperimentReport& rep) {
  const auto g = parse_metric(cfg, "disc");
  const auto q = parse_quadrature(cfg);
  const int nb = at_least(cfg, "fan.nb", 64, 1), na = at_least(cfg, "fan.na", 64, 1);
  FanOptions fo;
  fo.max_step = positive(cfg, "fan.max_step", 1e-3);
  if (fo.max_step > 1e-3) throw ConfigError("config field 'fan.max_step' must not exceed 1e-3");
  const int n_pot = at_least(cfg, "xray.potentials", 10, 0);
  const bool spectrum = cfg.get<bool>("xray.spectrum", true);
  const double tol_santalo = positive(cfg, "tol.santalo", 1e-3);
  const double tol_kernel = positive(cfg, "tol.kernel", 1e-6);
  int m = 0, B = 0;
  SpectrumOptions so;
  if (spectrum) {
    m = at_least(cfg, "xray.m", 0, 0);
    B = cfg.get<int>("xray.B", 32);
    if (B <= 0) throw ConfigError("config field 'xray.B' must be positive");
    const std::string w = cfg.get<std::string>("xray.data_weight", "uniform");
    if (w != "uniform" && w != "santalo") throw ConfigError("config field 'xray.data_weight' must be uniform or santalo");
    so.data_weight = w == "uniform" ? DataWeight::Uniform : DataWeight::Santalo;
  }
  cfg.require_all_used();
  const auto sp = std::make_shared<const DiscSpace>(g, q);
  const BoundaryFan fan(g, nb, na, fo);

  const auto one = FourierField<DiscSpace>::constant(sp, 2, 1.0);
  const Eigen::VectorXcd I1 = ray_transform_batch({&one}, fan).col(0);
  auto& t = rep.table("rays", {"phi", "alpha", "tau", "weight", "transform_of_one"});
  for (std::size_t r = 0; r < fan.size(); ++r) {
    const auto& ray = fan.rays()[r];
    t.add({ray.phi, ray.alpha, ray.tau, ray.weight, I1[Eigen::Index(r)].real()});
  }
  const auto s = santalo_integral(one, fan);
  rep.results["santalo"] = {{"fan", s.fan_value.real()}, {"grid", s.grid_value.real()}, {"residual", s.residual}};
  rep.verdicts.push_back(make_verdict("santalo_residual", s.residual, "<=", tol_santalo));

  if (n_pot > 0) {
    int deg = 0;
    while (int(potential_basis(sp, 3, 1, deg).size()) < n_pot) ++deg;
    auto pots = potential_basis(sp, 3, 1, deg);
    pots.erase(pots.begin() + n_pot, pots.end());
    std::vector<const FourierField<DiscSpace>*> ptr;
    double scale = 0.0;
    for (const auto& p : pots) {
      ptr.push_back(&p);
      for (const auto& [k, c] : p.coefficients()) scale = std::max(scale, sp->max_abs(c));
    }
    const double worst = ray_transform_batch(ptr, fan).cwiseAbs().maxCoeff();
    rep.results["kernel"] = {{"potentials", n_pot}, {"max_abs", worst}, {"scale", scale}};
    rep.verdicts.push_back(make_verdict("kernel_relative", worst / scale, "<=", tol_kernel));
  }

  if (spectrum) {
    const auto sr = sinjectivity_spectrum(sp, m, B, fan, so);
    Json ladder = Json::array();
    for (const auto& [b, v] : sr.ladder) ladder.push_back({{"B", b}, {"sigma_min", v}});
    rep.results["spectrum"] = {{"m", sr.m},
                               {"B", sr.basis_size},
                               {"n_b", sr.n_b},
                               {"n_a", sr.n_a},
                               {"data_weight", so.data_weight == DataWeight::Uniform ? "uniform" : "santalo"},
                               {"rank", sr.rank},
                               {"singular_values", to_json(sr.singular_values)},
                               {"sigma_min", sr.sigma_min},
                               {"sigma_max", sr.sigma_max},
                               {"null_eigenvalues", to_json(sr.null_eigenvalues)},
                               {"ladder", ladder},
                               {"potential_sigma", to_json(sr.potential_sigma)}};
    rep.verdicts.push_back(make_verdict("sigma_min", sr.sigma_min, ">", 0.0));
    for (std::size_t i = 0; i < sr.potential_sigma.size(); ++i)
      rep.verdicts.push_back(make_verdict("potential_sigma[" + std::to_string(i) + "]", sr.potential_sigma[i], "<=", 1e-6));
  }
}

// ---- constants -------------------------------------------------------------

inline void run_constants(Config& cfg, ExperimentReport& rep) {
  const int n_max = at_least(cfg, "constants.n_max", 4, 2);
  const int m_max = at_least(cfg, "constants.m_max", 10, 0);
  const int tail = cfg.get<int>("constants.tail_terms", 64);
  const int chain = at_least(cfg, "constants.chain_max", 50, 2);
  cfg.require_all_used();
  auto& bc = rep.table("beurling_constants", {"n", "m", "C", "D", "bound_only"});
  for (int n = 2; n <= n_max; ++n)
    for (int m = 0; m <= m_max; ++m) {
      const auto c = beurling_constants(n, m);
      bc.add({n, m, c.C, c.D, c.bound_only});
    }
  auto& ac = rep.table("a_constants", {"n", "m0", "tail_terms", "partial", "tail_bound", "certified", "bound_only", "comparison"});
  for (int n = 2; n <= n_max; ++n)
    for (int m0 = 0; m0 <= std::min(m_max, 3); ++m0) {
      const auto a = a_constant(n, m0, tail);
      ac.add({n, m0, a.tail_terms, a.partial, a.tail_bound, a.certified, a.bound_only, a.comparison});
    }
  auto& th = rep.table("thresholds", {"n", "m", "alpha", "alpha_secondary", "beta", "beta_cross_check", "controlled_from_beta"});
  double chain_gap = INFINITY;
  for (int n = 2; n <= chain; ++n)
    for (int m = 2; m <= chain; ++m) {
      const auto a = alpha_threshold(n, m);
      const auto b = beta_threshold(n, m);
      const double c = controlled_from_beta(b.beta);
      chain_gap = std::min(chain_gap, c - a.alpha);
      if (n <= n_max && m <= std::max(m_max, 2)) th.add({n, m, a.alpha, a.secondary, b.beta, b.cross_check, c});
    }
  const auto a3 = a_constant(3, 0, tail);
  const auto a2 = a_constant(2, 0, tail);
  rep.results["A_3(0)"] = {{"partial", a3.partial}, {"tail_bound", a3.tail_bound}, {"certified", a3.certified}, {"comparison", a3.comparison}};
  rep.results["A_2(0)"] = a2.certified;
  rep.results["chain_min_gap"] = chain_gap;
  rep.verdicts.push_back(make_verdict("A_3(0)_certified", a3.certified, "<=", 1.13));
  rep.verdicts.push_back(make_verdict("A_2(0)_minus_sqrt2", std::abs(a2.certified - std::sqrt(2.0)), "<=", 0.0));
  rep.verdicts.push_back(make_verdict("chain_min_gap", chain_gap, ">=", -1e-12));
}

}  // namespace detail

/// Runs one subcommand; writes report.json, tables/*.csv, config.echo and
/// timing.json under opt.out_dir when opt.write is set.
inline RunResult run(const std::string& subcommand, Config cfg, const RunOptions& opt = {}) {
  RunResult res;
  res.report.subcommand = subcommand;
  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&]() {
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!opt.write || res.exit_code == 2) return;
    Json j = res.report.to_json();
    if (!res.error_kind.empty()) {
      j.erase("pass");
      j["error"] = {{"kind", res.error_kind}, {"message", res.error_message}};
    }
    detail::write_file(opt.out_dir / "report.json", to_json_text(j));
    for (const auto& t : res.report.tables)
      detail::write_file(opt.out_dir / "tables" / (t.name + ".csv"), to_csv_text(t));
    detail::write_file(opt.out_dir / "config.echo", cfg.echo_text());
    detail::write_file(opt.out_dir / "timing.json",
                       to_json_text(Json{{"subcommand", subcommand}, {"wall_seconds", res.wall_seconds}}));
  };
  try {
    if (opt.seed) cfg.set("seed", std::to_string(*opt.seed));
    if (cfg.has("seed")) cfg.get<std::uint64_t>("seed", 0);
    if (subcommand == "verify-identities") detail::run_verify_identities(cfg, res.report);
    else if (subcommand == "beurling") detail::run_beurling(cfg, res.report);
    else if (subcommand == "invariant") detail::run_invariant(cfg, res.report);
    else if (subcommand == "terminator") detail::run_terminator(cfg, res.report);
    else if (subcommand == "riccati") detail::run_riccati(cfg, res.report);
    else if (subcommand == "xray") detail::run_xray(cfg, res.report);
    else if (subcommand == "constants") detail::run_constants(cfg, res.report);
    else throw ConfigError("unknown subcommand '" + subcommand + "'");
    res.exit_code = res.report.pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.error_kind = e.kind();
    res.error_message = e.what();
  } catch (const Error& e) {
    res.exit_code = 3;
    res.error_kind = e.kind();
    res.error_message = e.what();
  } catch (const std::exception& e) {
    res.exit_code = 3;
    res.error_kind = "exception";
    res.error_message = e.what();
  }
  for (const auto& [k, v] : cfg.echo()) res.report.config[k] = v;
  finish();
  return res;
}

}  // namespace geoflow
