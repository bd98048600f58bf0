#pragma once

// Closed-form constants of the Beurling contraction and the thresholds built
// from them.

#include "geoflow/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace geoflow {

struct BeurlingConstants {
  int n = 2, m = 0;
  double C = 1.0;
  double D = std::numeric_limits<double>::quiet_NaN();  ///< NaN when m = 0
  bool bound_only = false;  ///< n >= 4: the value 1 is an upper bound, not the constant
};

inline double c_constant(int n, int m, bool* bound_only = nullptr) {
  if (n < 2 || m < 0) throw DomainError("C_n(m) needs n >= 2 and m >= 0");
  if (bound_only) *bound_only = n >= 4;
  if (n == 2) return m == 0 ? std::sqrt(2.0) : 1.0;
  if (n == 3) return std::sqrt(1.0 + 1.0 / ((m + 2.0) * (m + 2.0) * (2.0 * m + 1.0)));
  return 1.0;
}

inline double d_constant(int n, int m, bool* bound_only = nullptr) {
  if (n < 2 || m < 1) throw DomainError("D_n(m) needs n >= 2 and m >= 1");
  if (bound_only) *bound_only = n >= 4;
  if (n == 2) return m == 1 ? std::sqrt(2.0) : 1.0;
  if (n == 3) return std::sqrt(1.0 + 1.0 / ((m + 1.0) * (m + 1.0) * (2.0 * m - 1.0)));
  return 1.0;
}

inline BeurlingConstants beurling_constants(int n, int m) {
  BeurlingConstants r;
  r.n = n;
  r.m = m;
  r.C = c_constant(n, m, &r.bound_only);
  if (m >= 1) r.D = d_constant(n, m);
  return r;
}

struct AConstant {
  int n = 2, m0 = 0, tail_terms = 0;
  double partial = 1.0;      ///< prod_{j < tail_terms} C_n(m0 + 2j)
  double tail_bound = 0.0;   ///< upper bound on sum_{j >= tail_terms} log C_n(m0 + 2j)
  double certified = 1.0;    ///< partial * exp(tail_bound)
  bool bound_only = false;
  std::string comparison;    ///< the comparison sum behind tail_bound
};

/// A_n(m0) = prod_j C_n(m0 + 2j) with a rigorous upper bound on the tail.
inline AConstant a_constant(int n, int m0, int tail_terms) {
  if (n < 2 || m0 < 0) throw DomainError("A_n(m0) needs n >= 2 and m0 >= 0");
  if (tail_terms < 8) throw PreconditionError("a_constant: tail_terms must be at least 8");
  AConstant r;
  r.n = n;
  r.m0 = m0;
  r.tail_terms = tail_terms;
  if (n >= 4) {
    r.bound_only = true;
    r.comparison = "C_n(m) <= 1 for n >= 4";
    return r;
  }
  for (int j = 0; j < tail_terms; ++j) r.partial *= c_constant(n, m0 + 2 * j);
  if (n == 3) {
    // log C_3(m) <= 1/(2 (m+2)^2 (2m+1)) <= 1/(32 j^3) for m = m0 + 2j, j >= 1,
    // and sum_{j >= J} 1/(32 j^3) <= int_{J-1}^inf dx/(32 x^3).
    const double J1 = tail_terms - 1.0;
    r.tail_bound = 1.0 / (64.0 * J1 * J1);
    r.comparison = "sum_{j>=" + std::to_string(tail_terms) + "} 1/(32 j^3) <= 1/(64 (J-1)^2)";
  } else {
    r.comparison = "C_2(m) = 1 for m >= 1";
  }
  r.certified = r.partial * std::exp(r.tail_bound);
  return r;
}

struct AlphaThreshold {
  double alpha = 0.0;      ///< (m-1)(m+n-2) / (m(m+n-1))
  double secondary = 0.0;  ///< (m-2)(m+n-3) / ((m-1)(m+n-2)); NaN for m = 1
};

inline AlphaThreshold alpha_threshold(int n, int m) {
  if (n < 2 || m < 1) throw DomainError("alpha_threshold needs n >= 2 and m >= 1");
  AlphaThreshold r;
  r.alpha = double(m - 1) * (m + n - 2) / (double(m) * (m + n - 1));
  r.secondary = m == 1 ? std::numeric_limits<double>::quiet_NaN()
                       : double(m - 2) * (m + n - 3) / (double(m - 1) * (m + n - 2));
  return r;
}

struct BetaThreshold {
  double beta = 0.0;         ///< m(m+n-1) / (2m+n-2)
  double cross_check = 0.0;  ///< 2(n+1)/(n+2) at m = 2, NaN otherwise
};

inline BetaThreshold beta_threshold(int n, int m) {
  if (n < 2 || m < 2) throw DomainError("beta_threshold needs n >= 2 and m >= 2");
  BetaThreshold r;
  r.beta = double(m) * (m + n - 1) / double(2 * m + n - 2);
  r.cross_check = m == 2 ? 2.0 * (n + 1) / double(n + 2) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

/// (beta - 1) / beta; beta = +infinity gives 1.
inline double controlled_from_beta(double beta) {
  if (!(beta > 0.0)) throw DomainError("controlled_from_beta needs beta > 0");
  if (std::isinf(beta)) return 1.0;
  return (beta - 1.0) / beta;
}

}  // namespace geoflow
