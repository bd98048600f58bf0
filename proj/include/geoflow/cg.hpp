#pragma once

#include "geoflow/errors.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace geoflow {

template <class Vec>
struct CGResult {
  Vec x;
  int iterations = 0;
  std::vector<double> residual_history;  ///< ||b - A x_i|| / ||b||
};

/// Conjugate gradients for a Hermitian positive semidefinite operator with
/// respect to the pairing `inner` (linear in its first argument). Starts from
/// x = 0 and throws SolverError if max_iter iterations do not reach tol.
template <class Vec, class ApplyA, class Inner>
CGResult<Vec> conjugate_gradient(ApplyA&& A, const Vec& b, Inner&& inner, double tol, int max_iter) {
  CGResult<Vec> out;
  out.x = b * 0.0;
  Vec r = b;
  double rs = std::real(inner(r, r));
  const double bnorm = std::sqrt(rs);
  if (bnorm == 0.0) return out;
  Vec p = r;
  out.residual_history.push_back(1.0);
  while (out.residual_history.back() > tol) {
    if (out.iterations >= max_iter)
      throw SolverError("conjugate gradient did not converge within " + std::to_string(max_iter) + " iterations",
                        out.residual_history);
    const Vec Ap = A(p);
    const double pAp = std::real(inner(p, Ap));
    if (!(pAp > 0.0)) throw SolverError("conjugate gradient met a null search direction", out.residual_history);
    const double alpha = rs / pAp;
    out.x += alpha * p;
    r -= alpha * Ap;
    const double rs_new = std::real(inner(r, r));
    ++out.iterations;
    out.residual_history.push_back(std::sqrt(rs_new) / bnorm);
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return out;
}

}  // namespace geoflow
