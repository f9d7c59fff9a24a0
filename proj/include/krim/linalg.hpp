#pragma once

#include <functional>

#include "krim/common.hpp"

namespace krim {

using LinearOp = std::function<void(CVec const &, CVec &)>;

struct CgResult {
  int iterations = 0;
  double residual = 0.0; // ||b - A x|| / ||b||
  bool converged = false;
};

/// Preconditioned conjugate gradients for a Hermitian positive definite operator.
/// `x` holds the starting point on entry. An empty `precond` means identity.
CgResult pcg(LinearOp const &op, LinearOp const &precond, CVec const &b, CVec &x, double tol, int max_iter);

/// a (1 - lambda / max(lambda, |a|)).
inline cx soft_threshold(cx a, double lambda) {
  if (lambda <= 0.0) { return a; }
  double const mag = std::abs(a);
  return a * (1.0 - lambda / std::max(lambda, mag));
}

struct HermitianEig {
  RVec values;
  CMat vectors;
};

HermitianEig hermitian_eig(CMat const &a);

/// Solves A X B + c X = rhs for Hermitian PSD A, B given their eigendecompositions.
CMat sylvester_ridge(HermitianEig const &a, HermitianEig const &b, CMat const &rhs, double c);

/// argmin_b 1/2 ||b - v||^2 + alpha ||b||_1 subject to sum(b) = 1, in place.
void l1_affine_prox(Eigen::Ref<CVec> v, double alpha);

/// Largest eigenvalue of a Hermitian PSD matrix.
double spectral_norm_hermitian(CMat const &a);

} // namespace krim
