#include "krim/linalg.hpp"

#include <cmath>

namespace krim {

CgResult pcg(LinearOp const &op, LinearOp const &precond, CVec const &b, CVec &x, double tol, int max_iter) {
  CgResult res;
  double const bnorm = b.norm();
  if (x.size() != b.size()) { x = CVec::Zero(b.size()); }
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  CVec r(b.size());
  CVec ap(b.size());
  op(x, ap);
  r = b - ap;
  res.residual = r.norm() / bnorm;
  if (res.residual <= tol) {
    res.converged = true;
    return res;
  }
  CVec z(b.size());
  if (precond) { precond(r, z); } else { z = r; }
  CVec p = z;
  double rz = r.dot(z).real();
  for (int it = 1; it <= max_iter; ++it) {
    op(p, ap);
    double const pap = p.dot(ap).real();
    if (!(pap > 0.0)) { break; }
    double const alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    res.iterations = it;
    res.residual = r.norm() / bnorm;
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }
    if (precond) { precond(r, z); } else { z = r; }
    double const rz_next = r.dot(z).real();
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return res;
}

HermitianEig hermitian_eig(CMat const &a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  if (es.info() != Eigen::Success) { throw SolverError("hermitian eigendecomposition failed"); }
  return {es.eigenvalues(), es.eigenvectors()};
}

CMat sylvester_ridge(HermitianEig const &a, HermitianEig const &b, CMat const &rhs, double c) {
  CMat t = a.vectors.adjoint() * rhs * b.vectors;
  for (Index j = 0; j < t.cols(); ++j) {
    for (Index i = 0; i < t.rows(); ++i) {
      t(i, j) /= std::max(a.values[i], 0.0) * std::max(b.values[j], 0.0) + c;
    }
  }
  return a.vectors * t * b.vectors.adjoint();
}

double spectral_norm_hermitian(CMat const &a) {
  if (a.size() == 0) { return 0.0; }
  Eigen::SelfAdjointEigenSolver<CMat> es(a, Eigen::EigenvaluesOnly);
  return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

namespace {

// sum_k soft(v_k - mu, alpha) - 1, and the 2x2 real Jacobian of the sum w.r.t. its argument.
cx affine_gap(Eigen::Ref<CVec const> const &v, cx mu, double alpha, Eigen::Matrix2d &jac) {
  cx s(0.0);
  jac.setZero();
  for (Index k = 0; k < v.size(); ++k) {
    cx const w = v[k] - mu;
    double const mag = std::abs(w);
    if (mag <= alpha) { continue; }
    s += w * (1.0 - alpha / mag);
    Eigen::Vector2d u(w.real() / mag, w.imag() / mag);
    jac += Eigen::Matrix2d::Identity() - (alpha / mag) * (Eigen::Matrix2d::Identity() - u * u.transpose());
  }
  return s - cx(1.0);
}

} // namespace

void l1_affine_prox(Eigen::Ref<CVec> v, double alpha) {
  Index const n = v.size();
  if (n == 0) { throw InputError("l1_affine_prox: empty block"); }
  if (alpha <= 0.0) {
    v.array() += (cx(1.0) - v.sum()) / static_cast<double>(n);
    return;
  }
  // Start from the multiplier of the unpenalized projection.
  cx mu = (v.sum() - cx(1.0)) / static_cast<double>(n);
  Eigen::Matrix2d jac;
  cx gap = affine_gap(v, mu, alpha, jac);
  for (int it = 0; it < 200 && std::abs(gap) > 1e-15; ++it) {
    cx step = gap / static_cast<double>(n);
    if (std::abs(jac.determinant()) > 1e-12) {
      Eigen::Vector2d const d = jac.partialPivLu().solve(Eigen::Vector2d(gap.real(), gap.imag()));
      step = cx(d[0], d[1]);
    }
    // Damped step on |gap|; fall back to the plain shift when Newton stalls.
    Eigen::Matrix2d jn;
    double t = 1.0;
    cx next = mu + step;
    cx gnext = affine_gap(v, next, alpha, jn);
    while (std::abs(gnext) >= std::abs(gap) && t > 1e-6) {
      t *= 0.5;
      next = mu + t * step;
      gnext = affine_gap(v, next, alpha, jn);
    }
    if (std::abs(gnext) >= std::abs(gap)) {
      next = mu + gap / static_cast<double>(n);
      gnext = affine_gap(v, next, alpha, jn);
    }
    mu = next;
    gap = gnext;
    jac = jn;
  }
  Index active = 0;
  for (Index k = 0; k < n; ++k) {
    v[k] = soft_threshold(v[k] - mu, alpha);
    if (v[k] != cx(0.0)) { ++active; }
  }
  // Absorb the rounding left in the sum into the support.
  cx const rest = cx(1.0) - v.sum();
  if (active > 0) {
    for (Index k = 0; k < n; ++k) {
      if (v[k] != cx(0.0)) { v[k] += rest / static_cast<double>(active); }
    }
  } else {
    v.array() += rest / static_cast<double>(n);
  }
}

} // namespace krim
