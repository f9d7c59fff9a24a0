#include "krim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace krim {

GraphOperators knn_graph(RMat const &coords, Index k) {
  Index const n = coords.cols();
  if (n < 2) { throw InputError("knn_graph needs at least two nodes"); }
  if (k < 1 || k >= n) { throw InputError("knn_graph needs 1 <= k < number of nodes"); }

  RMat dist2(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) { dist2(i, j) = (coords.col(i) - coords.col(j)).squaredNorm(); }
  }

  GraphOperators g;
  g.W = RMat::Zero(n, n);
  g.neighbors.resize(static_cast<size_t>(n));
  std::vector<Index> order;
  for (Index i = 0; i < n; ++i) {
    order.resize(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    order.erase(order.begin() + i);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return dist2(i, a) < dist2(i, b); });
    auto &nb = g.neighbors[static_cast<size_t>(i)];
    nb.assign(order.begin(), order.begin() + k);
    for (Index j : nb) {
      if (dist2(i, j) == 0.0) { throw DataError("knn_graph: duplicate coordinates for nodes " + std::to_string(i) + " and " + std::to_string(j)); }
      g.W(i, j) = g.W(j, i) = 1.0 / dist2(i, j);
    }
  }
  return g;
}

RMat laplacian(RMat const &W) {
  if (W.rows() != W.cols()) { throw InputError("laplacian: W must be square"); }
  double const scale = std::max(1.0, W.cwiseAbs().maxCoeff());
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) { throw InputError("laplacian: W must be symmetric"); }
  if (W.minCoeff() < 0.0) { throw InputError("laplacian: W must be non-negative"); }
  if (W.diagonal().cwiseAbs().maxCoeff() != 0.0) { throw InputError("laplacian: W must have a zero diagonal"); }
  RMat L = -W;
  L.diagonal() = W.rowwise().sum();
  return L;
}

RMat sobolev_operator(RMat const &L, double eps, double beta) {
  if (!(eps > 0.0)) { throw InputError("sobolev_operator: eps must be positive"); }
  if (!(beta > 0.0)) { throw InputError("sobolev_operator: beta must be positive"); }
  Index const n = L.rows();
  RMat const shifted = L + eps * RMat::Identity(n, n);
  if (beta == std::floor(beta) && beta <= 64.0) {
    RMat out = shifted;
    for (int p = 1; p < static_cast<int>(beta); ++p) { out = out * shifted; }
    return 0.5 * (out + out.transpose());
  }
  Eigen::SelfAdjointEigenSolver<RMat> eig(shifted);
  RVec const powered = eig.eigenvalues().array().max(0.0).pow(beta);
  RMat out = eig.eigenvectors() * powered.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

RMat diff_operator(Index in) {
  if (in < 2) { throw InputError("diff_operator needs IN >= 2"); }
  RMat d = RMat::Zero(in, in - 1);
  for (Index i = 0; i + 1 < in; ++i) {
    d(i, i) = -1.0;
    d(i + 1, i) = 1.0;
  }
  return d;
}

void finalize_graph(GraphOperators &g, double eps, double beta, Index in) {
  g.L = laplacian(g.W);
  g.eps = eps;
  g.beta = beta;
  g.L_sobolev = sobolev_operator(g.L, eps, beta);
  g.delta = diff_operator(in);
}

CMat apply_diff(CMat const &x) {
  Index const n = x.cols();
  if (n < 2) { return CMat::Zero(x.rows(), 0); }
  return x.rightCols(n - 1) - x.leftCols(n - 1);
}

CMat apply_diff_gram(CMat const &x) {
  // (X Delta Delta^T)_s = w_{s-1} - w_s with w = X Delta, out-of-range terms dropped
  CMat const w = apply_diff(x);
  Index const n = x.cols();
  CMat out = CMat::Zero(x.rows(), n);
  if (n < 2) { return out; }
  out.rightCols(n - 1) += w;
  out.leftCols(n - 1) -= w;
  return out;
}

double sobolev_quadratic(CMat const &x, RMat const &s) {
  CMat const d = apply_diff(x);
  return (d.adjoint() * (s * d)).trace().real();
}

} // namespace krim
