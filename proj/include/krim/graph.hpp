#pragma once

#include <vector>

#include "krim/common.hpp"

namespace krim {

struct GraphOperators {
  RMat W;          // symmetric, non-negative, zero diagonal
  RMat L;          // diag(W 1) - W
  RMat L_sobolev;  // (L + eps I)^beta
  RMat delta;      // IN x (IN - 1) one-step difference operator
  double eps = 1.0;
  double beta = 1.0;
  std::vector<std::vector<Index>> neighbors; // directed kNN lists, nearest first

  Index nodes() const { return W.rows(); }
};

/// kNN graph over the columns of `coords` (p x I0): w_ij = 1/d_ij^2 when either
/// endpoint lists the other among its k nearest neighbors.
GraphOperators knn_graph(RMat const &coords, Index k);

RMat laplacian(RMat const &W);

/// (L + eps I)^beta; integer beta by repeated products, otherwise through the
/// symmetric eigendecomposition.
RMat sobolev_operator(RMat const &L, double eps, double beta);

RMat diff_operator(Index in);

/// Fills L, L_sobolev and delta on a graph that already carries W.
void finalize_graph(GraphOperators &g, double eps, double beta, Index in);

/// X * Delta: column differences x_{t+1} - x_t.
CMat apply_diff(CMat const &x);
/// X * Delta * Delta^T without forming Delta.
CMat apply_diff_gram(CMat const &x);

/// tr(Delta^T X^H S X Delta) for symmetric S.
double sobolev_quadratic(CMat const &x, RMat const &s);

} // namespace krim
