#pragma once

#include <cstdint>
#include <vector>

#include "krim/common.hpp"

namespace krim {

/// Shapes of the factorization X ~ sum_m D_m^(1) ... D_m^(Q) K_m B_m.
/// Layers are indexed from 0: layer j maps d(j+1) -> d(j), with d(0) = I0
/// and d(Q) = N_l.
struct FactorDims {
  Index m = 1;              // number of kernels M
  Index q = 1;              // number of layers Q
  Index i0 = 0;             // rows of X
  Index in = 0;             // columns of X
  Index n_l = 0;            // landmarks per kernel
  std::vector<Index> inner; // d_1 .. d_{Q-1}

  Index d(Index j) const;
  void validate() const;
};

/// D[j][m] is the m-th block of layer j (d(j) x d(j+1)); layer 0 is the
/// horizontal concatenation [D_1 .. D_M], deeper layers are block diagonal.
/// K[m] is N_l x N_l and B[m] is N_l x IN. Only the blocks are stored.
struct FactorModel {
  FactorDims dims;
  std::vector<std::vector<CMat>> D;
  std::vector<CMat> K;
  std::vector<CMat> B;
  bool mmf = false; // affine and sparsity constraints disabled

  void check() const;
};

/// Number of learned entries: M (sum_q d_{q-1} d_q + IN N_l). Kernels are fixed and not counted.
std::int64_t count_unknowns(FactorDims const &dims);

/// Complex Gaussian factors with variance 1/fan-in (layer 0: d_1 M; deeper blocks: d_{j+1};
/// B: N_l), then each column of every B_m shifted to sum to one. An empty kernel list means K_m = I.
FactorModel init_factors(FactorDims const &dims, std::vector<CMat> kernels, std::uint64_t seed);

/// M kernels replaced by identities and constraints switched off.
FactorModel reduce_to_mmf(FactorModel model);

/// P_m = D_m^(1) ... D_m^(Q) K_m, concatenated: I0 x (M N_l).
CMat design_matrix(FactorModel const &model);
CMat stacked_B(FactorModel const &model);
void set_stacked_B(FactorModel &model, CMat const &b);

/// (design matrix) * (stacked B).
CMat predict(FactorModel const &model);

/// Blocks left of layer j: L_m = D_m^(0) ... D_m^(j-1) (I0 x d(j)); identity for j = 0.
std::vector<CMat> left_factors(FactorModel const &model, Index j);
/// Blocks right of layer j: R_m = D_m^(j+1) ... K_m B_m (d(j+1) x IN).
std::vector<CMat> right_factors(FactorModel const &model, Index j);

// Materialized supermatrices, for inspection and oracles only.
CMat supermatrix_D(FactorModel const &model, Index j);
CMat supermatrix_K(FactorModel const &model);

double factor_frobenius_sq(FactorModel const &model);
double b_l1_norm(FactorModel const &model);
/// max over m, t of |1^H B_m e_t - 1|.
double affine_residual(FactorModel const &model);

/// gamma * a + (1 - gamma) * b, block by block. K is taken from `a`.
FactorModel blend(FactorModel const &a, FactorModel const &b, double gamma);

} // namespace krim
