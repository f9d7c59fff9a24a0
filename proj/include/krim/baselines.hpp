#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "krim/kernels.hpp"
#include "krim/model.hpp"
#include "krim/solver.hpp"

namespace krim {

enum class BaselineKind { MMF, NBP, KRG, KGL, ZeroFill, MeanFill };

std::string to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(std::string const &name);

struct BaselineSpec {
  BaselineKind kind = BaselineKind::ZeroFill;
  Index rank = 5;                           // NBP inner dimension d
  std::vector<Index> mmf_dims;              // MMF: d_1 .. d_Q (last one is the rank)
  KernelSpec row_kernel = KernelSpec::gaussian(1.0); // K_Z over node profiles
  KernelSpec col_kernel = KernelSpec::gaussian(1.0); // K_Y over snapshots
  double lambda = 1e-3;                     // Tikhonov weight on the learned factors
  Index size_cap = 2000;                    // NBP: max(I0, IN)
};

struct BaselineResult {
  CMat X;
  SolveReport report;
};

/// Either a fixed matrix or a learned factor with a Tikhonov weight.
struct ChainLink {
  CMat value;
  bool variable = false;
  double lambda = 0.0;
  double tau = 0.0; // proximal weight of the SCA surrogate
};

/// X ~ link_0 link_1 ... link_{n-1}.
CMat chain_product(std::vector<ChainLink> const &links);

/// One Jacobi round over every variable link of the chain for the fit
/// 1/2 ||X - prod||^2 + lambda_k/2 ||V_k||^2 + tau_k/2 ||V_k - V_hat_k||^2.
std::vector<ChainLink> chain_half_step(std::vector<ChainLink> const &links, CMat const &x_hat);

/// Graph-signal baselines run through the same SCA loop and X-update as the main solver.
/// dMRI accepts ZeroFill, MeanFill and MMF.
BaselineResult run_baseline(BaselineSpec const &spec, ProblemData const &data, SolverConfig const &cfg);

/// Runs the main solver in MMF mode (M = 1, K = I, constraints off) and the
/// standalone chain MMF from the same start for 10 iterations. True when the
/// X iterates agree to 1e-9 at every iteration. The flags break the reduction on purpose.
bool mmf_as_special_case_check(FactorDims const &dims, std::uint64_t seed, double lambda1 = 0.0,
                               bool identity_kernel = true);

} // namespace krim
