#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "krim/common.hpp"
#include "krim/graph.hpp"
#include "krim/linalg.hpp"
#include "krim/model.hpp"
#include "krim/sampling.hpp"

namespace krim {

enum class Problem { TVGS, DMRI };

std::string to_string(Problem p);
Problem problem_from_string(std::string const &name);

struct SolverConfig {
  double lambda1 = 0.0;  // l1 on B
  double lambda2 = 0.0;  // TVGS: Tikhonov on D; dMRI: Z coupling
  double lambda3 = 0.0;  // dMRI: l1 on Z
  double lambda4 = 0.0;  // dMRI: Tikhonov on D
  double lambda_L = 0.0; // TVGS: Sobolev smoothness
  double tau_X = 1e-2;
  double tau_D = 1e-2;
  double tau_B = 1e-2;
  double tau_Z = 1e-2;
  double gamma0 = 1.0;
  double zeta = 0.5;
  int outer_iters = 300;
  double tol = 1e-6; // relative objective change; 0 runs every iteration
  double cg_tol = 1e-9;
  int cg_max = 0; // 0 = 10 sqrt(|complement|)
  double b_tol = 1e-8;
  int b_max = 500;
  double d_tol = 1e-12;
  int d_max = 500;
  bool exact_z_prox = false;
  std::uint64_t seed = 0;

  void validate() const;
  static SolverConfig defaults(Problem p);
};

struct IterateTuple {
  CMat X;
  CMat Z; // dMRI only
  FactorModel model;
  double gamma = 1.0;
};

struct SolveReport {
  double initial_objective = 0.0;
  std::vector<double> objective;
  std::vector<double> consistency; // max |S_Omega T(X) - Y| on Omega
  std::vector<double> affine;      // max |1^H B_m - 1^H|
  std::vector<double> seconds;     // elapsed since start
  std::vector<int> cg_iters;
  std::vector<int> d_iters;
  std::vector<int> b_iters;
  std::vector<std::string> warnings;
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
};

struct ProblemData {
  Problem kind = Problem::TVGS;
  CMat y; // TVGS: I0 x IN signal samples; dMRI: k-space
  SamplingPattern pattern;
  GraphOperators const *graph = nullptr; // TVGS
  Index i1 = 0, i2 = 0;                  // dMRI frame shape

  void validate() const;
};

double sca_step_schedule(double gamma, double zeta);
IterateTuple sca_extrapolate(IterateTuple const &current, IterateTuple const &half, double gamma_next);

/// Complement entries solve ((1 + tau) I + lambda_L (Delta Delta^T kron S)) restricted to the
/// unobserved set by matrix-free PCG; observed entries are copied from Y.
CMat tvgs_update_X(CMat const &y, SamplingPattern const &pattern, CMat const &m_hat, CMat const &x_prev,
                   RMat const &sobolev, double lambda_L, double tau_X, double cg_tol, int cg_max,
                   CgResult *info = nullptr);

/// Minimizer over layer j (0-based) of 1/2 ||X - L D R||^2 + lambda/2 ||D||^2 + tau/2 ||D - D_hat||^2,
/// restricted to the block-diagonal support for j >= 1.
std::vector<CMat> update_D(Index j, CMat const &x_hat, FactorModel const &model, double lambda, double tau_D,
                           double tol = 1e-12, int max_iter = 500, int *iters = nullptr);

struct BUpdateInfo {
  int iterations = 0;
  bool hit_cap = false;
  std::vector<double> trace; // inner objective values (l1 branch)
};

/// 1/2 ||X - A B||^2 + lambda1 ||B||_1 + tau/2 ||B - B_hat||^2 with 1^H B_m = 1^H, A the design matrix.
/// In MMF mode the constraint and l1 term are dropped.
CMat update_B(CMat const &x_hat, FactorModel const &model, double lambda1, double tau_B, double tol = 1e-8,
              int max_iter = 500, BUpdateInfo *info = nullptr);

/// The B-subproblem objective, per column summed.
double b_subproblem_objective(CMat const &x_hat, CMat const &a, CMat const &b, CMat const &b_hat, double lambda1,
                              double tau_B);

// Sub-task objectives and their gradients. A gradient G satisfies df = Re<G, dV> for a complex
// perturbation dV, so its real and imaginary parts are the partials in Re V and Im V.
double tvgs_x_subtask_objective(CMat const &x, CMat const &m_hat, CMat const &x_hat, RMat const &sobolev,
                                double lambda_L, double tau_X);
CMat tvgs_x_gradient(CMat const &x, CMat const &m_hat, CMat const &x_hat, RMat const &sobolev, double lambda_L,
                     double tau_X);
/// Layer j of `model` is the point of evaluation; `d_hat` the proximal anchor.
double d_subtask_objective(Index j, CMat const &x_hat, FactorModel const &model, std::vector<CMat> const &d_hat,
                           double lambda, double tau_D);
std::vector<CMat> d_gradient(Index j, CMat const &x_hat, FactorModel const &model, std::vector<CMat> const &d_hat,
                             double lambda, double tau_D);
/// Gradient of the smooth part 1/2 ||X - A B||^2 + tau/2 ||B - B_hat||^2.
CMat b_smooth_gradient(CMat const &x_hat, CMat const &a, CMat const &b, CMat const &b_hat, double tau_B);
double dmri_x_subtask_objective(CMat const &x, CMat const &m_hat, CMat const &x_hat, CMat const &z_hat,
                                double lambda2, double tau_X);
CMat dmri_x_gradient(CMat const &x, CMat const &m_hat, CMat const &x_hat, CMat const &z_hat, double lambda2,
                     double tau_X);

CMat dmri_update_X(CMat const &kspace, SamplingPattern const &pattern, Index i1, Index i2, CMat const &m_hat,
                   CMat const &x_prev, CMat const &z_hat, double lambda2, double tau_X);

CMat dmri_update_Z(CMat const &x_hat, CMat const &z_prev, double lambda2, double lambda3, double tau_Z,
                   bool exact_prox = false);

double tvgs_objective(CMat const &x, FactorModel const &model, GraphOperators const &graph, SolverConfig const &cfg);
double dmri_objective(CMat const &x, CMat const &z, FactorModel const &model, SolverConfig const &cfg);

/// max over observed entries of |[T(X)]_it - Y_it|.
double consistency_residual(ProblemData const &data, CMat const &x);

struct SolveResult {
  CMat X;
  CMat Z;
  FactorModel model;
  SolveReport report;
};

using IterateObserver = std::function<void(int, IterateTuple const &)>;

/// The successive convex approximation loop. Every half-iterate is computed from the current
/// iterate, then all variables move by gamma_{n+1}.
SolveResult solve(ProblemData const &data, std::vector<CMat> const &kernels, FactorDims const &dims,
                  SolverConfig const &cfg, std::optional<FactorModel> init = std::nullopt,
                  IterateObserver const &observer = {});

/// The starting iterate: X = T^{-1}(S_Omega Y), Z = F_t(X).
IterateTuple initial_iterate(ProblemData const &data, FactorModel model, double gamma0);

} // namespace krim
