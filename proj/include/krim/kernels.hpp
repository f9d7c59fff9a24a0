#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "krim/common.hpp"

namespace krim {

enum class KernelKind { Linear, Gaussian, Polynomial };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(std::string const &name);

struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double gamma = 1.0;            // Gaussian rate
  int degree = 1;                // Polynomial order r
  std::optional<cx> intercept;   // Polynomial c; unset = entry-wise mean of the landmarks

  static KernelSpec linear();
  static KernelSpec gaussian(double gamma);
  // Bandwidth form used by the kernel dictionary: gamma = 1 / (2 sigma^2).
  static KernelSpec gaussian_sigma(double sigma);
  static KernelSpec polynomial(int degree, std::optional<cx> intercept = std::nullopt);

  void validate() const;
};

// The 7-entry dictionary: Gaussian sigma in {0.2, 0.4, 0.8}, polynomial r in {1, 2, 3, 4}.
std::vector<KernelSpec> default_kernel_dictionary();

/// kappa(l, l') for the three kernel families. The Gaussian uses the
/// transpose-with-conjugated-argument form exp(-gamma (l - conj(l'))^T (l - conj(l'))),
/// which is complex in general and equals exp(-gamma ||l - l'||^2) for real input.
cx eval_kernel(KernelSpec const &spec, Eigen::Ref<CVec const> const &l, Eigen::Ref<CVec const> const &l_prime);

struct KernelMatrix {
  CMat entries;
  KernelSpec spec; // resolved: a polynomial intercept is always set here
  Index landmark_count() const { return entries.rows(); }
};

/// Fills in data-dependent defaults (polynomial intercept) from the landmark matrix.
KernelSpec resolve_kernel_spec(KernelSpec spec, CMat const &landmarks);

/// K[k][k'] = kappa(l_k, l_k') over the columns of `landmarks` (nu x N_l).
KernelMatrix build_kernel_matrix(CMat const &landmarks, KernelSpec const &spec);

/// Materialized bdiag(K_1, ..., K_M). The solver never forms this; it is for
/// inspection and for oracles.
CMat build_kernel_supermatrix(std::span<KernelMatrix const> mats);

/// Generic cross kernel between columns of `a` (nu x n) and `b` (nu x m).
CMat kernel_cross(CMat const &a, CMat const &b, KernelSpec const &spec);

} // namespace krim
