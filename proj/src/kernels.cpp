#include "krim/kernels.hpp"

#include <cmath>

namespace krim {

std::string to_string(KernelKind kind) {
  switch (kind) {
  case KernelKind::Linear: return "linear";
  case KernelKind::Gaussian: return "gaussian";
  case KernelKind::Polynomial: return "polynomial";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(std::string const &name) {
  if (name == "linear") { return KernelKind::Linear; }
  if (name == "gaussian") { return KernelKind::Gaussian; }
  if (name == "polynomial") { return KernelKind::Polynomial; }
  throw InputError("unknown kernel kind '" + name + "'");
}

KernelSpec KernelSpec::linear() {
  KernelSpec s;
  s.kind = KernelKind::Linear;
  return s;
}

KernelSpec KernelSpec::gaussian(double gamma) {
  KernelSpec s;
  s.kind = KernelKind::Gaussian;
  s.gamma = gamma;
  s.validate();
  return s;
}

KernelSpec KernelSpec::gaussian_sigma(double sigma) {
  require(sigma > 0.0, "gaussian sigma must be positive");
  return gaussian(1.0 / (2.0 * sigma * sigma));
}

KernelSpec KernelSpec::polynomial(int degree, std::optional<cx> intercept) {
  KernelSpec s;
  s.kind = KernelKind::Polynomial;
  s.degree = degree;
  s.intercept = intercept;
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  if (kind == KernelKind::Gaussian && !(gamma > 0.0)) { throw InputError("gaussian kernel needs gamma > 0"); }
  if (kind == KernelKind::Polynomial && degree < 1) { throw InputError("polynomial kernel needs degree >= 1"); }
}

std::vector<KernelSpec> default_kernel_dictionary() {
  return {KernelSpec::gaussian_sigma(0.2), KernelSpec::gaussian_sigma(0.4), KernelSpec::gaussian_sigma(0.8),
          KernelSpec::polynomial(1),       KernelSpec::polynomial(2),       KernelSpec::polynomial(3),
          KernelSpec::polynomial(4)};
}

cx eval_kernel(KernelSpec const &spec, Eigen::Ref<CVec const> const &l, Eigen::Ref<CVec const> const &l_prime) {
  if (l.size() != l_prime.size() || l.size() == 0) {
    throw InputError("kernel arguments must have equal, non-zero length");
  }
  switch (spec.kind) {
  case KernelKind::Linear: return l.dot(l_prime); // Eigen's dot conjugates the first argument
  case KernelKind::Gaussian: {
    cx acc{0.0, 0.0};
    for (Index i = 0; i < l.size(); ++i) {
      cx const d = l[i] - std::conj(l_prime[i]);
      acc += d * d;
    }
    return std::exp(-spec.gamma * acc);
  }
  case KernelKind::Polynomial: {
    if (!spec.intercept) { throw InputError("polynomial kernel intercept is unresolved"); }
    return std::pow(l.dot(l_prime) + *spec.intercept, spec.degree);
  }
  }
  return {};
}

KernelSpec resolve_kernel_spec(KernelSpec spec, CMat const &landmarks) {
  spec.validate();
  if (spec.kind == KernelKind::Polynomial && !spec.intercept) {
    spec.intercept = landmarks.size() > 0 ? landmarks.mean() : cx{0.0, 0.0};
  }
  return spec;
}

CMat kernel_cross(CMat const &a, CMat const &b, KernelSpec const &spec) {
  if (a.rows() != b.rows()) { throw InputError("kernel_cross: point dimensions differ"); }
  CMat k(a.cols(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) {
    for (Index i = 0; i < a.cols(); ++i) {
      k(i, j) = eval_kernel(spec, a.col(i), b.col(j));
    }
  }
  return k;
}

KernelMatrix build_kernel_matrix(CMat const &landmarks, KernelSpec const &spec) {
  if (landmarks.cols() < 1 || landmarks.rows() < 1) { throw InputError("kernel matrix needs at least one landmark"); }
  KernelMatrix out;
  out.spec = resolve_kernel_spec(spec, landmarks);
  out.entries = kernel_cross(landmarks, landmarks, out.spec);
  return out;
}

CMat build_kernel_supermatrix(std::span<KernelMatrix const> mats) {
  if (mats.empty()) { throw InputError("kernel supermatrix needs at least one kernel"); }
  Index const n = mats.front().landmark_count();
  for (auto const &k : mats) {
    if (k.landmark_count() != n) { throw InputError("kernel supermatrix: mixed landmark counts"); }
  }
  Index const m = static_cast<Index>(mats.size());
  CMat out = CMat::Zero(m * n, m * n);
  for (Index i = 0; i < m; ++i) {
    out.block(i * n, i * n, n, n) = mats[static_cast<size_t>(i)].entries;
  }
  return out;
}

} // namespace krim
