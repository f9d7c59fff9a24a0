#include <doctest.h>

#include <cmath>
#include <random>

#include "krim/kernels.hpp"

using namespace krim;

namespace {

CVec cvec(std::initializer_list<cx> v) {
  CVec out(static_cast<Index>(v.size()));
  Index k = 0;
  for (cx x : v) { out[k++] = x; }
  return out;
}

RMat random_real(Index rows, Index cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  RMat m(rows, cols);
  for (Index k = 0; k < m.size(); ++k) { m.data()[k] = nd(rng); }
  return m;
}

} // namespace

TEST_CASE("linear kernel is the conjugate inner product") {
  CHECK(eval_kernel(KernelSpec::linear(), cvec({cx(1, 1)}), cvec({cx(2, 0)})) == cx(2, -2));
}

TEST_CASE("gaussian kernel at zero displacement is one") {
  CHECK(eval_kernel(KernelSpec::gaussian(0.5), cvec({3.0, 4.0}), cvec({3.0, 4.0})) == cx(1.0));
}

TEST_CASE("polynomial kernel by hand") {
  CHECK(eval_kernel(KernelSpec::polynomial(2, cx(0.0)), cvec({1.0, 1.0}), cvec({1.0, 1.0})) == cx(4.0));
}

TEST_CASE("gaussian on real input matches exp(-gamma ||a - b||^2)") {
  CVec a = cvec({0.3, -1.2, 2.0});
  CVec b = cvec({1.0, 0.5, -0.4});
  double const d2 = (a - b).squaredNorm();
  CHECK(std::abs(eval_kernel(KernelSpec::gaussian(0.7), a, b) - std::exp(-0.7 * d2)) < 1e-14);
}

TEST_CASE("sigma form uses gamma = 1 / (2 sigma^2)") {
  CHECK(KernelSpec::gaussian_sigma(0.4).gamma == doctest::Approx(1.0 / (2.0 * 0.16)));
}

TEST_CASE("dimension mismatch and invalid specs are input errors") {
  CHECK_THROWS_AS(eval_kernel(KernelSpec::linear(), cvec({1.0}), cvec({1.0, 2.0})), InputError);
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0).validate(), InputError);
  CHECK_THROWS_AS(KernelSpec::polynomial(0).validate(), InputError);
}

TEST_CASE("kernel matrix examples") {
  CMat one(1, 1);
  one(0, 0) = 5.0;
  CHECK(build_kernel_matrix(one, KernelSpec::gaussian(1.0)).entries(0, 0) == cx(1.0));

  CMat two(1, 2);
  two << 0.0, 1.0;
  CMat lin = build_kernel_matrix(two, KernelSpec::linear()).entries;
  CHECK(lin(0, 0) == cx(0.0));
  CHECK(lin(0, 1) == cx(0.0));
  CHECK(lin(1, 1) == cx(1.0));

  CMat g = build_kernel_matrix(two, KernelSpec::gaussian(1.0)).entries;
  CHECK(std::abs(g(0, 1) - std::exp(-1.0)) < 1e-15);
  CHECK(std::abs(g(1, 0) - std::exp(-1.0)) < 1e-15);
  CHECK(g(0, 0) == cx(1.0));
}

TEST_CASE("polynomial intercept defaults to the landmark mean") {
  CMat l(2, 2);
  l << 1.0, 2.0, 3.0, 6.0;
  KernelMatrix k = build_kernel_matrix(l, KernelSpec::polynomial(1));
  REQUIRE(k.spec.intercept.has_value());
  CHECK(std::abs(*k.spec.intercept - cx(3.0)) < 1e-15);
  CHECK(std::abs(k.entries(0, 1) - (l.col(0).dot(l.col(1)) + cx(3.0))) < 1e-12);
}

TEST_CASE("kernel supermatrix is block diagonal") {
  KernelMatrix a{CMat::Constant(1, 1, 1.0), KernelSpec::linear()};
  KernelMatrix b{CMat::Constant(1, 1, 2.0), KernelSpec::linear()};
  std::vector<KernelMatrix> mats{a, b};
  CMat s = build_kernel_supermatrix(mats);
  CHECK(s(0, 0) == cx(1.0));
  CHECK(s(1, 1) == cx(2.0));
  CHECK(s(0, 1) == cx(0.0));
  CHECK(s(1, 0) == cx(0.0));

  std::vector<KernelMatrix> single{a};
  CHECK(build_kernel_supermatrix(single) == a.entries);

  std::mt19937_64 rng(3);
  std::vector<KernelMatrix> seven;
  for (int m = 0; m < 7; ++m) {
    seven.push_back(build_kernel_matrix(random_real(3, 70, rng).cast<cx>(), KernelSpec::gaussian(0.5)));
  }
  CMat big = build_kernel_supermatrix(seven);
  CHECK(big.rows() == 490);
  Index outside_nonzero = 0;
  for (Index c = 0; c < 490; ++c) {
    for (Index r = 0; r < 490; ++r) {
      if (r / 70 != c / 70 && big(r, c) != cx(0.0)) { ++outside_nonzero; }
    }
  }
  CHECK(outside_nonzero == 0);

  KernelMatrix odd{CMat::Identity(2, 2), KernelSpec::linear()};
  std::vector<KernelMatrix> mixed{a, odd};
  CHECK_THROWS_AS(build_kernel_supermatrix(mixed), InputError);
}

TEST_CASE("kernels are symmetric on real inputs") {
  std::mt19937_64 rng(7);
  for (auto const &spec : {KernelSpec::linear(), KernelSpec::gaussian(0.3), KernelSpec::polynomial(3, cx(0.5))}) {
    for (int trial = 0; trial < 20; ++trial) {
      CVec a = random_real(4, 1, rng).cast<cx>();
      CVec b = random_real(4, 1, rng).cast<cx>();
      CHECK(std::abs(eval_kernel(spec, a, b) - eval_kernel(spec, b, a)) <= 1e-12 * std::max(1.0, std::abs(eval_kernel(spec, a, b))));
    }
  }
}

TEST_CASE("gaussian kernel matrices are positive semidefinite") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    CMat l = random_real(3, 25, rng).cast<cx>();
    CMat k = build_kernel_matrix(l, KernelSpec::gaussian(0.8)).entries;
    Eigen::SelfAdjointEigenSolver<CMat> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("default dictionary has seven kernels") {
  auto d = default_kernel_dictionary();
  CHECK(d.size() == 7);
}
