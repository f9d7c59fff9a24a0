#include <doctest.h>

#include <numbers>

#include "krim/dmri.hpp"
#include "oracles.hpp"

using namespace krim;

TEST_CASE("flattening round trip") {
  std::mt19937_64 rng(1);
  CMat x = oracle::random_complex(12, 3, rng);
  CMat f = unflatten_frame(x, 1, 3, 4);
  CHECK(f.rows() == 3);
  CHECK(f(2, 1) == x(2 + 3 * 1, 1));
  CHECK(flatten_frame(f) == x.col(1));
  CHECK_THROWS_AS(unflatten_frame(x, 1, 4, 4), InputError);
}

TEST_CASE("2D DFT of a constant frame is a DC impulse") {
  CMat x = CMat::Constant(20, 2, cx(0.5, -1.0));
  CMat k = fft2_frames(x, 4, 5);
  CHECK(std::abs(k(0, 0) - 20.0 * cx(0.5, -1.0)) < 1e-12);
  CHECK(k.col(0).tail(19).norm() < 1e-12);
}

TEST_CASE("2D DFT matches the explicit matrix, inverts and obeys Parseval") {
  std::mt19937_64 rng(2);
  Index const i1 = 4, i2 = 6;
  CMat x = oracle::random_complex(i1 * i2, 3, rng);
  CMat k = fft2_frames(x, i1, i2);
  CMat dense = oracle::kron(oracle::dft_matrix(i2), oracle::dft_matrix(i1)) * x;
  CHECK(oracle::rel_err(k, dense) < 1e-12);
  CHECK(oracle::rel_err(ifft2_frames(k, i1, i2), x) < 1e-12);
  CHECK(k.squaredNorm() == doctest::Approx(static_cast<double>(i1 * i2) * x.squaredNorm()).epsilon(1e-12));
  CHECK_THROWS_AS(fft2_frames(x, 5, 5), InputError);
}

TEST_CASE("temporal DFT examples") {
  CMat ones = CMat::Ones(1, 4);
  CMat f = dft_temporal(ones);
  CHECK(std::abs(f(0, 0) - cx(4.0)) < 1e-14);
  CHECK(f.rightCols(3).norm() < 1e-14);

  CMat e(1, 8);
  for (Index t = 0; t < 8; ++t) { e(0, t) = std::polar(1.0, 2.0 * std::numbers::pi * 3.0 * static_cast<double>(t) / 8.0); }
  CMat fe = dft_temporal(e);
  for (Index k = 0; k < 8; ++k) { CHECK(std::abs(fe(0, k)) == doctest::Approx(k == 3 ? 8.0 : 0.0)); }

  std::mt19937_64 rng(3);
  CMat x = oracle::random_complex(5, 7, rng);
  CHECK(oracle::rel_err(idft_temporal(dft_temporal(x)), x) < 1e-12);
  CHECK(oracle::rel_err(dft_temporal(x), x * oracle::dft_matrix(7)) < 1e-12);
}

TEST_CASE("adjoint identities") {
  std::mt19937_64 rng(4);
  Index const i1 = 4, i2 = 3, i3 = 5;
  CMat x = oracle::random_complex(i1 * i2, i3, rng);
  CMat y = oracle::random_complex(i1 * i2, i3, rng);
  double const n2 = static_cast<double>(i1 * i2);
  // F^H = n F^{-1} for the unnormalized transform.
  cx const lhs2 = (fft2_frames(x, i1, i2).adjoint() * y).trace();
  cx const rhs2 = (x.adjoint() * (n2 * ifft2_frames(y, i1, i2))).trace();
  CHECK(std::abs(lhs2 - rhs2) < 1e-10 * std::abs(lhs2));
  cx const lhst = (dft_temporal(x).adjoint() * y).trace();
  cx const rhst = (x.adjoint() * (static_cast<double>(i3) * idft_temporal(y))).trace();
  CHECK(std::abs(lhst - rhst) < 1e-10 * std::abs(lhst));
  CMat const ft = oracle::dft_matrix(i3);
  CHECK(oracle::rel_err(ft.adjoint() * ft, static_cast<double>(i3) * CMat::Identity(i3, i3)) < 1e-12);
  CHECK(oracle::rel_err(dft_temporal(x).colwise().squaredNorm().sum() * CMat::Identity(1, 1),
                        static_cast<double>(i3) * x.squaredNorm() * CMat::Identity(1, 1)) < 1e-12);
}

TEST_CASE("phantom structure") {
  KtDataset ds = make_phantom(16, 16, 12, PhantomParams{2, 0.0, 0});
  REQUIRE(ds.ground_truth.has_value());
  CMat const &g = *ds.ground_truth;
  CHECK(ds.i0() == 256);
  CHECK(ds.pattern.mask.all());
  CHECK(oracle::rel_err(ds.kspace, fft2_frames(g, 16, 16)) < 1e-12);
  CHECK(g.cwiseAbs().maxCoeff() > 0.5);
  CHECK((g.col(0) - g.col(1)).norm() > 1e-3);
  CHECK(oracle::rel_err(g.col(6), g.col(0)) < 1e-12);

  // One full period over the frames: the generator wraps around.
  KtDataset one = make_phantom(16, 16, 12, PhantomParams{1, 0.0, 0});
  KtDataset ext = make_phantom(16, 16, 24, PhantomParams{2, 0.0, 0});
  CHECK(oracle::rel_err(ext.ground_truth->col(12), one.ground_truth->col(0)) < 1e-12);
  CHECK(oracle::rel_err(ext.ground_truth->col(23), one.ground_truth->col(11)) < 1e-12);

  CHECK_THROWS_AS(make_phantom(4, 16, 3), InputError);
}

TEST_CASE("phantom time profiles are sparse in temporal frequency") {
  KtDataset ds = make_phantom(32, 32, 16);
  CMat f = dft_temporal(*ds.ground_truth);
  Index bad = 0;
  for (Index r = 0; r < f.rows(); ++r) {
    RVec e = f.row(r).cwiseAbs2().transpose();
    double const total = e.sum();
    if (total < 1e-20) { continue; }
    std::sort(e.data(), e.data() + e.size(), std::greater<>());
    if (e.head(5).sum() < 0.95 * total) { ++bad; }
  }
  CHECK(bad == 0);
}

TEST_CASE("phantom noise is seeded") {
  KtDataset a = make_phantom(8, 8, 4, PhantomParams{2, 0.1, 5});
  KtDataset b = make_phantom(8, 8, 4, PhantomParams{2, 0.1, 5});
  KtDataset c = make_phantom(8, 8, 4, PhantomParams{2, 0.0, 5});
  CHECK(a.kspace == b.kspace);
  CHECK(a.kspace != c.kspace);
  CHECK(magnitude_frame(*c.ground_truth, 1, 8, 8).rows() == 8);
}
