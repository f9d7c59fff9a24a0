#pragma once

#include <optional>

#include "krim/common.hpp"
#include "krim/sampling.hpp"

namespace krim {

// Entry-wise errors over the full grid, or over a subset when `only` is given.
double mae(CMat const &x, CMat const &y, Mask const *only = nullptr);
double rmse(CMat const &x, CMat const &y, Mask const *only = nullptr);
/// Mean of |(x - y) / y|; throws InputError when a reference entry is zero.
double mape(CMat const &x, CMat const &y, Mask const *only = nullptr);
/// ||x - ref||_F / ||ref||_F.
double nrmse(CMat const &x, CMat const &ref);

/// Mean SSIM over 8x8 windows (stride 1), K1 = 0.01, K2 = 0.03,
/// dynamic range = max(ref) - min(ref).
double ssim(RMat const &img, RMat const &ref);

/// ||LoG(img) - LoG(ref)||_F / ||LoG(ref)||_F with a 15x15 zero-mean LoG, sigma = 1.5.
double hfen(RMat const &img, RMat const &ref);

RMat log_kernel(int size = 15, double sigma = 1.5);
/// Same-size correlation with edge replication.
RMat filter2_replicate(RMat const &img, RMat const &kernel);

struct MetricReport {
  std::optional<double> mae, rmse, mape, nrmse, ssim, hfen;
};

/// All metrics for a recovered matrix. SSIM and HFEN are averaged over frames
/// when frame dimensions are given.
MetricReport evaluate(CMat const &x, CMat const &ref, Index i1 = 0, Index i2 = 0, Mask const *only = nullptr);

} // namespace krim
