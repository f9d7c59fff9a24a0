#include "krim/metrics.hpp"

#include <cmath>

namespace krim {

namespace {

void check_shapes(CMat const &x, CMat const &y, Mask const *only) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) { throw InputError("metrics: shape mismatch"); }
  if (only != nullptr && (only->rows() != x.rows() || only->cols() != x.cols())) { throw InputError("metrics: subset mask shape mismatch"); }
  if (x.size() == 0) { throw InputError("metrics: empty input"); }
}

template <class F> double mean_over(CMat const &x, CMat const &y, Mask const *only, F f) {
  double s = 0.0;
  Index n = 0;
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index r = 0; r < x.rows(); ++r) {
      if (only != nullptr && !(*only)(r, c)) { continue; }
      s += f(x(r, c), y(r, c));
      ++n;
    }
  }
  if (n == 0) { throw InputError("metrics: no entries selected"); }
  return s / static_cast<double>(n);
}

} // namespace

double mae(CMat const &x, CMat const &y, Mask const *only) {
  check_shapes(x, y, only);
  return mean_over(x, y, only, [](cx a, cx b) { return std::abs(a - b); });
}

double rmse(CMat const &x, CMat const &y, Mask const *only) {
  check_shapes(x, y, only);
  return std::sqrt(mean_over(x, y, only, [](cx a, cx b) { return std::norm(a - b); }));
}

double mape(CMat const &x, CMat const &y, Mask const *only) {
  check_shapes(x, y, only);
  return mean_over(x, y, only, [](cx a, cx b) {
    if (b == cx(0.0)) { throw InputError("mape: reference has a zero entry"); }
    return std::abs((a - b) / b);
  });
}

double nrmse(CMat const &x, CMat const &ref) {
  check_shapes(x, ref, nullptr);
  double const r = ref.norm();
  if (r == 0.0) { throw InputError("nrmse: zero reference"); }
  return (x - ref).norm() / r;
}

double ssim(RMat const &img, RMat const &ref) {
  if (img.rows() != ref.rows() || img.cols() != ref.cols()) { throw InputError("ssim: shape mismatch"); }
  Index const w = 8;
  if (img.rows() < w || img.cols() < w) { throw InputError("ssim: image smaller than the 8x8 window"); }
  double const range = ref.maxCoeff() - ref.minCoeff();
  double const c1 = (0.01 * range) * (0.01 * range);
  double const c2 = (0.03 * range) * (0.03 * range);
  double const np = static_cast<double>(w * w);
  double total = 0.0;
  Index count = 0;
  for (Index c = 0; c + w <= img.cols(); ++c) {
    for (Index r = 0; r + w <= img.rows(); ++r) {
      auto const a = img.block(r, c, w, w).array();
      auto const b = ref.block(r, c, w, w).array();
      double const ma = a.sum() / np;
      double const mb = b.sum() / np;
      double const va = (a - ma).square().sum() / (np - 1.0);
      double const vb = (b - mb).square().sum() / (np - 1.0);
      double const cov = ((a - ma) * (b - mb)).sum() / (np - 1.0);
      double const num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
      double const den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      total += den == 0.0 ? 1.0 : num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

RMat log_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0 || !(sigma > 0.0)) { throw InputError("log_kernel: need odd size and positive sigma"); }
  int const h = size / 2;
  double const s2 = sigma * sigma;
  RMat g(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      double const x = i - h;
      double const y = j - h;
      g(i, j) = std::exp(-(x * x + y * y) / (2.0 * s2));
    }
  }
  g /= g.sum();
  RMat k(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      double const x = i - h;
      double const y = j - h;
      k(i, j) = g(i, j) * (x * x + y * y - 2.0 * s2) / (s2 * s2);
    }
  }
  k.array() -= k.mean();
  return k;
}

RMat filter2_replicate(RMat const &img, RMat const &kernel) {
  Index const hr = kernel.rows() / 2;
  Index const hc = kernel.cols() / 2;
  RMat out(img.rows(), img.cols());
  for (Index c = 0; c < img.cols(); ++c) {
    for (Index r = 0; r < img.rows(); ++r) {
      double s = 0.0;
      for (Index kc = 0; kc < kernel.cols(); ++kc) {
        Index const cc = std::clamp<Index>(c + kc - hc, 0, img.cols() - 1);
        for (Index kr = 0; kr < kernel.rows(); ++kr) {
          Index const rr = std::clamp<Index>(r + kr - hr, 0, img.rows() - 1);
          s += kernel(kr, kc) * img(rr, cc);
        }
      }
      out(r, c) = s;
    }
  }
  return out;
}

double hfen(RMat const &img, RMat const &ref) {
  if (img.rows() != ref.rows() || img.cols() != ref.cols()) { throw InputError("hfen: shape mismatch"); }
  RMat const k = log_kernel();
  RMat const lr = filter2_replicate(ref, k);
  double const denom = lr.norm();
  if (denom == 0.0) { throw InputError("hfen: reference has no high-frequency content"); }
  return (filter2_replicate(img, k) - lr).norm() / denom;
}

MetricReport evaluate(CMat const &x, CMat const &ref, Index i1, Index i2, Mask const *only) {
  MetricReport rep;
  rep.mae = mae(x, ref, only);
  rep.rmse = rmse(x, ref, only);
  bool zero = false;
  for (Index k = 0; k < ref.size(); ++k) {
    if (ref.reshaped()[k] == cx(0.0) && (only == nullptr || only->reshaped()[k])) { zero = true; }
  }
  if (!zero) { rep.mape = mape(x, ref, only); }
  if (ref.norm() > 0.0) { rep.nrmse = nrmse(x, ref); }
  if (i1 >= 8 && i2 >= 8 && i1 * i2 == x.rows()) {
    double s = 0.0, h = 0.0;
    bool hf = true;
    for (Index t = 0; t < x.cols(); ++t) {
      RMat const a = x.col(t).reshaped(i1, i2).cwiseAbs();
      RMat const b = ref.col(t).reshaped(i1, i2).cwiseAbs();
      s += ssim(a, b);
      RMat const lb = filter2_replicate(b, log_kernel());
      if (lb.norm() == 0.0) { hf = false; } else { h += hfen(a, b); }
    }
    rep.ssim = s / static_cast<double>(x.cols());
    if (hf) { rep.hfen = h / static_cast<double>(x.cols()); }
  }
  return rep;
}

} // namespace krim
