#include "krim/dmri.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace krim {

CMat unflatten_frame(CMat const &x, Index t, Index i1, Index i2) {
  if (x.rows() != i1 * i2 || t < 0 || t >= x.cols()) { throw InputError("unflatten_frame: dims mismatch"); }
  return x.col(t).reshaped(i1, i2);
}

CVec flatten_frame(CMat const &frame) { return frame.reshaped(); }

namespace {

enum class Dir { Forward, Inverse };

// Transforms every column of `m` in place. kissfft's inverse is scaled by 1/n.
void fft_columns(Eigen::FFT<double> &fft, CMat &m, Dir dir) {
  if (m.rows() <= 1) { return; }
  std::vector<cx> in(static_cast<size_t>(m.rows()));
  std::vector<cx> out;
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) { in[static_cast<size_t>(r)] = m(r, c); }
    if (dir == Dir::Forward) { fft.fwd(out, in); } else { fft.inv(out, in); }
    for (Index r = 0; r < m.rows(); ++r) { m(r, c) = out[static_cast<size_t>(r)]; }
  }
}

CMat fft2_impl(CMat const &x, Index i1, Index i2, Dir dir) {
  if (x.rows() != i1 * i2) { throw InputError("fft2: I0 must equal I1 * I2"); }
  Eigen::FFT<double> fft;
  CMat out(x.rows(), x.cols());
  for (Index t = 0; t < x.cols(); ++t) {
    CMat frame = x.col(t).reshaped(i1, i2);
    fft_columns(fft, frame, dir);
    CMat tr = frame.transpose();
    fft_columns(fft, tr, dir);
    out.col(t) = tr.transpose().reshaped();
  }
  return out;
}

} // namespace

CMat fft2_frames(CMat const &x, Index i1, Index i2) { return fft2_impl(x, i1, i2, Dir::Forward); }
CMat ifft2_frames(CMat const &x, Index i1, Index i2) { return fft2_impl(x, i1, i2, Dir::Inverse); }

CMat dft_temporal(CMat const &x) {
  Eigen::FFT<double> fft;
  CMat tr = x.transpose();
  fft_columns(fft, tr, Dir::Forward);
  return tr.transpose();
}

CMat idft_temporal(CMat const &x) {
  Eigen::FFT<double> fft;
  CMat tr = x.transpose();
  fft_columns(fft, tr, Dir::Inverse);
  return tr.transpose();
}

KtDataset make_phantom(Index i1, Index i2, Index i3, PhantomParams const &params) {
  if (i1 < 8 || i2 < 8 || i3 < 1) { throw InputError("phantom: need I1, I2 >= 8 and I3 >= 1"); }
  if (params.cycles < 0) { throw InputError("phantom: cycles must be non-negative"); }
  using std::numbers::pi;
  double const span = static_cast<double>(std::min(i1, i2));
  double const cr = 0.5 * static_cast<double>(i1 - 1);
  double const cc = 0.5 * static_cast<double>(i2 - 1);
  double const ax = 0.42 * static_cast<double>(i1);
  double const ay = 0.36 * static_cast<double>(i2);
  double const r0 = 0.16 * span;
  double const amp = 0.05 * span;
  double const width = 0.04 * span;

  KtDataset ds;
  ds.i1 = i1;
  ds.i2 = i2;
  ds.i3 = i3;
  CMat img(i1 * i2, i3);
  for (Index t = 0; t < i3; ++t) {
    double const radius = r0 + amp * std::sin(2.0 * pi * params.cycles * static_cast<double>(t) / static_cast<double>(i3));
    for (Index c = 0; c < i2; ++c) {
      for (Index r = 0; r < i1; ++r) {
        double const dr = static_cast<double>(r) - cr;
        double const dc = static_cast<double>(c) - cc;
        double const ell = (dr / ax) * (dr / ax) + (dc / ay) * (dc / ay);
        double const body = 1.0 / (1.0 + std::exp((ell - 1.0) / 0.05));
        double const rho = std::hypot(dr, dc + 0.1 * span);
        double const disk = 1.0 / (1.0 + std::exp((rho - radius) / width));
        double const mag = 0.5 * body + 0.5 * disk;
        double const phase = 0.4 * pi * (dr / static_cast<double>(i1) + 0.5 * dc / static_cast<double>(i2));
        img(r + i1 * c, t) = std::polar(mag, phase);
      }
    }
  }
  ds.kspace = fft2_frames(img, i1, i2);
  if (params.noise_sigma > 0.0) {
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> nd(0.0, params.noise_sigma / std::sqrt(2.0));
    for (Index t = 0; t < ds.kspace.cols(); ++t) {
      for (Index i = 0; i < ds.kspace.rows(); ++i) {
        double const re = nd(rng);
        double const im = nd(rng);
        ds.kspace(i, t) += cx(re, im);
      }
    }
  }
  ds.ground_truth = std::move(img);
  ds.pattern = full_pattern(i1 * i2, i3);
  return ds;
}

RMat magnitude_frame(CMat const &x, Index t, Index i1, Index i2) {
  return unflatten_frame(x, t, i1, i2).cwiseAbs();
}

} // namespace krim
