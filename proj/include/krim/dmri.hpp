#pragma once

#include <cstdint>
#include <optional>

#include "krim/common.hpp"
#include "krim/sampling.hpp"

namespace krim {

/// Frames of I1 x I2 pixels flattened column-major (pixel (r, c) at r + I1 c),
/// one frame per column.
struct KtDataset {
  CMat kspace; // I0 x I3
  Index i1 = 0, i2 = 0, i3 = 0;
  SamplingPattern pattern;
  std::optional<CMat> ground_truth; // image domain, I0 x I3

  Index i0() const { return i1 * i2; }
};

CMat unflatten_frame(CMat const &x, Index t, Index i1, Index i2);
CVec flatten_frame(CMat const &frame);

/// Unnormalized 2D DFT of every frame.
CMat fft2_frames(CMat const &x, Index i1, Index i2);
/// Inverse of fft2_frames (carries 1 / (I1 I2)).
CMat ifft2_frames(CMat const &x, Index i1, Index i2);

/// Unnormalized DFT along each row.
CMat dft_temporal(CMat const &x);
/// Inverse of dft_temporal (carries 1 / I3).
CMat idft_temporal(CMat const &x);

struct PhantomParams {
  int cycles = 2;                  // pulsation periods over the I3 frames
  double noise_sigma = 0.0;        // std of complex Gaussian noise added to k-space
  std::uint64_t seed = 0;
};

/// Static ellipse with a smoothly edged disk whose radius pulses sinusoidally,
/// modulated by a smooth static phase. k-space is fully populated (full pattern).
KtDataset make_phantom(Index i1, Index i2, Index i3, PhantomParams const &params = {});

/// Magnitude image of frame t.
RMat magnitude_frame(CMat const &x, Index t, Index i1, Index i2);

} // namespace krim
