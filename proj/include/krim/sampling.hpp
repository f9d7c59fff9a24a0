#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "krim/common.hpp"

namespace krim {

enum class PatternKind { P1Random, P2Snapshots, Cartesian1D, Radial, Full, Custom };

std::string to_string(PatternKind kind);
PatternKind pattern_kind_from_string(std::string const &name);

/// Observed-entry set Omega over an I0 x IN grid (true = observed). For the
/// k-space patterns each column is one frame flattened column-major, so entry
/// (row r, column c) of a frame sits at r + I1 * c.
struct SamplingPattern {
  Mask mask;
  PatternKind kind = PatternKind::Custom;
  double ratio_or_accel = 1.0;
  std::uint64_t seed = 0;

  Index rows() const { return mask.rows(); }
  Index cols() const { return mask.cols(); }
  Index observed() const { return mask.count(); }
};

/// ceil() that absorbs floating-point noise, so ceil(10 * 0.3) is 3.
Index robust_ceil(double x);

SamplingPattern sample_p1(Index i0, Index in, double r, std::uint64_t seed);
SamplingPattern sample_p2(Index i0, Index in, double r, std::uint64_t seed);
SamplingPattern full_pattern(Index i0, Index in);

/// k-space rows of the centered low-frequency band of width `band`, as DFT-native
/// (unshifted) row indices, ordered by ascending signed frequency.
std::vector<Index> centered_rows(Index i1, Index band);

/// 1-D Cartesian phase-encode undersampling: per frame ceil(I1/accel) full rows,
/// the `band` central rows always included, the rest uniform at random.
SamplingPattern cartesian_mask(Index i1, Index i2, Index i3, double accel, Index band, std::uint64_t seed);

/// Grid cells (DFT-native layout, flattened) hit by a straight line through the
/// k-space center at angle `theta` (0 = along the I2 axis), nearest-neighbor rasterized.
std::vector<Index> rasterize_line(Index i1, Index i2, double theta);

inline constexpr double kGoldenAngleDeg = 111.246;

/// Radial undersampling: per frame ceil(I1/accel) lines at golden-angle
/// increments (continuing across frames) from a seed-drawn starting angle.
/// `band` > 0 additionally marks the central navigator rows in every frame.
SamplingPattern radial_mask(Index i1, Index i2, Index i3, double accel, std::uint64_t seed, Index band = 0);

/// S_Omega(Y): zero outside the observed set.
CMat apply_sampling(SamplingPattern const &pattern, CMat const &y);
RMat apply_sampling(SamplingPattern const &pattern, RMat const &y);

SamplingPattern complement(SamplingPattern const &pattern);

} // namespace krim
