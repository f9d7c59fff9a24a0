#include "krim/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace krim {

std::string to_string(PatternKind kind) {
  switch (kind) {
  case PatternKind::P1Random: return "p1";
  case PatternKind::P2Snapshots: return "p2";
  case PatternKind::Cartesian1D: return "cartesian";
  case PatternKind::Radial: return "radial";
  case PatternKind::Full: return "full";
  case PatternKind::Custom: return "custom";
  }
  return "unknown";
}

PatternKind pattern_kind_from_string(std::string const &name) {
  if (name == "p1") { return PatternKind::P1Random; }
  if (name == "p2") { return PatternKind::P2Snapshots; }
  if (name == "cartesian") { return PatternKind::Cartesian1D; }
  if (name == "radial") { return PatternKind::Radial; }
  if (name == "full") { return PatternKind::Full; }
  throw InputError("unknown sampling pattern '" + name + "'");
}

Index robust_ceil(double x) { return static_cast<Index>(std::ceil(x - 1e-9)); }

namespace {

void check_ratio(double r) {
  if (!(r > 0.0 && r <= 1.0)) { throw InputError("sampling ratio must lie in (0, 1]"); }
}

void check_dims(Index a, Index b) {
  if (a < 1 || b < 1) { throw InputError("sampling grid dimensions must be positive"); }
}

// First `count` entries of a seeded uniform permutation of [0, n).
std::vector<Index> draw_without_replacement(Index n, Index count, std::mt19937_64 &rng) {
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(pick(rng))]);
  }
  idx.resize(static_cast<size_t>(count));
  return idx;
}

} // namespace

SamplingPattern sample_p1(Index i0, Index in, double r, std::uint64_t seed) {
  check_ratio(r);
  check_dims(i0, in);
  Index const per_col = std::min(i0, robust_ceil(static_cast<double>(i0) * r));
  std::mt19937_64 rng(seed);
  SamplingPattern p{Mask::Constant(i0, in, false), PatternKind::P1Random, r, seed};
  for (Index t = 0; t < in; ++t) {
    for (Index i : draw_without_replacement(i0, per_col, rng)) { p.mask(i, t) = true; }
  }
  return p;
}

SamplingPattern sample_p2(Index i0, Index in, double r, std::uint64_t seed) {
  check_ratio(r);
  check_dims(i0, in);
  Index const snapshots = std::min(in, robust_ceil(static_cast<double>(in) * r));
  std::mt19937_64 rng(seed);
  SamplingPattern p{Mask::Constant(i0, in, false), PatternKind::P2Snapshots, r, seed};
  for (Index t : draw_without_replacement(in, snapshots, rng)) { p.mask.col(t).setConstant(true); }
  return p;
}

SamplingPattern full_pattern(Index i0, Index in) {
  check_dims(i0, in);
  return {Mask::Constant(i0, in, true), PatternKind::Full, 1.0, 0};
}

std::vector<Index> centered_rows(Index i1, Index band) {
  if (band < 0 || band > i1) { throw InputError("navigator band must satisfy 0 <= band <= I1"); }
  std::vector<Index> rows;
  Index const lo = -(band / 2);
  for (Index f = lo; f < lo + band; ++f) { rows.push_back(((f % i1) + i1) % i1); }
  return rows;
}

SamplingPattern cartesian_mask(Index i1, Index i2, Index i3, double accel, Index band, std::uint64_t seed) {
  check_dims(i1 * i2, i3);
  if (!(accel >= 1.0)) { throw InputError("acceleration must be >= 1"); }
  Index const budget = std::min(i1, robust_ceil(static_cast<double>(i1) / accel));
  if (band > budget) { throw InputError("central band alone exceeds the per-frame row budget"); }
  auto const central = centered_rows(i1, band);
  std::vector<bool> is_central(static_cast<size_t>(i1), false);
  for (Index r : central) { is_central[static_cast<size_t>(r)] = true; }
  std::vector<Index> outer;
  for (Index r = 0; r < i1; ++r) {
    if (!is_central[static_cast<size_t>(r)]) { outer.push_back(r); }
  }

  std::mt19937_64 rng(seed);
  SamplingPattern p{Mask::Constant(i1 * i2, i3, false), PatternKind::Cartesian1D, accel, seed};
  for (Index t = 0; t < i3; ++t) {
    std::vector<Index> rows = central;
    for (Index k : draw_without_replacement(static_cast<Index>(outer.size()), budget - band, rng)) {
      rows.push_back(outer[static_cast<size_t>(k)]);
    }
    for (Index r : rows) {
      for (Index c = 0; c < i2; ++c) { p.mask(r + i1 * c, t) = true; }
    }
  }
  return p;
}

std::vector<Index> rasterize_line(Index i1, Index i2, double theta) {
  double const c1 = static_cast<double>(i1 / 2);
  double const c2 = static_cast<double>(i2 / 2);
  double const reach = std::hypot(static_cast<double>(i1), static_cast<double>(i2)) / 2.0 + 1.0;
  double const dr = std::sin(theta);
  double const dc = std::cos(theta);
  std::vector<Index> cells;
  for (double s = -reach; s <= reach; s += 0.5) {
    long const r = std::lround(c1 + s * dr);
    long const c = std::lround(c2 + s * dc);
    if (r < 0 || c < 0 || r >= i1 || c >= i2) { continue; }
    // shifted (centered) grid -> DFT-native layout
    Index const ru = ((static_cast<Index>(r) - i1 / 2) % i1 + i1) % i1;
    Index const cu = ((static_cast<Index>(c) - i2 / 2) % i2 + i2) % i2;
    cells.push_back(ru + i1 * cu);
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

SamplingPattern radial_mask(Index i1, Index i2, Index i3, double accel, std::uint64_t seed, Index band) {
  check_dims(i1 * i2, i3);
  if (!(accel >= 1.0)) { throw InputError("acceleration must be >= 1"); }
  Index const lines = std::max<Index>(1, robust_ceil(static_cast<double>(i1) / accel));
  auto const central = centered_rows(i1, band);
  std::mt19937_64 rng(seed);
  double const theta0 = std::uniform_real_distribution<double>(0.0, std::numbers::pi)(rng);
  double const step = kGoldenAngleDeg * std::numbers::pi / 180.0;

  SamplingPattern p{Mask::Constant(i1 * i2, i3, false), PatternKind::Radial, accel, seed};
  Index j = 0;
  for (Index t = 0; t < i3; ++t) {
    for (Index l = 0; l < lines; ++l, ++j) {
      for (Index cell : rasterize_line(i1, i2, theta0 + static_cast<double>(j) * step)) { p.mask(cell, t) = true; }
    }
    for (Index r : central) {
      for (Index c = 0; c < i2; ++c) { p.mask(r + i1 * c, t) = true; }
    }
  }
  return p;
}

namespace {
template <typename M> M sample_impl(SamplingPattern const &pattern, M const &y) {
  if (y.rows() != pattern.rows() || y.cols() != pattern.cols()) {
    throw InputError("apply_sampling: matrix shape does not match the mask");
  }
  M out = M::Zero(y.rows(), y.cols());
  for (Index t = 0; t < y.cols(); ++t) {
    for (Index i = 0; i < y.rows(); ++i) {
      if (pattern.mask(i, t)) { out(i, t) = y(i, t); }
    }
  }
  return out;
}
} // namespace

CMat apply_sampling(SamplingPattern const &pattern, CMat const &y) { return sample_impl(pattern, y); }
RMat apply_sampling(SamplingPattern const &pattern, RMat const &y) { return sample_impl(pattern, y); }

SamplingPattern complement(SamplingPattern const &pattern) {
  SamplingPattern c = pattern;
  c.mask = !pattern.mask;
  c.kind = PatternKind::Custom;
  return c;
}

} // namespace krim
