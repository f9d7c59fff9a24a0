#include "krim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace krim {

std::string to_string(NavigatorMode mode) {
  switch (mode) {
  case NavigatorMode::Nav1: return "nav1";
  case NavigatorMode::Nav2: return "nav2";
  case NavigatorMode::Nav3: return "nav3";
  case NavigatorMode::Nav4: return "nav4";
  case NavigatorMode::DMRIBand: return "band";
  }
  return "unknown";
}

NavigatorMode navigator_mode_from_string(std::string const &name) {
  if (name == "nav1") { return NavigatorMode::Nav1; }
  if (name == "nav2") { return NavigatorMode::Nav2; }
  if (name == "nav3") { return NavigatorMode::Nav3; }
  if (name == "nav4") { return NavigatorMode::Nav4; }
  if (name == "band") { return NavigatorMode::DMRIBand; }
  throw InputError("unknown navigator mode '" + name + "'");
}

std::string to_string(LandmarkStrategy s) {
  switch (s) {
  case LandmarkStrategy::MaxMin: return "maxmin";
  case LandmarkStrategy::KMeans: return "kmeans";
  case LandmarkStrategy::FuzzyCMeans: return "fcm";
  }
  return "unknown";
}

LandmarkStrategy landmark_strategy_from_string(std::string const &name) {
  if (name == "maxmin") { return LandmarkStrategy::MaxMin; }
  if (name == "kmeans") { return LandmarkStrategy::KMeans; }
  if (name == "fcm") { return LandmarkStrategy::FuzzyCMeans; }
  throw InputError("unknown landmark strategy '" + name + "'");
}

namespace {

CMat purge_zero_columns(CMat const &pts) {
  std::vector<Index> keep;
  for (Index j = 0; j < pts.cols(); ++j) {
    if (pts.col(j).cwiseAbs().maxCoeff() != 0.0) { keep.push_back(j); }
  }
  CMat out(pts.rows(), static_cast<Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) { out.col(static_cast<Index>(j)) = pts.col(keep[j]); }
  return out;
}

} // namespace

NavigatorSet form_navigators_tvgs(CMat const &sampled, NavigatorMode mode, GraphOperators const &graph,
                                  Index delta_t, SamplingPattern const &pattern) {
  Index const i0 = sampled.rows();
  Index const in = sampled.cols();
  if (pattern.rows() != i0 || pattern.cols() != in) { throw InputError("navigators: mask shape mismatch"); }

  NavigatorSet nav;
  nav.mode = mode;
  nav.delta_t = delta_t;
  CMat pts;
  switch (mode) {
  case NavigatorMode::Nav1: {
    std::vector<Index> cols;
    for (Index t = 0; t < in; ++t) {
      if (pattern.mask.col(t).any()) { cols.push_back(t); }
    }
    pts.resize(i0, static_cast<Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) { pts.col(static_cast<Index>(j)) = sampled.col(cols[j]); }
    break;
  }
  case NavigatorMode::Nav2: pts = sampled.transpose(); break;
  case NavigatorMode::Nav3:
  case NavigatorMode::Nav4: {
    if (delta_t < 0 || 2 * delta_t >= in) { throw InputError("navigators: delta_t must satisfy 0 <= delta_t < IN/2"); }
    Index const width = 2 * delta_t + 1;
    Index const windows = in - 2 * delta_t;
    if (mode == NavigatorMode::Nav4) {
      pts.resize(i0 * width, windows);
      for (Index t = 0; t < windows; ++t) {
        pts.col(t) = sampled.middleCols(t, width).reshaped();
      }
    } else {
      if (graph.neighbors.size() != static_cast<size_t>(i0)) { throw InputError("navigators: Nav3 needs graph neighborhoods"); }
      Index const k = static_cast<Index>(graph.neighbors.front().size());
      pts.resize(k * width, i0 * windows);
      for (Index t = 0; t < windows; ++t) {
        for (Index i = 0; i < i0; ++i) {
          auto const &nb = graph.neighbors[static_cast<size_t>(i)];
          if (static_cast<Index>(nb.size()) != k) { throw InputError("navigators: ragged neighborhoods"); }
          auto col = pts.col(t * i0 + i);
          for (Index w = 0; w < width; ++w) {
            for (Index a = 0; a < k; ++a) { col[w * k + a] = sampled(nb[static_cast<size_t>(a)], t + w); }
          }
        }
      }
    }
    break;
  }
  case NavigatorMode::DMRIBand: throw InputError("navigators: band mode belongs to form_navigators_dmri");
  }
  nav.points = purge_zero_columns(pts);
  if (nav.points.cols() == 0) { throw DataError("navigators: no non-zero navigator columns"); }
  return nav;
}

NavigatorSet form_navigators_dmri(CMat const &kspace, SamplingPattern const &pattern, Index i1, Index i2, Index i3,
                                  Index upsilon) {
  if (kspace.rows() != i1 * i2 || kspace.cols() != i3) { throw InputError("navigators: k-space dims mismatch"); }
  if (pattern.rows() != kspace.rows() || pattern.cols() != kspace.cols()) { throw InputError("navigators: mask shape mismatch"); }
  if (upsilon < 1 || upsilon > i1) { throw InputError("navigators: need 1 <= upsilon <= I1"); }
  auto const rows = centered_rows(i1, upsilon);
  NavigatorSet nav;
  nav.mode = NavigatorMode::DMRIBand;
  nav.upsilon = upsilon;
  nav.points.resize(upsilon * i2, i3);
  for (Index t = 0; t < i3; ++t) {
    for (Index c = 0; c < i2; ++c) {
      for (Index a = 0; a < upsilon; ++a) {
        Index const flat = rows[static_cast<size_t>(a)] + i1 * c;
        if (!pattern.mask(flat, t)) {
          throw DataError("navigators: band row " + std::to_string(rows[static_cast<size_t>(a)]) + " not fully sampled in frame " + std::to_string(t));
        }
        nav.points(c * upsilon + a, t) = kspace(flat, t);
      }
    }
  }
  return nav;
}

std::vector<Index> maxmin_indices(CMat const &points, Index count, std::optional<Index> start) {
  Index const n = points.cols();
  if (count < 1 || count > n) { throw InputError("maxmin: need 1 <= count <= number of points"); }
  Index first = 0;
  if (start) {
    if (*start < 0 || *start >= n) { throw InputError("maxmin: start index out of range"); }
    first = *start;
  } else {
    double best = -1.0;
    for (Index j = 0; j < n; ++j) {
      double const v = points.col(j).squaredNorm();
      if (v > best) { best = v; first = j; }
    }
  }
  std::vector<Index> chosen{first};
  RVec mind(n);
  for (Index j = 0; j < n; ++j) { mind[j] = (points.col(j) - points.col(first)).squaredNorm(); }
  while (static_cast<Index>(chosen.size()) < count) {
    Index next = 0;
    double best = -1.0;
    for (Index j = 0; j < n; ++j) {
      if (mind[j] > best) { best = mind[j]; next = j; }
    }
    chosen.push_back(next);
    for (Index j = 0; j < n; ++j) { mind[j] = std::min(mind[j], (points.col(j) - points.col(next)).squaredNorm()); }
  }
  return chosen;
}

RMat real_embedding(CMat const &points) {
  RMat out(2 * points.rows(), points.cols());
  out.topRows(points.rows()) = points.real();
  out.bottomRows(points.rows()) = points.imag();
  return out;
}

CMat from_real_embedding(RMat const &points) {
  Index const h = points.rows() / 2;
  CMat out(h, points.cols());
  out.real() = points.topRows(h);
  out.imag() = points.bottomRows(h);
  return out;
}

namespace {

RMat kmeanspp_seeds(RMat const &x, Index k, std::mt19937_64 &rng) {
  Index const n = x.cols();
  RMat c(x.rows(), k);
  c.col(0) = x.col(std::uniform_int_distribution<Index>(0, n - 1)(rng));
  RVec d2(n);
  for (Index j = 0; j < n; ++j) { d2[j] = (x.col(j) - c.col(0)).squaredNorm(); }
  for (Index m = 1; m < k; ++m) {
    double const total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        u -= d2[pick];
        if (u < 0.0) { break; }
      }
    } else {
      pick = std::uniform_int_distribution<Index>(0, n - 1)(rng);
    }
    c.col(m) = x.col(pick);
    for (Index j = 0; j < n; ++j) { d2[j] = std::min(d2[j], (x.col(j) - c.col(m)).squaredNorm()); }
  }
  return c;
}

} // namespace

RMat kmeans_centroids(RMat const &x, Index k, std::uint64_t seed, ClusteringOptions const &opts) {
  Index const n = x.cols();
  if (k < 1 || k > n) { throw InputError("kmeans: need 1 <= k <= number of points"); }
  std::mt19937_64 rng(seed);
  RMat c = kmeanspp_seeds(x, k, rng);
  std::vector<Index> assign(static_cast<size_t>(n), -1);
  for (int it = 0; it < opts.max_iters; ++it) {
    bool changed = false;
    for (Index j = 0; j < n; ++j) {
      Index best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (Index m = 0; m < k; ++m) {
        double const d = (x.col(j) - c.col(m)).squaredNorm();
        if (d < bd) { bd = d; best = m; }
      }
      if (assign[static_cast<size_t>(j)] != best) { assign[static_cast<size_t>(j)] = best; changed = true; }
    }
    RMat sum = RMat::Zero(x.rows(), k);
    RVec cnt = RVec::Zero(k);
    for (Index j = 0; j < n; ++j) {
      sum.col(assign[static_cast<size_t>(j)]) += x.col(j);
      cnt[assign[static_cast<size_t>(j)]] += 1.0;
    }
    for (Index m = 0; m < k; ++m) {
      if (cnt[m] > 0.0) { c.col(m) = sum.col(m) / cnt[m]; }
    }
    if (!changed) { break; }
  }
  return c;
}

RMat fuzzy_cmeans_centroids(RMat const &x, Index cnum, std::uint64_t seed, ClusteringOptions const &opts) {
  Index const n = x.cols();
  if (cnum < 1 || cnum > n) { throw InputError("fuzzy c-means: need 1 <= c <= number of points"); }
  if (!(opts.fuzzifier > 1.0)) { throw InputError("fuzzy c-means: fuzzifier must exceed 1"); }
  std::mt19937_64 rng(seed);
  RMat c = kmeanspp_seeds(x, cnum, rng);
  double const expo = 2.0 / (opts.fuzzifier - 1.0);
  RMat u(cnum, n);
  for (int it = 0; it < opts.max_iters; ++it) {
    for (Index j = 0; j < n; ++j) {
      RVec d(cnum);
      Index exact = -1;
      for (Index m = 0; m < cnum; ++m) {
        d[m] = (x.col(j) - c.col(m)).norm();
        if (d[m] == 0.0 && exact < 0) { exact = m; }
      }
      if (exact >= 0) {
        u.col(j).setZero();
        u(exact, j) = 1.0;
        continue;
      }
      for (Index m = 0; m < cnum; ++m) {
        double s = 0.0;
        for (Index l = 0; l < cnum; ++l) { s += std::pow(d[m] / d[l], expo); }
        u(m, j) = 1.0 / s;
      }
    }
    RMat const w = u.array().pow(opts.fuzzifier).matrix();
    RMat next = x * w.transpose();
    for (Index m = 0; m < cnum; ++m) {
      double const tot = w.row(m).sum();
      if (tot > 0.0) { next.col(m) /= tot; } else { next.col(m) = c.col(m); }
    }
    double const move = (next - c).colwise().norm().maxCoeff();
    c = std::move(next);
    if (move < opts.tol) { break; }
  }
  return c;
}

LandmarkSet select_landmarks(NavigatorSet const &nav, Index n_landmarks, LandmarkStrategy strategy,
                             std::uint64_t seed, ClusteringOptions const &opts) {
  Index const n = nav.points.cols();
  if (n_landmarks < 1 || n_landmarks > n) {
    throw InputError("landmarks: need 1 <= N_l <= N_nav (N_l=" + std::to_string(n_landmarks) + ", N_nav=" + std::to_string(n) + ")");
  }
  LandmarkSet out;
  out.strategy = strategy;
  switch (strategy) {
  case LandmarkStrategy::MaxMin: {
    out.source_indices = maxmin_indices(nav.points, n_landmarks);
    out.points.resize(nav.points.rows(), n_landmarks);
    for (Index j = 0; j < n_landmarks; ++j) { out.points.col(j) = nav.points.col(out.source_indices[static_cast<size_t>(j)]); }
    break;
  }
  case LandmarkStrategy::KMeans:
    out.points = from_real_embedding(kmeans_centroids(real_embedding(nav.points), n_landmarks, seed, opts));
    break;
  case LandmarkStrategy::FuzzyCMeans:
    out.points = from_real_embedding(fuzzy_cmeans_centroids(real_embedding(nav.points), n_landmarks, seed, opts));
    break;
  }
  return out;
}

} // namespace krim
