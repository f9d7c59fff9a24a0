#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "krim/common.hpp"
#include "krim/graph.hpp"
#include "krim/sampling.hpp"

namespace krim {

enum class NavigatorMode { Nav1, Nav2, Nav3, Nav4, DMRIBand };
enum class LandmarkStrategy { MaxMin, KMeans, FuzzyCMeans };

std::string to_string(NavigatorMode mode);
NavigatorMode navigator_mode_from_string(std::string const &name);
std::string to_string(LandmarkStrategy s);
LandmarkStrategy landmark_strategy_from_string(std::string const &name);

struct NavigatorSet {
  CMat points; // nu x N_nav
  NavigatorMode mode = NavigatorMode::Nav1;
  Index delta_t = 0;  // Nav3 / Nav4
  Index upsilon = 0;  // DMRIBand
};

struct LandmarkSet {
  CMat points; // nu x N_l
  LandmarkStrategy strategy = LandmarkStrategy::MaxMin;
  std::vector<Index> source_indices; // MaxMin only
};

/// Navigator data for graph signals, formed from S_Omega(Y). Fully unobserved
/// snapshots are skipped in Nav1 and all-zero columns are purged in every mode.
NavigatorSet form_navigators_tvgs(CMat const &sampled, NavigatorMode mode, GraphOperators const &graph,
                                  Index delta_t, SamplingPattern const &pattern);

/// Vectorized upsilon x I2 central k-space box per frame: (upsilon I2) x I3.
NavigatorSet form_navigators_dmri(CMat const &kspace, SamplingPattern const &pattern, Index i1, Index i2, Index i3,
                                  Index upsilon);

struct ClusteringOptions {
  int max_iters = 100;
  double tol = 1e-6;      // centroid movement (fuzzy c-means)
  double fuzzifier = 2.0; // fuzzy c-means m
};

LandmarkSet select_landmarks(NavigatorSet const &nav, Index n_landmarks, LandmarkStrategy strategy,
                             std::uint64_t seed, ClusteringOptions const &opts = {});

/// Greedy max-min-distance selection. Starts at `start` when given, otherwise at
/// the column of largest norm (ties to the lowest index).
std::vector<Index> maxmin_indices(CMat const &points, Index count, std::optional<Index> start = std::nullopt);

/// Lloyd k-means with k-means++ seeding on the real embedding [Re; Im].
RMat kmeans_centroids(RMat const &points, Index k, std::uint64_t seed, ClusteringOptions const &opts);
RMat fuzzy_cmeans_centroids(RMat const &points, Index c, std::uint64_t seed, ClusteringOptions const &opts);

RMat real_embedding(CMat const &points);
CMat from_real_embedding(RMat const &points);

} // namespace krim
