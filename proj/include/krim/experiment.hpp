#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "krim/baselines.hpp"
#include "krim/geometry.hpp"
#include "krim/graph.hpp"
#include "krim/kernels.hpp"
#include "krim/metrics.hpp"
#include "krim/solver.hpp"

namespace krim {

struct DataSource {
  std::string kind = "synthetic"; // tvgs: synthetic | csv; dmri: phantom | kt
  std::string data_path;
  std::string coords_path;
  Index nodes = 50, instants = 80, modes = 3; // synthetic graph signal
  Index i1 = 32, i2 = 32, i3 = 16;            // phantom
  int cycles = 2;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentSpec {
  Problem problem = Problem::TVGS;
  DataSource data;
  Index knn = 5;
  double eps = 0.1;
  double beta = 1.0;
  PatternKind pattern = PatternKind::P1Random;
  std::vector<double> ratios{0.3}; // sampling ratio (tvgs) or acceleration (dmri)
  Index band = 2;                  // always-sampled central k-space rows
  NavigatorMode nav_mode = NavigatorMode::Nav1;
  Index delta_t = 1;
  Index upsilon = 2;
  bool normalize_navigators = true;
  LandmarkStrategy landmarks = LandmarkStrategy::MaxMin;
  Index n_landmarks = 20;
  std::vector<KernelSpec> kernels{KernelSpec::gaussian_sigma(0.4)};
  Index q = 2;
  std::vector<Index> inner{5};
  SolverConfig solver = SolverConfig::defaults(Problem::TVGS);
  std::vector<BaselineSpec> baselines;
  bool metrics_missing_only = false;
  Index repeats = 1;
  std::uint64_t base_seed = 0;
  int workers = 1;
  std::string output_dir = "krim-out";
  bool save_models = false;

  void validate() const;
};

ExperimentSpec parse_experiment_spec(std::string const &json_text);
ExperimentSpec load_experiment_spec(std::string const &path);
/// Fully resolved spec as JSON; parsing it back yields the same spec.
std::string dump_experiment_spec(ExperimentSpec const &spec);

struct TvgsData {
  RMat y;      // I0 x IN
  RMat coords; // p x I0
};

/// Data CSV is I0 x IN; coordinates CSV has one row per node.
TvgsData load_tvgs_csv(std::string const &data_path, std::string const &coords_path);

/// Smooth signal on a kNN graph over random planar coordinates: the `modes`
/// lowest Laplacian eigenvectors, each modulated by a slow temporal sinusoid.
TvgsData make_synthetic_tvgs(Index nodes, Index instants, Index knn, Index modes, std::uint64_t seed);

struct ResultRow {
  std::string method;
  double ratio = 0.0;
  std::string seed; // run seed, or "mean" on aggregate rows
  MetricReport metrics;
  double seconds = 0.0;
};

struct RunError {
  std::string method;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::string category;
  std::string message;
};

struct ExperimentResults {
  std::vector<ResultRow> rows;       // run rows, then aggregate rows
  std::vector<RunError> errors;
};

/// Per-method, per-ratio means over the run rows.
std::vector<ResultRow> aggregate_rows(std::vector<ResultRow> const &runs);

/// method,ratio,seed,mae,rmse,mape,nrmse,ssim,hfen,seconds
void emit_results(std::string const &path, std::vector<ResultRow> const &rows);

/// The whole sweep. Writes results.csv, errors.csv, resolved_spec.json and one
/// trace CSV per solver run into the output directory.
ExperimentResults run_experiment(ExperimentSpec const &spec);

} // namespace krim
