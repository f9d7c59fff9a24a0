#include "krim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "krim/dmri.hpp"
#include "krim/io.hpp"

namespace krim {

using nlohmann::json;

namespace {

void reject_unknown(json const &obj, std::set<std::string> const &allowed, std::string const &where) {
  if (!obj.is_object()) { throw InputError(where + ": expected an object"); }
  for (auto const &[key, _] : obj.items()) {
    if (!allowed.contains(key)) { throw InputError(where + ": unknown key '" + key + "'"); }
  }
}

template <class T> void read_opt(json const &obj, char const *key, T &out, std::string const &where) {
  if (!obj.contains(key)) { return; }
  try {
    out = obj.at(key).get<T>();
  } catch (json::exception const &e) {
    throw InputError(where + "." + key + ": " + e.what());
  }
}

KernelSpec kernel_from_json(json const &j) {
  std::string const where = "kernels";
  reject_unknown(j, {"kind", "gamma", "sigma", "degree", "intercept"}, where);
  if (!j.contains("kind")) { throw InputError("kernels: missing 'kind'"); }
  KernelKind const kind = kernel_kind_from_string(j.at("kind").get<std::string>());
  KernelSpec s;
  switch (kind) {
  case KernelKind::Linear: s = KernelSpec::linear(); break;
  case KernelKind::Gaussian: {
    if (j.contains("sigma") && j.contains("gamma")) { throw InputError("kernels: give either sigma or gamma"); }
    if (j.contains("sigma")) {
      s = KernelSpec::gaussian_sigma(j.at("sigma").get<double>());
    } else {
      double g = 1.0;
      read_opt(j, "gamma", g, where);
      s = KernelSpec::gaussian(g);
    }
    break;
  }
  case KernelKind::Polynomial: {
    int r = 1;
    read_opt(j, "degree", r, where);
    std::optional<cx> c;
    if (j.contains("intercept") && !j.at("intercept").is_null()) {
      auto const &v = j.at("intercept");
      if (v.is_number()) {
        c = cx(v.get<double>(), 0.0);
      } else if (v.is_array() && v.size() == 2) {
        c = cx(v[0].get<double>(), v[1].get<double>());
      } else {
        throw InputError("kernels: intercept must be a number or [re, im]");
      }
    }
    s = KernelSpec::polynomial(r, c);
    break;
  }
  }
  s.validate();
  return s;
}

json kernel_to_json(KernelSpec const &s) {
  json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == KernelKind::Gaussian) { j["gamma"] = s.gamma; }
  if (s.kind == KernelKind::Polynomial) {
    j["degree"] = s.degree;
    j["intercept"] = s.intercept ? json::array({s.intercept->real(), s.intercept->imag()}) : json(nullptr);
  }
  return j;
}

BaselineSpec baseline_from_json(json const &j) {
  BaselineSpec b;
  if (j.is_string()) {
    b.kind = baseline_kind_from_string(j.get<std::string>());
    return b;
  }
  std::string const where = "baselines";
  reject_unknown(j, {"kind", "rank", "mmf_dims", "row_kernel", "col_kernel", "lambda", "size_cap"}, where);
  if (!j.contains("kind")) { throw InputError("baselines: missing 'kind'"); }
  b.kind = baseline_kind_from_string(j.at("kind").get<std::string>());
  read_opt(j, "rank", b.rank, where);
  read_opt(j, "mmf_dims", b.mmf_dims, where);
  read_opt(j, "lambda", b.lambda, where);
  read_opt(j, "size_cap", b.size_cap, where);
  if (j.contains("row_kernel")) { b.row_kernel = kernel_from_json(j.at("row_kernel")); }
  if (j.contains("col_kernel")) { b.col_kernel = kernel_from_json(j.at("col_kernel")); }
  return b;
}

json baseline_to_json(BaselineSpec const &b) {
  return json{{"kind", to_string(b.kind)},          {"rank", b.rank},
              {"mmf_dims", b.mmf_dims},             {"row_kernel", kernel_to_json(b.row_kernel)},
              {"col_kernel", kernel_to_json(b.col_kernel)}, {"lambda", b.lambda},
              {"size_cap", b.size_cap}};
}

void solver_from_json(json const &j, SolverConfig &c) {
  std::string const where = "solver";
  reject_unknown(j, {"lambda1", "lambda2", "lambda3", "lambda4", "lambda_L", "tau_X", "tau_D", "tau_B", "tau_Z", "gamma0", "zeta",
                     "outer_iters", "tol", "cg_tol", "cg_max", "b_tol", "b_max", "d_tol", "d_max", "exact_z_prox"},
                 where);
  read_opt(j, "lambda1", c.lambda1, where);
  read_opt(j, "lambda2", c.lambda2, where);
  read_opt(j, "lambda3", c.lambda3, where);
  read_opt(j, "lambda4", c.lambda4, where);
  read_opt(j, "lambda_L", c.lambda_L, where);
  read_opt(j, "tau_X", c.tau_X, where);
  read_opt(j, "tau_D", c.tau_D, where);
  read_opt(j, "tau_B", c.tau_B, where);
  read_opt(j, "tau_Z", c.tau_Z, where);
  read_opt(j, "gamma0", c.gamma0, where);
  read_opt(j, "zeta", c.zeta, where);
  read_opt(j, "outer_iters", c.outer_iters, where);
  read_opt(j, "tol", c.tol, where);
  read_opt(j, "cg_tol", c.cg_tol, where);
  read_opt(j, "cg_max", c.cg_max, where);
  read_opt(j, "b_tol", c.b_tol, where);
  read_opt(j, "b_max", c.b_max, where);
  read_opt(j, "d_tol", c.d_tol, where);
  read_opt(j, "d_max", c.d_max, where);
  read_opt(j, "exact_z_prox", c.exact_z_prox, where);
}

json solver_to_json(SolverConfig const &c) {
  return json{{"lambda1", c.lambda1},       {"lambda2", c.lambda2},   {"lambda3", c.lambda3}, {"lambda4", c.lambda4},
              {"lambda_L", c.lambda_L},     {"tau_X", c.tau_X},       {"tau_D", c.tau_D},     {"tau_B", c.tau_B},
              {"tau_Z", c.tau_Z},           {"gamma0", c.gamma0},     {"zeta", c.zeta},       {"outer_iters", c.outer_iters},
              {"tol", c.tol},               {"cg_tol", c.cg_tol},     {"cg_max", c.cg_max},   {"b_tol", c.b_tol},
              {"b_max", c.b_max},           {"d_tol", c.d_tol},       {"d_max", c.d_max},     {"exact_z_prox", c.exact_z_prox}};
}

} // namespace

void ExperimentSpec::validate() const {
  solver.validate();
  if (ratios.empty()) { throw InputError("sampling.ratios: at least one value required"); }
  bool const tvgs = problem == Problem::TVGS;
  if (!tvgs && !(solver.lambda2 > 0.0)) { throw InputError("solver: dMRI needs lambda2 > 0"); }
  for (double r : ratios) {
    if (tvgs && !(r > 0.0 && r <= 1.0)) { throw InputError("sampling.ratios: ratios must lie in (0, 1]"); }
    if (!tvgs && !(r >= 1.0)) { throw InputError("sampling.ratios: accelerations must be >= 1"); }
  }
  if (tvgs) {
    if (pattern != PatternKind::P1Random && pattern != PatternKind::P2Snapshots) { throw InputError("sampling.pattern: graph signals use p1 or p2"); }
    if (nav_mode == NavigatorMode::DMRIBand) { throw InputError("navigators.mode: band is for dMRI"); }
    if (data.kind != "synthetic" && data.kind != "csv") { throw InputError("data.source: graph signals use synthetic or csv"); }
    if (knn < 1) { throw InputError("graph.knn must be positive"); }
    if (!(eps > 0.0) || !(beta > 0.0)) { throw InputError("graph: eps and beta must be positive"); }
  } else {
    if (pattern != PatternKind::Cartesian1D && pattern != PatternKind::Radial) { throw InputError("sampling.pattern: dMRI uses cartesian or radial"); }
    if (nav_mode != NavigatorMode::DMRIBand) { throw InputError("navigators.mode: dMRI uses band"); }
    if (data.kind != "phantom" && data.kind != "kt") { throw InputError("data.source: dMRI uses phantom or kt"); }
    if (upsilon < 1 || band < upsilon) { throw InputError("navigators.upsilon must be in [1, sampling.band]"); }
  }
  if (data.kind == "csv" && (data.data_path.empty() || data.coords_path.empty())) { throw InputError("data: csv source needs data_path and coords_path"); }
  if (data.kind == "kt" && data.data_path.empty()) { throw InputError("data: kt source needs data_path"); }
  if (data.kind == "synthetic" && (data.nodes < 3 || data.instants < 2 || data.modes < 1)) { throw InputError("data: synthetic sizes too small"); }
  if (kernels.empty()) { throw InputError("kernels: at least one kernel required"); }
  for (auto const &k : kernels) { k.validate(); }
  if (q < 1 || static_cast<Index>(inner.size()) != q - 1) { throw InputError("model: inner must list Q - 1 dimensions"); }
  if (n_landmarks < 1) { throw InputError("landmarks.count must be positive"); }
  if (repeats < 1) { throw InputError("repeats must be positive"); }
  if (workers < 1) { throw InputError("workers must be positive"); }
  if (output_dir.empty()) { throw InputError("output_dir must be set"); }
}

ExperimentSpec parse_experiment_spec(std::string const &text) {
  json root;
  try {
    root = json::parse(text);
  } catch (json::parse_error const &e) {
    throw InputError(std::string("spec: ") + e.what());
  }
  reject_unknown(root, {"problem", "data", "graph", "sampling", "navigators", "landmarks", "kernels", "model", "solver",
                        "baselines", "metrics", "repeats", "base_seed", "workers", "output_dir", "save_models"},
                 "spec");
  ExperimentSpec s;
  if (root.contains("problem")) { s.problem = problem_from_string(root.at("problem").get<std::string>()); }
  if (s.problem == Problem::DMRI) {
    s.data.kind = "phantom";
    s.pattern = PatternKind::Radial;
    s.ratios = {8.0};
    s.nav_mode = NavigatorMode::DMRIBand;
    s.n_landmarks = 12;
    s.inner = {4};
    s.solver = SolverConfig::defaults(Problem::DMRI);
  }
  try {
    if (root.contains("data")) {
      auto const &d = root.at("data");
      reject_unknown(d, {"source", "data_path", "coords_path", "nodes", "instants", "modes", "i1", "i2", "i3", "cycles", "noise_sigma", "seed"}, "data");
      read_opt(d, "source", s.data.kind, "data");
      read_opt(d, "data_path", s.data.data_path, "data");
      read_opt(d, "coords_path", s.data.coords_path, "data");
      read_opt(d, "nodes", s.data.nodes, "data");
      read_opt(d, "instants", s.data.instants, "data");
      read_opt(d, "modes", s.data.modes, "data");
      read_opt(d, "i1", s.data.i1, "data");
      read_opt(d, "i2", s.data.i2, "data");
      read_opt(d, "i3", s.data.i3, "data");
      read_opt(d, "cycles", s.data.cycles, "data");
      read_opt(d, "noise_sigma", s.data.noise_sigma, "data");
      read_opt(d, "seed", s.data.seed, "data");
    }
    if (root.contains("graph")) {
      auto const &g = root.at("graph");
      reject_unknown(g, {"knn", "eps", "beta"}, "graph");
      read_opt(g, "knn", s.knn, "graph");
      read_opt(g, "eps", s.eps, "graph");
      read_opt(g, "beta", s.beta, "graph");
    }
    if (root.contains("sampling")) {
      auto const &g = root.at("sampling");
      reject_unknown(g, {"pattern", "ratios", "band"}, "sampling");
      if (g.contains("pattern")) { s.pattern = pattern_kind_from_string(g.at("pattern").get<std::string>()); }
      read_opt(g, "ratios", s.ratios, "sampling");
      read_opt(g, "band", s.band, "sampling");
    }
    if (root.contains("navigators")) {
      auto const &g = root.at("navigators");
      reject_unknown(g, {"mode", "delta_t", "upsilon", "normalize"}, "navigators");
      if (g.contains("mode")) { s.nav_mode = navigator_mode_from_string(g.at("mode").get<std::string>()); }
      read_opt(g, "delta_t", s.delta_t, "navigators");
      read_opt(g, "upsilon", s.upsilon, "navigators");
      read_opt(g, "normalize", s.normalize_navigators, "navigators");
    }
    if (root.contains("landmarks")) {
      auto const &g = root.at("landmarks");
      reject_unknown(g, {"strategy", "count"}, "landmarks");
      if (g.contains("strategy")) { s.landmarks = landmark_strategy_from_string(g.at("strategy").get<std::string>()); }
      read_opt(g, "count", s.n_landmarks, "landmarks");
    }
    if (root.contains("kernels")) {
      auto const &k = root.at("kernels");
      if (!k.is_array()) { throw InputError("kernels: expected a list"); }
      s.kernels.clear();
      for (auto const &e : k) { s.kernels.push_back(kernel_from_json(e)); }
    }
    if (root.contains("model")) {
      auto const &g = root.at("model");
      reject_unknown(g, {"Q", "inner"}, "model");
      read_opt(g, "Q", s.q, "model");
      read_opt(g, "inner", s.inner, "model");
    }
    if (root.contains("solver")) { solver_from_json(root.at("solver"), s.solver); }
    if (root.contains("baselines")) {
      auto const &b = root.at("baselines");
      if (!b.is_array()) { throw InputError("baselines: expected a list"); }
      for (auto const &e : b) { s.baselines.push_back(baseline_from_json(e)); }
    }
    if (root.contains("metrics")) {
      std::string m = root.at("metrics").get<std::string>();
      if (m != "all" && m != "missing") { throw InputError("metrics: expected 'all' or 'missing'"); }
      s.metrics_missing_only = m == "missing";
    }
    read_opt(root, "repeats", s.repeats, "spec");
    read_opt(root, "base_seed", s.base_seed, "spec");
    read_opt(root, "workers", s.workers, "spec");
    read_opt(root, "output_dir", s.output_dir, "spec");
    read_opt(root, "save_models", s.save_models, "spec");
  } catch (json::exception const &e) {
    throw InputError(std::string("spec: ") + e.what());
  }
  s.validate();
  return s;
}

ExperimentSpec load_experiment_spec(std::string const &path) {
  std::ifstream f(path);
  if (!f) { throw IoError("cannot read '" + path + "'"); }
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_experiment_spec(ss.str());
}

std::string dump_experiment_spec(ExperimentSpec const &s) {
  json root;
  root["problem"] = to_string(s.problem);
  root["data"] = json{{"source", s.data.kind}, {"data_path", s.data.data_path}, {"coords_path", s.data.coords_path},
                      {"nodes", s.data.nodes}, {"instants", s.data.instants},   {"modes", s.data.modes},
                      {"i1", s.data.i1},       {"i2", s.data.i2},               {"i3", s.data.i3},
                      {"cycles", s.data.cycles}, {"noise_sigma", s.data.noise_sigma}, {"seed", s.data.seed}};
  root["graph"] = json{{"knn", s.knn}, {"eps", s.eps}, {"beta", s.beta}};
  root["sampling"] = json{{"pattern", to_string(s.pattern)}, {"ratios", s.ratios}, {"band", s.band}};
  root["navigators"] = json{{"mode", to_string(s.nav_mode)}, {"delta_t", s.delta_t}, {"upsilon", s.upsilon},
                            {"normalize", s.normalize_navigators}};
  root["landmarks"] = json{{"strategy", to_string(s.landmarks)}, {"count", s.n_landmarks}};
  root["kernels"] = json::array();
  for (auto const &k : s.kernels) { root["kernels"].push_back(kernel_to_json(k)); }
  root["model"] = json{{"Q", s.q}, {"inner", s.inner}};
  root["solver"] = solver_to_json(s.solver);
  root["baselines"] = json::array();
  for (auto const &b : s.baselines) { root["baselines"].push_back(baseline_to_json(b)); }
  root["metrics"] = s.metrics_missing_only ? "missing" : "all";
  root["repeats"] = s.repeats;
  root["base_seed"] = s.base_seed;
  root["workers"] = s.workers;
  root["output_dir"] = s.output_dir;
  root["save_models"] = s.save_models;
  return root.dump(2);
}

TvgsData load_tvgs_csv(std::string const &data_path, std::string const &coords_path) {
  TvgsData d;
  d.y = read_csv_matrix(data_path);
  RMat const c = read_csv_matrix(coords_path);
  if (c.rows() != d.y.rows()) {
    throw DataError(coords_path + ": " + std::to_string(c.rows()) + " coordinate rows but the data has " + std::to_string(d.y.rows()) + " nodes");
  }
  d.coords = c.transpose();
  return d;
}

TvgsData make_synthetic_tvgs(Index nodes, Index instants, Index knn, Index modes, std::uint64_t seed) {
  if (modes < 1 || modes > nodes) { throw InputError("synthetic: need 1 <= modes <= nodes"); }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TvgsData d;
  d.coords.resize(2, nodes);
  for (Index i = 0; i < nodes; ++i) {
    double const a = u(rng);
    double const b = u(rng);
    d.coords(0, i) = a;
    d.coords(1, i) = b;
  }
  GraphOperators g = knn_graph(d.coords, knn);
  Eigen::SelfAdjointEigenSolver<RMat> es(laplacian(g.W));
  double const scale = std::sqrt(static_cast<double>(nodes));
  d.y = RMat::Zero(nodes, instants);
  using std::numbers::pi;
  for (Index k = 0; k < modes; ++k) {
    double const amp = 1.0 / static_cast<double>(k + 1);
    double const phase = 2.0 * pi * u(rng);
    double const offset = k == 0 ? 2.0 : 0.0;
    RVec profile(instants);
    for (Index t = 0; t < instants; ++t) {
      profile[t] = offset + std::sin(2.0 * pi * static_cast<double>(k + 1) * static_cast<double>(t) / static_cast<double>(instants) + phase);
    }
    RVec mode = es.eigenvectors().col(k);
    if (mode.sum() < 0.0) { mode = -mode; }
    d.y += (scale * amp) * mode * profile.transpose();
  }
  return d;
}

std::vector<ResultRow> aggregate_rows(std::vector<ResultRow> const &runs) {
  std::vector<std::pair<std::string, double>> keys;
  for (auto const &r : runs) {
    std::pair<std::string, double> const k{r.method, r.ratio};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) { keys.push_back(k); }
  }
  std::vector<ResultRow> out;
  for (auto const &[method, ratio] : keys) {
    ResultRow agg;
    agg.method = method;
    agg.ratio = ratio;
    agg.seed = "mean";
    std::vector<ResultRow const *> group;
    for (auto const &r : runs) {
      if (r.method == method && r.ratio == ratio) { group.push_back(&r); }
    }
    auto mean_of = [&](std::optional<double> MetricReport::*field) -> std::optional<double> {
      double s = 0.0;
      for (auto const *r : group) {
        if (!(r->metrics.*field)) { return std::nullopt; }
        s += *(r->metrics.*field);
      }
      return s / static_cast<double>(group.size());
    };
    agg.metrics.mae = mean_of(&MetricReport::mae);
    agg.metrics.rmse = mean_of(&MetricReport::rmse);
    agg.metrics.mape = mean_of(&MetricReport::mape);
    agg.metrics.nrmse = mean_of(&MetricReport::nrmse);
    agg.metrics.ssim = mean_of(&MetricReport::ssim);
    agg.metrics.hfen = mean_of(&MetricReport::hfen);
    double s = 0.0;
    for (auto const *r : group) { s += r->seconds; }
    agg.seconds = s / static_cast<double>(group.size());
    out.push_back(std::move(agg));
  }
  return out;
}

void emit_results(std::string const &path, std::vector<ResultRow> const &rows) {
  std::ofstream f(path);
  if (!f) { throw IoError("cannot write '" + path + "'"); }
  f << std::setprecision(12);
  f << "method,ratio,seed,mae,rmse,mape,nrmse,ssim,hfen,seconds\n";
  auto cell = [&](std::optional<double> const &v) {
    f << ',';
    if (v) { f << *v; }
  };
  for (auto const &r : rows) {
    f << r.method << ',' << r.ratio << ',' << r.seed;
    cell(r.metrics.mae);
    cell(r.metrics.rmse);
    cell(r.metrics.mape);
    cell(r.metrics.nrmse);
    cell(r.metrics.ssim);
    cell(r.metrics.hfen);
    f << ',' << r.seconds << '\n';
  }
  if (!f) { throw IoError("failed writing '" + path + "'"); }
}

namespace {

struct Prepared {
  ProblemData data;
  CMat truth; // image domain for dMRI
  Index i1 = 0, i2 = 0;
};

struct Task {
  std::string method; // "multil-krim" or a baseline name
  BaselineSpec const *baseline = nullptr;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  Index index = 0;
};

std::string ratio_tag(double r) {
  std::ostringstream ss;
  ss << r;
  return ss.str();
}

} // namespace

ExperimentResults run_experiment(ExperimentSpec const &spec) {
  spec.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  if (ec) { throw IoError("cannot create '" + spec.output_dir + "': " + ec.message()); }
  {
    std::ofstream f(fs::path(spec.output_dir) / "resolved_spec.json");
    if (!f) { throw IoError("cannot write into '" + spec.output_dir + "'"); }
    f << dump_experiment_spec(spec) << '\n';
  }

  bool const tvgs = spec.problem == Problem::TVGS;
  // Shared, read-only inputs.
  CMat truth;
  GraphOperators graph;
  KtDataset kt;
  if (tvgs) {
    TvgsData d = spec.data.kind == "csv" ? load_tvgs_csv(spec.data.data_path, spec.data.coords_path)
                                         : make_synthetic_tvgs(spec.data.nodes, spec.data.instants, spec.knn, spec.data.modes, spec.data.seed);
    graph = knn_graph(d.coords, spec.knn);
    finalize_graph(graph, spec.eps, spec.beta, d.y.cols());
    truth = d.y.cast<cx>();
  } else {
    if (spec.data.kind == "phantom") {
      PhantomParams p;
      p.cycles = spec.data.cycles;
      p.noise_sigma = spec.data.noise_sigma;
      p.seed = spec.data.seed;
      kt = make_phantom(spec.data.i1, spec.data.i2, spec.data.i3, p);
    } else {
      kt = load_kt_dataset(spec.data.data_path);
    }
    truth = kt.ground_truth ? *kt.ground_truth : ifft2_frames(kt.kspace, kt.i1, kt.i2);
  }

  std::vector<Task> tasks;
  Index run_index = 0;
  for (double ratio : spec.ratios) {
    for (Index rep = 0; rep < spec.repeats; ++rep, ++run_index) {
      std::uint64_t const seed = spec.base_seed + static_cast<std::uint64_t>(run_index);
      tasks.push_back({"multil-krim", nullptr, ratio, seed, 0});
      for (auto const &b : spec.baselines) { tasks.push_back({to_string(b.kind), &b, ratio, seed, 0}); }
    }
  }
  for (size_t k = 0; k < tasks.size(); ++k) { tasks[k].index = static_cast<Index>(k); }

  auto prepare = [&](double ratio, std::uint64_t seed) {
    Prepared p;
    p.data.kind = spec.problem;
    if (tvgs) {
      p.data.y = truth;
      p.data.graph = &graph;
      p.data.pattern = spec.pattern == PatternKind::P1Random ? sample_p1(truth.rows(), truth.cols(), ratio, seed)
                                                              : sample_p2(truth.rows(), truth.cols(), ratio, seed);
    } else {
      p.data.y = kt.kspace;
      p.data.i1 = p.i1 = kt.i1;
      p.data.i2 = p.i2 = kt.i2;
      p.data.pattern = spec.pattern == PatternKind::Cartesian1D ? cartesian_mask(kt.i1, kt.i2, kt.i3, ratio, spec.band, seed)
                                                                : radial_mask(kt.i1, kt.i2, kt.i3, ratio, seed, spec.band);
    }
    p.truth = truth;
    return p;
  };

  std::vector<std::optional<ResultRow>> slots(tasks.size());
  std::vector<std::optional<RunError>> errs(tasks.size());
  std::mutex write_mu;
  std::atomic<size_t> next{0};

  auto work = [&]() {
    for (size_t k = next++; k < tasks.size(); k = next++) {
      Task const &task = tasks[k];
      auto const t0 = std::chrono::steady_clock::now();
      try {
        Prepared prep = prepare(task.ratio, task.seed);
        SolverConfig cfg = spec.solver;
        cfg.seed = task.seed;
        CMat x;
        std::optional<SolveReport> report;
        std::optional<FactorModel> model;
        if (task.baseline == nullptr) {
          CMat const ys = apply_sampling(prep.data.pattern, prep.data.y);
          NavigatorSet nav = tvgs ? form_navigators_tvgs(ys, spec.nav_mode, graph, spec.delta_t, prep.data.pattern)
                                  : form_navigators_dmri(ys, prep.data.pattern, kt.i1, kt.i2, kt.i3, spec.upsilon);
          if (spec.normalize_navigators) {
            double const s = nav.points.cwiseAbs().maxCoeff();
            if (s > 0.0) { nav.points /= s; }
          }
          LandmarkSet const lm = select_landmarks(nav, spec.n_landmarks, spec.landmarks, task.seed);
          std::vector<CMat> kernels;
          for (auto const &ks : spec.kernels) { kernels.push_back(build_kernel_matrix(lm.points, ks).entries); }
          FactorDims dims;
          dims.m = static_cast<Index>(kernels.size());
          dims.q = spec.q;
          dims.inner = spec.inner;
          dims.i0 = prep.data.y.rows();
          dims.in = prep.data.y.cols();
          dims.n_l = spec.n_landmarks;
          SolveResult sr = solve(prep.data, kernels, dims, cfg);
          x = std::move(sr.X);
          report = std::move(sr.report);
          model = std::move(sr.model);
        } else {
          BaselineResult br = run_baseline(*task.baseline, prep.data, cfg);
          x = std::move(br.X);
          if (br.report.iterations > 0) { report = std::move(br.report); }
        }
        Mask missing;
        Mask const *only = nullptr;
        if (spec.metrics_missing_only && tvgs) {
          missing = !prep.data.pattern.mask;
          only = &missing;
        }
        ResultRow row;
        row.method = task.method;
        row.ratio = task.ratio;
        row.seed = std::to_string(task.seed);
        row.metrics = evaluate(x, prep.truth, tvgs ? 0 : prep.i1, tvgs ? 0 : prep.i2, only);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        slots[k] = std::move(row);
        std::lock_guard lock(write_mu);
        std::string const stem = task.method + "_r" + ratio_tag(task.ratio) + "_s" + std::to_string(task.seed);
        if (report) { write_report_csv((fs::path(spec.output_dir) / ("trace_" + stem + ".csv")).string(), *report); }
        if (model && spec.save_models) { save_model((fs::path(spec.output_dir) / ("model_" + stem + ".bin")).string(), *model); }
      } catch (Error const &e) {
        errs[k] = RunError{task.method, task.ratio, task.seed, e.category(), e.what()};
      } catch (std::exception const &e) {
        errs[k] = RunError{task.method, task.ratio, task.seed, "internal", e.what()};
      }
    }
  };
  int const nw = std::min<int>(spec.workers, static_cast<int>(std::max<size_t>(tasks.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) { pool.emplace_back(work); }
  work();
  for (auto &t : pool) { t.join(); }

  ExperimentResults res;
  for (auto &s : slots) {
    if (s) { res.rows.push_back(std::move(*s)); }
  }
  for (auto &e : errs) {
    if (e) { res.errors.push_back(std::move(*e)); }
  }
  auto agg = aggregate_rows(res.rows);
  res.rows.insert(res.rows.end(), agg.begin(), agg.end());
  emit_results((fs::path(spec.output_dir) / "results.csv").string(), res.rows);
  std::ofstream ef(fs::path(spec.output_dir) / "errors.csv");
  if (!ef) { throw IoError("cannot write errors.csv"); }
  ef << "method,ratio,seed,category,message\n";
  for (auto const &e : res.errors) {
    std::string msg = e.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    ef << e.method << ',' << e.ratio << ',' << e.seed << ',' << e.category << ',' << msg << '\n';
  }
  return res;
}

} // namespace krim
