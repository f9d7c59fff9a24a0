#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "krim/baselines.hpp"
#include "krim/dmri.hpp"
#include "krim/experiment.hpp"
#include "krim/metrics.hpp"
#include "oracles.hpp"

using namespace krim;

namespace {

// Tolerances and budgets.
constexpr double kOracleTol = 1e-8;
constexpr double kOracleBudget = 30.0;
constexpr double kDmriConsistencyTol = 1e-10;
constexpr double kAffineTol = 1e-8;
constexpr double kMmfBudget = 10.0;
constexpr double kGradTol = 1e-5;
constexpr double kTvgsObjectiveRatio = 0.5;
constexpr double kTvgsBudget = 120.0;
constexpr double kDmriFactor = 1.5;
constexpr double kDmriBudget = 180.0;

// Reference values of the first certified run, reported next to the measurements.
constexpr double kRecordedTvgsMae = 0.126;
constexpr double kRecordedDmriFactor = 2.60;

using Digest = std::vector<double>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(char const *f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Trajectory {
  SolveResult result;
  std::vector<double> consistency;
  std::vector<double> affine;
  double seconds = 0.0;
};

Trajectory observed_solve(ProblemData const &data, std::vector<CMat> const &kernels, FactorDims const &dims,
                          SolverConfig const &cfg) {
  Trajectory t;
  auto const t0 = std::chrono::steady_clock::now();
  t.result = solve(data, kernels, dims, cfg, std::nullopt, [&](int n, IterateTuple const &it) {
    if (n == 0) { return; }
    t.consistency.push_back(consistency_residual(data, it.X));
    t.affine.push_back(affine_residual(it.model));
  });
  t.seconds = seconds_since(t0);
  return t;
}

CMat normalized(CMat p) {
  double const s = p.cwiseAbs().maxCoeff();
  return s > 0.0 ? CMat(p / s) : p;
}

// Desk-scale graph-signal instance.
struct TvgsDesk {
  GraphOperators graph;
  ProblemData data;
  Trajectory run;
  double mae_krim = 0.0, mae_zero = 0.0, mae_mean = 0.0;
};

void run_tvgs_desk(TvgsDesk &d) {
  auto const t0 = std::chrono::steady_clock::now();
  TvgsData src = make_synthetic_tvgs(50, 80, 5, 3, 1);
  d.graph = knn_graph(src.coords, 5);
  finalize_graph(d.graph, 0.1, 1.0, 80);
  d.data.kind = Problem::TVGS;
  d.data.pattern = sample_p1(50, 80, 0.3, 11);
  d.data.y = apply_sampling(d.data.pattern, CMat(src.y.cast<cx>()));
  d.data.graph = &d.graph;
  NavigatorSet nav = form_navigators_tvgs(d.data.y, NavigatorMode::Nav1, d.graph, 1, d.data.pattern);
  nav.points = normalized(nav.points);
  LandmarkSet lm = select_landmarks(nav, 20, LandmarkStrategy::MaxMin, 11);
  std::vector<CMat> kernels{build_kernel_matrix(lm.points, KernelSpec::gaussian_sigma(0.4)).entries};
  FactorDims dims;
  dims.q = 2;
  dims.inner = {5};
  dims.i0 = 50;
  dims.in = 80;
  dims.n_l = 20;
  SolverConfig cfg;
  cfg.lambda1 = 1e-3;
  cfg.lambda2 = 1e-3;
  cfg.lambda_L = 1e-2;
  cfg.outer_iters = 100;
  cfg.tol = 0.0;
  cfg.seed = 11;
  d.run = observed_solve(d.data, kernels, dims, cfg);
  CMat const truth = src.y.cast<cx>();
  BaselineSpec zf, mf;
  zf.kind = BaselineKind::ZeroFill;
  mf.kind = BaselineKind::MeanFill;
  d.mae_krim = mae(d.run.result.X, truth);
  d.mae_zero = mae(run_baseline(zf, d.data, cfg).X, truth);
  d.mae_mean = mae(run_baseline(mf, d.data, cfg).X, truth);
  d.run.seconds = seconds_since(t0);
}

// Desk-scale dMRI instance.
struct DmriDesk {
  ProblemData data;
  Trajectory run;
  double nrmse_krim = 0.0, nrmse_zero = 0.0;
};

void run_dmri_desk(DmriDesk &d) {
  auto const t0 = std::chrono::steady_clock::now();
  KtDataset ph = make_phantom(32, 32, 16);
  d.data.kind = Problem::DMRI;
  d.data.i1 = 32;
  d.data.i2 = 32;
  d.data.pattern = radial_mask(32, 32, 16, 8.0, 5, 2);
  d.data.y = apply_sampling(d.data.pattern, ph.kspace);
  NavigatorSet nav = form_navigators_dmri(d.data.y, d.data.pattern, 32, 32, 16, 2);
  nav.points = normalized(nav.points);
  LandmarkSet lm = select_landmarks(nav, 12, LandmarkStrategy::MaxMin, 5);
  std::vector<CMat> kernels{build_kernel_matrix(lm.points, KernelSpec::gaussian_sigma(0.4)).entries};
  FactorDims dims;
  dims.q = 2;
  dims.inner = {4};
  dims.i0 = 1024;
  dims.in = 16;
  dims.n_l = 12;
  SolverConfig cfg = SolverConfig::defaults(Problem::DMRI);
  cfg.lambda1 = 1e-3;
  cfg.lambda2 = 1.0;
  cfg.lambda3 = 0.3;
  cfg.lambda4 = 1e-3;
  cfg.outer_iters = 100;
  cfg.tol = 0.0;
  cfg.seed = 5;
  d.run = observed_solve(d.data, kernels, dims, cfg);
  d.nrmse_krim = nrmse(d.run.result.X, *ph.ground_truth);
  d.nrmse_zero = nrmse(ifft2_frames(d.data.y, 32, 32), *ph.ground_truth);
  d.run.seconds = seconds_since(t0);
}

// Small multi-kernel runs so the affine check sees M > 1.
Trajectory run_tvgs_multikernel() {
  TvgsData src = make_synthetic_tvgs(20, 16, 4, 2, 3);
  static GraphOperators g;
  g = knn_graph(src.coords, 4);
  finalize_graph(g, 0.1, 1.0, 16);
  ProblemData data;
  data.kind = Problem::TVGS;
  data.pattern = sample_p1(20, 16, 0.4, 4);
  data.y = apply_sampling(data.pattern, CMat(src.y.cast<cx>()));
  data.graph = &g;
  NavigatorSet nav = form_navigators_tvgs(data.y, NavigatorMode::Nav1, g, 1, data.pattern);
  nav.points = normalized(nav.points);
  LandmarkSet lm = select_landmarks(nav, 6, LandmarkStrategy::MaxMin, 4);
  std::vector<CMat> kernels{build_kernel_matrix(lm.points, KernelSpec::gaussian_sigma(0.2)).entries,
                            build_kernel_matrix(lm.points, KernelSpec::gaussian_sigma(0.8)).entries};
  FactorDims dims;
  dims.m = 2;
  dims.q = 2;
  dims.inner = {3};
  dims.i0 = 20;
  dims.in = 16;
  dims.n_l = 6;
  SolverConfig cfg;
  cfg.lambda1 = 1e-3;
  cfg.lambda2 = 1e-3;
  cfg.lambda_L = 1e-2;
  cfg.outer_iters = 30;
  cfg.tol = 0.0;
  cfg.b_max = 200;
  cfg.seed = 4;
  return observed_solve(data, kernels, dims, cfg);
}

Trajectory run_dmri_multikernel() {
  KtDataset ph = make_phantom(16, 16, 8);
  ProblemData data;
  data.kind = Problem::DMRI;
  data.i1 = 16;
  data.i2 = 16;
  data.pattern = radial_mask(16, 16, 8, 4.0, 6, 2);
  data.y = apply_sampling(data.pattern, ph.kspace);
  NavigatorSet nav = form_navigators_dmri(data.y, data.pattern, 16, 16, 8, 2);
  nav.points = normalized(nav.points);
  LandmarkSet lm = select_landmarks(nav, 6, LandmarkStrategy::MaxMin, 6);
  std::vector<CMat> kernels{build_kernel_matrix(lm.points, KernelSpec::gaussian_sigma(0.4)).entries,
                            build_kernel_matrix(lm.points, KernelSpec::linear()).entries};
  FactorDims dims;
  dims.m = 2;
  dims.q = 2;
  dims.inner = {3};
  dims.i0 = 256;
  dims.in = 8;
  dims.n_l = 6;
  SolverConfig cfg = SolverConfig::defaults(Problem::DMRI);
  cfg.lambda1 = 1e-3;
  cfg.lambda2 = 1.0;
  cfg.lambda3 = 0.3;
  cfg.lambda4 = 1e-3;
  cfg.outer_iters = 20;
  cfg.tol = 0.0;
  cfg.b_max = 200;
  cfg.seed = 6;
  return observed_solve(data, kernels, dims, cfg);
}

double max_of(std::vector<double> const &v) {
  double m = 0.0;
  for (double x : v) { m = std::max(m, x); }
  return m;
}

void append(Digest &d, std::vector<double> const &v) { d.insert(d.end(), v.begin(), v.end()); }
void append(Digest &d, CMat const &m) {
  for (Index k = 0; k < m.size(); ++k) {
    d.push_back(m.data()[k].real());
    d.push_back(m.data()[k].imag());
  }
}

Outcome criterion_counts(Digest &dg) {
  auto const t0 = std::chrono::steady_clock::now();
  FactorDims d;
  d.i0 = 166464;
  d.in = 360;
  d.n_l = 70;
  d.q = 1;
  std::int64_t const q1 = count_unknowns(d);
  d.q = 2;
  d.inner = {8};
  std::int64_t const q2 = count_unknowns(d);
  d.q = 3;
  d.inner = {2, 8};
  std::int64_t const q3 = count_unknowns(d);
  double const secs = seconds_since(t0);
  dg.insert(dg.end(), {static_cast<double>(q1), static_cast<double>(q2), static_cast<double>(q3)});
  bool const ok = q1 == 11677680 && q2 == 1357472 && q3 == 358704 && secs < 1.0;
  return {ok, fmt("Q=1 %.0f, Q=2 %.0f, Q=3 %.0f (tolerance 0)", static_cast<double>(q1), static_cast<double>(q2),
                  static_cast<double>(q3))};
}

Outcome criterion_oracles(Digest &dg) {
  auto const t0 = std::chrono::steady_clock::now();
  double worst_x = 0.0, worst_d = 0.0, worst_b = 0.0, worst_m = 0.0;
  std::mt19937_64 rng(2024);
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto t = oracle::tiny_instance(1000 + s);
    CMat m_hat = oracle::random_complex(t.y.rows(), t.y.cols(), rng);
    double const lam = 0.1 + static_cast<double>(s % 4);
    CMat x = tvgs_update_X(t.y, t.pattern, m_hat, t.x_hat, t.sobolev, lam, 0.05, 1e-13, 2000);
    worst_x = std::max(worst_x, oracle::rel_err(x, oracle::tvgs_x(t.y, t.pattern.mask, m_hat, t.x_hat, t.sobolev, lam, 0.05)));
    for (Index j = 0; j < t.model.dims.q; ++j) {
      auto d = update_D(j, t.x_hat, t.model, 0.02, 0.05, 1e-14, 2000);
      auto ref = oracle::layer_d(j, t.x_hat, t.model, 0.02, 0.05);
      for (size_t m = 0; m < d.size(); ++m) { worst_d = std::max(worst_d, oracle::rel_err(d[m], ref[m])); }
    }
    CMat b = update_B(t.x_hat, t.model, 0.0, 0.05);
    worst_b = std::max(worst_b, oracle::rel_err(b, oracle::affine_b(t.x_hat, t.model, 0.05)));

    Index const i1 = 2;
    Index const i2 = 2 + static_cast<Index>(s % 3);
    Index const i3 = 2 + static_cast<Index>(s % 7);
    Index const i0 = i1 * i2;
    auto p = sample_p1(i0, i3, 0.5, s);
    CMat k = oracle::random_complex(i0, i3, rng);
    CMat mh = oracle::random_complex(i0, i3, rng), xh = oracle::random_complex(i0, i3, rng), zh = oracle::random_complex(i0, i3, rng);
    CMat xm = dmri_update_X(k, p, i1, i2, mh, xh, zh, 0.4, 0.05);
    worst_m = std::max(worst_m, oracle::rel_err(xm, oracle::dmri_x(k, p.mask, i1, i2, mh, xh, zh, 0.4, 0.05)));
  }
  double const secs = seconds_since(t0);
  dg.insert(dg.end(), {worst_x, worst_d, worst_b, worst_m});
  double const worst = std::max({worst_x, worst_d, worst_b, worst_m});
  return {worst <= kOracleTol && secs < kOracleBudget,
          fmt("max rel err X %.1e, D %.1e, B %.1e, dMRI X %.1e", worst_x, worst_d, worst_b, worst_m) +
            fmt(" (tol %.0e, %.1fs)", kOracleTol, secs)};
}

Outcome criterion_consistency(TvgsDesk const &tv, DmriDesk const &dm) {
  double const tmax = max_of(tv.run.consistency);
  double const dmax = max_of(dm.run.consistency);
  bool const ok = tv.run.consistency.size() == 100 && dm.run.consistency.size() >= 50 && tmax == 0.0 &&
                  dmax <= kDmriConsistencyTol;
  return {ok, fmt("TVGS max %.1e over %.0f iterations, dMRI max %.1e over %.0f iterations", tmax,
                  static_cast<double>(tv.run.consistency.size()), dmax, static_cast<double>(dm.run.consistency.size()))};
}

Outcome criterion_affine(TvgsDesk const &tv, DmriDesk const &dm, Digest &dg) {
  Trajectory const t2 = run_tvgs_multikernel();
  Trajectory const d2 = run_dmri_multikernel();
  append(dg, t2.result.report.objective);
  append(dg, d2.result.report.objective);
  double const worst = std::max({max_of(tv.run.affine), max_of(dm.run.affine), max_of(t2.affine), max_of(d2.affine)});
  return {worst <= kAffineTol, fmt("max |1^H B_m - 1^H| %.1e across 4 solves (M=1 and M=2, both problems)", worst)};
}

Outcome criterion_mmf(Digest &dg) {
  auto const t0 = std::chrono::steady_clock::now();
  int passed = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FactorDims d;
    d.i0 = 6 + static_cast<Index>(seed);
    d.in = 5 + static_cast<Index>(seed % 3);
    d.q = 2;
    d.inner = {3};
    d.n_l = 3;
    if (mmf_as_special_case_check(d, seed)) { ++passed; }
  }
  double const secs = seconds_since(t0);
  dg.push_back(passed);
  return {passed == 5 && secs < kMmfBudget, fmt("%.0f of 5 instances match to 1e-9 (%.1fs)", passed, secs)};
}

Outcome criterion_schedule(Digest &dg) {
  bool ok = true;
  for (double g0 : {1.0, 0.5}) {
    for (double z : {0.1, 0.5, 0.9}) {
      double g = g0;
      for (int n = 0; n < 10000; ++n) {
        double const next = sca_step_schedule(g, z);
        if (!(next > 0.0 && next < g && next == g * (1.0 - z * g))) { ok = false; }
        g = next;
      }
      dg.push_back(g);
    }
  }
  return {ok, "6 (gamma0, zeta) pairs, 10^4 steps each"};
}

Outcome criterion_gradients(Digest &dg) {
  std::mt19937_64 rng(77);
  double worst_x = 0.0, worst_d = 0.0, worst_b = 0.0, worst_m = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto t = oracle::tiny_instance(2000 + s);
    Index const r = t.y.rows(), c = t.y.cols();
    CMat x = oracle::random_complex(r, c, rng), m_hat = oracle::random_complex(r, c, rng);
    auto fx = [&](CMat const &v) { return tvgs_x_subtask_objective(v, m_hat, t.x_hat, t.sobolev, 0.7, 0.1); };
    worst_x = std::max(worst_x, oracle::rel_err(oracle::fd_gradient(fx, x), tvgs_x_gradient(x, m_hat, t.x_hat, t.sobolev, 0.7, 0.1)));

    Index const j = static_cast<Index>(s % static_cast<std::uint64_t>(t.model.dims.q));
    auto anchor = t.model.D[static_cast<size_t>(j)];
    FactorModel at = t.model;
    for (auto &blk : at.D[static_cast<size_t>(j)]) { blk += 0.3 * oracle::random_complex(blk.rows(), blk.cols(), rng); }
    auto gd = d_gradient(j, t.x_hat, at, anchor, 0.05, 0.1);
    for (size_t m = 0; m < gd.size(); ++m) {
      auto fd = [&](CMat const &v) {
        FactorModel probe = at;
        probe.D[static_cast<size_t>(j)][m] = v;
        return d_subtask_objective(j, t.x_hat, probe, anchor, 0.05, 0.1);
      };
      worst_d = std::max(worst_d, oracle::rel_err(oracle::fd_gradient(fd, at.D[static_cast<size_t>(j)][m]), gd[m]));
    }

    CMat const a = design_matrix(t.model);
    CMat const bh = stacked_B(t.model);
    CMat b = bh + oracle::random_complex(bh.rows(), bh.cols(), rng);
    auto fb = [&](CMat const &v) { return b_subproblem_objective(t.x_hat, a, v, bh, 0.0, 0.1); };
    worst_b = std::max(worst_b, oracle::rel_err(oracle::fd_gradient(fb, b), b_smooth_gradient(t.x_hat, a, b, bh, 0.1)));

    CMat z = oracle::random_complex(r, c, rng);
    auto fm = [&](CMat const &v) { return dmri_x_subtask_objective(v, m_hat, t.x_hat, z, 0.6, 0.1); };
    worst_m = std::max(worst_m, oracle::rel_err(oracle::fd_gradient(fm, x), dmri_x_gradient(x, m_hat, t.x_hat, z, 0.6, 0.1)));
  }
  dg.insert(dg.end(), {worst_x, worst_d, worst_b, worst_m});
  double const worst = std::max({worst_x, worst_d, worst_b, worst_m});
  return {worst < kGradTol, fmt("max rel err X %.1e, D %.1e, B %.1e, dMRI X %.1e", worst_x, worst_d, worst_b, worst_m) +
                              fmt(" (tol %.0e, 10 instances each)", kGradTol)};
}

Outcome criterion_tvgs(TvgsDesk const &tv, Digest &dg) {
  double const ratio = tv.run.result.report.objective.back() / tv.run.result.report.initial_objective;
  append(dg, tv.run.result.report.objective);
  append(dg, tv.run.result.X);
  dg.insert(dg.end(), {tv.mae_krim, tv.mae_zero, tv.mae_mean});
  bool const ok = tv.mae_krim < tv.mae_zero && tv.mae_krim < tv.mae_mean && ratio < kTvgsObjectiveRatio &&
                  tv.run.seconds < kTvgsBudget;
  return {ok, fmt("MAE %.4f vs zero-fill %.4f, mean-fill %.4f", tv.mae_krim, tv.mae_zero, tv.mae_mean) +
                fmt("; objective ratio %.4f (< %.1f); %.1fs (recorded MAE %.3f)", ratio, kTvgsObjectiveRatio,
                    tv.run.seconds, kRecordedTvgsMae)};
}

Outcome criterion_dmri(DmriDesk const &dm, Digest &dg) {
  double const factor = dm.nrmse_zero / dm.nrmse_krim;
  append(dg, dm.run.result.report.objective);
  append(dg, dm.run.result.X);
  dg.insert(dg.end(), {dm.nrmse_krim, dm.nrmse_zero});
  bool const ok = factor >= kDmriFactor && dm.run.seconds < kDmriBudget;
  return {ok, fmt("NRMSE %.4f vs zero-fill %.4f, factor %.2f (>= %.1f)", dm.nrmse_krim, dm.nrmse_zero, factor, kDmriFactor) +
                fmt("; %.1fs (recorded factor %.2f)", dm.run.seconds, kRecordedDmriFactor)};
}

Outcome criterion_metrics(Digest &dg) {
  int failures = 0;
  auto expect = [&](bool c) { failures += c ? 0 : 1; };
  std::mt19937_64 rng(5);
  CMat y = oracle::random_complex(4, 5, rng);
  expect(mae(y, y) == 0.0 && rmse(y, y) == 0.0 && mape(y, y) == 0.0);
  CMat const ones = CMat::Ones(2, 2);
  expect(mae(ones, CMat::Zero(2, 2)) == 1.0 && rmse(ones, CMat::Zero(2, 2)) == 1.0);
  expect(mape(3.0 * ones, 2.0 * ones) == 0.5);
  expect(nrmse(y, y) == 0.0 && nrmse(CMat::Zero(4, 5), y) == 1.0);
  expect(std::abs(nrmse(1.1 * y, y) - 0.1) < 1e-12);
  RMat img = oracle::random_complex(16, 16, rng).real();
  expect(ssim(img, img) == 1.0);
  expect(hfen(img, img) == 0.0);
  expect(hfen(img.array() + 2.0, img) < 1e-12);
  double const neg = ssim(-img, img);
  expect(std::isfinite(neg) && std::abs(neg) <= 1.0);
  dg.push_back(failures);
  return {failures == 0, fmt("%.0f of 9 metric examples failed", failures)};
}

struct Suite {
  std::vector<Outcome> outcomes;
  Digest digest;
};

Suite run_suite() {
  Suite s;
  s.outcomes.resize(10);
  Digest &dg = s.digest;
  s.outcomes[0] = criterion_counts(dg);
  s.outcomes[1] = criterion_oracles(dg);
  TvgsDesk tv;
  run_tvgs_desk(tv);
  DmriDesk dm;
  run_dmri_desk(dm);
  s.outcomes[2] = criterion_consistency(tv, dm);
  append(dg, tv.run.consistency);
  append(dg, dm.run.consistency);
  s.outcomes[3] = criterion_affine(tv, dm, dg);
  s.outcomes[4] = criterion_mmf(dg);
  s.outcomes[5] = criterion_schedule(dg);
  s.outcomes[6] = criterion_gradients(dg);
  s.outcomes[7] = criterion_tvgs(tv, dg);
  s.outcomes[8] = criterion_dmri(dm, dg);
  s.outcomes[9] = criterion_metrics(dg);
  return s;
}

bool same_bits(Digest const &a, Digest const &b) {
  if (a.size() != b.size()) { return false; }
  for (size_t k = 0; k < a.size(); ++k) {
    if (std::memcmp(&a[k], &b[k], sizeof(double)) != 0) { return false; }
  }
  return true;
}

} // namespace

int main() {
  char const *names[] = {"parameter counts",     "sub-task oracles",  "hard consistency", "affine constraint",
                         "mmf reduction",        "step schedule",     "gradient checks",  "desk-scale graph signal",
                         "desk-scale dynamic MRI", "metric formulas", "determinism"};
  int failed = 0;
  Suite first;
  try {
    first = run_suite();
  } catch (Error const &e) {
    std::printf("FAIL suite aborted: error:%s:%s\n", e.category().c_str(), e.what());
    return 1;
  }
  for (size_t k = 0; k < first.outcomes.size(); ++k) {
    auto const &o = first.outcomes[k];
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, names[k], o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  Suite second = run_suite();
  bool const same = same_bits(first.digest, second.digest);
  std::printf("%s 11 %s: %zu numeric outputs compared bitwise across two full runs\n", same ? "PASS" : "FAIL", names[10],
              first.digest.size());
  failed += same ? 0 : 1;
  return failed == 0 ? 0 : 1;
}
