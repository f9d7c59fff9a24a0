#include "krim/baselines.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "krim/dmri.hpp"
#include "krim/graph.hpp"
#include "krim/linalg.hpp"

namespace krim {

std::string to_string(BaselineKind kind) {
  switch (kind) {
  case BaselineKind::MMF: return "mmf";
  case BaselineKind::NBP: return "nbp";
  case BaselineKind::KRG: return "krg";
  case BaselineKind::KGL: return "kgl";
  case BaselineKind::ZeroFill: return "zerofill";
  case BaselineKind::MeanFill: return "meanfill";
  }
  return "unknown";
}

BaselineKind baseline_kind_from_string(std::string const &name) {
  if (name == "mmf") { return BaselineKind::MMF; }
  if (name == "nbp") { return BaselineKind::NBP; }
  if (name == "krg") { return BaselineKind::KRG; }
  if (name == "kgl") { return BaselineKind::KGL; }
  if (name == "zerofill") { return BaselineKind::ZeroFill; }
  if (name == "meanfill") { return BaselineKind::MeanFill; }
  throw InputError("unknown baseline '" + name + "'");
}

CMat chain_product(std::vector<ChainLink> const &links) {
  if (links.empty()) { throw InputError("chain: no links"); }
  CMat p = links.front().value;
  for (size_t k = 1; k < links.size(); ++k) { p = p * links[k].value; }
  return p;
}

namespace {

HermitianEig identity_eig(Index n) { return {RVec::Ones(n), CMat::Identity(n, n)}; }

} // namespace

std::vector<ChainLink> chain_half_step(std::vector<ChainLink> const &links, CMat const &x_hat) {
  std::vector<ChainLink> out = links;
  for (size_t k = 0; k < links.size(); ++k) {
    if (!links[k].variable) { continue; }
    bool const has_left = k > 0;
    bool const has_right = k + 1 < links.size();
    CMat left, right;
    if (has_left) {
      left = links[0].value;
      for (size_t i = 1; i < k; ++i) { left = left * links[i].value; }
    }
    if (has_right) {
      right = links[k + 1].value;
      for (size_t i = k + 2; i < links.size(); ++i) { right = right * links[i].value; }
    }
    CMat rhs = links[k].tau * links[k].value;
    if (has_left && has_right) {
      rhs += left.adjoint() * x_hat * right.adjoint();
    } else if (has_left) {
      rhs += left.adjoint() * x_hat;
    } else if (has_right) {
      rhs += x_hat * right.adjoint();
    } else {
      rhs += x_hat;
    }
    HermitianEig const el = has_left ? hermitian_eig(left.adjoint() * left) : identity_eig(links[k].value.rows());
    HermitianEig const er = has_right ? hermitian_eig(right * right.adjoint()) : identity_eig(links[k].value.cols());
    double const c = links[k].lambda + links[k].tau;
    if (!(c > 0.0)) { throw InputError("chain: lambda + tau must be positive"); }
    out[k].value = sylvester_ridge(el, er, rhs, c);
  }
  return out;
}

namespace {

CMat random_factor(Index rows, Index cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5 / static_cast<double>(cols)));
  CMat out(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      double const re = nd(rng);
      double const im = nd(rng);
      out(r, c) = cx(re, im);
    }
  }
  return out;
}

double chain_objective(CMat const &x, std::vector<ChainLink> const &links, ProblemData const &data, SolverConfig const &cfg) {
  double f = 0.5 * (x - chain_product(links)).squaredNorm();
  for (auto const &l : links) {
    if (l.variable) { f += 0.5 * l.lambda * l.value.squaredNorm(); }
  }
  if (cfg.lambda_L > 0.0) { f += 0.5 * cfg.lambda_L * sobolev_quadratic(x, data.graph->L_sobolev); }
  return f;
}

using ChainObserver = std::function<void(int, CMat const &)>;

BaselineResult run_chain(std::vector<ChainLink> links, ProblemData const &data, SolverConfig const &cfg,
                         ChainObserver const &observer = {}) {
  using clock = std::chrono::steady_clock;
  auto const start = clock::now();
  BaselineResult res;
  SolveReport &rep = res.report;
  CMat x = apply_sampling(data.pattern, data.y);
  double gamma = cfg.gamma0;
  rep.initial_objective = chain_objective(x, links, data, cfg);
  double f_prev = rep.initial_objective;
  if (observer) { observer(0, x); }
  for (int n = 0; n < cfg.outer_iters; ++n) {
    CgResult cg;
    CMat const xh = tvgs_update_X(data.y, data.pattern, chain_product(links), x, data.graph->L_sobolev, cfg.lambda_L,
                                  cfg.tau_X, cfg.cg_tol, cfg.cg_max, &cg);
    std::vector<ChainLink> const half = chain_half_step(links, x);
    gamma = sca_step_schedule(gamma, cfg.zeta);
    x = gamma * xh + (1.0 - gamma) * x;
    for (Index c = 0; c < x.cols(); ++c) {
      for (Index r = 0; r < x.rows(); ++r) {
        if (data.pattern.mask(r, c)) { x(r, c) = data.y(r, c); }
      }
    }
    for (size_t k = 0; k < links.size(); ++k) {
      if (links[k].variable) { links[k].value = gamma * half[k].value + (1.0 - gamma) * links[k].value; }
    }
    if (!x.allFinite()) { throw SolverError("non-finite baseline iterate", 0.0, n + 1); }
    double const f = chain_objective(x, links, data, cfg);
    rep.objective.push_back(f);
    rep.consistency.push_back(consistency_residual(data, x));
    rep.affine.push_back(0.0);
    rep.seconds.push_back(std::chrono::duration<double>(clock::now() - start).count());
    rep.cg_iters.push_back(cg.iterations);
    rep.d_iters.push_back(1);
    rep.b_iters.push_back(1);
    rep.iterations = n + 1;
    if (observer) { observer(n + 1, x); }
    if (cfg.tol > 0.0 && std::abs(f - f_prev) <= cfg.tol * std::max(std::abs(f_prev), 1e-300)) {
      rep.converged = true;
      break;
    }
    f_prev = f;
  }
  rep.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
  res.X = std::move(x);
  return res;
}

// Kernel over the columns of `pts`, after scaling the data to unit max magnitude.
CMat data_kernel(CMat const &pts, KernelSpec const &spec) {
  double const scale = pts.cwiseAbs().maxCoeff();
  CMat const p = scale > 0.0 ? CMat(pts / scale) : pts;
  return kernel_cross(p, p, resolve_kernel_spec(spec, p));
}

ChainLink fixed(CMat v) { return {std::move(v), false, 0.0, 0.0}; }
ChainLink learned(CMat v, double lambda, double tau) { return {std::move(v), true, lambda, tau}; }

} // namespace

BaselineResult run_baseline(BaselineSpec const &spec, ProblemData const &data, SolverConfig const &cfg) {
  data.validate();
  cfg.validate();
  BaselineResult res;
  bool const tvgs = data.kind == Problem::TVGS;
  CMat const ys = apply_sampling(data.pattern, data.y);
  switch (spec.kind) {
  case BaselineKind::ZeroFill:
    res.X = tvgs ? ys : ifft2_frames(ys, data.i1, data.i2);
    return res;
  case BaselineKind::MeanFill: {
    Index const n = data.pattern.observed();
    cx const mean = n > 0 ? ys.sum() / static_cast<double>(n) : cx(0.0);
    CMat filled = ys;
    for (Index c = 0; c < filled.cols(); ++c) {
      for (Index r = 0; r < filled.rows(); ++r) {
        if (!data.pattern.mask(r, c)) { filled(r, c) = mean; }
      }
    }
    res.X = tvgs ? filled : ifft2_frames(filled, data.i1, data.i2);
    return res;
  }
  default: break;
  }

  Index const i0 = data.y.rows();
  Index const in = data.y.cols();
  std::mt19937_64 rng(cfg.seed);
  std::vector<ChainLink> links;
  switch (spec.kind) {
  case BaselineKind::MMF: {
    if (spec.mmf_dims.empty()) { throw InputError("mmf: need at least one inner dimension"); }
    FactorDims dims;
    dims.i0 = i0;
    dims.in = in;
    dims.q = static_cast<Index>(spec.mmf_dims.size());
    dims.n_l = spec.mmf_dims.back();
    dims.inner.assign(spec.mmf_dims.begin(), spec.mmf_dims.end() - 1);
    FactorModel model = reduce_to_mmf(init_factors(dims, {}, cfg.seed));
    if (!tvgs) {
      SolveResult sr = solve(data, {}, dims, cfg, model);
      res.X = std::move(sr.X);
      res.report = std::move(sr.report);
      return res;
    }
    for (auto const &layer : model.D) { links.push_back(learned(layer[0], spec.lambda, cfg.tau_D)); }
    links.push_back(learned(model.B[0], 0.0, cfg.tau_B));
    break;
  }
  case BaselineKind::NBP: {
    if (std::max(i0, in) > spec.size_cap) {
      throw InputError("nbp: kernel size " + std::to_string(std::max(i0, in)) + " exceeds the cap of " + std::to_string(spec.size_cap));
    }
    if (spec.rank < 1 || spec.rank > std::min(i0, in)) { throw InputError("nbp: rank must satisfy 1 <= d <= min(I0, IN)"); }
    links.push_back(fixed(data_kernel(ys.transpose(), spec.row_kernel)));
    links.push_back(learned(random_factor(i0, spec.rank, rng), spec.lambda, cfg.tau_D));
    links.push_back(learned(random_factor(spec.rank, in, rng), spec.lambda, cfg.tau_D));
    links.push_back(fixed(data_kernel(ys, spec.col_kernel)));
    break;
  }
  case BaselineKind::KGL:
    links.push_back(fixed(data_kernel(ys.transpose(), spec.row_kernel)));
    links.push_back(learned(random_factor(i0, in, rng), spec.lambda, cfg.tau_D));
    links.push_back(fixed(data_kernel(ys, spec.col_kernel)));
    break;
  case BaselineKind::KRG:
    links.push_back(learned(random_factor(i0, in, rng), spec.lambda, cfg.tau_D));
    links.push_back(fixed(data_kernel(ys, spec.col_kernel)));
    break;
  default: break;
  }
  if (!tvgs) { throw InputError(to_string(spec.kind) + ": only available for graph signals"); }
  return run_chain(std::move(links), data, cfg);
}

bool mmf_as_special_case_check(FactorDims const &dims_in, std::uint64_t seed, double lambda1, bool identity_kernel) {
  FactorDims dims = dims_in;
  dims.m = 1;
  dims.validate();
  Index const i0 = dims.i0;
  Index const in = dims.in;
  if (i0 < 3 || in < 2) { throw InputError("mmf check: need I0 >= 3 and IN >= 2"); }

  // Ring graph with a smooth signal, half the entries observed.
  GraphOperators g;
  g.W = RMat::Zero(i0, i0);
  for (Index i = 0; i < i0; ++i) {
    g.W(i, (i + 1) % i0) = 1.0;
    g.W((i + 1) % i0, i) = 1.0;
  }
  finalize_graph(g, 0.1, 1.0, in);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  CMat y(i0, in);
  for (Index t = 0; t < in; ++t) {
    for (Index i = 0; i < i0; ++i) {
      y(i, t) = cx(std::sin(0.7 * static_cast<double>(i) + 0.3 * static_cast<double>(t)) + 0.05 * nd(rng), 0.0);
    }
  }
  ProblemData data;
  data.kind = Problem::TVGS;
  data.y = y;
  data.pattern = sample_p1(i0, in, 0.5, seed + 1);
  data.graph = &g;

  SolverConfig cfg;
  cfg.lambda1 = lambda1;
  cfg.lambda2 = 1e-2;
  cfg.lambda_L = 1e-2;
  cfg.tau_X = cfg.tau_D = cfg.tau_B = 0.1;
  cfg.outer_iters = 10;
  cfg.tol = 0.0;
  cfg.seed = seed;

  std::vector<CMat> kernels;
  if (!identity_kernel) {
    CMat k = random_factor(dims.n_l, dims.n_l, rng);
    kernels.push_back(k * k.adjoint() + CMat::Identity(dims.n_l, dims.n_l));
  }
  FactorModel model = init_factors(dims, kernels, seed);
  model.mmf = lambda1 == 0.0;

  std::vector<CMat> main_path, chain_path;
  solve(data, {}, dims, cfg, model, [&](int, IterateTuple const &it) { main_path.push_back(it.X); });

  std::vector<ChainLink> links;
  for (auto const &layer : model.D) { links.push_back(learned(layer[0], cfg.lambda2, cfg.tau_D)); }
  links.push_back(learned(model.B[0], 0.0, cfg.tau_B));
  run_chain(links, data, cfg, [&](int, CMat const &x) { chain_path.push_back(x); });

  if (main_path.size() != chain_path.size()) { return false; }
  for (size_t k = 0; k < main_path.size(); ++k) {
    double const scale = std::max(1.0, chain_path[k].norm());
    if ((main_path[k] - chain_path[k]).norm() > 1e-9 * scale) { return false; }
  }
  return true;
}

} // namespace krim
