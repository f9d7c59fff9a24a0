#include "krim/solver.hpp"

#include <chrono>
#include <cmath>

#include "krim/dmri.hpp"

namespace krim {

std::string to_string(Problem p) { return p == Problem::TVGS ? "tvgs" : "dmri"; }

Problem problem_from_string(std::string const &name) {
  if (name == "tvgs") { return Problem::TVGS; }
  if (name == "dmri") { return Problem::DMRI; }
  throw InputError("unknown problem '" + name + "'");
}

void SolverConfig::validate() const {
  for (double v : {lambda1, lambda2, lambda3, lambda4, lambda_L}) {
    if (!(v >= 0.0) || !std::isfinite(v)) { throw InputError("solver: regularization weights must be finite and non-negative"); }
  }
  for (double v : {tau_X, tau_D, tau_B, tau_Z}) {
    if (!(v > 0.0) || !std::isfinite(v)) { throw InputError("solver: proximal weights must be positive"); }
  }
  if (!(gamma0 > 0.0 && gamma0 <= 1.0)) { throw InputError("solver: gamma0 must lie in (0, 1]"); }
  if (!(zeta > 0.0 && zeta < 1.0)) { throw InputError("solver: zeta must lie in (0, 1)"); }
  if (outer_iters < 0) { throw InputError("solver: outer_iters must be non-negative"); }
  if (tol < 0.0 || cg_tol <= 0.0 || b_tol <= 0.0 || d_tol <= 0.0) { throw InputError("solver: tolerances must be positive"); }
  if (b_max < 1 || d_max < 1 || cg_max < 0) { throw InputError("solver: iteration caps must be positive"); }
}

SolverConfig SolverConfig::defaults(Problem p) {
  SolverConfig c;
  c.lambda1 = 1e-3;
  if (p == Problem::TVGS) {
    c.lambda2 = 1e-3;
    c.lambda_L = 1e-2;
    c.outer_iters = 300;
  } else {
    c.lambda2 = 1.0;
    c.lambda3 = 0.3;
    c.lambda4 = 1e-3;
    c.outer_iters = 100;
  }
  return c;
}

void ProblemData::validate() const {
  if (pattern.rows() != y.rows() || pattern.cols() != y.cols()) { throw InputError("problem: mask shape differs from data"); }
  if (kind == Problem::TVGS) {
    if (graph == nullptr) { throw InputError("problem: graph signals need graph operators"); }
    if (graph->L_sobolev.rows() != y.rows() || graph->L_sobolev.cols() != y.rows()) { throw InputError("problem: graph size differs from data rows"); }
    if (y.cols() < 2) { throw InputError("problem: need at least two time instants"); }
  } else if (i1 * i2 != y.rows()) {
    throw InputError("problem: I1 * I2 must equal the k-space rows");
  }
}

double sca_step_schedule(double gamma, double zeta) { return gamma * (1.0 - zeta * gamma); }

IterateTuple sca_extrapolate(IterateTuple const &current, IterateTuple const &half, double gamma_next) {
  IterateTuple out;
  double const w = 1.0 - gamma_next;
  out.X = gamma_next * half.X + w * current.X;
  if (half.Z.size() > 0) { out.Z = gamma_next * half.Z + w * current.Z; }
  out.model = blend(half.model, current.model, gamma_next);
  out.gamma = gamma_next;
  return out;
}

CMat tvgs_update_X(CMat const &y, SamplingPattern const &pattern, CMat const &m_hat, CMat const &x_prev,
                   RMat const &sobolev, double lambda_L, double tau_X, double cg_tol, int cg_max, CgResult *info) {
  Index const i0 = y.rows();
  Index const in = y.cols();
  if (pattern.rows() != i0 || pattern.cols() != in || m_hat.rows() != i0 || m_hat.cols() != in ||
      x_prev.rows() != i0 || x_prev.cols() != in) {
    throw InputError("X-update: shape mismatch");
  }
  if (lambda_L > 0.0 && (sobolev.rows() != i0 || sobolev.cols() != i0)) { throw InputError("X-update: Sobolev operator size mismatch"); }
  CMat x = apply_sampling(pattern, y);
  std::vector<Index> free;
  for (Index k = 0; k < x.size(); ++k) {
    if (!pattern.mask.reshaped()[k]) { free.push_back(k); }
  }
  Index const n = static_cast<Index>(free.size());
  if (info != nullptr) { *info = CgResult{0, 0.0, true}; }
  if (n == 0) { return x; }

  CMat const s = sobolev.cast<cx>();
  CMat rhs = m_hat + tau_X * x_prev;
  if (lambda_L > 0.0) { rhs -= lambda_L * (s * apply_diff_gram(x)); }
  CVec b(n), v(n);
  for (Index k = 0; k < n; ++k) {
    b[k] = rhs.reshaped()[free[static_cast<size_t>(k)]];
    v[k] = x_prev.reshaped()[free[static_cast<size_t>(k)]];
  }

  CMat work = CMat::Zero(i0, in);
  LinearOp op = [&](CVec const &u, CVec &out) {
    work.setZero();
    for (Index k = 0; k < n; ++k) { work.reshaped()[free[static_cast<size_t>(k)]] = u[k]; }
    CMat full = (1.0 + tau_X) * work;
    if (lambda_L > 0.0) { full += lambda_L * (s * apply_diff_gram(work)); }
    out.resize(n);
    for (Index k = 0; k < n; ++k) { out[k] = full.reshaped()[free[static_cast<size_t>(k)]]; }
  };
  RVec diag(n);
  for (Index k = 0; k < n; ++k) {
    Index const idx = free[static_cast<size_t>(k)];
    Index const i = idx % i0;
    Index const t = idx / i0;
    double const dd = (t == 0 || t == in - 1) ? 1.0 : 2.0;
    diag[k] = 1.0 + tau_X + lambda_L * sobolev(i, i) * dd;
  }
  LinearOp precond = [&](CVec const &r, CVec &z) { z = r.cwiseQuotient(diag.cast<cx>()); };

  int const cap = cg_max > 0 ? cg_max : static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(n))));
  CgResult res = pcg(op, precond, b, v, cg_tol, cap);
  if (info != nullptr) { *info = res; }
  if (!res.converged) { throw SolverError("X-update CG did not converge", res.residual, res.iterations); }
  for (Index k = 0; k < n; ++k) { x.reshaped()[free[static_cast<size_t>(k)]] = v[k]; }
  return x;
}

std::vector<CMat> update_D(Index j, CMat const &x_hat, FactorModel const &model, double lambda, double tau_D,
                           double tol, int max_iter, int *iters) {
  model.check();
  if (j < 0 || j >= model.dims.q) { throw InputError("D-update: layer out of range"); }
  Index const mm = model.dims.m;
  double const c = lambda + tau_D;
  auto const &d_hat = model.D[static_cast<size_t>(j)];
  std::vector<CMat> rights = right_factors(model, j);
  if (iters != nullptr) { *iters = 1; }

  if (j == 0) {
    Index const dj = model.dims.d(1);
    CMat r(dj * mm, model.dims.in);
    for (Index m = 0; m < mm; ++m) { r.middleRows(m * dj, dj) = rights[static_cast<size_t>(m)]; }
    CMat dh(model.dims.i0, dj * mm);
    for (Index m = 0; m < mm; ++m) { dh.middleCols(m * dj, dj) = d_hat[static_cast<size_t>(m)]; }
    CMat h = r * r.adjoint();
    h.diagonal().array() += c;
    CMat const sol = h.ldlt().solve(r * x_hat.adjoint() + tau_D * dh.adjoint()).adjoint();
    std::vector<CMat> out;
    for (Index m = 0; m < mm; ++m) { out.push_back(sol.middleCols(m * dj, dj)); }
    return out;
  }

  if (!(c > 0.0)) { throw InputError("D-update: lambda + tau must be positive for inner layers"); }
  std::vector<CMat> lefts = left_factors(model, j);
  auto const ms = static_cast<size_t>(mm);
  std::vector<std::vector<CMat>> gl(ms, std::vector<CMat>(ms)), gr(ms, std::vector<CMat>(ms));
  std::vector<CMat> rhs(ms);
  for (size_t a = 0; a < ms; ++a) {
    for (size_t b = 0; b < ms; ++b) {
      gl[a][b] = lefts[a].adjoint() * lefts[b];
      gr[a][b] = rights[a] * rights[b].adjoint();
    }
    rhs[a] = lefts[a].adjoint() * x_hat * rights[a].adjoint() + tau_D * d_hat[a];
  }
  std::vector<HermitianEig> el, er;
  for (size_t a = 0; a < ms; ++a) {
    el.push_back(hermitian_eig(gl[a][a]));
    er.push_back(hermitian_eig(gr[a][a]));
  }
  if (mm == 1) { return {sylvester_ridge(el[0], er[0], rhs[0], c)}; }

  // Blocks couple through the cross Gram matrices; PCG with the per-block Sylvester solve as preconditioner.
  Index const rows = model.dims.d(j);
  Index const cols = model.dims.d(j + 1);
  Index const bs = rows * cols;
  auto unpack = [&](CVec const &v, size_t a) { return CMat(v.segment(static_cast<Index>(a) * bs, bs).reshaped(rows, cols)); };
  LinearOp op = [&](CVec const &v, CVec &out) {
    out.resize(v.size());
    std::vector<CMat> blocks;
    for (size_t a = 0; a < ms; ++a) { blocks.push_back(unpack(v, a)); }
    for (size_t a = 0; a < ms; ++a) {
      CMat acc = c * blocks[a];
      for (size_t b = 0; b < ms; ++b) { acc += gl[a][b] * blocks[b] * gr[b][a]; }
      out.segment(static_cast<Index>(a) * bs, bs) = acc.reshaped();
    }
  };
  LinearOp precond = [&](CVec const &r, CVec &z) {
    z.resize(r.size());
    for (size_t a = 0; a < ms; ++a) {
      z.segment(static_cast<Index>(a) * bs, bs) = sylvester_ridge(el[a], er[a], unpack(r, a), c).reshaped();
    }
  };
  CVec b(bs * mm), v(bs * mm);
  for (size_t a = 0; a < ms; ++a) {
    b.segment(static_cast<Index>(a) * bs, bs) = rhs[a].reshaped();
    v.segment(static_cast<Index>(a) * bs, bs) = d_hat[a].reshaped();
  }
  CgResult res = pcg(op, precond, b, v, tol, max_iter);
  if (iters != nullptr) { *iters = res.iterations; }
  if (!res.converged && res.residual > 1e3 * tol) {
    throw SolverError("D-update PCG did not converge", res.residual, res.iterations);
  }
  std::vector<CMat> out;
  for (size_t a = 0; a < ms; ++a) { out.push_back(unpack(v, a)); }
  return out;
}

namespace {

// Per-column value of the B-subproblem objective.
RVec b_column_objective(CMat const &g, CMat const &ax, RVec const &xnorm2, CMat const &b, CMat const &b_hat,
                        double lambda1, double tau_B) {
  CMat const gb = g * b;
  RVec out(b.cols());
  for (Index t = 0; t < b.cols(); ++t) {
    double const quad = b.col(t).dot(gb.col(t)).real();
    double const lin = b.col(t).dot(ax.col(t)).real();
    out[t] = 0.5 * (xnorm2[t] - 2.0 * lin + quad) + lambda1 * b.col(t).cwiseAbs().sum() +
             0.5 * tau_B * (b.col(t) - b_hat.col(t)).squaredNorm();
  }
  return out;
}

void prox_blocks(CMat &b, Index n_l, double alpha) {
  for (Index t = 0; t < b.cols(); ++t) {
    for (Index m = 0; m * n_l < b.rows(); ++m) { l1_affine_prox(b.col(t).segment(m * n_l, n_l), alpha); }
  }
}

} // namespace

double b_subproblem_objective(CMat const &x_hat, CMat const &a, CMat const &b, CMat const &b_hat, double lambda1,
                              double tau_B) {
  return 0.5 * (x_hat - a * b).squaredNorm() + lambda1 * b.cwiseAbs().sum() + 0.5 * tau_B * (b - b_hat).squaredNorm();
}

CMat update_B(CMat const &x_hat, FactorModel const &model, double lambda1, double tau_B, double tol, int max_iter,
              BUpdateInfo *info) {
  model.check();
  if (x_hat.rows() != model.dims.i0 || x_hat.cols() != model.dims.in) { throw InputError("B-update: shape mismatch"); }
  CMat const a = design_matrix(model);
  CMat const b_hat = stacked_B(model);
  CMat g = a.adjoint() * a;
  CMat const ax = a.adjoint() * x_hat;
  Index const nb = g.rows();
  Index const nl = model.dims.n_l;
  Index const mm = model.dims.m;
  if (info != nullptr) { *info = BUpdateInfo{}; }

  CMat h = g;
  h.diagonal().array() += tau_B;
  if (model.mmf) { return h.ldlt().solve(ax + tau_B * b_hat); }

  if (lambda1 == 0.0) {
    auto const fac = h.ldlt();
    CMat ct = CMat::Zero(nb, mm);
    for (Index m = 0; m < mm; ++m) { ct.col(m).segment(m * nl, nl).setOnes(); }
    CMat const hct = fac.solve(ct);
    CMat const g0 = fac.solve(ax + tau_B * b_hat);
    CMat const s = ct.transpose() * hct;
    CMat const nu = s.lu().solve(ct.transpose() * g0 - CMat::Ones(mm, model.dims.in));
    if (info != nullptr) { info->iterations = 1; }
    return g0 - hct * nu;
  }

  // Monotone FISTA; objective and constraint are separable over columns, so the
  // monotone selection is made column by column.
  double const lip = spectral_norm_hermitian(g) + tau_B;
  double const step = 1.0 / lip;
  RVec const xnorm2 = x_hat.colwise().squaredNorm().transpose();
  CMat x = b_hat;
  prox_blocks(x, nl, 0.0);
  CMat y = x;
  RVec fx = b_column_objective(g, ax, xnorm2, x, b_hat, lambda1, tau_B);
  double t = 1.0;
  int it = 0;
  bool done = false;
  for (it = 1; it <= max_iter; ++it) {
    CMat z = y - step * (g * y - ax + tau_B * (y - b_hat));
    prox_blocks(z, nl, lambda1 * step);
    double const res = (z - y).norm() / std::max(1.0, y.norm());
    RVec const fz = b_column_objective(g, ax, xnorm2, z, b_hat, lambda1, tau_B);
    CMat xn = x;
    RVec fn = fx;
    for (Index c = 0; c < x.cols(); ++c) {
      if (fz[c] <= fx[c]) {
        xn.col(c) = z.col(c);
        fn[c] = fz[c];
      }
    }
    double const tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + (t / tn) * (z - xn) + ((t - 1.0) / tn) * (xn - x);
    x = std::move(xn);
    fx = std::move(fn);
    t = tn;
    if (info != nullptr) { info->trace.push_back(fx.sum()); }
    if (res < tol) {
      done = true;
      break;
    }
  }
  if (info != nullptr) {
    info->iterations = std::min(it, max_iter);
    info->hit_cap = !done;
  }
  return x;
}

CMat dmri_update_X(CMat const &kspace, SamplingPattern const &pattern, Index i1, Index i2, CMat const &m_hat,
                   CMat const &x_prev, CMat const &z_hat, double lambda2, double tau_X) {
  if (kspace.rows() != i1 * i2 || m_hat.rows() != kspace.rows() || m_hat.cols() != kspace.cols() ||
      x_prev.rows() != kspace.rows() || x_prev.cols() != kspace.cols()) {
    throw InputError("dMRI X-update: shape mismatch");
  }
  if (pattern.rows() != kspace.rows() || pattern.cols() != kspace.cols()) { throw InputError("dMRI X-update: mask shape mismatch"); }
  double const i3 = static_cast<double>(kspace.cols());
  CMat quarter = m_hat + tau_X * x_prev;
  if (lambda2 > 0.0) {
    if (z_hat.rows() != kspace.rows() || z_hat.cols() != kspace.cols()) { throw InputError("dMRI X-update: Z shape mismatch"); }
    quarter += (lambda2 * i3) * idft_temporal(z_hat);
  }
  quarter /= 1.0 + lambda2 * i3 + tau_X;
  CMat k = fft2_frames(quarter, i1, i2);
  for (Index c = 0; c < k.cols(); ++c) {
    for (Index r = 0; r < k.rows(); ++r) {
      if (pattern.mask(r, c)) { k(r, c) = kspace(r, c); }
    }
  }
  return ifft2_frames(k, i1, i2);
}

CMat dmri_update_Z(CMat const &x_hat, CMat const &z_prev, double lambda2, double lambda3, double tau_Z, bool exact_prox) {
  if (!(lambda2 > 0.0)) { throw InputError("Z-update: lambda2 must be positive"); }
  if (z_prev.rows() != x_hat.rows() || z_prev.cols() != x_hat.cols()) { throw InputError("Z-update: shape mismatch"); }
  CMat const ft = dft_temporal(x_hat);
  CMat arg;
  double thr = 0.0;
  if (exact_prox) {
    arg = (lambda2 * ft + tau_Z * z_prev) / (lambda2 + tau_Z);
    thr = lambda3 / (lambda2 + tau_Z);
  } else {
    arg = ft + (tau_Z / lambda2) * z_prev;
    thr = lambda3 / lambda2;
  }
  return arg.unaryExpr([thr](cx a) { return soft_threshold(a, thr); });
}

double tvgs_x_subtask_objective(CMat const &x, CMat const &m_hat, CMat const &x_hat, RMat const &sobolev,
                                double lambda_L, double tau_X) {
  double f = 0.5 * (x - m_hat).squaredNorm() + 0.5 * tau_X * (x - x_hat).squaredNorm();
  if (lambda_L > 0.0) { f += 0.5 * lambda_L * sobolev_quadratic(x, sobolev); }
  return f;
}

CMat tvgs_x_gradient(CMat const &x, CMat const &m_hat, CMat const &x_hat, RMat const &sobolev, double lambda_L,
                     double tau_X) {
  CMat g = (x - m_hat) + tau_X * (x - x_hat);
  if (lambda_L > 0.0) { g += lambda_L * (sobolev.cast<cx>() * apply_diff_gram(x)); }
  return g;
}

double d_subtask_objective(Index j, CMat const &x_hat, FactorModel const &model, std::vector<CMat> const &d_hat,
                           double lambda, double tau_D) {
  auto const &d = model.D[static_cast<size_t>(j)];
  if (d_hat.size() != d.size()) { throw InputError("D objective: anchor block count mismatch"); }
  double f = 0.5 * (x_hat - predict(model)).squaredNorm();
  for (size_t m = 0; m < d.size(); ++m) {
    f += 0.5 * lambda * d[m].squaredNorm() + 0.5 * tau_D * (d[m] - d_hat[m]).squaredNorm();
  }
  return f;
}

std::vector<CMat> d_gradient(Index j, CMat const &x_hat, FactorModel const &model, std::vector<CMat> const &d_hat,
                             double lambda, double tau_D) {
  auto const &d = model.D[static_cast<size_t>(j)];
  if (d_hat.size() != d.size()) { throw InputError("D gradient: anchor block count mismatch"); }
  CMat const resid = predict(model) - x_hat;
  std::vector<CMat> lefts = left_factors(model, j);
  std::vector<CMat> rights = right_factors(model, j);
  std::vector<CMat> out;
  for (size_t m = 0; m < d.size(); ++m) {
    out.push_back(lefts[m].adjoint() * resid * rights[m].adjoint() + lambda * d[m] + tau_D * (d[m] - d_hat[m]));
  }
  return out;
}

CMat b_smooth_gradient(CMat const &x_hat, CMat const &a, CMat const &b, CMat const &b_hat, double tau_B) {
  return a.adjoint() * (a * b - x_hat) + tau_B * (b - b_hat);
}

double dmri_x_subtask_objective(CMat const &x, CMat const &m_hat, CMat const &x_hat, CMat const &z_hat,
                                double lambda2, double tau_X) {
  return 0.5 * (x - m_hat).squaredNorm() + 0.5 * lambda2 * (dft_temporal(x) - z_hat).squaredNorm() +
         0.5 * tau_X * (x - x_hat).squaredNorm();
}

CMat dmri_x_gradient(CMat const &x, CMat const &m_hat, CMat const &x_hat, CMat const &z_hat, double lambda2,
                     double tau_X) {
  double const i3 = static_cast<double>(x.cols());
  return (x - m_hat) + (lambda2 * i3) * idft_temporal(dft_temporal(x) - z_hat) + tau_X * (x - x_hat);
}

double tvgs_objective(CMat const &x, FactorModel const &model, GraphOperators const &graph, SolverConfig const &cfg) {
  double f = 0.5 * (x - predict(model)).squaredNorm() + 0.5 * cfg.lambda2 * factor_frobenius_sq(model);
  if (!model.mmf) { f += cfg.lambda1 * b_l1_norm(model); }
  if (cfg.lambda_L > 0.0) { f += 0.5 * cfg.lambda_L * sobolev_quadratic(x, graph.L_sobolev); }
  return f;
}

double dmri_objective(CMat const &x, CMat const &z, FactorModel const &model, SolverConfig const &cfg) {
  double f = 0.5 * (x - predict(model)).squaredNorm() + 0.5 * cfg.lambda4 * factor_frobenius_sq(model);
  if (!model.mmf) { f += cfg.lambda1 * b_l1_norm(model); }
  f += 0.5 * cfg.lambda2 * (z - dft_temporal(x)).squaredNorm() + cfg.lambda3 * z.cwiseAbs().sum();
  return f;
}

double consistency_residual(ProblemData const &data, CMat const &x) {
  CMat const tx = data.kind == Problem::TVGS ? x : fft2_frames(x, data.i1, data.i2);
  double worst = 0.0;
  for (Index c = 0; c < tx.cols(); ++c) {
    for (Index r = 0; r < tx.rows(); ++r) {
      if (data.pattern.mask(r, c)) { worst = std::max(worst, std::abs(tx(r, c) - data.y(r, c))); }
    }
  }
  return worst;
}

IterateTuple initial_iterate(ProblemData const &data, FactorModel model, double gamma0) {
  IterateTuple it;
  CMat const ys = apply_sampling(data.pattern, data.y);
  if (data.kind == Problem::TVGS) {
    it.X = ys;
  } else {
    it.X = ifft2_frames(ys, data.i1, data.i2);
    it.Z = dft_temporal(it.X);
  }
  it.model = std::move(model);
  it.gamma = gamma0;
  return it;
}

SolveResult solve(ProblemData const &data, std::vector<CMat> const &kernels, FactorDims const &dims,
                  SolverConfig const &cfg, std::optional<FactorModel> init, IterateObserver const &observer) {
  using clock = std::chrono::steady_clock;
  auto const start = clock::now();
  data.validate();
  cfg.validate();
  if (dims.i0 != data.y.rows() || dims.in != data.y.cols()) { throw InputError("solve: dims differ from the data shape"); }
  bool const tvgs = data.kind == Problem::TVGS;
  if (!tvgs && !(cfg.lambda2 > 0.0)) { throw InputError("solve: dMRI needs lambda2 > 0"); }
  FactorModel model = init ? std::move(*init) : init_factors(dims, kernels, cfg.seed);
  model.check();
  if (model.dims.i0 != dims.i0 || model.dims.in != dims.in) { throw InputError("solve: initial model does not match dims"); }

  IterateTuple it = initial_iterate(data, std::move(model), cfg.gamma0);
  auto objective = [&](IterateTuple const &o) {
    return tvgs ? tvgs_objective(o.X, o.model, *data.graph, cfg) : dmri_objective(o.X, o.Z, o.model, cfg);
  };
  double const lambda_d = tvgs ? cfg.lambda2 : cfg.lambda4;
  SolveResult result;
  SolveReport &rep = result.report;
  rep.initial_objective = objective(it);
  double f_prev = rep.initial_objective;
  if (observer) { observer(0, it); }

  for (int n = 0; n < cfg.outer_iters; ++n) {
    IterateTuple half;
    half.model = it.model;
    CMat const m_hat = predict(it.model);
    CgResult cg;
    if (tvgs) {
      half.X = tvgs_update_X(data.y, data.pattern, m_hat, it.X, data.graph->L_sobolev, cfg.lambda_L, cfg.tau_X,
                             cfg.cg_tol, cfg.cg_max, &cg);
    } else {
      half.X = dmri_update_X(data.y, data.pattern, data.i1, data.i2, m_hat, it.X, it.Z, cfg.lambda2, cfg.tau_X);
      half.Z = dmri_update_Z(it.X, it.Z, cfg.lambda2, cfg.lambda3, cfg.tau_Z, cfg.exact_z_prox);
    }
    int d_iters = 0;
    for (Index j = 0; j < dims.q; ++j) {
      int k = 0;
      half.model.D[static_cast<size_t>(j)] = update_D(j, it.X, it.model, lambda_d, cfg.tau_D, cfg.d_tol, cfg.d_max, &k);
      d_iters += k;
    }
    BUpdateInfo binfo;
    set_stacked_B(half.model, update_B(it.X, it.model, cfg.lambda1, cfg.tau_B, cfg.b_tol, cfg.b_max, &binfo));
    if (binfo.hit_cap) { rep.warnings.push_back("iteration " + std::to_string(n + 1) + ": B-update hit its iteration cap"); }

    it = sca_extrapolate(it, half, sca_step_schedule(it.gamma, cfg.zeta));
    if (tvgs) {
      for (Index c = 0; c < it.X.cols(); ++c) {
        for (Index r = 0; r < it.X.rows(); ++r) {
          if (data.pattern.mask(r, c)) { it.X(r, c) = data.y(r, c); }
        }
      }
    }
    bool finite = it.X.allFinite() && (it.Z.size() == 0 || it.Z.allFinite());
    for (auto const &b : it.model.B) { finite = finite && b.allFinite(); }
    if (!finite) { throw SolverError("non-finite iterate", 0.0, n + 1); }

    double const f = objective(it);
    rep.objective.push_back(f);
    rep.consistency.push_back(consistency_residual(data, it.X));
    rep.affine.push_back(it.model.mmf ? 0.0 : affine_residual(it.model));
    rep.seconds.push_back(std::chrono::duration<double>(clock::now() - start).count());
    rep.cg_iters.push_back(cg.iterations);
    rep.d_iters.push_back(d_iters);
    rep.b_iters.push_back(binfo.iterations);
    rep.iterations = n + 1;
    if (observer) { observer(n + 1, it); }
    if (cfg.tol > 0.0 && std::abs(f - f_prev) <= cfg.tol * std::max(std::abs(f_prev), 1e-300)) {
      rep.converged = true;
      break;
    }
    f_prev = f;
  }
  rep.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
  result.X = std::move(it.X);
  result.Z = std::move(it.Z);
  result.model = std::move(it.model);
  return result;
}

} // namespace krim
