#include "krim/model.hpp"

#include <cmath>
#include <random>

namespace krim {

Index FactorDims::d(Index j) const {
  if (j == 0) { return i0; }
  if (j == q) { return n_l; }
  return inner[static_cast<size_t>(j - 1)];
}

void FactorDims::validate() const {
  if (m < 1 || q < 1) { throw InputError("dims: need M >= 1 and Q >= 1"); }
  if (i0 < 1 || in < 1 || n_l < 1) { throw InputError("dims: I0, IN and N_l must be positive"); }
  if (static_cast<Index>(inner.size()) != q - 1) {
    throw InputError("dims: expected " + std::to_string(q - 1) + " inner dimensions, got " + std::to_string(inner.size()));
  }
  for (Index v : inner) {
    if (v < 1) { throw InputError("dims: inner dimensions must be positive"); }
  }
}

void FactorModel::check() const {
  dims.validate();
  auto const m = static_cast<size_t>(dims.m);
  if (D.size() != static_cast<size_t>(dims.q) || K.size() != m || B.size() != m) { throw InputError("model: block count mismatch"); }
  for (Index j = 0; j < dims.q; ++j) {
    auto const &layer = D[static_cast<size_t>(j)];
    if (layer.size() != m) { throw InputError("model: layer block count mismatch"); }
    for (auto const &blk : layer) {
      if (blk.rows() != dims.d(j) || blk.cols() != dims.d(j + 1)) {
        throw InputError("model: layer " + std::to_string(j) + " block has wrong shape");
      }
    }
  }
  for (size_t k = 0; k < m; ++k) {
    if (K[k].rows() != dims.n_l || K[k].cols() != dims.n_l) { throw InputError("model: kernel block has wrong shape"); }
    if (B[k].rows() != dims.n_l || B[k].cols() != dims.in) { throw InputError("model: B block has wrong shape"); }
  }
}

std::int64_t count_unknowns(FactorDims const &dims) {
  dims.validate();
  std::int64_t per = 0;
  for (Index j = 0; j < dims.q; ++j) { per += static_cast<std::int64_t>(dims.d(j)) * dims.d(j + 1); }
  per += static_cast<std::int64_t>(dims.in) * dims.n_l;
  return dims.m * per;
}

namespace {

CMat gaussian_block(Index rows, Index cols, double variance, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
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

} // namespace

FactorModel init_factors(FactorDims const &dims, std::vector<CMat> kernels, std::uint64_t seed) {
  dims.validate();
  FactorModel model;
  model.dims = dims;
  if (kernels.empty()) {
    kernels.assign(static_cast<size_t>(dims.m), CMat::Identity(dims.n_l, dims.n_l));
  }
  if (static_cast<Index>(kernels.size()) != dims.m) { throw InputError("init: need one kernel matrix per block"); }
  model.K = std::move(kernels);

  std::mt19937_64 rng(seed);
  model.D.resize(static_cast<size_t>(dims.q));
  for (Index j = 0; j < dims.q; ++j) {
    double const fan_in = j == 0 ? static_cast<double>(dims.d(1) * dims.m) : static_cast<double>(dims.d(j + 1));
    for (Index k = 0; k < dims.m; ++k) {
      model.D[static_cast<size_t>(j)].push_back(gaussian_block(dims.d(j), dims.d(j + 1), 1.0 / fan_in, rng));
    }
  }
  double const nl = static_cast<double>(dims.n_l);
  for (Index k = 0; k < dims.m; ++k) {
    CMat b = gaussian_block(dims.n_l, dims.in, 1.0 / nl, rng);
    for (Index t = 0; t < dims.in; ++t) {
      cx const shift = (cx(1.0) - b.col(t).sum()) / nl;
      b.col(t).array() += shift;
    }
    model.B.push_back(std::move(b));
  }
  model.check();
  return model;
}

FactorModel reduce_to_mmf(FactorModel model) {
  for (auto &k : model.K) { k = CMat::Identity(model.dims.n_l, model.dims.n_l); }
  model.mmf = true;
  return model;
}

namespace {

// D_m^(0) ... D_m^(Q-1) K_m
CMat chain_block(FactorModel const &model, Index m) {
  auto const mi = static_cast<size_t>(m);
  CMat p = model.D[0][mi];
  for (size_t j = 1; j < model.D.size(); ++j) { p = p * model.D[j][mi]; }
  return p * model.K[mi];
}

} // namespace

CMat design_matrix(FactorModel const &model) {
  Index const nl = model.dims.n_l;
  CMat a(model.dims.i0, nl * model.dims.m);
  for (Index m = 0; m < model.dims.m; ++m) { a.middleCols(m * nl, nl) = chain_block(model, m); }
  return a;
}

CMat stacked_B(FactorModel const &model) {
  Index const nl = model.dims.n_l;
  CMat b(nl * model.dims.m, model.dims.in);
  for (Index m = 0; m < model.dims.m; ++m) { b.middleRows(m * nl, nl) = model.B[static_cast<size_t>(m)]; }
  return b;
}

void set_stacked_B(FactorModel &model, CMat const &b) {
  Index const nl = model.dims.n_l;
  if (b.rows() != nl * model.dims.m || b.cols() != model.dims.in) { throw InputError("set_stacked_B: shape mismatch"); }
  for (Index m = 0; m < model.dims.m; ++m) { model.B[static_cast<size_t>(m)] = b.middleRows(m * nl, nl); }
}

CMat predict(FactorModel const &model) {
  model.check();
  return design_matrix(model) * stacked_B(model);
}

std::vector<CMat> left_factors(FactorModel const &model, Index j) {
  if (j < 0 || j >= model.dims.q) { throw InputError("left_factors: layer out of range"); }
  std::vector<CMat> out;
  for (Index m = 0; m < model.dims.m; ++m) {
    auto const mi = static_cast<size_t>(m);
    CMat l = j == 0 ? CMat::Identity(model.dims.i0, model.dims.i0) : model.D[0][mi];
    for (Index k = 1; k < j; ++k) { l = l * model.D[static_cast<size_t>(k)][mi]; }
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<CMat> right_factors(FactorModel const &model, Index j) {
  if (j < 0 || j >= model.dims.q) { throw InputError("right_factors: layer out of range"); }
  std::vector<CMat> out;
  for (Index m = 0; m < model.dims.m; ++m) {
    auto const mi = static_cast<size_t>(m);
    CMat r = model.K[mi] * model.B[mi];
    for (Index k = model.dims.q - 1; k > j; --k) { r = model.D[static_cast<size_t>(k)][mi] * r; }
    out.push_back(std::move(r));
  }
  return out;
}

CMat supermatrix_D(FactorModel const &model, Index j) {
  if (j < 0 || j >= model.dims.q) { throw InputError("supermatrix_D: layer out of range"); }
  Index const r = model.dims.d(j);
  Index const c = model.dims.d(j + 1);
  Index const mm = model.dims.m;
  auto const &layer = model.D[static_cast<size_t>(j)];
  if (j == 0) {
    CMat out(r, c * mm);
    for (Index m = 0; m < mm; ++m) { out.middleCols(m * c, c) = layer[static_cast<size_t>(m)]; }
    return out;
  }
  CMat out = CMat::Zero(r * mm, c * mm);
  for (Index m = 0; m < mm; ++m) { out.block(m * r, m * c, r, c) = layer[static_cast<size_t>(m)]; }
  return out;
}

CMat supermatrix_K(FactorModel const &model) {
  Index const nl = model.dims.n_l;
  CMat out = CMat::Zero(nl * model.dims.m, nl * model.dims.m);
  for (Index m = 0; m < model.dims.m; ++m) { out.block(m * nl, m * nl, nl, nl) = model.K[static_cast<size_t>(m)]; }
  return out;
}

double factor_frobenius_sq(FactorModel const &model) {
  double s = 0.0;
  for (auto const &layer : model.D) {
    for (auto const &blk : layer) { s += blk.squaredNorm(); }
  }
  return s;
}

double b_l1_norm(FactorModel const &model) {
  double s = 0.0;
  for (auto const &b : model.B) { s += b.cwiseAbs().sum(); }
  return s;
}

double affine_residual(FactorModel const &model) {
  double worst = 0.0;
  for (auto const &b : model.B) {
    if (b.size() == 0) { continue; }
    worst = std::max(worst, (b.colwise().sum().array() - cx(1.0)).abs().maxCoeff());
  }
  return worst;
}

FactorModel blend(FactorModel const &a, FactorModel const &b, double gamma) {
  FactorModel out = a;
  double const w = 1.0 - gamma;
  for (size_t j = 0; j < out.D.size(); ++j) {
    for (size_t m = 0; m < out.D[j].size(); ++m) { out.D[j][m] = gamma * a.D[j][m] + w * b.D[j][m]; }
  }
  for (size_t m = 0; m < out.B.size(); ++m) { out.B[m] = gamma * a.B[m] + w * b.B[m]; }
  return out;
}

} // namespace krim
