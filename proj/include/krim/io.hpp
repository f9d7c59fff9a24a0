#pragma once

#include <string>
#include <vector>

#include "krim/common.hpp"
#include "krim/dmri.hpp"
#include "krim/model.hpp"
#include "krim/sampling.hpp"
#include "krim/solver.hpp"

namespace krim {

/// Numeric CSV without a header. Errors name the offending line.
RMat read_csv_matrix(std::string const &path);
void write_csv_matrix(std::string const &path, RMat const &m);

/// 0/1 CSV, one row per mask row.
void write_mask_csv(std::string const &path, Mask const &mask);
Mask read_mask_csv(std::string const &path);

/// iteration,objective,consistency,affine,seconds,cg_iters,d_iters,b_iters
void write_report_csv(std::string const &path, SolveReport const &report);

/// Text header (dims and flags) followed by raw little-endian complex blocks.
void save_model(std::string const &path, FactorModel const &model);
FactorModel load_model(std::string const &path);

/// Binary: magic, I1, I2, I3, flags, k-space, mask, optional ground truth.
void save_kt_dataset(std::string const &path, KtDataset const &ds);
KtDataset load_kt_dataset(std::string const &path);
/// Long-format CSV: frame,row,col,re,im,observed[,truth_re,truth_im].
void export_kt_csv(std::string const &path, KtDataset const &ds);

} // namespace krim
