#include "krim/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace krim {

namespace {

std::vector<std::string> split(std::string const &line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) { out.push_back(cell); }
  if (!line.empty() && line.back() == sep) { out.emplace_back(); }
  return out;
}

std::string trim(std::string s) {
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) { return {}; }
  auto const e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string const &cell, std::string const &path, size_t line) {
  std::string const t = trim(cell);
  double v = 0.0;
  auto const [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw DataError(path + ": line " + std::to_string(line) + ": non-numeric cell '" + t + "'");
  }
  return v;
}

std::ofstream open_out(std::string const &path, bool binary = false) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) { throw IoError("cannot write '" + path + "'"); }
  f << std::setprecision(17);
  return f;
}

std::ifstream open_in(std::string const &path, bool binary = false) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) { throw IoError("cannot read '" + path + "'"); }
  return f;
}

void write_block(std::ostream &os, CMat const &m) {
  os.write(reinterpret_cast<char const *>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cx)));
}

CMat read_block(std::istream &is, Index rows, Index cols, std::string const &path) {
  CMat m(rows, cols);
  is.read(reinterpret_cast<char *>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cx)));
  if (!is) { throw IoError(path + ": truncated data block"); }
  return m;
}

} // namespace

RMat read_csv_matrix(std::string const &path) {
  auto f = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (trim(line).empty()) { continue; }
    auto const cells = split(line, ',');
    std::vector<double> row;
    for (auto const &c : cells) { row.push_back(parse_double(c, path, lineno)); }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(path + ": line " + std::to_string(lineno) + ": ragged row (" + std::to_string(row.size()) + " cells, expected " +
                    std::to_string(rows.front().size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) { throw DataError(path + ": no data"); }
  RMat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) { m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c]; }
  }
  return m;
}

void write_csv_matrix(std::string const &path, RMat const &m) {
  auto f = open_out(path);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) { f << (c ? "," : "") << m(r, c); }
    f << '\n';
  }
}

void write_mask_csv(std::string const &path, Mask const &mask) {
  auto f = open_out(path);
  for (Index r = 0; r < mask.rows(); ++r) {
    for (Index c = 0; c < mask.cols(); ++c) { f << (c ? "," : "") << (mask(r, c) ? 1 : 0); }
    f << '\n';
  }
}

Mask read_mask_csv(std::string const &path) {
  RMat const m = read_csv_matrix(path);
  Mask out(m.rows(), m.cols());
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      if (m(r, c) != 0.0 && m(r, c) != 1.0) { throw DataError(path + ": mask entries must be 0 or 1"); }
      out(r, c) = m(r, c) == 1.0;
    }
  }
  return out;
}

void write_report_csv(std::string const &path, SolveReport const &rep) {
  auto f = open_out(path);
  f << "iteration,objective,consistency,affine,seconds,cg_iters,d_iters,b_iters\n";
  f << 0 << ',' << rep.initial_objective << ",,,0,0,0,0\n";
  for (size_t k = 0; k < rep.objective.size(); ++k) {
    f << k + 1 << ',' << rep.objective[k] << ',' << rep.consistency[k] << ',' << rep.affine[k] << ',' << rep.seconds[k]
      << ',' << rep.cg_iters[k] << ',' << rep.d_iters[k] << ',' << rep.b_iters[k] << '\n';
  }
}

void save_model(std::string const &path, FactorModel const &model) {
  model.check();
  auto f = open_out(path, true);
  auto const &d = model.dims;
  f << "krim-model 1\n";
  f << "M " << d.m << "\nQ " << d.q << "\nI0 " << d.i0 << "\nIN " << d.in << "\nNl " << d.n_l << "\ninner";
  for (Index v : d.inner) { f << ' ' << v; }
  f << "\nmmf " << (model.mmf ? 1 : 0) << "\norder D K B, column-major complex128\nend\n";
  for (auto const &layer : model.D) {
    for (auto const &blk : layer) { write_block(f, blk); }
  }
  for (auto const &k : model.K) { write_block(f, k); }
  for (auto const &b : model.B) { write_block(f, b); }
  if (!f) { throw IoError("failed writing '" + path + "'"); }
}

FactorModel load_model(std::string const &path) {
  auto f = open_in(path, true);
  std::string line;
  std::getline(f, line);
  if (line != "krim-model 1") { throw IoError(path + ": not a model checkpoint"); }
  FactorModel model;
  auto &d = model.dims;
  while (std::getline(f, line) && line != "end") {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "M") { ss >> d.m; }
    else if (key == "Q") { ss >> d.q; }
    else if (key == "I0") { ss >> d.i0; }
    else if (key == "IN") { ss >> d.in; }
    else if (key == "Nl") { ss >> d.n_l; }
    else if (key == "inner") {
      Index v = 0;
      while (ss >> v) { d.inner.push_back(v); }
    } else if (key == "mmf") {
      int v = 0;
      ss >> v;
      model.mmf = v != 0;
    }
  }
  if (line != "end") { throw IoError(path + ": missing header terminator"); }
  d.validate();
  model.D.resize(static_cast<size_t>(d.q));
  for (Index j = 0; j < d.q; ++j) {
    for (Index m = 0; m < d.m; ++m) { model.D[static_cast<size_t>(j)].push_back(read_block(f, d.d(j), d.d(j + 1), path)); }
  }
  for (Index m = 0; m < d.m; ++m) { model.K.push_back(read_block(f, d.n_l, d.n_l, path)); }
  for (Index m = 0; m < d.m; ++m) { model.B.push_back(read_block(f, d.n_l, d.in, path)); }
  model.check();
  return model;
}

namespace {

constexpr char kKtMagic[8] = {'K', 'R', 'I', 'M', 'K', 'T', '0', '1'};

void put_i64(std::ostream &os, std::int64_t v) { os.write(reinterpret_cast<char const *>(&v), sizeof v); }

std::int64_t get_i64(std::istream &is, std::string const &path) {
  std::int64_t v = 0;
  is.read(reinterpret_cast<char *>(&v), sizeof v);
  if (!is) { throw IoError(path + ": truncated header"); }
  return v;
}

} // namespace

void save_kt_dataset(std::string const &path, KtDataset const &ds) {
  if (ds.kspace.rows() != ds.i0() || ds.kspace.cols() != ds.i3) { throw InputError("kt dataset: dims mismatch"); }
  auto f = open_out(path, true);
  f.write(kKtMagic, sizeof kKtMagic);
  put_i64(f, ds.i1);
  put_i64(f, ds.i2);
  put_i64(f, ds.i3);
  put_i64(f, ds.ground_truth ? 1 : 0);
  write_block(f, ds.kspace);
  Mask const mask = ds.pattern.rows() == ds.kspace.rows() ? ds.pattern.mask : Mask::Constant(ds.kspace.rows(), ds.kspace.cols(), true);
  for (Index k = 0; k < mask.size(); ++k) {
    char const b = mask.reshaped()[k] ? 1 : 0;
    f.write(&b, 1);
  }
  if (ds.ground_truth) { write_block(f, *ds.ground_truth); }
  if (!f) { throw IoError("failed writing '" + path + "'"); }
}

KtDataset load_kt_dataset(std::string const &path) {
  auto f = open_in(path, true);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kKtMagic, sizeof magic) != 0) { throw IoError(path + ": not a k-t dataset"); }
  KtDataset ds;
  ds.i1 = get_i64(f, path);
  ds.i2 = get_i64(f, path);
  ds.i3 = get_i64(f, path);
  bool const truth = get_i64(f, path) != 0;
  if (ds.i1 < 1 || ds.i2 < 1 || ds.i3 < 1) { throw IoError(path + ": invalid dims"); }
  ds.kspace = read_block(f, ds.i0(), ds.i3, path);
  ds.pattern.mask.resize(ds.i0(), ds.i3);
  for (Index k = 0; k < ds.pattern.mask.size(); ++k) {
    char b = 0;
    f.read(&b, 1);
    if (!f) { throw IoError(path + ": truncated mask"); }
    ds.pattern.mask.reshaped()[k] = b != 0;
  }
  if (truth) { ds.ground_truth = read_block(f, ds.i0(), ds.i3, path); }
  return ds;
}

void export_kt_csv(std::string const &path, KtDataset const &ds) {
  auto f = open_out(path);
  bool const truth = ds.ground_truth.has_value();
  f << "frame,row,col,re,im,observed" << (truth ? ",truth_re,truth_im" : "") << '\n';
  bool const has_mask = ds.pattern.rows() == ds.kspace.rows();
  for (Index t = 0; t < ds.i3; ++t) {
    for (Index c = 0; c < ds.i2; ++c) {
      for (Index r = 0; r < ds.i1; ++r) {
        Index const k = r + ds.i1 * c;
        cx const v = ds.kspace(k, t);
        f << t << ',' << r << ',' << c << ',' << v.real() << ',' << v.imag() << ',' << ((!has_mask || ds.pattern.mask(k, t)) ? 1 : 0);
        if (truth) { f << ',' << (*ds.ground_truth)(k, t).real() << ',' << (*ds.ground_truth)(k, t).imag(); }
        f << '\n';
      }
    }
  }
}

} // namespace krim
