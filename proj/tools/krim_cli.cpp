#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "krim/dmri.hpp"
#include "krim/experiment.hpp"
#include "krim/io.hpp"
#include "krim/sampling.hpp"

namespace {

int exit_code(std::string const &category) {
  if (category == "input") { return 2; }
  if (category == "data") { return 3; }
  if (category == "solver") { return 4; }
  if (category == "io") { return 5; }
  return 1;
}

std::vector<krim::Index> parse_dims(std::string const &text) {
  std::vector<krim::Index> out;
  std::string cur;
  for (char ch : text + "x") {
    if (ch == 'x' || ch == 'X' || ch == ',') {
      if (cur.empty()) { throw krim::InputError("dims: expected I1xI2xI3"); }
      try {
        out.push_back(std::stoll(cur));
      } catch (std::exception const &) {
        throw krim::InputError("dims: '" + cur + "' is not an integer");
      }
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (out.size() != 3) { throw krim::InputError("dims: expected I1xI2xI3"); }
  return out;
}

// "key=value,key=value"
std::map<std::string, std::string> parse_params(std::string const &text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto const eq = item.find('=');
    if (eq == std::string::npos || eq == 0) { throw krim::InputError("params: expected key=value, got '" + item + "'"); }
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

struct Params {
  std::map<std::string, std::string> kv;
  std::string get(std::string const &key) const {
    auto it = kv.find(key);
    if (it == kv.end()) { throw krim::InputError("params: missing '" + key + "'"); }
    return it->second;
  }
  double num(std::string const &key) const {
    try {
      return std::stod(get(key));
    } catch (krim::Error const &) {
      throw;
    } catch (std::exception const &) {
      throw krim::InputError("params: '" + key + "' is not numeric");
    }
  }
  double num(std::string const &key, double fallback) const { return kv.contains(key) ? num(key) : fallback; }
  krim::Index idx(std::string const &key) const { return static_cast<krim::Index>(num(key)); }
  krim::Index idx(std::string const &key, krim::Index fallback) const { return kv.contains(key) ? idx(key) : fallback; }
  void allow(std::initializer_list<char const *> keys) const {
    for (auto const &[k, _] : kv) {
      bool ok = false;
      for (auto const *a : keys) { ok = ok || k == a; }
      if (!ok) { throw krim::InputError("params: unknown key '" + k + "'"); }
    }
  }
};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multilinear kernel regression imputation"};
  app.require_subcommand(1);

  std::string spec_path;
  auto *run = app.add_subcommand("run", "Run an experiment spec");
  run->add_option("spec", spec_path, "JSON spec file")->required();
  auto *validate = app.add_subcommand("validate", "Check an experiment spec without running it");
  validate->add_option("spec", spec_path, "JSON spec file")->required();

  std::string dims_text, out_path, csv_path;
  int cycles = 2;
  double noise = 0.0;
  std::uint64_t seed = 0;
  auto *phantom = app.add_subcommand("phantom", "Write a synthetic k-t dataset");
  phantom->add_option("dims", dims_text, "I1xI2xI3")->required();
  phantom->add_option("out", out_path, "output file (binary)")->required();
  phantom->add_option("--cycles", cycles, "pulsation periods");
  phantom->add_option("--noise", noise, "k-space noise standard deviation");
  phantom->add_option("--seed", seed, "noise seed");
  phantom->add_option("--csv", csv_path, "also export long-format CSV");

  std::string kind, params_text;
  auto *mask = app.add_subcommand("mask", "Write a sampling mask as 0/1 CSV");
  mask->add_option("kind", kind, "p1 | p2 | cartesian | radial")->required();
  mask->add_option("params", params_text, "key=value list, e.g. i0=50,in=80,ratio=0.3,seed=1")->required();
  mask->add_option("out", out_path, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (CLI::CallForHelp const &e) {
    return app.exit(e);
  } catch (CLI::ParseError const &e) {
    std::cerr << "error:usage:" << e.what() << '\n';
    return 2;
  }

  try {
    if (*run) {
      krim::ExperimentSpec const spec = krim::load_experiment_spec(spec_path);
      krim::ExperimentResults const res = krim::run_experiment(spec);
      std::cout << "results: " << (std::filesystem::path(spec.output_dir) / "results.csv").string() << '\n';
      if (!res.errors.empty()) {
        std::cerr << "error:run:" << res.errors.size() << " run(s) failed, see errors.csv\n";
        return 6;
      }
    } else if (*validate) {
      krim::ExperimentSpec const spec = krim::load_experiment_spec(spec_path);
      for (auto const &p : {spec.data.data_path, spec.data.coords_path}) {
        if (!p.empty() && !std::filesystem::exists(p)) { throw krim::IoError("missing input file '" + p + "'"); }
      }
      std::cout << "ok\n";
    } else if (*phantom) {
      auto const d = parse_dims(dims_text);
      krim::PhantomParams p;
      p.cycles = cycles;
      p.noise_sigma = noise;
      p.seed = seed;
      krim::KtDataset const ds = krim::make_phantom(d[0], d[1], d[2], p);
      krim::save_kt_dataset(out_path, ds);
      if (!csv_path.empty()) { krim::export_kt_csv(csv_path, ds); }
    } else if (*mask) {
      Params p{parse_params(params_text)};
      krim::PatternKind const pk = krim::pattern_kind_from_string(kind);
      auto const s = static_cast<std::uint64_t>(p.num("seed", 0.0));
      krim::SamplingPattern pat;
      switch (pk) {
      case krim::PatternKind::P1Random:
        p.allow({"i0", "in", "ratio", "seed"});
        pat = krim::sample_p1(p.idx("i0"), p.idx("in"), p.num("ratio"), s);
        break;
      case krim::PatternKind::P2Snapshots:
        p.allow({"i0", "in", "ratio", "seed"});
        pat = krim::sample_p2(p.idx("i0"), p.idx("in"), p.num("ratio"), s);
        break;
      case krim::PatternKind::Cartesian1D:
        p.allow({"i1", "i2", "i3", "accel", "band", "seed"});
        pat = krim::cartesian_mask(p.idx("i1"), p.idx("i2"), p.idx("i3"), p.num("accel"), p.idx("band", 0), s);
        break;
      case krim::PatternKind::Radial:
        p.allow({"i1", "i2", "i3", "accel", "band", "seed"});
        pat = krim::radial_mask(p.idx("i1"), p.idx("i2"), p.idx("i3"), p.num("accel"), s, p.idx("band", 0));
        break;
      default: throw krim::InputError("mask: kind must be p1, p2, cartesian or radial");
      }
      krim::write_mask_csv(out_path, pat.mask);
    }
  } catch (krim::Error const &e) {
    std::cerr << "error:" << e.category() << ':' << e.what() << '\n';
    return exit_code(e.category());
  } catch (std::exception const &e) {
    std::cerr << "error:internal:" << e.what() << '\n';
    return 1;
  }
  return 0;
}
