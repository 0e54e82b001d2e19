#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "capseg/error.hpp"
#include "capseg/pipeline.hpp"

namespace capseg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw Error(Errc::InvalidParam, key + ": expected a number, got '" + value + "'");
}

long to_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used == value.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw Error(Errc::InvalidParam, key + ": expected an integer, got '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  throw Error(Errc::InvalidParam, key + ": expected a boolean, got '" + value + "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::Slic ? "slic" : "quickshift";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "slic") return Algorithm::Slic;
  if (text == "quickshift" || text == "qs") return Algorithm::Quickshift;
  throw Error(Errc::InvalidParam, "unknown algorithm '" + std::string(text) + "'");
}

std::vector<std::string> config_keys() {
  return {"manifest",         "output_dir",          "counts",
          "algorithm",        "slic.compactness",    "slic.iterations",
          "slic.enforce_bounds", "qs.kernel_size",   "qs.max_dist",
          "lbp.neighbors",    "lbp.radius",          "lbp.sampling",
          "selection.k_neighbors", "selection.heat_t", "selection.keep",
          "selection.max_samples", "svm.kernel",     "svm.C",
          "svm.gamma",        "svm.tol",             "svm.max_iter",
          "seed",             "min_train_frames",    "label_threshold",
          "threads",          "cache"};
}

void apply_config_key(PipelineConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "manifest") {
    c.manifest_path = value;
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "counts") {
    c.superpixel_counts.clear();
    std::stringstream items(value);
    std::string item;
    while (std::getline(items, item, ',')) {
      c.superpixel_counts.push_back(static_cast<int>(to_long(key, trim(item))));
    }
  } else if (key == "algorithm") {
    c.algorithm = parse_algorithm(value);
  } else if (key == "slic.compactness") {
    c.slic.compactness = to_double(key, value);
  } else if (key == "slic.iterations") {
    c.slic.iterations = static_cast<int>(to_long(key, value));
  } else if (key == "slic.enforce_bounds") {
    c.slic.enforce_bounds = to_bool(key, value);
  } else if (key == "qs.kernel_size") {
    c.qs.kernel_size = to_double(key, value);
  } else if (key == "qs.max_dist") {
    c.qs.max_dist = to_double(key, value);
  } else if (key == "lbp.neighbors") {
    c.lbp.neighbors = static_cast<int>(to_long(key, value));
  } else if (key == "lbp.radius") {
    c.lbp.radius = to_double(key, value);
  } else if (key == "lbp.sampling") {
    if (value == "bilinear") {
      c.lbp.sampling = LbpSampling::Bilinear;
    } else if (value == "nearest") {
      c.lbp.sampling = LbpSampling::Nearest;
    } else {
      throw Error(Errc::InvalidParam, "lbp.sampling must be bilinear or nearest");
    }
  } else if (key == "selection.k_neighbors") {
    c.selection.k_neighbors = static_cast<int>(to_long(key, value));
  } else if (key == "selection.heat_t") {
    c.selection.heat_t = value == "auto" ? 0.0 : to_double(key, value);
  } else if (key == "selection.keep") {
    c.selection.keep = static_cast<int>(to_long(key, value));
  } else if (key == "selection.max_samples") {
    c.selection.max_samples = static_cast<std::size_t>(to_long(key, value));
  } else if (key == "svm.kernel") {
    c.svm.kernel = parse_kernel(value);
  } else if (key == "svm.C") {
    c.svm.C = to_double(key, value);
  } else if (key == "svm.gamma") {
    c.svm.gamma = value == "auto" ? 0.0 : to_double(key, value);
  } else if (key == "svm.tol") {
    c.svm.tol = to_double(key, value);
  } else if (key == "svm.max_iter") {
    c.svm.max_iter = to_long(key, value);
  } else if (key == "seed") {
    c.split_seed = static_cast<std::uint64_t>(to_long(key, value));
  } else if (key == "min_train_frames") {
    c.min_train_frames = static_cast<int>(to_long(key, value));
  } else if (key == "label_threshold") {
    c.label_threshold = to_double(key, value);
  } else if (key == "threads") {
    c.threads = static_cast<int>(to_long(key, value));
  } else if (key == "cache") {
    c.use_cache = to_bool(key, value);
  } else {
    throw Error(Errc::InvalidParam, "unknown config key '" + key + "'");
  }
}

void load_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::NotFound, path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidParam, path.string() + ":" + std::to_string(line_no) +
                                          ": expected key = value");
    }
    apply_config_key(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  // Relative paths in a config file are relative to the file.
  const auto base = path.parent_path();
  if (!config.manifest_path.empty() && config.manifest_path.is_relative()) {
    config.manifest_path = base / config.manifest_path;
  }
  if (!config.output_dir.empty() && config.output_dir.is_relative()) {
    config.output_dir = base / config.output_dir;
  }
}

std::map<std::string, std::string> describe(const PipelineConfig& c) {
  std::string counts;
  for (std::size_t i = 0; i < c.superpixel_counts.size(); ++i) {
    counts += (i ? "," : "") + std::to_string(c.superpixel_counts[i]);
  }
  return {
      {"counts", counts},
      {"algorithm", std::string(to_string(c.algorithm))},
      {"slic.compactness", fmt(c.slic.compactness)},
      {"slic.iterations", std::to_string(c.slic.iterations)},
      {"slic.enforce_bounds", c.slic.enforce_bounds ? "true" : "false"},
      {"qs.kernel_size", fmt(c.qs.kernel_size)},
      {"qs.max_dist", fmt(c.qs.max_dist)},
      {"lbp.neighbors", std::to_string(c.lbp.neighbors)},
      {"lbp.radius", fmt(c.lbp.radius)},
      {"lbp.sampling", c.lbp.sampling == LbpSampling::Bilinear ? "bilinear" : "nearest"},
      {"selection.k_neighbors", std::to_string(c.selection.k_neighbors)},
      {"selection.heat_t", c.selection.heat_t > 0 ? fmt(c.selection.heat_t) : "auto"},
      {"selection.keep", std::to_string(c.selection.keep)},
      {"selection.max_samples", std::to_string(c.selection.max_samples)},
      {"svm.kernel", std::string(to_string(c.svm.kernel))},
      {"svm.C", fmt(c.svm.C)},
      {"svm.gamma", c.svm.gamma > 0 ? fmt(c.svm.gamma) : "auto"},
      {"svm.tol", fmt(c.svm.tol)},
      {"svm.max_iter", std::to_string(c.svm.max_iter)},
      {"seed", std::to_string(c.split_seed)},
      {"min_train_frames", std::to_string(c.min_train_frames)},
      {"label_threshold", fmt(c.label_threshold)},
  };
}

void validate(const PipelineConfig& c) {
  if (c.manifest_path.empty()) throw Error(Errc::InvalidParam, "manifest is required");
  if (c.output_dir.empty()) throw Error(Errc::InvalidParam, "output_dir is required");
  if (c.algorithm == Algorithm::Slic) {
    if (c.superpixel_counts.empty()) throw Error(Errc::InvalidParam, "counts must not be empty");
    for (int n : c.superpixel_counts) {
      if (n < 4) throw Error(Errc::InvalidParam, "superpixel count below 4");
    }
    if (!(c.slic.compactness > 0)) throw Error(Errc::InvalidParam, "compactness must be > 0");
    if (c.slic.iterations < 1) throw Error(Errc::InvalidParam, "iterations must be >= 1");
  } else {
    validate(c.qs);
  }
  validate(c.lbp);
  validate(c.selection);
  if (c.selection.keep > kFeatureCount) throw Error(Errc::InvalidParam, "keep must be <= 35");
  validate(c.svm);
  if (c.min_train_frames < 0) throw Error(Errc::InvalidParam, "min_train_frames < 0");
  if (!(c.label_threshold >= 0 && c.label_threshold <= 1)) {
    throw Error(Errc::InvalidParam, "label_threshold must lie in [0, 1]");
  }
}

}  // namespace capseg
