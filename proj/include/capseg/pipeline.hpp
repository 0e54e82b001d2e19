#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "capseg/classify.hpp"
#include "capseg/eval.hpp"
#include "capseg/features.hpp"
#include "capseg/selection.hpp"
#include "capseg/superpixel.hpp"

namespace capseg {

enum class Algorithm { Slic, Quickshift };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

struct PipelineConfig {
  std::filesystem::path manifest_path;
  std::filesystem::path output_dir;
  std::vector<int> superpixel_counts{25, 50, 100, 250, 500};
  Algorithm algorithm = Algorithm::Slic;
  SlicParams slic;
  QsParams qs;
  LbpParams lbp;
  ScorerParams selection;
  SvmParams svm;
  std::uint64_t split_seed = 0;
  int min_train_frames = 6;
  double label_threshold = 0.5;
  int threads = 1;
  bool use_cache = true;
};

/// Flat `key = value` configuration. Every key is also a CLI flag.
std::vector<std::string> config_keys();
void apply_config_key(PipelineConfig& config, const std::string& key, const std::string& value);
void load_config_file(PipelineConfig& config, const std::filesystem::path& path);
/// Result-affecting settings as text. Paths, threads and cache are left out.
std::map<std::string, std::string> describe(const PipelineConfig& config);
void validate(const PipelineConfig& config);

/// Segmentation for one setting: SLIC at `superpixels`, or quick shift when
/// the algorithm says so (superpixels is then ignored).
SuperpixelMap segment_frame(const Frame& frame, const PipelineConfig& config, int superpixels);

struct PipelineResult {
  Report report;
  std::filesystem::path report_path;
  std::vector<std::filesystem::path> model_paths;
  std::size_t cache_hits = 0;
};

/// segment -> features -> patient split -> Laplacian selection -> SVM ->
/// pixel evaluation, once per superpixel count. Deterministic for a given
/// config and seed.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Runs `body(i)` for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Writes through a temporary sibling and renames it into place.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(const std::filesystem::path&)>& writer);

/// 64-bit FNV-1a, used for stage cache keys.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace capseg
