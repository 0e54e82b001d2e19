#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "capseg/classify.hpp"
#include "capseg/features.hpp"
#include "capseg/superpixel.hpp"

namespace capseg {

enum class BenchStage { SegmentOnly, FullMethod };

std::string_view to_string(BenchStage stage);

struct BenchConfig {
  SlicParams slic;  // n_superpixels defaults to 100
  LbpParams lbp;
  std::vector<double> kernel_sizes{5.0, 10.0};
  std::vector<double> max_dists{10, 15, 20, 25, 30, 100, 1000};
  int warmup = 3;
};

struct BenchRow {
  std::string algorithm;  // "slic" or "quickshift"
  std::string params;
  double kernel_size = 0;  // quick shift rows only
  double max_dist = 0;
  int frames = 0;
  double mean_seconds = 0;
  double std_seconds = 0;
  BenchStage stage = BenchStage::SegmentOnly;
  std::vector<double> samples;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::map<std::string, std::string> metadata;
};

/// Wall-clock timing on the calling thread: SLIC segmentation, SLIC full
/// method (segmentation + features + prediction with `model`) and quick shift
/// over the kernel-size x max-distance grid. Every configuration runs on a
/// frame before the next frame starts, alternating direction between frames.
BenchResult run_bench(const std::vector<Frame>& frames, const BenchConfig& config,
                      const SvmModel& model);

std::string bench_csv(const BenchResult& result);
std::string bench_summary(const BenchResult& result);

}  // namespace capseg
