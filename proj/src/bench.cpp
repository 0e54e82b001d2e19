#include "capseg/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "capseg/error.hpp"

namespace capseg {

std::string_view to_string(BenchStage stage) {
  return stage == BenchStage::SegmentOnly ? "segment_only" : "full_method";
}

namespace {

struct Job {
  BenchRow row;
  std::function<void(const Frame&)> run;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double seconds_of(const std::function<void(const Frame&)>& run, const Frame& frame) {
  const auto start = std::chrono::steady_clock::now();
  run(frame);
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

BenchResult run_bench(const std::vector<Frame>& frames, const BenchConfig& config,
                      const SvmModel& model) {
  if (frames.size() < 5) {
    throw Error(Errc::TooFewFrames, "bench needs at least 5 frames, got " +
                                        std::to_string(frames.size()));
  }
  if (config.warmup < 3) throw Error(Errc::InvalidParam, "bench warmup must be at least 3");
  validate(config.slic, frames.front().width(), frames.front().height());
  if (config.kernel_sizes.empty() || config.max_dists.empty()) {
    throw Error(Errc::InvalidParam, "quick shift grid is empty");
  }

  std::vector<Job> jobs;
  const std::string slic_params = "N=" + std::to_string(config.slic.n_superpixels) +
                                  ";m=" + format_double(config.slic.compactness);
  jobs.push_back({{"slic", slic_params, 0, 0, 0, 0, 0, BenchStage::SegmentOnly, {}},
                  [&](const Frame& f) { (void)slic_segment(f, config.slic); }});
  jobs.push_back({{"slic", slic_params, 0, 0, 0, 0, 0, BenchStage::FullMethod, {}},
                  [&](const Frame& f) {
                    const SuperpixelMap map = slic_segment(f, config.slic);
                    const Matrix features = extract_features(f, map, config.lbp);
                    (void)svm_predict(model, features);
                  }});
  for (double ks : config.kernel_sizes) {
    for (double md : config.max_dists) {
      QsParams qs{ks, md};
      validate(qs);
      jobs.push_back({{"quickshift", "sigma=" + format_double(ks) + ";tau=" + format_double(md),
                       ks, md, 0, 0, 0, BenchStage::SegmentOnly, {}},
                      [qs](const Frame& f) { (void)quickshift_segment(f, qs); }});
    }
  }

  // Warm caches and the allocator; the smallest quick shift setting stands in
  // for the rest of the grid.
  for (int w = 0; w < config.warmup; ++w) {
    const Frame& f = frames[static_cast<std::size_t>(w) % frames.size()];
    jobs[0].run(f);
    jobs[1].run(f);
    jobs[2].run(f);
  }

  // Configurations run back to back on each frame, in forward order on even
  // frames and reverse order on odd ones, so slow drift in machine speed
  // falls on every configuration alike.
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      Job& job = jobs[f % 2 == 0 ? k : jobs.size() - 1 - k];
      job.row.samples.push_back(seconds_of(job.run, frames[f]));
    }
  }

  BenchResult result;
  for (auto& job : jobs) {
    BenchRow& row = job.row;
    row.frames = static_cast<int>(row.samples.size());
    double sum = 0;
    for (double s : row.samples) sum += s;
    row.mean_seconds = sum / row.frames;
    double ss = 0;
    for (double s : row.samples) ss += (s - row.mean_seconds) * (s - row.mean_seconds);
    row.std_seconds = row.frames > 1 ? std::sqrt(ss / (row.frames - 1)) : 0.0;
    result.rows.push_back(std::move(row));
  }
  result.metadata["threads"] = "1";
  result.metadata["clock"] = "steady_clock";
  result.metadata["warmup"] = std::to_string(config.warmup);
  result.metadata["frames"] = std::to_string(frames.size());
  result.metadata["width"] = std::to_string(frames.front().width());
  result.metadata["height"] = std::to_string(frames.front().height());
  return result;
}

std::string bench_csv(const BenchResult& result) {
  std::string out = "algorithm,stage,params,kernel_size,max_dist,frames,mean_seconds,std_seconds\n";
  char buf[256];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%g,%g,%d,%.6f,%.6f\n", r.algorithm.c_str(),
                  std::string(to_string(r.stage)).c_str(), r.params.c_str(), r.kernel_size,
                  r.max_dist, r.frames, r.mean_seconds, r.std_seconds);
    out += buf;
  }
  return out;
}

std::string bench_summary(const BenchResult& result) {
  const BenchRow* slic_seg = nullptr;
  const BenchRow* slic_full = nullptr;
  const BenchRow* fastest_qs = nullptr;
  for (const auto& r : result.rows) {
    if (r.algorithm == "slic" && r.stage == BenchStage::SegmentOnly) slic_seg = &r;
    if (r.algorithm == "slic" && r.stage == BenchStage::FullMethod) slic_full = &r;
    if (r.algorithm == "quickshift" && (!fastest_qs || r.mean_seconds < fastest_qs->mean_seconds)) {
      fastest_qs = &r;
    }
  }
  std::string out;
  char buf[256];
  if (slic_seg) {
    std::snprintf(buf, sizeof(buf), "slic segmentation: %.4f s/frame\n", slic_seg->mean_seconds);
    out += buf;
  }
  if (slic_full) {
    std::snprintf(buf, sizeof(buf), "slic full method: %.4f s/frame\n", slic_full->mean_seconds);
    out += buf;
  }
  for (const auto& r : result.rows) {
    if (r.algorithm != "quickshift") continue;
    std::snprintf(buf, sizeof(buf), "quickshift %s: %.4f s/frame", r.params.c_str(),
                  r.mean_seconds);
    out += buf;
    if (slic_seg && slic_seg->mean_seconds > 0) {
      std::snprintf(buf, sizeof(buf), " (%.1fx slic)", r.mean_seconds / slic_seg->mean_seconds);
      out += buf;
    }
    out += '\n';
  }
  if (slic_seg && fastest_qs) {
    out += slic_seg->mean_seconds < fastest_qs->mean_seconds
               ? "slic is faster than every quick shift setting\n"
               : "some quick shift setting is at least as fast as slic\n";
  }
  return out;
}

}  // namespace capseg
