#include "capseg/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "capseg/error.hpp"
#include "capseg/manifest.hpp"
#include "capseg/png_io.hpp"
#include "capseg/split.hpp"

namespace capseg {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

void write_atomically(const fs::path& path,
                      const std::function<void(const fs::path&)>& writer) {
  fs::path tmp = path;
  tmp += ".tmp";
  writer(tmp);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "cannot move " + tmp.string() + " into place: " + ec.message());
}

SuperpixelMap segment_frame(const Frame& frame, const PipelineConfig& config, int superpixels) {
  if (config.algorithm == Algorithm::Quickshift) return quickshift_segment(frame, config.qs);
  SlicParams params = config.slic;
  params.n_superpixels = superpixels;
  return slic_segment(frame, params);
}

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".capseg_write_probe";
  {
    std::ofstream out(probe, std::ios::binary);
    out << "probe";
    if (!out) throw Error(Errc::Io, "output directory not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct PreparedFrame {
  SuperpixelMap map;
  Matrix features;
  SuperpixelLabels labels;
  Mask mask;
};

// Settings that influence per-frame segmentation and features.
std::string stage_params(const PipelineConfig& config, int superpixels) {
  const auto all = describe(config);
  std::string text = "N=" + std::to_string(superpixels);
  for (const auto& [k, v] : all) {
    if (k.rfind("slic.", 0) == 0 || k.rfind("qs.", 0) == 0 || k.rfind("lbp.", 0) == 0 ||
        k == "algorithm" || k == "label_threshold") {
      text += ";" + k + "=" + v;
    }
  }
  return text;
}

PreparedFrame prepare_frame(const DatasetManifest& manifest, std::size_t index,
                            const PipelineConfig& config, int superpixels, const fs::path& stage_dir,
                            std::atomic<std::size_t>& cache_hits) {
  const ManifestRecord& record = manifest.records[index];
  const fs::path frame_path = manifest.resolve(record.frame_path);
  const std::string frame_bytes = read_bytes(frame_path);
  std::string mask_bytes;
  if (record.mask_path) mask_bytes = read_bytes(manifest.resolve(*record.mask_path));

  char prefix[16];
  std::snprintf(prefix, sizeof(prefix), "%04zu_", index);
  const std::string stem = prefix + frame_path.stem().string();
  const fs::path features_path = stage_dir / "features" / (stem + ".csv");
  const fs::path labels_path = stage_dir / "labels" / (stem + ".png");
  const fs::path key_path = stage_dir / "labels" / (stem + ".key");

  std::uint64_t key = fnv1a(frame_bytes);
  key = fnv1a(mask_bytes, key);
  key = fnv1a(stage_params(config, superpixels), key);
  const std::string key_text = hex64(key);

  PreparedFrame out;
  const Frame frame = load_frame(frame_path);
  out.mask = record.mask_path ? load_mask(manifest.resolve(*record.mask_path))
                              : Mask(frame.width(), frame.height());
  if (out.mask.width() != frame.width() || out.mask.height() != frame.height()) {
    throw Error(Errc::DimensionMismatch, "mask size differs from frame: " + record.frame_path);
  }

  if (config.use_cache && fs::exists(key_path) && read_bytes(key_path) == key_text) {
    try {
      out.map = load_labels(labels_path);
      out.features = read_features_csv(features_path, &out.labels);
      if (out.features.rows() == static_cast<std::size_t>(out.map.count())) {
        ++cache_hits;
        return out;
      }
    } catch (const Error&) {
      // Stale or damaged cache entry: recompute below.
    }
  }

  out.map = segment_frame(frame, config, superpixels);
  out.features = extract_features(frame, out.map, config.lbp);
  out.labels = label_superpixels(out.map, out.mask, config.label_threshold);

  fs::path tmp_labels = labels_path;
  tmp_labels.replace_filename(stem + ".tmp.png");
  save_labels(tmp_labels, out.map);
  fs::rename(labels_sidecar(tmp_labels), labels_sidecar(labels_path));
  fs::rename(tmp_labels, labels_path);
  write_atomically(features_path, [&](const fs::path& p) {
    write_features_csv(p, out.features, out.labels);
  });
  write_atomically(key_path, [&](const fs::path& p) {
    std::ofstream k(p, std::ios::binary);
    k << key_text;
    if (!k) throw Error(Errc::Io, "cannot write " + p.string());
  });
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  validate(config);
  ensure_writable(config.output_dir);

  const DatasetManifest manifest = read_manifest(config.manifest_path);
  const SplitPlan split = split_by_patient(manifest, config.min_train_frames, config.split_seed);
  if (split.test.empty()) throw Error(Errc::InvalidManifest, "split left no test frames");

  write_atomically(config.output_dir / "split.csv", [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    out << "record,patient_id,disease,frame_path,side\n";
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      const auto& r = manifest.records[i];
      const bool train = std::find(split.train.begin(), split.train.end(), i) != split.train.end();
      out << i << ',' << r.patient_id << ',' << to_string(r.disease) << ',' << r.frame_path << ','
          << (train ? "train" : "test") << '\n';
    }
    if (!out) throw Error(Errc::Io, "cannot write " + p.string());
  });

  std::vector<int> settings = config.superpixel_counts;
  if (config.algorithm == Algorithm::Quickshift) settings = {0};

  PipelineResult result;
  std::vector<FrameResult> frame_results;
  std::atomic<std::size_t> cache_hits{0};
  bool normal_in_test = false;

  for (int superpixels : settings) {
    const std::string tag =
        config.algorithm == Algorithm::Slic ? "N" + std::to_string(superpixels) : "qs";
    const fs::path stage_dir = config.output_dir / "stages" / tag;
    fs::create_directories(stage_dir / "features");
    fs::create_directories(stage_dir / "labels");
    fs::create_directories(stage_dir / "overlays");
    fs::create_directories(config.output_dir / "models");

    std::vector<PreparedFrame> frames(manifest.records.size());
    parallel_for(frames.size(), config.threads, [&](std::size_t i) {
      frames[i] = prepare_frame(manifest, i, config, superpixels, stage_dir, cache_hits);
    });

    Matrix train;
    std::vector<std::uint8_t> y;
    for (std::size_t i : split.train) {
      for (std::size_t r = 0; r < frames[i].features.rows(); ++r) {
        train.append_row(frames[i].features.row(r));
        y.push_back(frames[i].labels.labels[r]);
      }
    }

    const auto scores = laplacian_scores(train, config.selection);
    const FeatureRanking ranking = select_features(scores, config.selection.keep);
    write_atomically(stage_dir / "ranking.csv",
                     [&](const fs::path& p) { write_ranking_csv(p, ranking); });

    const SvmModel model = svm_train(train, y, config.svm, ranking.selected, superpixels);
    const fs::path model_path = config.output_dir / "models" / ("svm_" + tag + ".model");
    write_atomically(model_path, [&](const fs::path& p) { save_model(p, model); });
    result.model_paths.push_back(model_path);

    std::vector<FrameResult> stage_results(split.test.size());
    parallel_for(split.test.size(), config.threads, [&](std::size_t t) {
      const std::size_t i = split.test[t];
      const PreparedFrame& f = frames[i];
      const SvmPrediction pred = svm_predict(model, f.features);
      stage_results[t] = {manifest.records[i].disease, superpixels,
                          pixel_confusion(f.map, pred.labels, f.mask)};
      const Frame frame = load_frame(manifest.resolve(manifest.records[i].frame_path));
      char prefix[16];
      std::snprintf(prefix, sizeof(prefix), "%04zu_", i);
      const fs::path overlay_path =
          stage_dir / "overlays" /
          (prefix + fs::path(manifest.records[i].frame_path).stem().string() + ".png");
      const bool has_mask = manifest.records[i].mask_path.has_value();
      write_atomically(overlay_path, [&](const fs::path& p) {
        save_frame(p, render_overlay(frame, f.map, pred.labels, has_mask ? &f.mask : nullptr));
      });
    });
    for (std::size_t t = 0; t < split.test.size(); ++t) {
      if (stage_results[t].disease == Disease::Normal) normal_in_test = true;
      frame_results.push_back(stage_results[t]);
    }
  }

  result.report = aggregate(frame_results);
  auto& meta = result.report.metadata;
  for (const auto& [k, v] : describe(config)) meta["param." + k] = v;
  meta["seed"] = std::to_string(config.split_seed);
  meta["split.train_frames"] = std::to_string(split.train.size());
  meta["split.test_frames"] = std::to_string(split.test.size());
  meta["normal_frames_in_total"] = normal_in_test ? "included" : "none_in_test_split";
  meta["generated_utc"] = utc_timestamp();
  meta["threads"] = std::to_string(std::max(1, config.threads));

  result.report_path = config.output_dir / "report.csv";
  const fs::path meta_path = report_metadata_path(result.report_path);
  write_atomically(result.report_path, [&](const fs::path& p) {
    write_report(p, result.report);
    fs::rename(report_metadata_path(p), meta_path);
  });
  result.cache_hits = cache_hits;
  return result;
}

}  // namespace capseg
