#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "capseg/bench.hpp"
#include "capseg/classify.hpp"
#include "capseg/error.hpp"
#include "capseg/eval.hpp"
#include "capseg/features.hpp"
#include "capseg/manifest.hpp"
#include "capseg/pipeline.hpp"
#include "capseg/png_io.hpp"
#include "capseg/selection.hpp"
#include "capseg/superpixel.hpp"
#include "capseg/synth.hpp"

namespace fs = std::filesystem;
using namespace capseg;

namespace {

// Every PipelineConfig key is exposed as --<key> on every subcommand, plus
// --config for a key = value file. Flags override the file.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value configuration file");
    for (const auto& key : config_keys()) {
      options[key] = app->add_option("--" + key, values[key], "config key " + key);
    }
  }

  bool given(const std::string& key) const { return options.at(key)->count() > 0; }

  PipelineConfig build() const {
    PipelineConfig config;
    if (!config_file.empty()) load_config_file(config, config_file);
    for (const auto& [key, option] : options) {
      if (option->count() > 0) apply_config_key(config, key, values.at(key));
    }
    return config;
  }
};

struct Predictions {
  std::vector<std::uint8_t> labels;
  std::vector<double> decision;
};

void write_predictions(const fs::path& path, const SvmPrediction& pred) {
  write_atomically(path, [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    out << "superpixel,label,decision\n";
    char buf[64];
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%.17g\n", i, pred.labels[i], pred.decision[i]);
      out << buf;
    }
    if (!out) throw Error(Errc::Io, "cannot write " + p.string());
  });
}

Predictions read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::NotFound, path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("superpixel,label", 0) != 0) {
    throw Error(Errc::UnsupportedFormat, "not a predictions file: " + path.string());
  }
  Predictions out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string idx, label, decision;
    std::getline(row, idx, ',');
    std::getline(row, label, ',');
    std::getline(row, decision, ',');
    if (idx != std::to_string(out.labels.size()) || (label != "0" && label != "1")) {
      throw Error(Errc::UnsupportedFormat, "bad predictions row: " + line);
    }
    out.labels.push_back(label == "1" ? 1 : 0);
    out.decision.push_back(decision.empty() ? 0.0 : std::stod(decision));
  }
  return out;
}

void print_measures(const PixelConfusion& conf) {
  const Measures m = measures(conf);
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("NA");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return std::string(buf);
  };
  std::cout << "tp=" << conf.tp << " fn=" << conf.fn << " tn=" << conf.tn << " fp=" << conf.fp
            << "\n"
            << "sensitivity=" << cell(m.sensitivity) << " specificity=" << cell(m.specificity)
            << " accuracy=" << cell(m.accuracy) << " precision=" << cell(m.precision) << "\n";
}

int first_count(const PipelineConfig& config, const ConfigFlags& flags, int fallback) {
  return flags.given("counts") ? config.superpixel_counts.front() : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capseg: superpixel-based lesion segmentation for capsule endoscopy frames"};
  app.require_subcommand(1);

  // segment
  ConfigFlags seg_flags;
  std::string seg_input, seg_output, seg_overlay;
  auto* seg = app.add_subcommand("segment", "Segment one frame into superpixels");
  seg->add_option("--input", seg_input, "frame PNG")->required();
  seg->add_option("--output", seg_output, "label PNG (count sidecar written next to it)")
      ->required();
  seg->add_option("--overlay", seg_overlay, "optional PNG with superpixel borders");
  seg_flags.attach(seg);

  // features
  ConfigFlags feat_flags;
  std::string feat_input, feat_labels, feat_mask, feat_output;
  auto* feat = app.add_subcommand("features", "Extract the 35 texture/color moments per superpixel");
  feat->add_option("--input", feat_input, "frame PNG")->required();
  feat->add_option("--labels", feat_labels, "label PNG; segmented on the fly when omitted");
  feat->add_option("--mask", feat_mask, "ground-truth mask for superpixel labels");
  feat->add_option("--output", feat_output, "feature CSV")->required();
  feat_flags.attach(feat);

  // train
  ConfigFlags train_flags;
  std::vector<std::string> train_inputs;
  std::string train_output, train_ranking;
  auto* train = app.add_subcommand("train", "Rank features and train an SVM from feature CSVs");
  train->add_option("--features", train_inputs, "labelled feature CSVs")->required();
  train->add_option("--output", train_output, "model file")->required();
  train->add_option("--ranking", train_ranking, "optional feature ranking CSV");
  train_flags.attach(train);

  // predict
  ConfigFlags pred_flags;
  std::string pred_model, pred_features, pred_output;
  auto* pred = app.add_subcommand("predict", "Classify superpixels with a trained model");
  pred->add_option("--model", pred_model, "model file")->required();
  pred->add_option("--features", pred_features, "feature CSV")->required();
  pred->add_option("--output", pred_output, "predictions CSV")->required();
  pred_flags.attach(pred);

  // evaluate
  ConfigFlags eval_flags;
  std::string eval_labels, eval_predictions, eval_mask, eval_overlay, eval_frame;
  auto* eval = app.add_subcommand("evaluate", "Pixel-level measures for one predicted frame");
  eval->add_option("--labels", eval_labels, "label PNG")->required();
  eval->add_option("--predictions", eval_predictions, "predictions CSV")->required();
  eval->add_option("--mask", eval_mask, "ground-truth mask PNG")->required();
  eval->add_option("--frame", eval_frame, "frame PNG, needed for --overlay");
  eval->add_option("--overlay", eval_overlay, "optional overlay PNG");
  eval_flags.attach(eval);

  // pipeline
  ConfigFlags pipe_flags;
  auto* pipe = app.add_subcommand("pipeline", "Run the full experiment over a manifest");
  pipe_flags.attach(pipe);

  // bench
  ConfigFlags bench_flags;
  std::string bench_model, bench_output;
  int bench_frames = 10, bench_width = 512, bench_height = 512, bench_warmup = 3;
  std::vector<double> bench_sigmas{5, 10}, bench_taus{10, 15, 20, 25, 30, 100, 1000};
  auto* bench = app.add_subcommand("bench", "Time SLIC against the quick shift grid");
  bench->add_option("--frames", bench_frames, "number of frames")->capture_default_str();
  bench->add_option("--width", bench_width, "synthetic frame width")->capture_default_str();
  bench->add_option("--height", bench_height, "synthetic frame height")->capture_default_str();
  bench->add_option("--warmup", bench_warmup, "discarded warmup iterations")
      ->capture_default_str();
  bench->add_option("--kernel-sizes", bench_sigmas, "quick shift kernel sizes");
  bench->add_option("--max-dists", bench_taus, "quick shift maximum distances");
  bench->add_option("--model", bench_model, "model for the full-method timing");
  bench->add_option("--output", bench_output, "CSV output");
  bench_flags.attach(bench);

  // synth
  ConfigFlags synth_flags;
  std::string synth_output;
  SynthParams synth_params;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic lesion dataset");
  synth->add_option("--output", synth_output, "output directory")->required();
  synth->add_option("--frames", synth_params.frames, "frame count")->capture_default_str();
  synth->add_option("--patients", synth_params.patients, "patient count")->capture_default_str();
  synth->add_option("--width", synth_params.width, "frame width")->capture_default_str();
  synth->add_option("--height", synth_params.height, "frame height")->capture_default_str();
  synth_flags.attach(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*seg) {
      const PipelineConfig config = seg_flags.build();
      const Frame frame = load_frame(seg_input);
      const SuperpixelMap map =
          segment_frame(frame, config, first_count(config, seg_flags, 100));
      save_labels(seg_output, map);
      if (!seg_overlay.empty()) {
        const std::vector<std::uint8_t> none(static_cast<std::size_t>(map.count()), 0);
        save_frame(seg_overlay, render_overlay(frame, map, none));
      }
      std::cout << "superpixels=" << map.count() << "\n";
    } else if (*feat) {
      const PipelineConfig config = feat_flags.build();
      const Frame frame = load_frame(feat_input);
      const SuperpixelMap map = feat_labels.empty()
                                    ? segment_frame(frame, config, first_count(config, feat_flags, 100))
                                    : load_labels(feat_labels);
      if (map.labels().width() != frame.width() || map.labels().height() != frame.height()) {
        throw Error(Errc::DimensionMismatch, "labels do not match frame size");
      }
      const Mask mask = feat_mask.empty() ? Mask(frame.width(), frame.height()) : load_mask(feat_mask);
      const Matrix features = extract_features(frame, map, config.lbp);
      const SuperpixelLabels labels = label_superpixels(map, mask, config.label_threshold);
      write_atomically(feat_output,
                       [&](const fs::path& p) { write_features_csv(p, features, labels); });
      std::cout << "rows=" << features.rows() << " columns=" << features.cols() << "\n";
    } else if (*train) {
      const PipelineConfig config = train_flags.build();
      Matrix samples;
      std::vector<std::uint8_t> y;
      for (const auto& path : train_inputs) {
        SuperpixelLabels labels;
        const Matrix m = read_features_csv(path, &labels);
        for (std::size_t r = 0; r < m.rows(); ++r) {
          samples.append_row(m.row(r));
          y.push_back(labels.labels[r]);
        }
      }
      const FeatureRanking ranking =
          select_features(laplacian_scores(samples, config.selection), config.selection.keep);
      if (!train_ranking.empty()) {
        write_atomically(train_ranking, [&](const fs::path& p) { write_ranking_csv(p, ranking); });
      }
      const SvmModel model = svm_train(samples, y, config.svm, ranking.selected,
                                       first_count(config, train_flags, 0));
      write_atomically(train_output, [&](const fs::path& p) { save_model(p, model); });
      std::cout << "samples=" << samples.rows() << " support_vectors=" << model.support_vectors.rows()
                << " converged=" << (model.converged ? 1 : 0) << "\n";
    } else if (*pred) {
      (void)pred_flags.build();
      const SvmModel model = load_model(pred_model);
      const Matrix features = read_features_csv(pred_features);
      const SvmPrediction p = svm_predict(model, features);
      write_predictions(pred_output, p);
      std::size_t positive = 0;
      for (auto l : p.labels) positive += l;
      std::cout << "superpixels=" << p.labels.size() << " abnormal=" << positive << "\n";
    } else if (*eval) {
      (void)eval_flags.build();
      const SuperpixelMap map = load_labels(eval_labels);
      const Predictions p = read_predictions(eval_predictions);
      const Mask mask = load_mask(eval_mask);
      const PixelConfusion conf = pixel_confusion(map, p.labels, mask);
      print_measures(conf);
      if (!eval_overlay.empty()) {
        if (eval_frame.empty()) throw Error(Errc::InvalidParam, "--overlay needs --frame");
        save_frame(eval_overlay, render_overlay(load_frame(eval_frame), map, p.labels, &mask));
      }
    } else if (*pipe) {
      const PipelineConfig config = pipe_flags.build();
      if (config.manifest_path.empty()) throw Error(Errc::InvalidParam, "--manifest is required");
      if (config.output_dir.empty()) throw Error(Errc::InvalidParam, "--output_dir is required");
      const PipelineResult result = run_pipeline(config);
      std::cout << report_csv(result.report);
      std::cout << "report=" << result.report_path.string() << " cache_hits=" << result.cache_hits
                << "\n";
    } else if (*bench) {
      PipelineConfig config = bench_flags.build();
      config.threads = 1;
      std::vector<Frame> frames;
      std::vector<Mask> masks;
      if (!config.manifest_path.empty()) {
        const DatasetManifest manifest = read_manifest(config.manifest_path);
        for (const auto& r : manifest.records) {
          if (static_cast<int>(frames.size()) >= bench_frames) break;
          frames.push_back(load_frame(manifest.resolve(r.frame_path)));
          masks.push_back(r.mask_path ? load_mask(manifest.resolve(*r.mask_path))
                                      : Mask(frames.back().width(), frames.back().height()));
        }
      } else {
        for (int i = 0; i < bench_frames; ++i) {
          const Disease d = kAllDiseases[1 + static_cast<std::size_t>(i) % 5];
          SyntheticFrame s = synthesize_frame(d, bench_width, bench_height, config.split_seed + i,
                                              config.split_seed + i / 2);
          frames.push_back(std::move(s.frame));
          masks.push_back(std::move(s.mask));
        }
      }
      if (frames.size() < 5) {
        throw Error(Errc::TooFewFrames, "bench needs at least 5 frames");
      }
      BenchConfig bc;
      bc.slic = config.slic;
      bc.slic.n_superpixels = first_count(config, bench_flags, 100);
      bc.lbp = config.lbp;
      bc.kernel_sizes = bench_sigmas;
      bc.max_dists = bench_taus;
      bc.warmup = bench_warmup;
      SvmModel model;
      if (!bench_model.empty()) {
        model = load_model(bench_model);
      } else {
        Matrix samples;
        std::vector<std::uint8_t> y;
        for (std::size_t i = 0; i < frames.size(); ++i) {
          const SuperpixelMap map = slic_segment(frames[i], bc.slic);
          const Matrix f = extract_features(frames[i], map, bc.lbp);
          const SuperpixelLabels l = label_superpixels(map, masks[i], config.label_threshold);
          for (std::size_t r = 0; r < f.rows(); ++r) {
            samples.append_row(f.row(r));
            y.push_back(l.labels[r]);
          }
        }
        model = svm_train(samples, y, config.svm, {}, bc.slic.n_superpixels);
      }
      const BenchResult result = run_bench(frames, bc, model);
      const std::string csv = bench_csv(result);
      if (!bench_output.empty()) {
        write_atomically(bench_output, [&](const fs::path& p) {
          std::ofstream out(p, std::ios::binary);
          out << csv;
          if (!out) throw Error(Errc::Io, "cannot write " + p.string());
        });
      }
      std::cout << csv << "\n" << bench_summary(result);
      for (const auto& [k, v] : result.metadata) std::cout << k << "=" << v << "\n";
    } else if (*synth) {
      const PipelineConfig config = synth_flags.build();
      synth_params.seed = config.split_seed;
      const DatasetManifest manifest = generate_synthetic_dataset(synth_output, synth_params);
      std::cout << "frames=" << manifest.records.size() << " manifest="
                << (fs::path(synth_output) / "manifest.csv").string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return is_validation_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
