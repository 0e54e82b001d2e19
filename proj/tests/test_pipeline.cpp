#include <gtest/gtest.h>

#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "capseg/bench.hpp"
#include "capseg/error.hpp"
#include "capseg/pipeline.hpp"
#include "capseg/png_io.hpp"
#include "capseg/synth.hpp"
#include "test_util.hpp"

using namespace capseg;
using capseg::testing::TempDir;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Io;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CAPSEG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Small dataset shared by the pipeline tests.
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new TempDir();
    SynthParams p;
    p.frames = 15;
    p.patients = 10;
    p.width = 96;
    p.height = 96;
    p.seed = 5;
    generate_synthetic_dataset(data_->path(), p);
  }
  static void TearDownTestSuite() {
    delete data_;
    data_ = nullptr;
  }

  static PipelineConfig config(const fs::path& out) {
    PipelineConfig c;
    c.manifest_path = data_->path() / "manifest.csv";
    c.output_dir = out;
    c.superpixel_counts = {25, 50};
    c.min_train_frames = 1;
    c.selection.keep = 10;
    return c;
  }

  static TempDir* data_;
};

TempDir* PipelineTest::data_ = nullptr;

}  // namespace

TEST(Config, FileThenOverrides) {
  TempDir dir;
  std::ofstream(dir / "c.cfg") << "# comment\ncounts = 25, 100\nalgorithm = quickshift\n"
                                  "qs.kernel_size = 3.5\nsvm.gamma = auto\nseed = 9\n";
  PipelineConfig c;
  load_config_file(c, dir / "c.cfg");
  EXPECT_EQ(c.superpixel_counts, (std::vector<int>{25, 100}));
  EXPECT_EQ(c.algorithm, Algorithm::Quickshift);
  EXPECT_EQ(c.qs.kernel_size, 3.5);
  EXPECT_EQ(c.svm.gamma, 0.0);
  EXPECT_EQ(c.split_seed, 9u);
  apply_config_key(c, "seed", "11");
  EXPECT_EQ(c.split_seed, 11u);
  const auto d = describe(c);
  EXPECT_EQ(d.at("counts"), "25,100");
  EXPECT_EQ(d.at("algorithm"), "quickshift");
}

TEST(Config, RejectsBadInput) {
  PipelineConfig c;
  EXPECT_EQ(code_of([&] { apply_config_key(c, "nope", "1"); }), Errc::InvalidParam);
  EXPECT_EQ(code_of([&] { apply_config_key(c, "svm.C", "abc"); }), Errc::InvalidParam);
  EXPECT_EQ(code_of([&] { apply_config_key(c, "cache", "maybe"); }), Errc::InvalidParam);
  TempDir dir;
  std::ofstream(dir / "bad.cfg") << "counts 25\n";
  EXPECT_EQ(code_of([&] { load_config_file(c, dir / "bad.cfg"); }), Errc::InvalidParam);
  // Every key that can change results is described; locations and
  // execution settings are not.
  const auto d = describe(PipelineConfig{});
  for (const auto& key : config_keys()) {
    const bool runtime = key == "manifest" || key == "output_dir" || key == "threads" || key == "cache";
    EXPECT_EQ(d.contains(key), !runtime) << key;
  }
}

TEST(Utilities, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
}

TEST(Utilities, ParallelForVisitsAllAndPropagates) {
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  EXPECT_TRUE(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
  EXPECT_EQ(code_of([] {
              parallel_for(10, 3, [](std::size_t i) {
                if (i == 7) throw Error(Errc::Io, "boom");
              });
            }),
            Errc::Io);
}

TEST(Utilities, AtomicWriteLeavesNoTemporary) {
  TempDir dir;
  write_atomically(dir / "x.txt", [](const fs::path& p) { std::ofstream(p) << "hello"; });
  EXPECT_EQ(slurp(dir / "x.txt"), "hello");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator{}), 1);
}

TEST(Synth, DeterministicFramesWithMasks) {
  const auto a = synthesize_frame(Disease::Bleeding, 64, 64, 3, 1);
  const auto b = synthesize_frame(Disease::Bleeding, 64, 64, 3, 1);
  EXPECT_EQ(a.frame, b.frame);
  EXPECT_EQ(a.mask, b.mask);
  std::size_t lesion = 0;
  for (auto v : a.mask.values()) lesion += v;
  EXPECT_GT(lesion, 0u);
  EXPECT_LT(lesion, a.mask.size());
  const auto n = synthesize_frame(Disease::Normal, 64, 64, 3, 1);
  for (auto v : n.mask.values()) EXPECT_EQ(v, 0);
}

TEST_F(PipelineTest, ProducesReportModelsAndArtifacts) {
  TempDir out;
  const PipelineResult r = run_pipeline(config(out.path()));
  EXPECT_TRUE(fs::exists(out / "report.csv"));
  EXPECT_TRUE(fs::exists(report_metadata_path(out / "report.csv")));
  EXPECT_TRUE(fs::exists(out / "split.csv"));
  ASSERT_EQ(r.model_paths.size(), 2u);
  for (const auto& m : r.model_paths) {
    const SvmModel model = load_model(m);
    EXPECT_EQ(model.dimension(), 10u);
    EXPECT_EQ(model.input_dim, 35);
  }
  // A total row for each N.
  int totals = 0;
  for (const auto& row : r.report.rows) totals += row.scope == "total";
  EXPECT_EQ(totals, 2);
  const std::string meta = slurp(report_metadata_path(out / "report.csv"));
  EXPECT_NE(meta.find("seed=0"), std::string::npos);
  EXPECT_NE(meta.find("averaging=micro"), std::string::npos);
  EXPECT_NE(meta.find("normal_frames_in_total="), std::string::npos);
  // Stage artifacts reload into the same shapes.
  const fs::path stage = out / "stages" / "N25";
  ASSERT_TRUE(fs::exists(stage / "ranking.csv"));
  int frames = 0;
  for (const auto& e : fs::directory_iterator(stage / "labels")) {
    if (e.path().extension() != ".png" || e.path().string().ends_with(".tmp.png")) continue;
    const SuperpixelMap map = load_labels(e.path());
    const fs::path feat = stage / "features" / (e.path().stem().string() + ".csv");
    ASSERT_TRUE(fs::exists(feat)) << feat;
    EXPECT_EQ(read_features_csv(feat).rows(), static_cast<std::size_t>(map.count()));
    ++frames;
  }
  EXPECT_EQ(frames, 15);
  // No temporaries left behind anywhere.
  for (const auto& e : fs::recursive_directory_iterator(out.path())) {
    EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos) << e.path();
  }
}

TEST_F(PipelineTest, DeterministicAndCached) {
  TempDir a, b;
  const PipelineResult ra = run_pipeline(config(a.path()));
  const PipelineResult rb = run_pipeline(config(b.path()));
  EXPECT_EQ(slurp(a / "report.csv"), slurp(b / "report.csv"));
  EXPECT_EQ(slurp(a / "models" / "svm_N25.model"), slurp(b / "models" / "svm_N25.model"));
  EXPECT_EQ(ra.cache_hits, 0u);
  const PipelineResult again = run_pipeline(config(a.path()));
  EXPECT_EQ(again.cache_hits, 30u);
  EXPECT_EQ(report_csv(again.report), report_csv(ra.report));
  PipelineConfig threaded = config(b.path());
  threaded.threads = 3;
  threaded.use_cache = false;
  EXPECT_EQ(report_csv(run_pipeline(threaded).report), report_csv(ra.report));
}

TEST_F(PipelineTest, SingleCountGivesOneModel) {
  TempDir out;
  PipelineConfig c = config(out.path());
  c.superpixel_counts = {100};
  const PipelineResult r = run_pipeline(c);
  ASSERT_EQ(r.model_paths.size(), 1u);
  EXPECT_EQ(load_model(r.model_paths[0]).trained_for, 100);
}

TEST_F(PipelineTest, QuickShiftRunsOnce) {
  TempDir out;
  PipelineConfig c = config(out.path());
  c.algorithm = Algorithm::Quickshift;
  c.qs = {3.0, 8.0};
  const PipelineResult r = run_pipeline(c);
  ASSERT_EQ(r.model_paths.size(), 1u);
  EXPECT_EQ(r.model_paths[0].filename(), "svm_qs.model");
}

TEST_F(PipelineTest, UnwritableOutputIsIoError) {
  if (geteuid() == 0) {
    // Root ignores directory permissions; a regular file in the way of the
    // output directory fails the same check.
    TempDir dir;
    std::ofstream(dir / "blocker") << "x";
    EXPECT_EQ(code_of([&] { run_pipeline(config(dir / "blocker" / "out")); }), Errc::Io);
    return;
  }
  TempDir dir;
  fs::create_directories(dir / "ro");
  fs::permissions(dir / "ro", fs::perms::owner_read | fs::perms::owner_exec);
  EXPECT_EQ(code_of([&] { run_pipeline(config(dir / "ro" / "out")); }), Errc::Io);
  fs::permissions(dir / "ro", fs::perms::owner_all);
}

TEST_F(PipelineTest, InvalidConfigRejectedBeforeWork) {
  TempDir out;
  PipelineConfig c = config(out / "never");
  c.superpixel_counts = {2};
  EXPECT_TRUE(is_validation_error(code_of([&] { run_pipeline(c); })));
  EXPECT_FALSE(fs::exists(out / "never"));
}

TEST(Bench, TooFewFrames) {
  std::mt19937_64 rng(70);
  const std::vector<Frame> one{capseg::testing::natural_frame(64, 64, rng)};
  EXPECT_EQ(code_of([&] { run_bench(one, BenchConfig{}, SvmModel{}); }), Errc::TooFewFrames);
}

TEST(Bench, SmallRunReportsEveryConfiguration) {
  std::mt19937_64 rng(71);
  std::vector<Frame> frames;
  Matrix x;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 5; ++i) frames.push_back(capseg::testing::natural_frame(64, 64, rng));
  for (int i = 0; i < 40; ++i) {
    std::vector<double> row(35);
    for (auto& v : row) v = static_cast<double>(rng() % 100);
    x.append_row(row);
    y.push_back(i % 2);
  }
  const SvmModel model = svm_train(x, y, SvmParams{});
  BenchConfig c;
  c.slic.n_superpixels = 16;
  c.kernel_sizes = {2.0};
  c.max_dists = {4, 8};
  const BenchResult r = run_bench(frames, c, model);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.frames, 5);
    EXPECT_EQ(row.samples.size(), 5u);
    EXPECT_GT(row.mean_seconds, 0.0);
  }
  const std::string header = "algorithm,stage,params,kernel_size,max_dist,frames,mean_seconds,std_seconds";
  EXPECT_EQ(bench_csv(r).substr(0, header.size()), header);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run_cli("synth --output " + (dir / "d").string() +
                    " --frames 5 --patients 5 --width 64 --height 64"),
            0);
  EXPECT_TRUE(fs::exists(dir / "d" / "manifest.csv"));
  // Unknown option and bad values are usage errors.
  EXPECT_EQ(run_cli("segment --bogus"), 2);
  EXPECT_EQ(run_cli("pipeline --manifest " + (dir / "d" / "manifest.csv").string() +
                    " --output_dir " + (dir / "o").string() + " --counts 2"),
            2);
  // Missing input file is a runtime failure.
  EXPECT_EQ(run_cli("segment --input " + (dir / "missing.png").string() + " --output " +
                    (dir / "l.png").string()),
            1);
}

TEST(Cli, SegmentFeaturesTrainPredictEvaluate) {
  TempDir dir;
  ASSERT_EQ(run_cli("synth --output " + dir.path().string() +
                    " --frames 5 --patients 5 --width 96 --height 96"),
            0);
  const auto m = read_manifest(dir / "manifest.csv");
  const fs::path frame = m.resolve(m.records[0].frame_path);
  const fs::path mask = m.resolve(*m.records[0].mask_path);
  const std::string l = (dir / "l.png").string(), f = (dir / "f.csv").string();
  ASSERT_EQ(run_cli("segment --input " + frame.string() + " --output " + l + " --counts 25"), 0);
  ASSERT_EQ(run_cli("features --input " + frame.string() + " --labels " + l + " --mask " +
                    mask.string() + " --output " + f),
            0);
  ASSERT_EQ(run_cli("train --features " + f + " --output " + (dir / "m.model").string() +
                    " --selection.keep 5"),
            0);
  ASSERT_EQ(run_cli("predict --model " + (dir / "m.model").string() + " --features " + f +
                    " --output " + (dir / "p.csv").string()),
            0);
  EXPECT_EQ(slurp(dir / "p.csv").substr(0, 25), "superpixel,label,decision");
  EXPECT_EQ(run_cli("evaluate --labels " + l + " --predictions " + (dir / "p.csv").string() +
                    " --mask " + mask.string()),
            0);
}
