#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "capseg/error.hpp"
#include "capseg/eval.hpp"
#include "test_util.hpp"

using namespace capseg;

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

// One superpixel per pixel, so predictions are a pixel raster.
SuperpixelMap identity_map(int w, int h) {
  Raster<std::int32_t> raw(w, h);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<std::int32_t>(i);
  return SuperpixelMap(raw, w * h);
}

PixelConfusion conf(std::uint64_t tp, std::uint64_t fn, std::uint64_t tn, std::uint64_t fp) {
  return {tp, fn, tn, fp};
}

}  // namespace

TEST(Measures, WorkedRatios) {
  const Measures m = measures(conf(3, 1, 4, 2));
  EXPECT_DOUBLE_EQ(*m.sensitivity, 0.75);
  EXPECT_NEAR(*m.specificity, 0.6667, 1e-4);
  EXPECT_DOUBLE_EQ(*m.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(*m.precision, 0.6);
}

TEST(Measures, PerfectAndUndefined) {
  const Measures p = measures(conf(5, 0, 9, 0));
  EXPECT_EQ(*p.sensitivity, 1.0);
  EXPECT_EQ(*p.specificity, 1.0);
  EXPECT_EQ(*p.accuracy, 1.0);
  EXPECT_EQ(*p.precision, 1.0);
  const Measures u = measures(conf(0, 4, 6, 0));
  EXPECT_FALSE(u.precision.has_value());
  EXPECT_EQ(*u.sensitivity, 0.0);
  EXPECT_EQ(code_of([] { measures(PixelConfusion{}); }), Errc::EmptyConfusion);
}

TEST(Measures, AccuracyIsWeightedSensitivityAndSpecificity) {
  std::mt19937_64 rng(60);
  for (int k = 0; k < 1000; ++k) {
    const PixelConfusion c = conf(1 + rng() % 1000, rng() % 1000, 1 + rng() % 1000, rng() % 1000);
    const Measures m = measures(c);
    const double combined = (*m.sensitivity * static_cast<double>(c.tp + c.fn) +
                             *m.specificity * static_cast<double>(c.tn + c.fp)) /
                            static_cast<double>(c.total());
    EXPECT_NEAR(*m.accuracy, combined, 1e-12);
  }
}

TEST(Confusion, ExactPredictionHasNoErrors) {
  std::mt19937_64 rng(61);
  Mask mask(20, 16);
  for (auto& v : mask.values()) v = rng() % 2;
  const auto map = identity_map(20, 16);
  std::vector<std::uint8_t> pred(mask.values().begin(), mask.values().end());
  const PixelConfusion c = pixel_confusion(map, pred, mask);
  EXPECT_EQ(c.fn, 0u);
  EXPECT_EQ(c.fp, 0u);
  EXPECT_EQ(c.total(), 320u);
}

TEST(Confusion, AllNormalPrediction) {
  Mask mask(512, 512, 0);
  for (int k = 0; k < 1000; ++k) mask[static_cast<std::size_t>(k) * 97] = 1;
  Raster<std::int32_t> raw(512, 512);
  for (int y = 0; y < 512; ++y) {
    for (int x = 0; x < 512; ++x) raw.at(x, y) = (x / 64) + 8 * (y / 64);
  }
  const SuperpixelMap map(raw, 64);
  const PixelConfusion c = pixel_confusion(map, std::vector<std::uint8_t>(64, 0), mask);
  EXPECT_EQ(c, conf(0, 1000, 261144, 0));
}

TEST(Confusion, InvertedPredictionSwapsCells) {
  std::mt19937_64 rng(62);
  Raster<std::int32_t> raw(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) raw.at(x, y) = x / 4 + 8 * (y / 4);
  }
  const SuperpixelMap map(raw, 64);
  Mask mask(32, 32);
  for (auto& v : mask.values()) v = rng() % 3 == 0;
  std::vector<std::uint8_t> pred(64), inv(64);
  for (std::size_t k = 0; k < 64; ++k) {
    pred[k] = rng() % 2;
    inv[k] = 1 - pred[k];
  }
  const PixelConfusion a = pixel_confusion(map, pred, mask);
  const PixelConfusion b = pixel_confusion(map, inv, mask);
  EXPECT_EQ(a.tp, b.fn);
  EXPECT_EQ(a.fn, b.tp);
  EXPECT_EQ(a.tn, b.fp);
  EXPECT_EQ(a.fp, b.tn);
}

TEST(Confusion, PixelOrderDoesNotMatter) {
  std::mt19937_64 rng(63);
  Mask mask(24, 20);
  std::vector<std::uint8_t> pred(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng() % 2;
    pred[i] = rng() % 2;
  }
  const PixelConfusion a = pixel_confusion(identity_map(24, 20), pred, mask);
  std::vector<std::size_t> perm(mask.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Mask m2(24, 20);
  std::vector<std::uint8_t> p2(mask.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    m2[i] = mask[perm[i]];
    p2[i] = pred[perm[i]];
  }
  EXPECT_EQ(pixel_confusion(identity_map(24, 20), p2, m2), a);
}

TEST(Confusion, DimensionErrors) {
  const auto map = identity_map(16, 16);
  EXPECT_EQ(code_of([&] { pixel_confusion(map, std::vector<std::uint8_t>(256), Mask(16, 17)); }),
            Errc::DimensionMismatch);
  EXPECT_EQ(code_of([&] { pixel_confusion(map, std::vector<std::uint8_t>(3), Mask(16, 16)); }),
            Errc::DimensionMismatch);
}

TEST(Aggregate, SingleFrameMatchesItsMeasures) {
  const std::vector<FrameResult> f{{Disease::Crohn, 100, conf(3, 1, 4, 2)}};
  const Report r = aggregate(f);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].scope, "total");
  EXPECT_EQ(r.rows[0].measures.accuracy, measures(conf(3, 1, 4, 2)).accuracy);
  EXPECT_EQ(r.rows[1].scope, "crohn");
}

TEST(Aggregate, IdenticalFramesPoolToSameMeasures) {
  const std::vector<FrameResult> f{{Disease::Bleeding, 50, conf(3, 1, 4, 2)},
                                   {Disease::Bleeding, 50, conf(3, 1, 4, 2)}};
  const Report r = aggregate(f);
  const Measures one = measures(conf(3, 1, 4, 2));
  EXPECT_EQ(r.rows[0].measures.sensitivity, one.sensitivity);
  EXPECT_EQ(r.rows[0].measures.specificity, one.specificity);
  EXPECT_EQ(r.rows[0].measures.accuracy, one.accuracy);
  EXPECT_EQ(r.rows[0].measures.precision, one.precision);
}

TEST(Aggregate, MicroAveragedSensitivity) {
  const std::vector<FrameResult> f{{Disease::Xanthoma, 25, conf(10, 0, 0, 0)},
                                   {Disease::Xanthoma, 25, conf(0, 10, 0, 0)}};
  EXPECT_DOUBLE_EQ(*aggregate(f).rows[0].measures.sensitivity, 0.5);
}

TEST(Aggregate, RowOrderAndBatchingAssociativity) {
  std::mt19937_64 rng(64);
  std::vector<FrameResult> frames;
  const int ns[] = {25, 100};
  for (int k = 0; k < 40; ++k) {
    frames.push_back({kAllDiseases[rng() % 6], ns[rng() % 2],
                      conf(rng() % 50, rng() % 50, 1 + rng() % 50, rng() % 50)});
  }
  const Report whole = aggregate(frames);
  EXPECT_EQ(whole.rows.front().scope, "total");
  EXPECT_EQ(whole.rows.front().superpixels, 25);
  EXPECT_EQ(whole.rows.back().superpixels, 100);
  // Pool two batches by hand and compare cells.
  std::vector<FrameResult> a(frames.begin(), frames.begin() + 17), b(frames.begin() + 17, frames.end());
  const Report ra = aggregate(a), rb = aggregate(b);
  for (const auto& row : whole.rows) {
    PixelConfusion sum;
    for (const Report* part : {&ra, &rb}) {
      for (const auto& pr : part->rows) {
        if (pr.scope == row.scope && pr.superpixels == row.superpixels) sum += pr.confusion;
      }
    }
    EXPECT_EQ(sum, row.confusion) << row.scope << " " << row.superpixels;
  }
  EXPECT_EQ(code_of([] { aggregate(std::vector<FrameResult>{}); }), Errc::EmptyInput);
}

TEST(Report, CsvFormat) {
  const std::vector<FrameResult> f{{Disease::Bleeding, 25, conf(0, 4, 6, 0)}};
  EXPECT_EQ(report_csv(aggregate(f)),
            "scope,N,sensitivity,specificity,accuracy,precision\n"
            "total,25,0.000000,1.000000,0.600000,NA\n"
            "bleeding,25,0.000000,1.000000,0.600000,NA\n");
}

TEST(Overlay, TintsPredictedRegionsOnly) {
  Raster<std::int32_t> raw(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) raw.at(x, y) = x < 16 ? 0 : 1;
  }
  const SuperpixelMap map(raw, 2);
  const Frame f(32, 32, Rgb{100, 100, 100});
  const Frame o = render_overlay(f, map, std::vector<std::uint8_t>{0, 1});
  EXPECT_EQ(o.at(2, 10), f.at(2, 10));
  EXPECT_NE(o.at(28, 10), f.at(28, 10));
}
