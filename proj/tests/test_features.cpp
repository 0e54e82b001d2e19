#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "capseg/channels.hpp"
#include "capseg/error.hpp"
#include "capseg/features.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace capseg;
using capseg::testing::TempDir;

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

const LbpParams kNearest{8, 1.0, LbpSampling::Nearest};

SuperpixelMap single_region(int w, int h) { return SuperpixelMap(Raster<std::int32_t>(w, h, 0), 1); }

void expect_rel(double got, double want, const char* what) {
  EXPECT_NEAR(got, want, 1e-9 * std::max(1.0, std::abs(want))) << what;
}

}  // namespace

TEST(Lbp, ConstantRasterGivesAllOnes) {
  const GrayImage g(10, 10, 42);
  for (auto s : {LbpSampling::Bilinear, LbpSampling::Nearest}) {
    for (double r : {1.0, 2.0, 3.0}) {
      const CodeMap m = lbp_map(g, LbpParams{8, r, s});
      for (auto c : m.codes.values()) ASSERT_EQ(c, 255);
    }
  }
}

TEST(Lbp, WorkedNeighbourhood) {
  GrayImage g(3, 3);
  g.at(1, 1) = 100;
  const int values[8] = {120, 110, 90, 80, 70, 100, 130, 140};
  for (int p = 0; p < 8; ++p) g.at(1 + oracle::kDx[p], 1 + oracle::kDy[p]) = static_cast<std::uint8_t>(values[p]);
  EXPECT_EQ(lbp_map(g, kNearest).codes.at(1, 1), 227);
}

TEST(Lbp, TooSmallRaster) {
  EXPECT_EQ(code_of([] { lbp_map(GrayImage(2, 2), LbpParams{}); }), Errc::ImageTooSmall);
  EXPECT_EQ(code_of([] { lbp_map(GrayImage(4, 4), LbpParams{8, 2.0}); }), Errc::ImageTooSmall);
  EXPECT_NO_THROW(lbp_map(GrayImage(5, 5), LbpParams{8, 2.0}));
}

TEST(Lbp, ParameterValidation) {
  EXPECT_EQ(code_of([] { validate(LbpParams{3, 1.0}); }), Errc::InvalidParam);
  EXPECT_EQ(code_of([] { validate(LbpParams{25, 1.0}); }), Errc::InvalidParam);
  EXPECT_EQ(code_of([] { validate(LbpParams{8, 0.5}); }), Errc::InvalidParam);
}

TEST(Lbp, IntegerSamplingMatchesBitOracle) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> d(0, 255);
  // 102 x 102 gives 10,000 interior neighbourhoods; borders check the padding.
  GrayImage g(102, 102);
  for (auto& v : g.values()) v = static_cast<std::uint8_t>(d(rng) % 16 * 17);  // many ties
  const CodeMap m = lbp_map(g, kNearest);
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      ASSERT_EQ(m.codes.at(x, y), oracle::lbp8(g, x, y)) << x << "," << y;
    }
  }
}

TEST(Lbp, BilinearMatchesIndependentInterpolation) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d(0, 255);
  GrayImage g(40, 30);
  for (auto& v : g.values()) v = static_cast<std::uint8_t>(d(rng));
  for (auto [p_count, radius] : {std::pair{8, 1.0}, std::pair{16, 2.0}, std::pair{12, 3.0}}) {
    const CodeMap m = lbp_map(g, LbpParams{p_count, radius});
    int compared = 0;
    for (int y = 0; y < g.height(); ++y) {
      for (int x = 0; x < g.width(); ++x) {
        long long code = 0;
        bool ambiguous = false;
        for (int p = 0; p < p_count; ++p) {
          const double a = 2 * std::numbers::pi * p / p_count;
          const double fx = x + radius * std::cos(a), fy = y - radius * std::sin(a);
          const double x0 = std::floor(fx), y0 = std::floor(fy);
          const double tx = fx - x0, ty = fy - y0;
          const int ix = static_cast<int>(x0), iy = static_cast<int>(y0);
          const double v = (1 - tx) * (1 - ty) * oracle::clamped(g, ix, iy) + tx * (1 - ty) * oracle::clamped(g, ix + 1, iy) +
                           (1 - tx) * ty * oracle::clamped(g, ix, iy + 1) + tx * ty * oracle::clamped(g, ix + 1, iy + 1);
          const double diff = v - g.at(x, y);
          if (std::abs(diff) < 1e-6) ambiguous = true;
          if (diff >= 0) code |= 1LL << p;
        }
        if (ambiguous) continue;
        ++compared;
        ASSERT_EQ(m.codes.at(x, y), code) << "P=" << p_count << " at " << x << "," << y;
      }
    }
    EXPECT_GT(compared, 1000);
  }
}

TEST(UniformLbp, TransitionsAndBins) {
  EXPECT_EQ(lbp_transitions(0b00001111u, 8), 2);
  EXPECT_EQ(lbp_transitions(0b01010101u, 8), 8);
  const auto u = uniform_codes(8);
  EXPECT_EQ(u.size(), 58u);
  EXPECT_EQ(uniform_bin_count(8), 59);
  const int b = uniform_bin(0b00001111u, u);
  EXPECT_LT(b, 58);
  EXPECT_EQ(uniform_bin(0b01010101u, u), 58);
}

TEST(UniformLbp, EnumerationMatchesTransitionCount) {
  for (int p : {4, 8, 12, 16}) {
    std::vector<std::uint32_t> brute;
    for (std::uint32_t c = 0; c < (1u << p); ++c) {
      if (oracle::circular_transitions(c, p) <= 2) brute.push_back(c);
    }
    EXPECT_EQ(uniform_codes(p), brute) << p;
    EXPECT_EQ(static_cast<int>(brute.size()), p * (p - 1) + 2);
    std::set<int> bins;
    for (auto c : brute) bins.insert(uniform_bin(c, brute));
    EXPECT_EQ(bins.size(), brute.size());  // injective on uniform codes
  }
}

TEST(UniformLbp, MapUsesBinIndices) {
  std::mt19937_64 rng(1);
  GrayImage g(30, 30);
  for (auto& v : g.values()) v = static_cast<std::uint8_t>(rng() % 256);
  const CodeMap raw = lbp_map(g, LbpParams{});
  const CodeMap uni = uniform_lbp_map(g, LbpParams{});
  const auto u = uniform_codes(8);
  EXPECT_EQ(uni.kind, CodeKind::UniformLbp);
  EXPECT_EQ(uni.levels(), 59);
  for (std::size_t i = 0; i < g.size(); ++i) {
    ASSERT_EQ(uni.codes[i], uniform_bin(static_cast<std::uint32_t>(raw.codes[i]), u));
  }
}

TEST(UniformLbp, QuarterTurnKeepsSymmetricPatternMass) {
  // Binary texture of squares on a constant background; rotating by 90
  // degrees cyclically shifts every code by two bits, so the mass of the
  // all-zero, all-one and miscellaneous bins is unchanged.
  GrayImage g(40, 40, 0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 25; ++k) {
    const int x = 3 + static_cast<int>(rng() % 30), y = 3 + static_cast<int>(rng() % 30);
    for (int dy = 0; dy < 4; ++dy) {
      for (int dx = 0; dx < 4; ++dx) g.at(x + dx, y + dy) = 200;
    }
  }
  GrayImage r(40, 40);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) r.at(y, 39 - x) = g.at(x, y);
  }
  auto hist = [](const GrayImage& im) {
    std::vector<int> h(59, 0);
    const CodeMap m = uniform_lbp_map(im, kNearest);
    for (auto c : m.codes.values()) ++h[static_cast<std::size_t>(c)];
    return h;
  };
  const auto a = hist(g), b = hist(r);
  const auto u = uniform_codes(8);
  for (std::uint32_t code : {0u, 255u}) {
    const auto bin = static_cast<std::size_t>(uniform_bin(code, u));
    EXPECT_EQ(a[bin], b[bin]) << code;
  }
  EXPECT_EQ(a[58], b[58]);
  // Rotating each uniform code by two bits maps one histogram onto the other.
  for (auto code : u) {
    const std::uint32_t rot = ((code << 2) | (code >> 6)) & 0xffu;
    EXPECT_EQ(a[static_cast<std::size_t>(uniform_bin(code, u))],
              b[static_cast<std::size_t>(uniform_bin(rot, u))])
        << code;
  }
}

TEST(Moments, ConstantRegion) {
  const GrayImage g(16, 16, 7);
  const Matrix m = channel_moments(g, single_region(16, 16));
  EXPECT_EQ(m.rows(), 1u);
  EXPECT_EQ(m(0, 0), 7.0);
  for (int c = 1; c < 5; ++c) EXPECT_EQ(m(0, static_cast<std::size_t>(c)), 0.0);
}

TEST(Moments, TwoPointDistribution) {
  GrayImage g(16, 16);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = i % 2 ? 255 : 0;
  const Matrix m = channel_moments(g, single_region(16, 16));
  EXPECT_DOUBLE_EQ(m(0, 0), 127.5);
  EXPECT_DOUBLE_EQ(m(0, 1), 16256.25);
  EXPECT_NEAR(m(0, 2), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(m(0, 3), 1.0);
  EXPECT_DOUBLE_EQ(m(0, 4), 1.0);
}

TEST(Moments, DimensionMismatch) {
  EXPECT_EQ(code_of([] { channel_moments(GrayImage(16, 16), single_region(17, 16)); }),
            Errc::DimensionMismatch);
}

TEST(Moments, MatchNaiveTwoPassOnRandomRegions) {
  std::mt19937_64 rng(12);
  Raster<std::int32_t> raw(48, 40);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 48; ++x) raw.at(x, y) = x / 12 + 4 * (y / 10);
  }
  const SuperpixelMap map(raw, 16);
  GrayImage g(48, 40);
  std::gamma_distribution<double> skewed(2.0, 30.0);
  for (auto& v : g.values()) v = static_cast<std::uint8_t>(std::min(255.0, skewed(rng)));
  Raster<std::int32_t> codes(48, 40);
  for (auto& v : codes.values()) v = static_cast<std::int32_t>(rng() % 59);

  const Matrix mg = channel_moments(g, map);
  const Matrix mc = channel_moments(codes, map, 59);
  for (int l = 0; l < 16; ++l) {
    std::vector<double> vg, vc;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (map[i] == l) {
        vg.push_back(g[i]);
        vc.push_back(codes[i]);
      }
    }
    const auto rl = static_cast<std::size_t>(l);
    for (auto [m, v, levels] : {std::tuple{&mg, &vg, 256}, std::tuple{&mc, &vc, 59}}) {
      const oracle::Moments n = oracle::moments(*v, levels);
      expect_rel((*m)(rl, 0), n.mean, "mean");
      expect_rel((*m)(rl, 1), n.var, "variance");
      expect_rel((*m)(rl, 2), n.skew, "skewness");
      expect_rel((*m)(rl, 3), n.kurt, "kurtosis");
      expect_rel((*m)(rl, 4), n.entropy, "entropy");
      EXPECT_GE((*m)(rl, 4), 0.0);
      EXPECT_LE((*m)(rl, 4), 8.0);
    }
  }
}

TEST(Features, ColumnLayout) {
  EXPECT_EQ(kFeatureCount, 35);
  EXPECT_EQ(feature_name(0), "gray_mean");
  EXPECT_EQ(feature_name(18), "hue_kurtosis");
  EXPECT_EQ(feature_name(34), "blue_entropy");
  std::mt19937_64 rng(6);
  const Frame f = capseg::testing::natural_frame(64, 48, rng);
  for (int n : {4, 25, 100}) {
    const auto map = slic_segment(f, SlicParams{n, 10, 10, true});
    for (auto p : {LbpParams{8, 1.0}, LbpParams{16, 2.0}, LbpParams{4, 3.0}}) {
      const Matrix m = extract_features(f, map, p);
      EXPECT_EQ(m.cols(), 35u);
      EXPECT_EQ(m.rows(), static_cast<std::size_t>(map.count()));
    }
  }
}

TEST(Features, ConstantFrameRowsIdentical) {
  const Frame f(64, 64, Rgb{30, 160, 90});
  const auto map = slic_segment(f, SlicParams{16, 10, 10, true});
  ASSERT_GT(map.count(), 1);
  const Matrix m = extract_features(f, map, LbpParams{});
  for (std::size_t r = 1; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) EXPECT_EQ(m(r, c), m(0, c));
  }
}

TEST(Features, SingleRegionEqualsWholeImage) {
  std::mt19937_64 rng(9);
  const Frame f = capseg::testing::random_frame(32, 24, rng);
  const Matrix m = extract_features(f, single_region(32, 24), LbpParams{});
  ASSERT_EQ(m.rows(), 1u);
  const ChannelStack s = derive_channels(f);
  const GrayImage* direct[] = {&s.gray, nullptr, nullptr, &s.hue, &s.red, &s.green, &s.blue};
  for (int ch = 0; ch < 7; ++ch) {
    if (!direct[ch]) continue;
    std::vector<double> v(direct[ch]->values().begin(), direct[ch]->values().end());
    const oracle::Moments n = oracle::moments(v);
    const auto base = static_cast<std::size_t>(ch * 5);
    expect_rel(m(0, base), n.mean, "mean");
    expect_rel(m(0, base + 1), n.var, "var");
    expect_rel(m(0, base + 2), n.skew, "skew");
    expect_rel(m(0, base + 3), n.kurt, "kurt");
    expect_rel(m(0, base + 4), n.entropy, "entropy");
  }
  // The LBP channels are summarised from their code maps.
  const CodeMap lbp = lbp_map(s.gray, LbpParams{});
  std::vector<double> codes(lbp.codes.values().begin(), lbp.codes.values().end());
  expect_rel(m(0, 5), oracle::moments(codes, 256).mean, "lbp mean");
  expect_rel(m(0, 9), oracle::moments(codes, 256).entropy, "lbp entropy");
}

TEST(Features, RedBlobStandsOutInHue) {
  // Crimson blob (hue near 353 degrees) on a neutral background (hue 0).
  Frame f(128, 128, Rgb{128, 128, 128});
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      if (std::hypot(x - 64, y - 64) < 30) f.at(x, y) = {220, 40, 60};
    }
  }
  const auto map = slic_segment(f, SlicParams{25, 10, 10, true});
  const Matrix m = extract_features(f, map, LbpParams{});
  Mask blob(128, 128, 0);
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) blob.at(x, y) = std::hypot(x - 64, y - 64) < 30;
  }
  const auto lab = label_superpixels(map, blob);
  const std::size_t hue_mean = 15;
  int blob_rows = 0, bg_rows = 0;
  for (std::size_t a = 0; a < m.rows(); ++a) {
    if (lab.overlap[a] < 0.5) continue;
    ++blob_rows;
    for (std::size_t b = 0; b < m.rows(); ++b) {
      if (lab.overlap[b] != 0.0) continue;
      ++bg_rows;
      EXPECT_GT(std::abs(m(a, hue_mean) - m(b, hue_mean)), 10.0);
    }
  }
  EXPECT_GT(blob_rows, 0);
  EXPECT_GT(bg_rows, 0);
}

TEST(Labels, EmptyFullAndHalfMasks) {
  Raster<std::int32_t> raw(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) raw.at(x, y) = x < 8 ? 0 : 1;
  }
  const SuperpixelMap map(raw, 2);
  const auto none = label_superpixels(map, Mask(16, 16, 0));
  EXPECT_EQ(none.labels, (std::vector<std::uint8_t>{0, 0}));
  EXPECT_EQ(none.overlap, (std::vector<double>{0, 0}));
  const auto all = label_superpixels(map, Mask(16, 16, 1));
  EXPECT_EQ(all.labels, (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(all.overlap, (std::vector<double>{1, 1}));
  Mask half(16, 16, 0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 16; ++x) half.at(x, y) = 1;
  }
  const auto h = label_superpixels(map, half, 0.5);
  EXPECT_EQ(h.overlap, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(h.labels, (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(code_of([&] { label_superpixels(map, Mask(16, 17)); }), Errc::DimensionMismatch);
}

TEST(FeatureCsv, RoundTripIsExact) {
  TempDir dir;
  std::mt19937_64 rng(10);
  const Frame f = capseg::testing::natural_frame(64, 48, rng);
  const auto map = slic_segment(f, SlicParams{20, 10, 10, true});
  const Matrix m = extract_features(f, map, LbpParams{});
  Mask mask(64, 48, 0);
  for (int y = 10; y < 30; ++y) {
    for (int x = 5; x < 40; ++x) mask.at(x, y) = 1;
  }
  const auto lab = label_superpixels(map, mask);
  write_features_csv(dir / "f.csv", m, lab);
  std::ifstream in(dir / "f.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.substr(0, 22), "label,overlap,f00,f01,");
  EXPECT_EQ(header.substr(header.size() - 4), ",f34");
  SuperpixelLabels back;
  EXPECT_EQ(read_features_csv(dir / "f.csv", &back), m);
  EXPECT_EQ(back.labels, lab.labels);
  EXPECT_EQ(back.overlap, lab.overlap);
}
