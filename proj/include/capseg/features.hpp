#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "capseg/image.hpp"
#include "capseg/matrix.hpp"
#include "capseg/superpixel.hpp"

namespace capseg {

enum class LbpSampling {
  Bilinear,  // interpolate non-integer neighbour positions
  Nearest,   // round neighbour positions to the pixel grid
};

struct LbpParams {
  int neighbors = 8;
  double radius = 1.0;
  LbpSampling sampling = LbpSampling::Bilinear;
};

enum class CodeKind { Lbp, UniformLbp };

struct CodeMap {
  Raster<std::int32_t> codes;
  CodeKind kind = CodeKind::Lbp;
  int neighbors = 8;

  /// Number of distinct code values: 2^P, or P(P-1)+3 uniform bins.
  int levels() const;
};

void validate(const LbpParams& params);

/// Circular 0/1 transitions of a P-bit code.
int lbp_transitions(std::uint32_t code, int neighbors);

/// All codes with at most two transitions, ascending. P(P-1)+2 entries.
std::vector<std::uint32_t> uniform_codes(int neighbors);

/// Bin of a code: its rank among uniform codes, or the shared last bin.
int uniform_bin(std::uint32_t code, const std::vector<std::uint32_t>& uniform);

inline int uniform_bin_count(int neighbors) { return neighbors * (neighbors - 1) + 3; }

/// Neighbour offset (dx, dy) of sample p: (R cos(2 pi p / P), -R sin(2 pi p / P)).
std::pair<double, double> lbp_offset(int p, const LbpParams& params);

CodeMap lbp_map(const GrayImage& gray, const LbpParams& params);
CodeMap uniform_lbp_map(const GrayImage& gray, const LbpParams& params);

inline constexpr int kChannelCount = 7;
inline constexpr int kMomentCount = 5;
inline constexpr int kFeatureCount = kChannelCount * kMomentCount;

/// Feature column name, e.g. "hue_skewness".
std::string feature_name(int column);

/// Mean, population variance, skewness, non-excess kurtosis and 256-bin
/// entropy (bits) of each superpixel. `levels` is the number of distinct
/// values the channel can take; values are binned as v * 256 / levels.
Matrix channel_moments(const Raster<std::int32_t>& channel, const SuperpixelMap& map,
                       int levels = 256);
Matrix channel_moments(const GrayImage& channel, const SuperpixelMap& map);

/// K x 35 matrix; columns are (gray, lbp, ulbp, hue, red, green, blue) x
/// (mean, variance, skewness, kurtosis, entropy).
Matrix extract_features(const Frame& frame, const SuperpixelMap& map, const LbpParams& params);

struct SuperpixelLabels {
  std::vector<std::uint8_t> labels;
  std::vector<double> overlap;
};

SuperpixelLabels label_superpixels(const SuperpixelMap& map, const Mask& mask,
                                   double threshold = 0.5);

/// CSV with header `label,overlap,f00..f34`.
void write_features_csv(const std::filesystem::path& path, const Matrix& features,
                        const SuperpixelLabels& labels);
Matrix read_features_csv(const std::filesystem::path& path, SuperpixelLabels* labels = nullptr);

}  // namespace capseg
