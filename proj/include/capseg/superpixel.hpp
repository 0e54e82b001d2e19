#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "capseg/image.hpp"

namespace capseg {

/// Per-pixel superpixel labels in [0, K); every label occurs at least once.
class SuperpixelMap {
 public:
  SuperpixelMap() = default;
  /// Validates that labels lie in [0, count) and that each label occurs.
  SuperpixelMap(Raster<std::int32_t> labels, int count);

  int width() const noexcept { return labels_.width(); }
  int height() const noexcept { return labels_.height(); }
  int count() const noexcept { return count_; }
  std::size_t size() const noexcept { return labels_.size(); }

  std::int32_t operator[](std::size_t i) const { return labels_[i]; }
  std::int32_t at(int x, int y) const { return labels_.at(x, y); }
  const Raster<std::int32_t>& labels() const noexcept { return labels_; }

  /// Pixel count per label.
  std::vector<std::size_t> region_sizes() const;

  bool operator==(const SuperpixelMap&) const = default;

 private:
  Raster<std::int32_t> labels_;
  int count_ = 0;
};

struct SlicParams {
  int n_superpixels = 100;
  double compactness = 10.0;
  int iterations = 10;
  bool enforce_bounds = true;
};

struct SlicCenter {
  double x = 0, y = 0;
  double r = 0, g = 0, b = 0;
};

struct QsParams {
  double kernel_size = 5.0;
  double max_dist = 10.0;
};

/// Throws InvalidParam unless 4 <= n <= w*h/16, compactness > 0, iterations >= 1.
void validate(const SlicParams& params, int width, int height);
void validate(const QsParams& params);

/// Grid interval S = sqrt(w*h/n) used both for seeding and as the spatial
/// normaliser of the clustering distance.
double slic_grid_interval(int width, int height, int n);

/// Squared RGB gradient magnitude with clamped borders.
double slic_gradient(const Frame& frame, int x, int y);

/// Grid-seeded centers, each moved to the lowest-gradient pixel of its 3x3
/// neighbourhood. Ties keep the seed, then prefer smaller (y, x).
std::vector<SlicCenter> slic_init_centers(const Frame& frame, int n);

SuperpixelMap slic_segment(const Frame& frame, const SlicParams& params);

/// Splits labels into 4-connected fragments, merges every fragment smaller
/// than target_size / 2 into the neighbour sharing the longest boundary (ties
/// to the lower id) and compacts ids in raster order of first appearance.
/// target_size = 0 only splits.
SuperpixelMap enforce_connectivity(const Raster<std::int32_t>& labels, double target_size);
SuperpixelMap enforce_connectivity(const SuperpixelMap& map, double target_size);

/// Link forest produced by quick shift. parent[i] == i marks a root.
struct QuickshiftForest {
  int width = 0;
  int height = 0;
  std::vector<double> density;
  std::vector<std::int32_t> parent;
  std::vector<double> parent_distance;
};

/// Density order used for linking: higher density first, equal densities
/// ordered toward the lower linear index.
inline bool qs_ranks_above(const QuickshiftForest& f, std::size_t a, std::size_t b) {
  return f.density[a] > f.density[b] || (f.density[a] == f.density[b] && a < b);
}

QuickshiftForest quickshift_forest(const Frame& frame, const QsParams& params);

namespace detail {
/// Caps the vector kernels used by quick shift: 0 scalar, 1 AVX2, 2 AVX-512
/// (default). Results are identical at every level; tests compare them.
void quickshift_simd_level(int level);
}  // namespace detail

/// Quick shift segmentation: trees of the link forest, each split into
/// 4-connected pieces, compacted in raster order.
SuperpixelMap quickshift_segment(const Frame& frame, const QsParams& params);

/// 1 where a pixel's right or lower neighbour carries a different label.
Raster<std::uint8_t> boundary_mask(const SuperpixelMap& map);

bool is_four_connected(const SuperpixelMap& map);

/// 16-bit label PNG plus a `K=<count>` text sidecar (path with .txt extension).
void save_labels(const std::filesystem::path& png_path, const SuperpixelMap& map);
SuperpixelMap load_labels(const std::filesystem::path& png_path);
std::filesystem::path labels_sidecar(const std::filesystem::path& png_path);

}  // namespace capseg
