#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "capseg/error.hpp"
#include "capseg/superpixel.hpp"

namespace capseg {

SuperpixelMap::SuperpixelMap(Raster<std::int32_t> labels, int count)
    : labels_(std::move(labels)), count_(count) {
  if (count_ < 1) throw Error(Errc::InvalidParam, "superpixel count must be positive");
  std::vector<char> seen(static_cast<std::size_t>(count_), 0);
  for (std::int32_t l : labels_.values()) {
    if (l < 0 || l >= count_) {
      throw Error(Errc::InvalidParam, "label " + std::to_string(l) + " outside [0, " +
                                          std::to_string(count_) + ")");
    }
    seen[static_cast<std::size_t>(l)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(Errc::InvalidParam, "superpixel map has an empty label");
  }
}

std::vector<std::size_t> SuperpixelMap::region_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(count_), 0);
  for (std::int32_t l : labels_.values()) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

void validate(const SlicParams& params, int width, int height) {
  const long max_n = static_cast<long>(width) * height / 16;
  if (params.n_superpixels < 4 || params.n_superpixels > max_n) {
    throw Error(Errc::InvalidParam, "n_superpixels must lie in [4, " + std::to_string(max_n) +
                                        "], got " + std::to_string(params.n_superpixels));
  }
  if (!(params.compactness > 0)) throw Error(Errc::InvalidParam, "compactness must be > 0");
  if (params.iterations < 1) throw Error(Errc::InvalidParam, "iterations must be >= 1");
}

double slic_grid_interval(int width, int height, int n) {
  return std::sqrt(static_cast<double>(width) * height / n);
}

double slic_gradient(const Frame& frame, int x, int y) {
  const int w = frame.width();
  const int h = frame.height();
  auto sq = [](const Rgb& a, const Rgb& b) {
    const double dr = a.r - b.r, dg = a.g - b.g, db = a.b - b.b;
    return dr * dr + dg * dg + db * db;
  };
  const Rgb& left = frame.at(std::max(x - 1, 0), y);
  const Rgb& right = frame.at(std::min(x + 1, w - 1), y);
  const Rgb& up = frame.at(x, std::max(y - 1, 0));
  const Rgb& down = frame.at(x, std::min(y + 1, h - 1));
  return sq(right, left) + sq(down, up);
}

std::vector<SlicCenter> slic_init_centers(const Frame& frame, int n) {
  const int w = frame.width();
  const int h = frame.height();
  const long max_n = static_cast<long>(w) * h / 16;
  if (n < 4 || n > max_n) {
    throw Error(Errc::InvalidParam, "n_superpixels must lie in [4, " + std::to_string(max_n) + "]");
  }
  const double s = slic_grid_interval(w, h, n);
  const int nx = std::max(1, static_cast<int>(std::lround(w / s)));
  const int ny = std::max(1, static_cast<int>(std::lround(h / s)));
  const double step_x = static_cast<double>(w) / nx;
  const double step_y = static_cast<double>(h) / ny;

  std::vector<SlicCenter> centers;
  centers.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int sx = std::min(w - 1, static_cast<int>(step_x * (i + 0.5)));
      const int sy = std::min(h - 1, static_cast<int>(step_y * (j + 0.5)));
      int best_x = sx, best_y = sy;
      double best_g = slic_gradient(frame, sx, sy);
      for (int y = std::max(0, sy - 1); y <= std::min(h - 1, sy + 1); ++y) {
        for (int x = std::max(0, sx - 1); x <= std::min(w - 1, sx + 1); ++x) {
          const double g = slic_gradient(frame, x, y);
          if (g < best_g) {
            best_g = g;
            best_x = x;
            best_y = y;
          }
        }
      }
      const Rgb& px = frame.at(best_x, best_y);
      centers.push_back({static_cast<double>(best_x), static_cast<double>(best_y),
                         static_cast<double>(px.r), static_cast<double>(px.g),
                         static_cast<double>(px.b)});
    }
  }
  return centers;
}

namespace {

struct CenterSum {
  double x = 0, y = 0, r = 0, g = 0, b = 0;
  std::size_t count = 0;
};

}  // namespace

SuperpixelMap slic_segment(const Frame& frame, const SlicParams& params) {
  const int w = frame.width();
  const int h = frame.height();
  validate(params, w, h);

  auto centers = slic_init_centers(frame, params.n_superpixels);
  const double s = slic_grid_interval(w, h, params.n_superpixels);
  const double inv_color = 1.0 / (params.compactness * params.compactness);
  const double inv_space = 1.0 / (s * s);

  Raster<std::int32_t> labels(w, h, -1);
  Raster<double> best(w, h);
  std::vector<CenterSum> sums(centers.size());

  for (int iter = 0; iter < params.iterations; ++iter) {
    std::fill(best.values().begin(), best.values().end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const SlicCenter& c = centers[k];
      const int x0 = std::max(0, static_cast<int>(std::floor(c.x - s)));
      const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x + s)));
      const int y0 = std::max(0, static_cast<int>(std::floor(c.y - s)));
      const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y + s)));
      for (int y = y0; y <= y1; ++y) {
        const double dy = y - c.y;
        for (int x = x0; x <= x1; ++x) {
          const Rgb& px = frame.at(x, y);
          const double dr = px.r - c.r, dg = px.g - c.g, db = px.b - c.b;
          const double dx = x - c.x;
          const double d = (dr * dr + dg * dg + db * db) * inv_color + (dx * dx + dy * dy) * inv_space;
          const std::size_t i = labels.index(x, y);
          if (d < best[i]) {
            best[i] = d;
            labels[i] = static_cast<std::int32_t>(k);
          }
        }
      }
    }

    std::fill(sums.begin(), sums.end(), CenterSum{});
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::int32_t l = labels.at(x, y);
        if (l < 0) continue;
        const Rgb& px = frame.at(x, y);
        CenterSum& acc = sums[static_cast<std::size_t>(l)];
        acc.x += x;
        acc.y += y;
        acc.r += px.r;
        acc.g += px.g;
        acc.b += px.b;
        ++acc.count;
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const CenterSum& acc = sums[k];
      if (acc.count == 0) continue;
      const double inv = 1.0 / static_cast<double>(acc.count);
      centers[k] = {acc.x * inv, acc.y * inv, acc.r * inv, acc.g * inv, acc.b * inv};
    }
  }

  // Pixels outside every search window fall back to a global nearest-center scan.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (labels.at(x, y) >= 0) continue;
      const Rgb& px = frame.at(x, y);
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const SlicCenter& c = centers[k];
        const double dr = px.r - c.r, dg = px.g - c.g, db = px.b - c.b;
        const double dx = x - c.x, dy = y - c.y;
        const double d = (dr * dr + dg * dg + db * db) * inv_color + (dx * dx + dy * dy) * inv_space;
        if (d < best_d) {
          best_d = d;
          labels.at(x, y) = static_cast<std::int32_t>(k);
        }
      }
    }
  }

  const double target_size = static_cast<double>(w) * h / params.n_superpixels;
  return enforce_connectivity(labels, params.enforce_bounds ? target_size : 0.0);
}

}  // namespace capseg
