#include <cmath>

#include "capseg/error.hpp"
#include "capseg/features.hpp"

namespace capseg {

namespace {

template <typename T>
Matrix region_moments(const Raster<T>& channel, const SuperpixelMap& map, int levels) {
  if (channel.width() != map.width() || channel.height() != map.height()) {
    throw Error(Errc::DimensionMismatch, "channel and superpixel map differ in size");
  }
  if (levels < 1) throw Error(Errc::InvalidParam, "levels must be positive");
  const auto k = static_cast<std::size_t>(map.count());
  const auto values = channel.values();

  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto l = static_cast<std::size_t>(map[i]);
    sum[l] += static_cast<double>(values[i]);
    ++count[l];
  }
  std::vector<double> mean(k);
  for (std::size_t l = 0; l < k; ++l) mean[l] = sum[l] / static_cast<double>(count[l]);

  std::vector<double> m2(k, 0.0), m3(k, 0.0), m4(k, 0.0);
  std::vector<std::uint32_t> hist(k * 256, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto l = static_cast<std::size_t>(map[i]);
    const double d = static_cast<double>(values[i]) - mean[l];
    const double d2 = d * d;
    m2[l] += d2;
    m3[l] += d2 * d;
    m4[l] += d2 * d2;
    const long long v = static_cast<long long>(values[i]);
    const long long bin = v * 256 / levels;
    ++hist[l * 256 + static_cast<std::size_t>(bin < 0 ? 0 : (bin > 255 ? 255 : bin))];
  }

  Matrix out(k, kMomentCount);
  for (std::size_t l = 0; l < k; ++l) {
    const double n = static_cast<double>(count[l]);
    const double var = m2[l] / n;
    double entropy = 0.0;
    for (std::size_t b = 0; b < 256; ++b) {
      const std::uint32_t c = hist[l * 256 + b];
      if (c == 0) continue;
      const double p = c / n;
      entropy -= p * std::log2(p);
    }
    out(l, 0) = mean[l];
    out(l, 1) = var;
    if (var > 0.0) {
      out(l, 2) = (m3[l] / n) / (var * std::sqrt(var));
      out(l, 3) = (m4[l] / n) / (var * var);
    }
    out(l, 4) = entropy;
  }
  return out;
}

}  // namespace

Matrix channel_moments(const Raster<std::int32_t>& channel, const SuperpixelMap& map, int levels) {
  return region_moments(channel, map, levels);
}

Matrix channel_moments(const GrayImage& channel, const SuperpixelMap& map) {
  return region_moments(channel, map, 256);
}

}  // namespace capseg
