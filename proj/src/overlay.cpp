#include <algorithm>

#include "capseg/error.hpp"
#include "capseg/eval.hpp"

namespace capseg {

Frame render_overlay(const Frame& frame, const SuperpixelMap& map,
                     std::span<const std::uint8_t> predicted, const Mask* truth) {
  if (frame.width() != map.width() || frame.height() != map.height()) {
    throw Error(Errc::DimensionMismatch, "frame and superpixel map differ in size");
  }
  if (predicted.size() != static_cast<std::size_t>(map.count())) {
    throw Error(Errc::DimensionMismatch, "prediction count differs from superpixel count");
  }
  Frame out = frame;
  const auto edges = boundary_mask(map);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Rgb& px = out[i];
    if (predicted[static_cast<std::size_t>(map[i])]) {
      // 50% blend toward green.
      px.r = static_cast<std::uint8_t>(px.r / 2);
      px.g = static_cast<std::uint8_t>((px.g + 255) / 2);
      px.b = static_cast<std::uint8_t>(px.b / 2);
    }
    if (edges[i]) px = {255, 255, 0};
  }
  if (truth) {
    const int w = frame.width();
    const int h = frame.height();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto v = truth->at(x, y);
        const bool border = (x + 1 < w && truth->at(x + 1, y) != v) ||
                            (y + 1 < h && truth->at(x, y + 1) != v);
        if (border) out.at(x, y) = {0, 64, 255};
      }
    }
  }
  return out;
}

}  // namespace capseg
