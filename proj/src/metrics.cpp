#include "capseg/error.hpp"
#include "capseg/eval.hpp"

namespace capseg {

PixelConfusion pixel_confusion(const SuperpixelMap& map, std::span<const std::uint8_t> predicted,
                               const Mask& mask) {
  if (mask.width() != map.width() || mask.height() != map.height()) {
    throw Error(Errc::DimensionMismatch, "mask and superpixel map differ in size");
  }
  if (predicted.size() != static_cast<std::size_t>(map.count())) {
    throw Error(Errc::DimensionMismatch, "prediction count differs from superpixel count");
  }
  PixelConfusion conf;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const bool abnormal = predicted[static_cast<std::size_t>(map[i])] != 0;
    if (mask[i]) {
      abnormal ? ++conf.tp : ++conf.fn;
    } else {
      abnormal ? ++conf.fp : ++conf.tn;
    }
  }
  return conf;
}

Measures measures(const PixelConfusion& c) {
  if (c.total() == 0) throw Error(Errc::EmptyConfusion, "confusion has no pixels");
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp), ratio(c.tp + c.tn, c.total()),
          ratio(c.tp, c.tp + c.fp)};
}

}  // namespace capseg
