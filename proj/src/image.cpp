#include "capseg/image.hpp"

#include <string>

#include "capseg/error.hpp"

namespace capseg {

namespace {

void check_frame_size(int width, int height) {
  if (width < kMinFrameSide || height < kMinFrameSide) {
    throw Error(Errc::InvalidParam, "frame " + std::to_string(width) + "x" +
                                        std::to_string(height) + " is below the " +
                                        std::to_string(kMinFrameSide) + " pixel minimum");
  }
}

}  // namespace

Frame::Frame(int width, int height, Rgb fill) {
  check_frame_size(width, height);
  pixels_ = Raster<Rgb>(width, height, fill);
}

Frame::Frame(int width, int height, std::vector<Rgb> pixels) {
  check_frame_size(width, height);
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(Errc::DimensionMismatch, "pixel count does not match frame dimensions");
  }
  pixels_ = Raster<Rgb>(width, height, std::move(pixels));
}

Mask binarize(const GrayImage& values) {
  Mask mask(values.width(), values.height());
  for (std::size_t i = 0; i < values.size(); ++i) mask[i] = values[i] != 0 ? 1 : 0;
  return mask;
}

}  // namespace capseg
