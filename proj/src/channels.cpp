#include "capseg/channels.hpp"

#include <algorithm>
#include <cmath>

namespace capseg {

std::uint8_t luma(Rgb px) {
  const double y = 0.299 * px.r + 0.587 * px.g + 0.114 * px.b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

std::uint8_t hue_byte(Rgb px) {
  const int r = px.r, g = px.g, b = px.b;
  const int hi = std::max({r, g, b});
  const int lo = std::min({r, g, b});
  const double delta = hi - lo;
  if (delta == 0) return 0;
  double degrees;
  if (hi == r) {
    degrees = 60.0 * std::fmod((g - b) / delta + 6.0, 6.0);
  } else if (hi == g) {
    degrees = 60.0 * ((b - r) / delta + 2.0);
  } else {
    degrees = 60.0 * ((r - g) / delta + 4.0);
  }
  return static_cast<std::uint8_t>(std::clamp(std::lround(degrees / 360.0 * 255.0), 0L, 255L));
}

GrayImage to_gray(const Frame& frame) {
  GrayImage gray(frame.width(), frame.height());
  for (std::size_t i = 0; i < frame.size(); ++i) gray[i] = luma(frame[i]);
  return gray;
}

ChannelStack derive_channels(const Frame& frame) {
  const int w = frame.width();
  const int h = frame.height();
  ChannelStack stack{GrayImage(w, h), GrayImage(w, h), GrayImage(w, h), GrayImage(w, h),
                     GrayImage(w, h)};
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const Rgb px = frame[i];
    stack.gray[i] = luma(px);
    stack.hue[i] = hue_byte(px);
    stack.red[i] = px.r;
    stack.green[i] = px.g;
    stack.blue[i] = px.b;
  }
  return stack;
}

}  // namespace capseg
