#pragma once

#include "capseg/image.hpp"

namespace capseg {

/// Per-pixel scalar channels derived from a frame, each in [0, 255].
struct ChannelStack {
  GrayImage gray;
  GrayImage hue;
  GrayImage red;
  GrayImage green;
  GrayImage blue;
};

/// BT.601 luma, rounded to the nearest integer.
std::uint8_t luma(Rgb px);

/// HSV hue with [0, 360) degrees rescaled to [0, 255]; achromatic pixels get 0.
std::uint8_t hue_byte(Rgb px);

ChannelStack derive_channels(const Frame& frame);

GrayImage to_gray(const Frame& frame);

}  // namespace capseg
