#pragma once

#include <cstdint>
#include <filesystem>

#include "capseg/image.hpp"

namespace capseg {

/// Decodes an 8-bit PNG into an RGB frame. Grayscale inputs are replicated
/// across the three channels and alpha is dropped.
Frame load_frame(const std::filesystem::path& path);

/// Reads a mask PNG; any nonzero value is abnormal.
Mask load_mask(const std::filesystem::path& path);

GrayImage load_gray(const std::filesystem::path& path);
Raster<std::uint16_t> load_gray16(const std::filesystem::path& path);

void save_frame(const std::filesystem::path& path, const Frame& frame);
void save_gray(const std::filesystem::path& path, const GrayImage& image);
void save_gray16(const std::filesystem::path& path, const Raster<std::uint16_t>& image);

/// Encodes a mask as 0/255 so it is viewable.
void save_mask(const std::filesystem::path& path, const Mask& mask);

}  // namespace capseg
