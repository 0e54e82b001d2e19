#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace capseg {

inline constexpr int kMinFrameSide = 16;

/// Dense row-major single-channel raster.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}
  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Raster<std::uint8_t>;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

/// 8-bit RGB frame. Both sides must be at least kMinFrameSide pixels.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, Rgb fill = {});
  Frame(int width, int height, std::vector<Rgb> pixels);

  int width() const noexcept { return pixels_.width(); }
  int height() const noexcept { return pixels_.height(); }
  std::size_t size() const noexcept { return pixels_.size(); }

  Rgb& at(int x, int y) { return pixels_.at(x, y); }
  const Rgb& at(int x, int y) const { return pixels_.at(x, y); }
  Rgb& operator[](std::size_t i) { return pixels_[i]; }
  const Rgb& operator[](std::size_t i) const { return pixels_[i]; }

  std::span<const Rgb> pixels() const noexcept { return pixels_.values(); }
  const Raster<Rgb>& raster() const noexcept { return pixels_; }

  bool operator==(const Frame&) const = default;

 private:
  Raster<Rgb> pixels_;
};

/// Binary ground-truth mask: 0 = normal, 1 = abnormal.
using Mask = Raster<std::uint8_t>;

/// Builds a mask from arbitrary 8-bit values (nonzero = abnormal).
Mask binarize(const GrayImage& values);

}  // namespace capseg
