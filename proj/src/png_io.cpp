#include "capseg/png_io.hpp"

#include <png.h>

#include <cstring>
#include <string>
#include <vector>

#include "capseg/error.hpp"

namespace capseg {

namespace fs = std::filesystem;

namespace {

// RAII wrapper over libpng's simplified read API.
class PngReader {
 public:
  explicit PngReader(const fs::path& path) {
    if (!fs::exists(path)) throw Error(Errc::NotFound, path.string());
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image_, path.c_str()) == 0) {
      std::string message = image_.message;
      png_image_free(&image_);
      throw Error(Errc::UnsupportedFormat, path.string() + ": " + message);
    }
    path_ = path.string();
  }
  ~PngReader() { png_image_free(&image_); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  int width() const { return static_cast<int>(image_.width); }
  int height() const { return static_cast<int>(image_.height); }
  bool is_16bit() const { return (image_.format & PNG_FORMAT_FLAG_LINEAR) != 0; }

  template <typename T>
  std::vector<T> read(png_uint_32 format, std::size_t channels) {
    image_.format = format;
    std::vector<T> buffer(static_cast<std::size_t>(width()) * height() * channels);
    if (png_image_finish_read(&image_, nullptr, buffer.data(), 0, nullptr) == 0) {
      throw Error(Errc::UnsupportedFormat, path_ + ": " + image_.message);
    }
    return buffer;
  }

 private:
  png_image image_{};
  std::string path_;
};

void write_png(const fs::path& path, int width, int height, png_uint_32 format,
               const void* data) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr) == 0) {
    std::string message = image.message;
    png_image_free(&image);
    throw Error(Errc::Io, "cannot write " + path.string() + ": " + message);
  }
  png_image_free(&image);
}

void require_8bit(const PngReader& reader, const fs::path& path) {
  if (reader.is_16bit()) {
    throw Error(Errc::UnsupportedFormat, path.string() + ": more than 8 bits per channel");
  }
}

}  // namespace

Frame load_frame(const fs::path& path) {
  PngReader reader(path);
  require_8bit(reader, path);
  const int w = reader.width();
  const int h = reader.height();
  auto bytes = reader.read<std::uint8_t>(PNG_FORMAT_RGB, 3);
  std::vector<Rgb> pixels(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = {bytes[3 * i], bytes[3 * i + 1], bytes[3 * i + 2]};
  }
  return Frame(w, h, std::move(pixels));
}

GrayImage load_gray(const fs::path& path) {
  PngReader reader(path);
  require_8bit(reader, path);
  const int w = reader.width();
  const int h = reader.height();
  return GrayImage(w, h, reader.read<std::uint8_t>(PNG_FORMAT_GRAY, 1));
}

Mask load_mask(const fs::path& path) { return binarize(load_gray(path)); }

Raster<std::uint16_t> load_gray16(const fs::path& path) {
  PngReader reader(path);
  const int w = reader.width();
  const int h = reader.height();
  return Raster<std::uint16_t>(w, h, reader.read<std::uint16_t>(PNG_FORMAT_LINEAR_Y, 1));
}

void save_frame(const fs::path& path, const Frame& frame) {
  static_assert(sizeof(Rgb) == 3);
  write_png(path, frame.width(), frame.height(), PNG_FORMAT_RGB, frame.pixels().data());
}

void save_gray(const fs::path& path, const GrayImage& image) {
  write_png(path, image.width(), image.height(), PNG_FORMAT_GRAY, image.values().data());
}

void save_gray16(const fs::path& path, const Raster<std::uint16_t>& image) {
  write_png(path, image.width(), image.height(), PNG_FORMAT_LINEAR_Y, image.values().data());
}

void save_mask(const fs::path& path, const Mask& mask) {
  GrayImage out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 255 : 0;
  save_gray(path, out);
}

}  // namespace capseg
