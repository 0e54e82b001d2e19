#include <fstream>
#include <string>

#include "capseg/error.hpp"
#include "capseg/png_io.hpp"
#include "capseg/superpixel.hpp"

namespace capseg {

namespace fs = std::filesystem;

fs::path labels_sidecar(const fs::path& png_path) {
  fs::path sidecar = png_path;
  sidecar.replace_extension(".txt");
  return sidecar;
}

void save_labels(const fs::path& png_path, const SuperpixelMap& map) {
  if (map.count() > 65536) throw Error(Errc::InvalidParam, "too many labels for 16-bit PNG");
  Raster<std::uint16_t> packed(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) packed[i] = static_cast<std::uint16_t>(map[i]);
  save_gray16(png_path, packed);
  std::ofstream out(labels_sidecar(png_path), std::ios::binary);
  out << "K=" << map.count() << '\n';
  if (!out) throw Error(Errc::Io, "cannot write " + labels_sidecar(png_path).string());
}

SuperpixelMap load_labels(const fs::path& png_path) {
  const fs::path sidecar = labels_sidecar(png_path);
  std::ifstream in(sidecar, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, sidecar.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("K=", 0) != 0) throw Error(Errc::InvalidParam, "bad sidecar " + sidecar.string());
  const int count = std::stoi(line.substr(2));
  const auto packed = load_gray16(png_path);
  Raster<std::int32_t> labels(packed.width(), packed.height());
  for (std::size_t i = 0; i < packed.size(); ++i) labels[i] = packed[i];
  return SuperpixelMap(std::move(labels), count);
}

}  // namespace capseg
