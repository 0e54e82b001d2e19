#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "capseg/channels.hpp"
#include "capseg/error.hpp"
#include "capseg/features.hpp"

namespace capseg {

namespace {

constexpr std::array<const char*, kChannelCount> kChannelNames = {
    "gray", "lbp", "ulbp", "hue", "red", "green", "blue"};
constexpr std::array<const char*, kMomentCount> kMomentNames = {
    "mean", "variance", "skewness", "kurtosis", "entropy"};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string feature_name(int column) {
  if (column < 0 || column >= kFeatureCount) throw Error(Errc::InvalidParam, "feature column");
  return std::string(kChannelNames[static_cast<std::size_t>(column / kMomentCount)]) + "_" +
         kMomentNames[static_cast<std::size_t>(column % kMomentCount)];
}

Matrix extract_features(const Frame& frame, const SuperpixelMap& map, const LbpParams& params) {
  if (frame.width() != map.width() || frame.height() != map.height()) {
    throw Error(Errc::DimensionMismatch, "frame and superpixel map differ in size");
  }
  const ChannelStack stack = derive_channels(frame);
  const CodeMap lbp = lbp_map(stack.gray, params);
  CodeMap ulbp = lbp;
  const auto uniform = uniform_codes(params.neighbors);
  for (auto& c : ulbp.codes.values()) c = uniform_bin(static_cast<std::uint32_t>(c), uniform);
  ulbp.kind = CodeKind::UniformLbp;

  const std::array<Matrix, kChannelCount> blocks = {
      channel_moments(stack.gray, map),
      channel_moments(lbp.codes, map, lbp.levels()),
      channel_moments(ulbp.codes, map, ulbp.levels()),
      channel_moments(stack.hue, map),
      channel_moments(stack.red, map),
      channel_moments(stack.green, map),
      channel_moments(stack.blue, map),
  };

  Matrix out(static_cast<std::size_t>(map.count()), kFeatureCount);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t ch = 0; ch < blocks.size(); ++ch) {
      for (std::size_t m = 0; m < kMomentCount; ++m) {
        out(r, ch * kMomentCount + m) = blocks[ch](r, m);
      }
    }
  }
  return out;
}

SuperpixelLabels label_superpixels(const SuperpixelMap& map, const Mask& mask, double threshold) {
  if (mask.width() != map.width() || mask.height() != map.height()) {
    throw Error(Errc::DimensionMismatch, "mask and superpixel map differ in size");
  }
  const auto k = static_cast<std::size_t>(map.count());
  std::vector<std::size_t> inside(k, 0), total(k, 0);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto l = static_cast<std::size_t>(map[i]);
    ++total[l];
    if (mask[i]) ++inside[l];
  }
  SuperpixelLabels out{std::vector<std::uint8_t>(k), std::vector<double>(k)};
  for (std::size_t l = 0; l < k; ++l) {
    out.overlap[l] = static_cast<double>(inside[l]) / static_cast<double>(total[l]);
    out.labels[l] = out.overlap[l] >= threshold ? 1 : 0;
  }
  return out;
}

void write_features_csv(const std::filesystem::path& path, const Matrix& features,
                        const SuperpixelLabels& labels) {
  if (labels.labels.size() != features.rows() || labels.overlap.size() != features.rows()) {
    throw Error(Errc::DimensionMismatch, "label count differs from feature rows");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << "label,overlap";
  for (std::size_t c = 0; c < features.cols(); ++c) {
    char name[8];
    std::snprintf(name, sizeof(name), ",f%02zu", c);
    out << name;
  }
  out << '\n';
  for (std::size_t r = 0; r < features.rows(); ++r) {
    out << static_cast<int>(labels.labels[r]) << ',' << format_double(labels.overlap[r]);
    for (double v : features.row(r)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

Matrix read_features_csv(const std::filesystem::path& path, SuperpixelLabels* labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("label,overlap", 0) != 0) {
    throw Error(Errc::InvalidParam, "bad feature CSV header in " + path.string());
  }
  Matrix out;
  SuperpixelLabels parsed;
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string field;
    std::getline(fields, field, ',');
    parsed.labels.push_back(static_cast<std::uint8_t>(std::stoi(field)));
    std::getline(fields, field, ',');
    parsed.overlap.push_back(std::stod(field));
    row.clear();
    while (std::getline(fields, field, ',')) row.push_back(std::stod(field));
    if (!out.empty() && row.size() != out.cols()) {
      throw Error(Errc::InvalidParam, "ragged feature CSV " + path.string());
    }
    out.append_row(row);
  }
  if (labels) *labels = std::move(parsed);
  return out;
}

}  // namespace capseg
