#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "capseg/error.hpp"
#include "capseg/features.hpp"

namespace capseg {

int CodeMap::levels() const {
  return kind == CodeKind::Lbp ? (1 << neighbors) : uniform_bin_count(neighbors);
}

void validate(const LbpParams& params) {
  if (params.neighbors < 4 || params.neighbors > 24) {
    throw Error(Errc::InvalidParam, "LBP neighbors must lie in [4, 24]");
  }
  if (!(params.radius >= 1.0)) throw Error(Errc::InvalidParam, "LBP radius must be >= 1");
}

int lbp_transitions(std::uint32_t code, int neighbors) {
  const std::uint32_t mask = neighbors >= 32 ? ~0u : ((1u << neighbors) - 1u);
  code &= mask;
  const std::uint32_t rotated = ((code >> 1) | (code << (neighbors - 1))) & mask;
  return std::popcount(code ^ rotated);
}

std::vector<std::uint32_t> uniform_codes(int neighbors) {
  const std::uint32_t mask = (1u << neighbors) - 1u;
  std::vector<std::uint32_t> codes{0u, mask};
  // A run of `len` ones starting at bit `start`, wrapping around.
  for (int len = 1; len < neighbors; ++len) {
    const std::uint32_t run = (1u << len) - 1u;
    for (int start = 0; start < neighbors; ++start) {
      const std::uint32_t code =
          ((run << start) | (start == 0 ? 0u : run >> (neighbors - start))) & mask;
      codes.push_back(code);
    }
  }
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  return codes;
}

int uniform_bin(std::uint32_t code, const std::vector<std::uint32_t>& uniform) {
  const auto it = std::lower_bound(uniform.begin(), uniform.end(), code);
  if (it != uniform.end() && *it == code) return static_cast<int>(it - uniform.begin());
  return static_cast<int>(uniform.size());
}

std::pair<double, double> lbp_offset(int p, const LbpParams& params) {
  const double angle = 2.0 * std::numbers::pi * p / params.neighbors;
  double dx = params.radius * std::cos(angle);
  double dy = -params.radius * std::sin(angle);
  if (params.sampling == LbpSampling::Nearest) return {std::round(dx), std::round(dy)};
  // Snap trig round-off so axis-aligned samples hit pixels exactly.
  if (std::abs(dx - std::round(dx)) < 1e-9) dx = std::round(dx);
  if (std::abs(dy - std::round(dy)) < 1e-9) dy = std::round(dy);
  return {dx, dy};
}

namespace {

// Bilinear sample with replicate padding. The lerp form is exact on flat
// patches, so a constant raster compares equal to its centre.
double sample(const GrayImage& gray, double fx, double fy) {
  const int w = gray.width();
  const int h = gray.height();
  const double x0f = std::floor(fx);
  const double y0f = std::floor(fy);
  const double tx = fx - x0f;
  const double ty = fy - y0f;
  const int x0 = static_cast<int>(x0f);
  const int y0 = static_cast<int>(y0f);
  auto px = [&](int x, int y) -> double {
    return gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  const double a = px(x0, y0);
  if (tx == 0.0 && ty == 0.0) return a;
  const double b = px(x0 + 1, y0);
  const double c = px(x0, y0 + 1);
  const double d = px(x0 + 1, y0 + 1);
  const double top = a + (b - a) * tx;
  const double bottom = c + (d - c) * tx;
  return top + (bottom - top) * ty;
}

}  // namespace

CodeMap lbp_map(const GrayImage& gray, const LbpParams& params) {
  validate(params);
  const double min_side = 2.0 * params.radius + 1.0;
  if (gray.width() < min_side || gray.height() < min_side) {
    throw Error(Errc::ImageTooSmall, "raster smaller than 2R+1 on a side");
  }
  const int w = gray.width();
  const int h = gray.height();
  std::vector<std::pair<double, double>> offsets;
  for (int p = 0; p < params.neighbors; ++p) offsets.push_back(lbp_offset(p, params));

  CodeMap out{Raster<std::int32_t>(w, h), CodeKind::Lbp, params.neighbors};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double center = gray.at(x, y);
      std::int32_t code = 0;
      for (int p = 0; p < params.neighbors; ++p) {
        const double g = sample(gray, x + offsets[p].first, y + offsets[p].second);
        if (g - center >= 0.0) code |= std::int32_t{1} << p;
      }
      out.codes.at(x, y) = code;
    }
  }
  return out;
}

CodeMap uniform_lbp_map(const GrayImage& gray, const LbpParams& params) {
  CodeMap out = lbp_map(gray, params);
  const auto uniform = uniform_codes(params.neighbors);
  for (auto& c : out.codes.values()) c = uniform_bin(static_cast<std::uint32_t>(c), uniform);
  out.kind = CodeKind::UniformLbp;
  return out;
}

}  // namespace capseg
