#include "capseg/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "capseg/error.hpp"
#include "capseg/png_io.hpp"

namespace capseg {

namespace fs = std::filesystem;

namespace {

constexpr std::array<Disease, 5> kLesionKinds = {Disease::Bleeding, Disease::Crohn,
                                                 Disease::Lymphangiectasia, Disease::Xanthoma,
                                                 Disease::LymphoidHyperplasia};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Value noise in [-1, 1]: random lattice every `cell` pixels, smoothstep
// interpolated.
Raster<float> value_noise(int w, int h, double cell, Rng& rng) {
  const int gw = static_cast<int>(std::ceil(w / cell)) + 2;
  const int gh = static_cast<int>(std::ceil(h / cell)) + 2;
  std::vector<float> lattice(static_cast<std::size_t>(gw) * gh);
  for (auto& v : lattice) v = static_cast<float>(uniform(rng, -1.0, 1.0));
  auto at = [&](int gx, int gy) { return lattice[static_cast<std::size_t>(gy) * gw + gx]; };
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  Raster<float> out(w, h);
  for (int y = 0; y < h; ++y) {
    const double fy = y / cell;
    const int gy = static_cast<int>(fy);
    const double ty = smooth(fy - gy);
    for (int x = 0; x < w; ++x) {
      const double fx = x / cell;
      const int gx = static_cast<int>(fx);
      const double tx = smooth(fx - gx);
      const double top = at(gx, gy) + (at(gx + 1, gy) - at(gx, gy)) * tx;
      const double bottom = at(gx, gy + 1) + (at(gx + 1, gy + 1) - at(gx, gy + 1)) * tx;
      out.at(x, y) = static_cast<float>(top + (bottom - top) * ty);
    }
  }
  return out;
}

struct Color {
  double r, g, b;
};

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Lesion colour and texture for one pixel of an archetype. `rho` is the
// normalised radius inside the ellipse (0 at the centre, ~1 at the rim).
Color lesion_color(Disease kind, const Color& tint, double rho, float fine, float coarse,
                   float dots) {
  switch (kind) {
    case Disease::Bleeding: {
      const double shade = 0.85 + 0.15 * rho + 0.05 * coarse;
      return {tint.r * shade + 6 * fine, tint.g * shade + 3 * fine, tint.b * shade + 3 * fine};
    }
    case Disease::Crohn: {
      if (rho > 0.78) return {200 + 10 * coarse, 70 + 10 * fine, 60 + 8 * fine};
      return {tint.r + 18 * coarse + 8 * fine, tint.g + 18 * coarse + 8 * fine,
              tint.b + 14 * coarse + 6 * fine};
    }
    case Disease::Lymphangiectasia: {
      const double spot = dots > 0.45f ? 22.0 : 0.0;
      return {std::min(255.0, tint.r + spot + 6 * fine), std::min(255.0, tint.g + spot + 6 * fine),
              std::min(255.0, tint.b + spot + 8 * fine)};
    }
    case Disease::Xanthoma:
      return {tint.r + 8 * fine + 5 * coarse, tint.g + 8 * fine + 5 * coarse,
              tint.b + 6 * fine + 4 * coarse};
    case Disease::LymphoidHyperplasia: {
      const double bump = 28.0 * dots;
      return {tint.r + bump, tint.g + bump, tint.b + bump};
    }
    case Disease::Normal:
      break;
  }
  return tint;
}

Color archetype_tint(Disease kind, Rng& rng) {
  const double j = uniform(rng, -8, 8);
  switch (kind) {
    case Disease::Bleeding: return {150 + j, 18 + j / 3, 22 + j / 3};
    case Disease::Crohn: return {228 + j / 2, 214 + j / 2, 172 + j};
    case Disease::Lymphangiectasia: return {232 + j / 2, 220 + j / 2, 198 + j};
    case Disease::Xanthoma: return {228 + j / 2, 192 + j, 92 + j};
    case Disease::LymphoidHyperplasia: return {222 + j / 2, 176 + j, 165 + j};
    case Disease::Normal: break;
  }
  return {0, 0, 0};
}

}  // namespace

SyntheticFrame synthesize_frame(Disease disease, int width, int height, std::uint64_t seed,
                                std::uint64_t patient_seed) {
  Rng patient_rng(patient_seed);
  const Color base{uniform(patient_rng, 180, 210), uniform(patient_rng, 105, 130),
                   uniform(patient_rng, 85, 105)};

  Rng rng(seed);
  const double scale = width / 512.0;
  const auto illumination = value_noise(width, height, 160 * scale, rng);
  const auto texture = value_noise(width, height, 12 * scale, rng);
  const auto grain = value_noise(width, height, 4, rng);
  const auto folds = value_noise(width, height, 110 * scale, rng);
  const auto fine = value_noise(width, height, 3, rng);
  const auto coarse = value_noise(width, height, 7, rng);
  const auto dots = value_noise(width, height, 5, rng);
  std::normal_distribution<double> sensor(0.0, 3.0);

  // Lesion geometry.
  const bool has_lesion = disease != Disease::Normal;
  const double cx = uniform(rng, 0.3, 0.7) * width;
  const double cy = uniform(rng, 0.3, 0.7) * height;
  const double ax = uniform(rng, 0.09, 0.2) * width;
  const double ay = uniform(rng, 0.09, 0.2) * height;
  const double theta = uniform(rng, 0, std::numbers::pi);
  const double phase1 = uniform(rng, 0, 2 * std::numbers::pi);
  const double phase2 = uniform(rng, 0, 2 * std::numbers::pi);
  const Color tint = has_lesion ? archetype_tint(disease, rng) : Color{0, 0, 0};
  const double edge_px = 1.5;

  SyntheticFrame out{Frame(width, height), Mask(width, height)};
  const double half_diag = std::hypot(width / 2.0, height / 2.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double r_edge = std::hypot(x - width / 2.0, y - height / 2.0) / half_diag;
      const double light = (1.0 + 0.15 * illumination.at(x, y)) * (1.0 - 0.3 * r_edge * r_edge);
      const double fold = std::abs(folds.at(x, y)) < 0.04 ? 0.82 : 1.0;
      const double tex = 9.0 * texture.at(x, y) + 4.0 * grain.at(x, y);
      Color c{(base.r + tex) * light * fold, (base.g + 0.8 * tex) * light * fold,
              (base.b + 0.7 * tex) * light * fold};

      if (has_lesion) {
        const double dx = x - cx, dy = y - cy;
        const double u = (dx * std::cos(theta) + dy * std::sin(theta)) / ax;
        const double v = (-dx * std::sin(theta) + dy * std::cos(theta)) / ay;
        const double rho = std::hypot(u, v);
        const double phi = std::atan2(v, u);
        const double boundary = 1.0 + 0.12 * std::sin(3 * phi + phase1) + 0.06 * std::sin(5 * phi + phase2);
        // Signed distance to the rim in pixels, roughly.
        const double signed_px = (boundary - rho) * std::min(ax, ay);
        const double alpha = std::clamp(0.5 + signed_px / (2 * edge_px), 0.0, 1.0);
        if (alpha > 0) {
          Color l = lesion_color(disease, tint, rho / boundary, fine.at(x, y), coarse.at(x, y),
                                 dots.at(x, y));
          const double lesion_light = 1.0 - 0.3 * r_edge * r_edge;
          c = {c.r * (1 - alpha) + l.r * lesion_light * alpha,
               c.g * (1 - alpha) + l.g * lesion_light * alpha,
               c.b * (1 - alpha) + l.b * lesion_light * alpha};
        }
        out.mask.at(x, y) = alpha >= 0.5 ? 1 : 0;
      }
      out.frame.at(x, y) = {to_byte(c.r + sensor(rng)), to_byte(c.g + sensor(rng)),
                            to_byte(c.b + sensor(rng))};
    }
  }
  return out;
}

DatasetManifest generate_synthetic_dataset(const fs::path& out_dir, const SynthParams& params) {
  if (params.patients < 1 || params.frames < params.patients) {
    throw Error(Errc::InvalidParam, "need at least one frame per patient");
  }
  fs::create_directories(out_dir / "frames");
  fs::create_directories(out_dir / "masks");

  Rng master(params.seed);
  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (int p = 0; p < params.patients; ++p) {
    const Disease disease =
        kLesionKinds[static_cast<std::size_t>(p * static_cast<int>(kLesionKinds.size()) / params.patients)];
    const std::uint64_t patient_seed = master();
    const int count = params.frames / params.patients + (p < params.frames % params.patients ? 1 : 0);
    char patient[16];
    std::snprintf(patient, sizeof(patient), "P%02d", p + 1);
    for (int f = 0; f < count; ++f) {
      const auto sample = synthesize_frame(disease, params.width, params.height, master(), patient_seed);
      char name[32];
      std::snprintf(name, sizeof(name), "%s_f%02d.png", patient, f);
      const std::string frame_rel = std::string("frames/") + name;
      const std::string mask_rel = std::string("masks/") + name;
      save_frame(out_dir / frame_rel, sample.frame);
      save_mask(out_dir / mask_rel, sample.mask);
      manifest.records.push_back({patient, disease, frame_rel, mask_rel});
    }
  }
  write_manifest(out_dir / "manifest.csv", manifest);
  return manifest;
}

}  // namespace capseg
