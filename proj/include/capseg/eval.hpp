#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capseg/image.hpp"
#include "capseg/manifest.hpp"
#include "capseg/superpixel.hpp"

namespace capseg {

struct PixelConfusion {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;

  std::uint64_t total() const noexcept { return tp + fn + tn + fp; }
  PixelConfusion& operator+=(const PixelConfusion& o) noexcept {
    tp += o.tp;
    fn += o.fn;
    tn += o.tn;
    fp += o.fp;
    return *this;
  }
  bool operator==(const PixelConfusion&) const = default;
};

/// Ratios with a zero denominator are left empty (reported as NA).
struct Measures {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> accuracy;
  std::optional<double> precision;
};

/// Broadcasts per-superpixel predictions to pixels and counts them against
/// the mask.
PixelConfusion pixel_confusion(const SuperpixelMap& map, std::span<const std::uint8_t> predicted,
                               const Mask& mask);

Measures measures(const PixelConfusion& conf);

struct FrameResult {
  Disease disease = Disease::Normal;
  int superpixels = 0;
  PixelConfusion confusion;
};

struct ReportRow {
  std::string scope;  // "total" or a disease name
  int superpixels = 0;
  PixelConfusion confusion;
  Measures measures;
};

struct Report {
  std::vector<ReportRow> rows;
  std::map<std::string, std::string> metadata;
};

/// Pools confusions per (scope, N) before computing ratios. `total` pools
/// every frame. Rows are ordered by N, then total, then disease order.
Report aggregate(std::span<const FrameResult> frames);

/// CSV `scope,N,sensitivity,specificity,accuracy,precision`.
std::string report_csv(const Report& report);
void write_report(const std::filesystem::path& csv_path, const Report& report);

/// Sidecar `key=value` metadata file next to the report CSV.
std::filesystem::path report_metadata_path(const std::filesystem::path& csv_path);

/// Frame with predicted-abnormal superpixels tinted and superpixel borders
/// drawn; ground-truth outline added when a mask is given.
Frame render_overlay(const Frame& frame, const SuperpixelMap& map,
                     std::span<const std::uint8_t> predicted, const Mask* truth = nullptr);

}  // namespace capseg
