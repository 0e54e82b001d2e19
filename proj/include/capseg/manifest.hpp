#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace capseg {

enum class Disease {
  Normal,
  Bleeding,
  Crohn,
  Lymphangiectasia,
  Xanthoma,
  LymphoidHyperplasia,
};

inline constexpr Disease kAllDiseases[] = {
    Disease::Normal,           Disease::Bleeding, Disease::Crohn,
    Disease::Lymphangiectasia, Disease::Xanthoma, Disease::LymphoidHyperplasia,
};

std::string_view to_string(Disease disease);
Disease parse_disease(std::string_view text);

struct ManifestRecord {
  std::string patient_id;
  Disease disease = Disease::Normal;
  std::string frame_path;
  std::optional<std::string> mask_path;
};

/// Frame list with per-frame patient and disease. Paths are stored as written;
/// `resolve` makes them absolute against the manifest's directory.
struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
};

/// Throws InvalidManifest on duplicate frame paths or a diseased record
/// without a mask.
void validate(const DatasetManifest& manifest);

DatasetManifest read_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view csv_text,
                               const std::filesystem::path& base_dir = {});
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace capseg
