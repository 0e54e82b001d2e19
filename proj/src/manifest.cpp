#include "capseg/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "capseg/error.hpp"

namespace capseg {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kHeader = "patient_id,disease,frame_path,mask_path";

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

// Minimal RFC 4180 field splitter: handles quoted fields and doubled quotes.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(Disease disease) {
  switch (disease) {
    case Disease::Normal: return "normal";
    case Disease::Bleeding: return "bleeding";
    case Disease::Crohn: return "crohn";
    case Disease::Lymphangiectasia: return "lymphangiectasia";
    case Disease::Xanthoma: return "xanthoma";
    case Disease::LymphoidHyperplasia: return "lymphoid_hyperplasia";
  }
  return "normal";
}

Disease parse_disease(std::string_view text) {
  for (Disease d : kAllDiseases) {
    if (to_string(d) == text) return d;
  }
  throw Error(Errc::InvalidManifest, "unknown disease '" + std::string(text) + "'");
}

fs::path DatasetManifest::resolve(const std::string& path) const {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

void validate(const DatasetManifest& manifest) {
  std::set<std::string> seen;
  for (const auto& record : manifest.records) {
    if (record.patient_id.empty()) {
      throw Error(Errc::InvalidManifest, "empty patient_id for " + record.frame_path);
    }
    if (!seen.insert(record.frame_path).second) {
      throw Error(Errc::InvalidManifest, "duplicate frame path " + record.frame_path);
    }
    if (record.disease != Disease::Normal && !record.mask_path) {
      throw Error(Errc::InvalidManifest,
                  "diseased frame without mask: " + record.frame_path);
    }
  }
}

DatasetManifest parse_manifest(std::string_view csv_text, const fs::path& base_dir) {
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  std::istringstream in{std::string(csv_text)};
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!header_seen) {
      std::string header = trim(line);
      if (header.rfind("\xEF\xBB\xBF", 0) == 0) header.erase(0, 3);
      if (header != kHeader) {
        throw Error(Errc::InvalidManifest, "expected header '" + std::string(kHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw Error(Errc::InvalidManifest,
                  "line " + std::to_string(line_no) + ": expected 4 fields");
    }
    ManifestRecord record;
    record.patient_id = fields[0];
    record.disease = parse_disease(fields[1]);
    record.frame_path = fields[2];
    if (!fields[3].empty()) record.mask_path = fields[3];
    manifest.records.push_back(std::move(record));
  }
  if (!header_seen) throw Error(Errc::InvalidManifest, "missing header");
  validate(manifest);
  return manifest;
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path());
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << kHeader << '\n';
  for (const auto& r : manifest.records) {
    out << quote_if_needed(r.patient_id) << ',' << to_string(r.disease) << ','
        << quote_if_needed(r.frame_path) << ',' << quote_if_needed(r.mask_path.value_or(""))
        << '\n';
  }
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

}  // namespace capseg
