#include <cstdio>
#include <fstream>
#include <set>

#include "capseg/error.hpp"
#include "capseg/eval.hpp"

namespace capseg {

Report aggregate(std::span<const FrameResult> frames) {
  if (frames.empty()) throw Error(Errc::EmptyInput, "no frame results to aggregate");
  std::map<int, PixelConfusion> totals;
  std::map<std::pair<int, int>, PixelConfusion> per_disease;
  for (const auto& f : frames) {
    totals[f.superpixels] += f.confusion;
    per_disease[{f.superpixels, static_cast<int>(f.disease)}] += f.confusion;
  }
  Report report;
  for (const auto& [n, conf] : totals) {
    report.rows.push_back({"total", n, conf, measures(conf)});
    for (Disease d : kAllDiseases) {
      auto it = per_disease.find({n, static_cast<int>(d)});
      if (it == per_disease.end()) continue;
      report.rows.push_back({std::string(to_string(d)), n, it->second, measures(it->second)});
    }
  }
  report.metadata["averaging"] = "micro";
  return report;
}

std::string report_csv(const Report& report) {
  std::string out = "scope,N,sensitivity,specificity,accuracy,precision\n";
  auto cell = [](const std::optional<double>& v) -> std::string {
    if (!v) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return buf;
  };
  for (const auto& r : report.rows) {
    out += r.scope + "," + std::to_string(r.superpixels) + "," + cell(r.measures.sensitivity) +
           "," + cell(r.measures.specificity) + "," + cell(r.measures.accuracy) + "," +
           cell(r.measures.precision) + "\n";
  }
  return out;
}

std::filesystem::path report_metadata_path(const std::filesystem::path& csv_path) {
  std::filesystem::path meta = csv_path;
  meta.replace_extension(".meta.txt");
  return meta;
}

void write_report(const std::filesystem::path& csv_path, const Report& report) {
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + csv_path.string());
    out << report_csv(report);
    if (!out) throw Error(Errc::Io, "cannot write " + csv_path.string());
  }
  std::ofstream meta(report_metadata_path(csv_path), std::ios::binary);
  if (!meta) throw Error(Errc::Io, "cannot write metadata for " + csv_path.string());
  for (const auto& [k, v] : report.metadata) meta << k << '=' << v << '\n';
  for (const auto& r : report.rows) {
    meta << "confusion." << r.scope << '.' << r.superpixels << '=' << r.confusion.tp << ','
         << r.confusion.fn << ',' << r.confusion.tn << ',' << r.confusion.fp << '\n';
  }
}

}  // namespace capseg
