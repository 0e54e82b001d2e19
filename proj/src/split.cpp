#include "capseg/split.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>

#include "capseg/error.hpp"

namespace capseg {

SplitPlan split_by_patient(const DatasetManifest& manifest, int min_train_frames,
                           std::uint64_t seed) {
  if (manifest.records.empty()) throw Error(Errc::EmptyManifest, "no records to split");
  if (min_train_frames < 0) throw Error(Errc::InvalidParam, "min_train_frames < 0");

  std::mt19937_64 rng(seed);
  std::set<std::string> train_patients;

  for (Disease disease : kAllDiseases) {
    std::map<std::string, int> frames_per_patient;
    for (const auto& r : manifest.records) {
      if (r.disease == disease) ++frames_per_patient[r.patient_id];
    }
    if (frames_per_patient.empty()) continue;

    int covered = 0;
    std::vector<std::pair<std::string, int>> candidates;
    for (const auto& [patient, count] : frames_per_patient) {
      if (train_patients.contains(patient)) {
        covered += count;
      } else {
        candidates.emplace_back(patient, count);
      }
    }
    const int need = min_train_frames - covered;
    if (need <= 0 || candidates.empty()) continue;

    std::vector<std::size_t> sufficient;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].second >= need) sufficient.push_back(i);
    }
    if (!sufficient.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, sufficient.size() - 1);
      train_patients.insert(candidates[sufficient[pick(rng)]].first);
      continue;
    }

    // Greedy: largest patients first, equal counts in seeded random order.
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [patient, count] : candidates) {
      if (covered >= min_train_frames) break;
      train_patients.insert(patient);
      covered += count;
    }
  }

  SplitPlan plan;
  plan.seed = seed;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    if (train_patients.contains(manifest.records[i].patient_id)) {
      plan.train.push_back(i);
    } else {
      plan.test.push_back(i);
    }
  }
  return plan;
}

}  // namespace capseg
