#pragma once

#include <cstdint>
#include <vector>

#include "capseg/manifest.hpp"

namespace capseg {

struct SplitPlan {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

/// Patient-disjoint train/test split. For each disease class, one patient
/// that alone covers the missing training frames is drawn at random; when no
/// such patient exists, patients are taken by descending frame count until
/// `min_train_frames` is reached. Every record of a training patient goes to
/// the training side.
SplitPlan split_by_patient(const DatasetManifest& manifest, int min_train_frames,
                           std::uint64_t seed);

}  // namespace capseg
