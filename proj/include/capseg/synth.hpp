#pragma once

#include <cstdint>
#include <filesystem>

#include "capseg/image.hpp"
#include "capseg/manifest.hpp"

namespace capseg {

struct SynthParams {
  int frames = 60;
  int patients = 10;
  int width = 512;
  int height = 512;
  std::uint64_t seed = 0;
};

struct SyntheticFrame {
  Frame frame;
  Mask mask;
};

/// One frame of textured pink-brown mucosa with an elliptical lesion drawn
/// from the archetype of `disease`. Normal frames have no lesion.
SyntheticFrame synthesize_frame(Disease disease, int width, int height, std::uint64_t seed,
                                std::uint64_t patient_seed);

/// Writes frames/, masks/ and manifest.csv under `out_dir`. Patients are
/// spread evenly over the five diseases and frames evenly over patients.
DatasetManifest generate_synthetic_dataset(const std::filesystem::path& out_dir,
                                           const SynthParams& params);

}  // namespace capseg
