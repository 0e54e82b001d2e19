#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace capseg {

enum class Errc {
  NotFound,
  UnsupportedFormat,
  InvalidParam,
  InvalidManifest,
  ImageTooSmall,
  DimensionMismatch,
  EmptyManifest,
  SingleClass,
  NotConverged,
  CorruptModel,
  VersionMismatch,
  TooFewSamples,
  DegenerateGraph,
  EmptyConfusion,
  EmptyInput,
  TooFewFrames,
  Io,
};

std::string_view to_string(Errc code);

// Validation errors map to CLI exit code 2, everything else to 1.
bool is_validation_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace capseg
