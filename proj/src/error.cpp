#include "capseg/error.hpp"

namespace capseg {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NotFound: return "NotFound";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::InvalidParam: return "InvalidParam";
    case Errc::InvalidManifest: return "InvalidManifest";
    case Errc::ImageTooSmall: return "ImageTooSmall";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyManifest: return "EmptyManifest";
    case Errc::SingleClass: return "SingleClass";
    case Errc::NotConverged: return "NotConverged";
    case Errc::CorruptModel: return "CorruptModel";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::DegenerateGraph: return "DegenerateGraph";
    case Errc::EmptyConfusion: return "EmptyConfusion";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::TooFewFrames: return "TooFewFrames";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(Errc code) {
  switch (code) {
    case Errc::InvalidParam:
    case Errc::InvalidManifest:
    case Errc::ImageTooSmall:
    case Errc::DimensionMismatch:
    case Errc::EmptyManifest:
    case Errc::SingleClass:
    case Errc::TooFewSamples:
    case Errc::EmptyInput:
    case Errc::TooFewFrames:
    case Errc::UnsupportedFormat:
      return true;
    default:
      return false;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace capseg
