#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "capseg/classify.hpp"
#include "capseg/error.hpp"

namespace capseg {

namespace {

constexpr std::string_view kMagic = "capseg-svm";
constexpr std::string_view kVersion = "v1";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Little-endian bytes of each double, two hex digits per byte.
std::string encode(std::span<const double> values) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(values.size() * 16);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int byte = 0; byte < 8; ++byte) {
      const auto b = static_cast<unsigned>((bits >> (8 * byte)) & 0xffu);
      out += kDigits[b >> 4];
      out += kDigits[b & 0xfu];
    }
  }
  return out;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw Error(Errc::CorruptModel, "invalid hex digit");
}

std::vector<double> decode(std::string_view text, std::size_t expected, const char* field) {
  if (text.size() != expected * 16) {
    throw Error(Errc::CorruptModel, std::string(field) + ": expected " +
                                        std::to_string(expected) + " values");
  }
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint64_t bits = 0;
    for (int byte = 0; byte < 8; ++byte) {
      const std::size_t pos = i * 16 + static_cast<std::size_t>(byte) * 2;
      const auto b = static_cast<std::uint64_t>(hex_digit(text[pos]) * 16 + hex_digit(text[pos + 1]));
      bits |= b << (8 * byte);
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

long parse_long(const std::string& s, const char* field) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::logic_error&) {
    throw Error(Errc::CorruptModel, std::string("bad integer for ") + field);
  }
}

double parse_double(const std::string& s, const char* field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::logic_error&) {
    throw Error(Errc::CorruptModel, std::string("bad number for ") + field);
  }
}

}  // namespace

std::string serialize_model(const SvmModel& m) {
  std::ostringstream out;
  out << kMagic << ' ' << kVersion << '\n';
  out << "kernel=" << to_string(m.kernel) << '\n';
  out << "C=" << format_double(m.C) << '\n';
  out << "gamma=" << format_double(m.gamma) << '\n';
  out << "tol=" << format_double(m.tol) << '\n';
  out << "d=" << m.dimension() << '\n';
  out << "M=" << m.dual_coefs.size() << '\n';
  out << "N=" << m.trained_for << '\n';
  out << "input_dim=" << m.input_dim << '\n';
  out << "converged=" << (m.converged ? 1 : 0) << '\n';
  out << "selected=";
  for (std::size_t i = 0; i < m.selected.size(); ++i) out << (i ? "," : "") << m.selected[i];
  out << '\n';
  out << "scaler_mean=" << encode(m.scaler.mean) << '\n';
  out << "scaler_std=" << encode(m.scaler.stddev) << '\n';
  out << "dual_coefs=" << encode(m.dual_coefs) << '\n';
  const double bias[] = {m.bias};
  out << "bias=" << encode(bias) << '\n';
  out << "support_vectors=" << encode(m.support_vectors.values()) << '\n';
  out << "end\n";
  return out.str();
}

SvmModel deserialize_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::CorruptModel, "empty model file");
  const auto space = line.find(' ');
  if (space == std::string::npos || line.substr(0, space) != kMagic) {
    throw Error(Errc::CorruptModel, "missing capseg-svm header");
  }
  if (line.substr(space + 1) != kVersion) {
    throw Error(Errc::VersionMismatch, "model version '" + line.substr(space + 1) +
                                           "', expected '" + std::string(kVersion) + "'");
  }

  std::map<std::string, std::string> fields;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::CorruptModel, "malformed line");
    fields[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!ended) throw Error(Errc::CorruptModel, "truncated model file");
  auto get = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw Error(Errc::CorruptModel, std::string("missing ") + key);
    return it->second;
  };

  SvmModel m;
  try {
    m.kernel = parse_kernel(get("kernel"));
  } catch (const Error&) {
    throw Error(Errc::CorruptModel, "unknown kernel");
  }
  m.C = parse_double(get("C"), "C");
  m.gamma = parse_double(get("gamma"), "gamma");
  m.tol = parse_double(get("tol"), "tol");
  const long d = parse_long(get("d"), "d");
  const long count = parse_long(get("M"), "M");
  m.trained_for = static_cast<int>(parse_long(get("N"), "N"));
  m.input_dim = static_cast<int>(parse_long(get("input_dim"), "input_dim"));
  m.converged = parse_long(get("converged"), "converged") != 0;
  if (d < 1 || count < 1 || m.input_dim < 1) throw Error(Errc::CorruptModel, "bad dimensions");

  std::stringstream sel(get("selected"));
  std::string item;
  while (std::getline(sel, item, ',')) {
    const long c = parse_long(item, "selected");
    if (c < 0 || c >= m.input_dim) throw Error(Errc::CorruptModel, "selected index out of range");
    m.selected.push_back(static_cast<int>(c));
  }
  if (static_cast<long>(m.selected.size()) != d) {
    throw Error(Errc::CorruptModel, "selected count differs from d");
  }
  const auto ud = static_cast<std::size_t>(d);
  const auto um = static_cast<std::size_t>(count);
  m.scaler.mean = decode(get("scaler_mean"), ud, "scaler_mean");
  m.scaler.stddev = decode(get("scaler_std"), ud, "scaler_std");
  m.dual_coefs = decode(get("dual_coefs"), um, "dual_coefs");
  m.bias = decode(get("bias"), 1, "bias")[0];
  m.support_vectors = Matrix(um, ud, decode(get("support_vectors"), um * ud, "support_vectors"));
  return m;
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

SvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace capseg
