#include "attnlens/common.hpp"

#include <cmath>
#include <cstdio>

namespace attnlens {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::CDG: return "CDG";
    case Task::CR: return "CR";
    case Task::CT: return "CT";
  }
  return "CDG";
}

std::string_view to_string(Language language) {
  switch (language) {
    case Language::Java: return "java";
    case Language::Python: return "python";
    case Language::CSharp: return "csharp";
  }
  return "java";
}

Task parse_task(std::string_view text) {
  if (text == "CDG") return Task::CDG;
  if (text == "CR") return Task::CR;
  if (text == "CT") return Task::CT;
  throw Error(ErrorKind::Usage, "unknown task '" + std::string(text) + "' (expected CDG, CR or CT)");
}

Language parse_language(std::string_view text) {
  if (text == "java") return Language::Java;
  if (text == "python") return Language::Python;
  if (text == "csharp") return Language::CSharp;
  throw Error(ErrorKind::Usage,
              "unknown language '" + std::string(text) + "' (expected java, python or csharp)");
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Empty: return "empty";
    case ErrorKind::Io: return "io";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t hash = seed;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fixed6(double value) {
  if (!std::isfinite(value)) return value != value ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string out(buf);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

}  // namespace attnlens
