#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace attnlens {

enum class Task { CDG, CR, CT };
enum class Language { Java, Python, CSharp };

std::string_view to_string(Task task);
std::string_view to_string(Language language);
Task parse_task(std::string_view text);           // throws Error(Usage)
Language parse_language(std::string_view text);   // throws Error(Usage)

enum class ErrorKind {
  Parse,        // malformed input text (dump line, source code)
  Dimension,    // tensor shape does not match the record
  Validation,   // strict-mode invariant violation
  Alignment,    // subword spans inconsistent with the source
  Degenerate,   // all-zero attribution profile
  Empty,        // operation needs a non-empty input
  Io,
  Usage,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // 2 for usage problems, 1 for everything data-related.
  int exit_code() const noexcept { return kind_ == ErrorKind::Usage ? 2 : 1; }

 private:
  ErrorKind kind_;
};

// Dense row-major [layers][steps][width] array of attention scores.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t layers, std::size_t steps, std::size_t width, double fill = 0.0)
      : layers_(layers), steps_(steps), width_(width), data_(layers * steps * width, fill) {}

  std::size_t layers() const noexcept { return layers_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t width() const noexcept { return width_; }

  double& operator()(std::size_t layer, std::size_t step, std::size_t col) {
    return data_[(layer * steps_ + step) * width_ + col];
  }
  double operator()(std::size_t layer, std::size_t step, std::size_t col) const {
    return data_[(layer * steps_ + step) * width_ + col];
  }

  std::span<double> row(std::size_t layer, std::size_t step) {
    return {data_.data() + (layer * steps_ + step) * width_, width_};
  }
  std::span<const double> row(std::size_t layer, std::size_t step) const {
    return {data_.data() + (layer * steps_ + step) * width_, width_};
  }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t layers_ = 0;
  std::size_t steps_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

// ASCII-lowercased copy.
std::string ascii_lower(std::string_view text);

// 64-bit FNV-1a; used for grammar checksums and report config hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Fixed 6-decimal rendering used by every CSV/HTML number.
std::string fixed6(double value);

}  // namespace attnlens
