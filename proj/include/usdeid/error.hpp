#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace usdeid {

/// Closed set of failure classes. The string form doubles as the skip
/// reason written to skipped.log.
enum class ErrorKind {
  rejected_input,
  not_dicom,
  unsupported_transfer_syntax,
  corrupt_file,
  unsupported_depth,
  unsupported,
  dimension_mismatch,
  geometry_degenerate,
  empty_roi,
  infinite_loss,
  output_collision,
  io_error,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::rejected_input: return "rejected-input";
    case ErrorKind::not_dicom: return "not-dicom";
    case ErrorKind::unsupported_transfer_syntax: return "unsupported-transfer-syntax";
    case ErrorKind::corrupt_file: return "corrupt-file";
    case ErrorKind::unsupported_depth: return "unsupported-depth";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::geometry_degenerate: return "geometry-degenerate";
    case ErrorKind::empty_roi: return "empty-roi";
    case ErrorKind::infinite_loss: return "infinite-loss";
    case ErrorKind::output_collision: return "output-collision";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace usdeid
