#pragma once

#include <stdexcept>
#include <string>

namespace twk {

enum class errc {
  length_mismatch,
  timestamp_mismatch,
  dimension_mismatch,
  empty_series,
  corridor_too_narrow,
  invalid_params,
  not_symmetric,
  too_large,
  parse_error,
  ragged_rows,
  empty_file,
  io_error,
};

inline const char* to_string(errc code) {
  switch (code) {
    case errc::length_mismatch: return "LengthMismatch";
    case errc::timestamp_mismatch: return "TimestampMismatch";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::empty_series: return "EmptySeries";
    case errc::corridor_too_narrow: return "CorridorTooNarrow";
    case errc::invalid_params: return "InvalidParams";
    case errc::not_symmetric: return "NotSymmetric";
    case errc::too_large: return "TooLarge";
    case errc::parse_error: return "ParseError";
    case errc::ragged_rows: return "RaggedRows";
    case errc::empty_file: return "EmptyFile";
    case errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace twk
