#include "ahc/errors.hpp"

#include <utility>

namespace ahc {

ConfigError::ConfigError(const std::string& what, std::string pointer)
    : Error(pointer.empty() ? what : pointer + ": " + what),
      pointer_(std::move(pointer)) {}

ParseError::ParseError(const std::string& what, std::uint64_t byte_offset,
                       std::int64_t record_index)
    : Error(what + " (byte offset " + std::to_string(byte_offset) +
            (record_index >= 0 ? ", record " + std::to_string(record_index) : std::string()) + ")"),
      byte_offset_(byte_offset),
      record_index_(record_index) {}

AmbiguityError::AmbiguityError(const std::string& what, std::vector<double> candidates_hz)
    : FitError(what), candidates_(std::move(candidates_hz)) {}

}  // namespace ahc
