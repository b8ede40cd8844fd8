#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ahc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, grids or configuration files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string pointer = {});
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

// Malformed container or tag file. Offsets are in bytes from the file start.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t byte_offset,
             std::int64_t record_index = -1);
  std::uint64_t byte_offset() const { return byte_offset_; }
  std::int64_t record_index() const { return record_index_; }

 private:
  std::uint64_t byte_offset_;
  std::int64_t record_index_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

// Two or more spectral peaks within 3 dB of each other.
class AmbiguityError : public FitError {
 public:
  AmbiguityError(const std::string& what, std::vector<double> candidates_hz);
  const std::vector<double>& candidates_hz() const { return candidates_; }

 private:
  std::vector<double> candidates_;
};

}  // namespace ahc
