#pragma once

#include <stdexcept>
#include <string>

namespace topoms {

/// Invalid parameter combination or out-of-range user input.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or unsupported input data (image headers, CSV files).
struct format_error : std::runtime_error {
  explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace topoms
