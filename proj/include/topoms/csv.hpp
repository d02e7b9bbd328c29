#pragma once

#include <charconv>
#include <filesystem>
#include <string>

namespace topoms {

/// Shortest round-trip decimal form of a double; byte-deterministic for
/// identical inputs, which keeps repeated runs bit-identical in CSV.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace topoms
