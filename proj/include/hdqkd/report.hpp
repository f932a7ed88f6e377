#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hdqkd {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance header embedded in every output file as '#' comment lines.
struct RunManifest {
  std::uint64_t config_digest = 0;
  std::string tool_version = kToolVersion;
  std::string command;
  std::vector<std::string> overrides;
  std::string timestamp;  // filled at emit time

  static RunManifest make(std::uint64_t digest, const std::string& command,
                          std::vector<std::string> overrides = {});
  std::string header_lines() const;
};

/// Full-precision decimal cell ('.' separator, classic locale).
std::string csv_cell(double value);

/// Write via a temp file + atomic rename; partial files never appear.
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace hdqkd
