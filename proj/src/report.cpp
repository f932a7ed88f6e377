#include "hdqkd/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hdqkd/config.hpp"

namespace hdqkd {

RunManifest RunManifest::make(std::uint64_t digest, const std::string& command,
                              std::vector<std::string> overrides) {
  RunManifest m;
  m.config_digest = digest;
  m.command = command;
  m.overrides = std::move(overrides);
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  m.timestamp = buf;
  return m;
}

std::string RunManifest::header_lines() const {
  std::ostringstream out;
  char digest_hex[20];
  std::snprintf(digest_hex, sizeof digest_hex, "%016llx",
                static_cast<unsigned long long>(config_digest));
  out << "# tool_version: " << tool_version << "\n";
  out << "# config_digest: " << digest_hex << "\n";
  out << "# command: " << command << "\n";
  for (const auto& o : overrides) out << "# override: " << o << "\n";
  out << "# timestamp: " << timestamp << "\n";
  return out.str();
}

std::string csv_cell(double value) { return format_double(value); }

void atomic_write_file(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("atomic rename failed: " + path);
  }
}

}  // namespace hdqkd
