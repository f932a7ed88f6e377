#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hdqkd {

/// Error raised for malformed documents, missing keys, or invalid values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key/value document: one `key = value` per line, `#` starts a comment,
/// list values are comma separated. Keys are dotted paths (e.g. source.mu).
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::vector<double> number_list(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set_number(const std::string& key, double value);

  /// FNV-1a hash of the canonical (sorted key=value) form.
  std::uint64_t digest() const;
  std::string canonical_text() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double value);

}  // namespace hdqkd
