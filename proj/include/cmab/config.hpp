#pragma once

// Flat `key = value` experiment configuration.
//
//   # comment
//   instance.kind = classical
//   instance.means = 0.1; 0.3; 0.5
//   instance.file = graph.cfg      (merged; keys of the including file win)
//
// Lists are separated by ';'. Keys are dotted paths; see README for the schema.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::filesystem::path& base_dir = {});
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  /// Keys that are not part of the schema.
  std::vector<std::string> unknown_keys() const;
  /// Resolves a path-valued entry against the directory of the config file.
  std::filesystem::path resolve(const std::string& relative) const;

  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

/// Every key the harness understands.
const std::vector<std::string>& config_schema();

/// Splits on `sep` and trims each piece; empty pieces are dropped.
std::vector<std::string> split_trimmed(const std::string& text, char sep);
double parse_double(const std::string& text, const std::string& what);
std::uint64_t parse_uint(const std::string& text, const std::string& what);

}  // namespace cmab
