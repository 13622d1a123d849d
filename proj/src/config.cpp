#include "cmab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cmab {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> split_trimmed(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string piece;
  std::istringstream in(text);
  while (std::getline(in, piece, sep)) {
    piece = trim(piece);
    if (!piece.empty()) out.push_back(piece);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError(what + ": expected a number, got '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  if (s.empty() || s.front() == '-') throw ConfigError(what + ": expected a nonnegative integer, got '" + text + "'");
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() + s.size() && errno != ERANGE) return v;
  // Accept integral values written in floating-point notation, e.g. 1e5.
  const double d = parse_double(s, what);
  if (d < 0 || d != std::floor(d) || d >= 18446744073709551616.0)
    throw ConfigError(what + ": expected a nonnegative integer, got '" + text + "'");
  return static_cast<std::uint64_t>(d);
}

Config Config::parse(const std::string& text, const std::filesystem::path& base_dir) {
  Config cfg;
  cfg.base_dir_ = base_dir;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    if (cfg.values_.count(key)) throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  if (cfg.has("instance.file")) {
    const auto path = cfg.resolve(cfg.values_["instance.file"]);
    const Config included = load(path);
    for (const auto& [k, v] : included.values_) {
      if (k == "instance.file") continue;
      if (!cfg.has(k)) cfg.values_[k] = v;
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.parent_path());
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const { return parse_double(get_string(key), key); }

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::uint64_t Config::get_uint(const std::string& key) const { return parse_uint(get_string(key), key); }

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_uint(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& piece : get_list(key)) out.push_back(parse_double(piece, key));
  return out;
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  return split_trimmed(get_string(key), ';');
}

std::filesystem::path Config::resolve(const std::string& relative) const {
  std::filesystem::path p(relative);
  if (p.is_absolute() || base_dir_.empty()) return p;
  return base_dir_ / p;
}

const std::vector<std::string>& config_schema() {
  static const std::vector<std::string> keys = {
      "instance.kind",        "instance.file",        "instance.means",
      "instance.left",        "instance.right",       "instance.nodes",
      "instance.edges",       "instance.k",           "instance.super_arms",
      "instance.top_k",       "instance.exact_cap",   "instance.random",
      "instance.random_seed", "instance.density",     "instance.edge_count",
      "instance.p_min",       "instance.p_max",       "policy.kind",
      "policy.exploration",   "policy.c",             "policy.gamma",
      "policy.clusters",      "policy.diagnostics",   "oracle.kind",
      "oracle.sims",          "oracle.epsilon",       "oracle.beta_override",
      "oracle.failure_mode",  "experiment.horizon",   "experiment.repetitions",
      "experiment.seed",      "experiment.output",    "experiment.threads",
      "experiment.checkpoints", "experiment.trajectories", "experiment.mc_samples",
      "bounds.emit",          "bounds.alpha",
  };
  return keys;
}

std::vector<std::string> Config::unknown_keys() const {
  const auto& schema = config_schema();
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (std::find(schema.begin(), schema.end(), k) == schema.end()) out.push_back(k);
  return out;
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace cmab
