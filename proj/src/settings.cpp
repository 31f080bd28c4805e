#include "crn/settings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

namespace crn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-'; });
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

SettingMap parse_config(std::string_view text, const std::string& source) {
  SettingMap out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw SettingsError(where + "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!valid_key(key)) throw SettingsError(where + "invalid key '" + key + "'");
    if (key == "config") throw SettingsError(where + "config files cannot include other config files");
    if (!out.emplace(key, value).second) throw SettingsError(where + "duplicate key '" + key + "'");
  }
  return out;
}

SettingMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SettingsError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

SettingMap merge_settings(const SettingMap& config, const SettingMap& flags) {
  SettingMap out = config;
  for (const auto& [k, v] : flags) out[k] = v;
  return out;
}

std::optional<std::string> Settings::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Settings::text(const std::string& key, const std::string& fallback) const {
  return text(key).value_or(fallback);
}

std::string Settings::required(const std::string& key) const {
  auto v = text(key);
  if (!v || v->empty()) throw SettingsError("--" + key + " is required");
  return *v;
}

bool Settings::flag(const std::string& key) const {
  auto v = text(key);
  if (!v) return false;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw SettingsError("--" + key + " expects true or false, got '" + *v + "'");
}

double Settings::real(const std::string& key, double fallback, double min, double max) const {
  auto v = text(key);
  if (!v) return fallback;
  double x = 0;
  std::string_view s = *v;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(x))
    throw SettingsError("--" + key + " expects a number, got '" + *v + "'");
  if (x < min || x > max) {
    std::ostringstream msg;
    msg << "--" << key << " must lie in [" << min << ", " << max << "], got " << *v;
    throw SettingsError(msg.str());
  }
  return x;
}

std::uint64_t Settings::integer(const std::string& key, std::uint64_t fallback, std::uint64_t min,
                                std::uint64_t max) const {
  auto v = text(key);
  if (!v) return fallback;
  auto x = parse_u64(*v);
  if (!x) throw SettingsError("--" + key + " expects a non-negative integer, got '" + *v + "'");
  if (*x < min || *x > max)
    throw SettingsError("--" + key + " must lie in [" + std::to_string(min) + ", " + std::to_string(max) + "], got " +
                        *v);
  return *x;
}

void Settings::check_known(const std::vector<std::string>& allowed, const std::string& command) const {
  for (const auto& [k, v] : values_)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw SettingsError("setting '" + k + "' is not used by '" + command + "'");
}

SeedChoice resolve_seed(const Settings& s) {
  if (s.has("seed")) return {s.integer("seed", 0, 0, UINT64_MAX), false};
  if (const char* env = std::getenv("CRN_SEED"); env && *env) {
    auto v = parse_u64(env);
    if (!v) throw SettingsError(std::string("CRN_SEED must be a non-negative integer, got '") + env + "'");
    return {*v, false};
  }
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return {seed, true};
}

}  // namespace crn
