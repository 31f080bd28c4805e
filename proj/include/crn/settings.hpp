#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crn {

class SettingsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat key -> value settings; keys are the long flag names without dashes.
using SettingMap = std::map<std::string, std::string>;

/// "key = value" lines; '#' starts a comment; blank lines are ignored.
SettingMap parse_config(std::string_view text, const std::string& source = "<config>");
SettingMap load_config(const std::filesystem::path& path);

/// Flags override config values.
SettingMap merge_settings(const SettingMap& config, const SettingMap& flags);

/// Typed, range-checked access to merged settings.
class Settings {
 public:
  Settings() = default;
  explicit Settings(SettingMap values) : values_(std::move(values)) {}

  const SettingMap& values() const { return values_; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::string required(const std::string& key) const;
  bool flag(const std::string& key) const;
  double real(const std::string& key, double fallback, double min, double max) const;
  std::uint64_t integer(const std::string& key, std::uint64_t fallback, std::uint64_t min, std::uint64_t max) const;

  /// Throws for keys outside `allowed`.
  void check_known(const std::vector<std::string>& allowed, const std::string& command) const;

 private:
  SettingMap values_;
};

struct SeedChoice {
  std::uint64_t seed = 0;
  bool generated = false;  // neither --seed nor CRN_SEED was given
};

/// --seed, then the CRN_SEED environment variable, then a fresh random seed.
SeedChoice resolve_seed(const Settings& s);

}  // namespace crn
