#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace crn {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Concentration measurements: one row per time point, one column per
/// observed species, NaN for a missing cell.
struct ObservationSet {
  std::vector<double> times;
  std::vector<std::string> species;
  Eigen::MatrixXd values;
  /// Known initial (t = 0) concentrations by species name, when supplied.
  std::map<std::string, double> init;
  std::string source;

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t observation_count() const;

  /// Throws DataError when an invariant is broken.
  void validate() const;
};

ObservationSet parse_csv(std::string_view text, const std::string& source = "<memory>");
ObservationSet load_csv(const std::filesystem::path& path);
std::string to_csv(const ObservationSet& data);
void save_csv(const ObservationSet& data, const std::filesystem::path& path);

/// Shortest text that round-trips the value.
std::string format_double(double v);

/// Reference datasets shipped with the library, addressable as "fixture:<name>".
struct Fixture {
  std::string name;
  std::string description;
  std::string mechanism;                 // generating / reference mechanism
  std::map<std::string, double> rates;   // reference coefficients, k1/km1 naming
  ObservationSet data;
};

std::vector<std::string> fixture_names();
Fixture load_fixture(std::string_view name);

/// "fixture:<name>" or a CSV path.
ObservationSet load_data(std::string_view ref);

/// Salicylic acid transport: x(0) recovered once by linear least squares with
/// the reference coefficients held fixed, then frozen here.
inline constexpr double kSalicylicInitialX = 0.01698605261004698;

/// Seed of the embedded simulated M = 2, R = 2 dataset.
inline constexpr std::uint64_t kSimFixtureSeed = 20181;

}  // namespace crn
