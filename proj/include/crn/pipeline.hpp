#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "crn/analysis.hpp"
#include "crn/enumeration.hpp"
#include "crn/fitting.hpp"
#include "crn/mechanism.hpp"
#include "crn/observations.hpp"

namespace crn {

enum class Criterion { Aic, Bic, Rss };
const char* to_string(Criterion c);
Criterion parse_criterion(std::string_view s);

enum class Family { All, Consecutive };
const char* to_string(Family f);
Family parse_family(std::string_view s);

struct ScreenConfig {
  std::size_t species = 2;  // M
  std::size_t steps = 2;    // R (ignored for the consecutive family)
  Family family = Family::All;
  EnumerationFilter filter;
  FitOptions fit;  // `constrained` applies to fully reversible candidates only
  Criterion criterion = Criterion::Aic;
  std::size_t top_k = 10;
  std::uint64_t cap = kDefaultCap;
  unsigned workers = 1;
  std::filesystem::path output;  // empty: keep results in memory only
  bool resume = false;

  void validate() const;
  nlohmann::json to_json() const;
};

/// One screened candidate. `fit` is null when fitting raised an error; the
/// rank fields are set only for converged fits.
struct ScreenRecord {
  std::uint64_t index = 0;  // position in candidate order
  std::string id;
  std::string mechanism;
  nlohmann::json summary;
  nlohmann::json fit;
  std::string failure;
  std::optional<std::size_t> rank;
  double value = 0.0;  // criterion value, ranked records only
  double delta = 0.0;  // value minus the best value

  bool converged() const;
  double criterion(Criterion c) const;
  std::size_t parameters() const;

  nlohmann::json to_json(Criterion c) const;
  static ScreenRecord from_json(const nlohmann::json& j);
};

struct ScreenOutcome {
  std::vector<ScreenRecord> records;  // candidate order
  std::vector<std::size_t> ranking;   // indices into records, best first
  std::size_t candidates = 0;
  std::size_t fitted_now = 0;  // fits run by this call (excludes resumed ones)
  int exit_code = 0;           // 0 ok, 2 empty candidate set
};

/// Candidate mechanisms for a configuration, in deterministic order.
/// Throws CapExceeded once more than `cap` candidates pass the filters.
std::vector<Mechanism> screen_candidates(const ScreenConfig& config, const ObservationSet& data);

/// Species names for generated candidates: the data's own names when it
/// observes exactly M species, otherwise the standard names.
SpeciesSet screening_species(std::size_t m, const ObservationSet& data);

ScreenOutcome screen(const ScreenConfig& config, const ObservationSet& data);

/// Orders converged records by criterion, then parameter count, then id,
/// and fills the rank fields. Returns indices of ranked records.
std::vector<std::size_t> rank_records(std::vector<ScreenRecord>& records, Criterion c);

/// All M! irreversible chains s1 -> s2 -> ... -> sM, deduplicated.
std::vector<Mechanism> permuted_consecutive(const SpeciesSet& species);

nlohmann::json summary_json(const Mechanism& m, const NetworkSummary& s);

struct ReportRow {
  std::size_t rank = 0;
  std::string id;
  std::string mechanism;
  double value = 0.0;
  double delta = 0.0;
  double rss = 0.0;
  std::size_t p = 0;
  bool converged = false;
};

std::vector<ReportRow> rank_report(std::vector<ScreenRecord> records, Criterion c, std::size_t top_k);
std::string format_report(const std::vector<ReportRow>& rows, Criterion c);
nlohmann::json report_json(const std::vector<ReportRow>& rows, Criterion c);

/// Contents of a results file: the header plus the records.
struct ResultsFile {
  nlohmann::json header;
  std::vector<ScreenRecord> records;
};
ResultsFile read_results(const std::filesystem::path& path);

/// One CSV per observed species with columns t, observed, fitted. Times are
/// `grid` equidistant points on [t_min, t_max] merged with the observation
/// times. Returns the written paths.
std::vector<std::filesystem::path> emit_plot_data(const Mechanism& m, const RateAssignment& rates,
                                                  const Eigen::VectorXd& c0, const ObservationSet& data,
                                                  std::size_t grid, const std::filesystem::path& dir,
                                                  const std::string& prefix = "");
std::vector<std::filesystem::path> emit_plot_data(const FitResult& result, const FitProblem& problem, std::size_t grid,
                                                  const std::filesystem::path& dir, const std::string& prefix = "");

/// Rebuilds the rates and initial state stored in a record's fit.
RateAssignment record_rates(const ScreenRecord& r, const Mechanism& m);
Eigen::VectorXd record_initial(const ScreenRecord& r, const Mechanism& m);

}  // namespace crn
