#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "crn/analysis.hpp"
#include "crn/exact.hpp"
#include "crn/kinetics.hpp"
#include "crn/mechanism.hpp"
#include "crn/observations.hpp"

namespace crn {

class FitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Weights { Unit, Relative };
const char* to_string(Weights w);
Weights parse_weights(std::string_view s);

inline constexpr double kRelativeWeightFloor = 1e-12;

/// Named starting values; names are rate names (k1, km1, ...) or "X(0)" for
/// estimated initial concentrations. Missing names default to 1.
using NamedValues = std::map<std::string, double>;

struct FitOptions {
  bool constrained = false;     // impose detailed balance
  Weights weights = Weights::Unit;
  bool allow_negative = false;  // plain-space parameters instead of logarithms
  bool fit_init = false;        // estimate initial concentrations that are not known
  NamedValues init;             // overrides the data's initial concentrations
  std::vector<NamedValues> starts;
  std::size_t random_starts = 0;  // extra log-uniform starts in [1e-3, 1e3]
  std::uint64_t seed = 0;
  std::size_t max_iterations = 200;
  IntegratorOptions integrator{1e-11, 1e-14, 0.0, 500'000};
};

/// Basis of range(gamma^T): columns are the non-zero rows of the reduced row
/// echelon form of gamma, so V(pivot_i, i) = 1 and log K = V nu.
struct FitParametrization {
  RationalMatrix basis;  // R x S
  std::vector<std::size_t> pivots;

  std::size_t reactions() const { return basis.rows(); }
  std::size_t rank() const { return basis.cols(); }

  /// k-_r = k+_r exp(-(V nu)_r)
  std::vector<double> reconstruct_backward(const std::vector<double>& k_plus, const std::vector<double>& nu) const;
};

/// Requires every step to be reversible.
FitParametrization db_parametrize(const Mechanism& m);

struct DbViolation {
  DbConstraint constraint;
  double violation = 0.0;
  bool flagged = false;
};

std::vector<DbViolation> check_db_posthoc(const Mechanism& m, const RateAssignment& rates, double tol = 1e-8);

class FitProblem {
 public:
  FitProblem(Mechanism mechanism, ObservationSet data, FitOptions options = {});

  const Mechanism& mechanism() const { return mechanism_; }
  const ObservationSet& data() const { return data_; }
  const FitOptions& options() const { return options_; }

  /// Number of estimated quantities (length of theta).
  std::size_t parameter_count() const { return names_.size(); }
  std::size_t residual_count() const { return cells_.size(); }

  /// Free natural parameters, in theta order: forward rates, then backward
  /// rates that are free, then estimated initial concentrations.
  const std::vector<std::string>& parameter_names() const { return names_; }

  /// Known initial concentrations; entries for estimated species are ignored.
  const Eigen::VectorXd& known_init() const { return init_; }
  const std::vector<std::size_t>& estimated_init_species() const { return free_init_; }
  /// Mechanism column of each data column.
  const std::vector<std::size_t>& observed_species() const { return observed_; }

  std::vector<double> natural(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd theta_from_natural(const std::vector<double>& values) const;
  /// d natural / d theta
  Eigen::MatrixXd natural_jacobian(const Eigen::VectorXd& theta) const;

  RateAssignment rates(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd initial_state(const Eigen::VectorXd& theta) const;

  /// Model minus observed, time-major and species-minor over the non-missing
  /// cells, divided by max(observed, floor) for relative weights.
  /// Throws IntegrationError when the model cannot be integrated.
  Eigen::VectorXd residuals(const Eigen::VectorXd& theta) const;

  /// Sum of squared observations in residual units; sets the exact-fit floor.
  double data_norm2() const;

  /// Central differences with step 1e-6 max(|theta_j|, 1).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const;

  /// Model trajectory at the given times.
  Trajectory simulate(const Eigen::VectorXd& theta, std::span<const double> times) const;

  /// Starting theta vectors: explicit starts (or the all-ones default), then
  /// the seeded random ones.
  std::vector<Eigen::VectorXd> start_points() const;

  bool log_space() const { return !options_.allow_negative; }
  bool uses_db_substitution() const { return param_.has_value(); }

 private:
  Mechanism mechanism_;
  ObservationSet data_;
  FitOptions options_;
  std::optional<FitParametrization> param_;
  std::vector<std::vector<long long>> rref_int_;  // plain constrained mode
  std::vector<std::string> names_;
  std::vector<std::size_t> free_backward_;  // steps whose k- is a free parameter
  std::vector<std::size_t> free_init_;
  std::vector<std::size_t> observed_;
  Eigen::VectorXd init_;
  struct Cell {
    std::size_t row, col;
    double value;
  };
  std::vector<Cell> cells_;
  std::size_t rate_count_ = 0;
  std::vector<double> default_init_start_;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<std::string> units;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  Eigen::MatrixXd correlation;
  RateAssignment rates;           // all coefficients, including dependent ones
  Eigen::VectorXd initial_state;  // used or estimated
  Eigen::VectorXd theta;
  double rss = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t start_index = 0;
  std::size_t starts_tried = 0;
  bool rank_deficient = false;
  std::string message;
  std::vector<DbViolation> db_violations;  // unconstrained reversible fits only
};

/// Levenberg-Marquardt from one start.
FitResult fit_from(const FitProblem& problem, const Eigen::VectorXd& start);

/// Best result over all start points.
FitResult fit(const FitProblem& problem);

/// Information criteria for a given residual sum.
double aic(double rss, std::size_t n, std::size_t p);
double bic(double rss, std::size_t n, std::size_t p);

nlohmann::json to_json(const FitResult& r, const Mechanism& m);

/// Parses "k1=0.1, km1=2" into name/value pairs.
NamedValues parse_named_values(std::string_view text);

}  // namespace crn
