#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "crn/mechanism.hpp"
#include "crn/observations.hpp"

namespace crn {

/// Mass-action induced kinetic differential equation of a mechanism:
/// dc/dt = gamma (k+ . c^alpha - k- . c^beta).
class KineticSystem {
 public:
  KineticSystem(Mechanism mechanism, RateAssignment rates);

  const Mechanism& mechanism() const { return mechanism_; }
  const RateAssignment& rates() const { return rates_; }
  std::size_t dimension() const { return mechanism_.species_count(); }

  Eigen::VectorXd rhs(const Eigen::VectorXd& c) const;
  void rhs(const Eigen::VectorXd& c, Eigen::VectorXd& out) const;

  /// Net rate k+ c^alpha - k- c^beta of every step.
  Eigen::VectorXd step_rates(const Eigen::VectorXd& c) const;

 private:
  Mechanism mechanism_;
  RateAssignment rates_;
  Eigen::MatrixXd gamma_;
};

/// Evaluates the mass-action rhs without validating rate signs; the fitting
/// code uses it for trial points (including negative coefficients).
void mass_action_rhs(const Mechanism& m, std::span<const double> k_plus, std::span<const double> k_minus,
                     const Eigen::VectorXd& c, Eigen::VectorXd& out);

/// Fills the missing backward coefficients from the detailed-balance
/// conditions. Throws MechanismError when they are not determined uniquely or
/// when the given coefficients already violate the conditions.
RateAssignment complete_backward_rates(const Mechanism& m, const std::vector<double>& k_plus,
                                       const std::vector<std::optional<double>>& k_minus);

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0: chosen automatically
  std::size_t max_steps = 500'000;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time_reached)
      : std::runtime_error(what + " at t = " + std::to_string(time_reached)), time_reached_(time_reached) {}
  double time_reached() const { return time_reached_; }

 private:
  double time_reached_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
};

using RhsFunction = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Adaptive Dormand-Prince 5(4) integration from t = 0. Steps are shortened to
/// land exactly on each sample time, so samples carry no interpolation error.
Trajectory integrate(const RhsFunction& f, const Eigen::VectorXd& c0, double t_end, std::span<const double> sample_times,
                     const IntegratorOptions& options = {});
Trajectory integrate(const KineticSystem& sys, const Eigen::VectorXd& c0, double t_end,
                     std::span<const double> sample_times, const IntegratorOptions& options = {});

/// Equidistant grid 0, dt, 2 dt, ... up to t_end (inclusive within dt/1e6).
std::vector<double> uniform_grid(double t_end, double dt);

struct NoiseSpec {
  double relative_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Multiplicative Gaussian noise value * (1 + sigma eps), drawn in row-major
/// (time, species) order; draws giving a negative value are redrawn.
ObservationSet sample_with_noise(const Trajectory& traj, const SpeciesSet& species, const NoiseSpec& noise);

}  // namespace crn
