#include "crn/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "crn/analysis.hpp"
#include "crn/random.hpp"

namespace crn {

void mass_action_rhs(const Mechanism& m, std::span<const double> k_plus, std::span<const double> k_minus,
                     const Eigen::VectorXd& c, Eigen::VectorXd& out) {
  const std::size_t nr = m.reaction_count();
  out.setZero(static_cast<Eigen::Index>(m.species_count()));
  for (std::size_t r = 0; r < nr; ++r) {
    const ReactionStep& s = m.step(r);
    double forward = k_plus[r];
    for (const auto& [i, a] : s.reactant.terms()) forward *= std::pow(c[static_cast<Eigen::Index>(i)], a);
    double backward = 0.0;
    if (s.reversible) {
      backward = k_minus[r];
      for (const auto& [i, b] : s.product.terms()) backward *= std::pow(c[static_cast<Eigen::Index>(i)], b);
    }
    const double net = forward - backward;
    for (const auto& [i, a] : s.reactant.terms()) out[static_cast<Eigen::Index>(i)] -= a * net;
    for (const auto& [i, b] : s.product.terms()) out[static_cast<Eigen::Index>(i)] += b * net;
  }
}

KineticSystem::KineticSystem(Mechanism mechanism, RateAssignment rates)
    : mechanism_(std::move(mechanism)), rates_(std::move(rates)), gamma_(mechanism_.gamma().cast<double>()) {
  rates_.validate(mechanism_);
}

Eigen::VectorXd KineticSystem::step_rates(const Eigen::VectorXd& c) const {
  if (static_cast<std::size_t>(c.size()) != dimension()) throw std::invalid_argument("concentration vector has wrong length");
  const std::size_t nr = mechanism_.reaction_count();
  Eigen::VectorXd w(static_cast<Eigen::Index>(nr));
  const IntMatrix& alpha = mechanism_.alpha();
  const IntMatrix& beta = mechanism_.beta();
  for (std::size_t r = 0; r < nr; ++r) {
    const auto j = static_cast<Eigen::Index>(r);
    double forward = rates_.k_plus[r], backward = rates_.k_minus[r];
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      // std::pow(0, 0) == 1, as required for absent species.
      if (alpha(i, j) != 0) forward *= std::pow(c[i], static_cast<double>(alpha(i, j)));
      if (beta(i, j) != 0) backward *= std::pow(c[i], static_cast<double>(beta(i, j)));
    }
    w[j] = forward - backward;
  }
  return w;
}

Eigen::VectorXd KineticSystem::rhs(const Eigen::VectorXd& c) const { return gamma_ * step_rates(c); }

void KineticSystem::rhs(const Eigen::VectorXd& c, Eigen::VectorXd& out) const { out = gamma_ * step_rates(c); }

RateAssignment complete_backward_rates(const Mechanism& m, const std::vector<double>& k_plus,
                                       const std::vector<std::optional<double>>& k_minus) {
  const std::size_t nr = m.reaction_count();
  if (k_plus.size() != nr || k_minus.size() != nr) throw MechanismError("one coefficient pair per step expected");
  const auto constraints = classify_db(m).constraints;
  std::vector<std::size_t> missing;
  for (std::size_t r = 0; r < nr; ++r)
    if (!k_minus[r]) missing.push_back(r);
  for (std::size_t r = 0; r < nr; ++r)
    if (!(k_plus[r] > 0) || (k_minus[r] && !(*k_minus[r] > 0)))
      throw MechanismError("detailed-balance completion needs positive coefficients");

  // sum_r a_r (ln k+_r - ln k-_r) = 0, solved for the missing ln k-_r.
  const auto rows = static_cast<Eigen::Index>(constraints.size());
  const auto cols = static_cast<Eigen::Index>(missing.size());
  IntMatrix a_int(rows, cols);
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& e = constraints[static_cast<std::size_t>(i)].exponents;
    double b = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
      b += static_cast<double>(e[r]) * std::log(k_plus[r]);
      if (k_minus[r]) b -= static_cast<double>(e[r]) * std::log(*k_minus[r]);
    }
    rhs[i] = b;
    for (Eigen::Index j = 0; j < cols; ++j) {
      a_int(i, j) = e[missing[static_cast<std::size_t>(j)]];
      a(i, j) = static_cast<double>(a_int(i, j));
    }
  }
  if (exact_rank(a_int) < missing.size()) {
    std::string names;
    for (auto r : missing) names += (names.empty() ? "" : ", ") + backward_rate_name(r);
    throw MechanismError("detailed balance does not determine " + names + "; give them explicitly");
  }
  Eigen::VectorXd u = cols ? Eigen::VectorXd(a.colPivHouseholderQr().solve(rhs)) : Eigen::VectorXd();
  if (rows > 0 && (a * u - rhs).lpNorm<Eigen::Infinity>() > 1e-9 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()))
    throw MechanismError("the given coefficients violate the detailed-balance conditions");

  RateAssignment out{k_plus, std::vector<double>(nr)};
  for (std::size_t r = 0; r < nr; ++r)
    if (k_minus[r]) out.k_minus[r] = *k_minus[r];
  for (std::size_t j = 0; j < missing.size(); ++j) out.k_minus[missing[j]] = std::exp(u[static_cast<Eigen::Index>(j)]);
  return out;
}

// ---------------------------------------------------------------- integrator

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double rms_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& scale) {
  if (v.size() == 0) return 0.0;
  return std::sqrt((v.array() / scale.array()).square().mean());
}

}  // namespace

Trajectory integrate(const RhsFunction& f, const Eigen::VectorXd& c0, double t_end, std::span<const double> sample_times,
                     const IntegratorOptions& opt) {
  if (!(t_end >= 0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be finite and non-negative");
  std::vector<double> samples(sample_times.begin(), sample_times.end());
  if (samples.empty()) samples.push_back(t_end);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] < 0 || samples[i] > t_end) throw std::invalid_argument("sample time outside [0, t_end]");
    if (i > 0 && samples[i] < samples[i - 1]) throw std::invalid_argument("sample times must be non-decreasing");
  }

  const Eigen::Index n = c0.size();
  Trajectory out;
  Eigen::VectorXd y = c0, y_new(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), err(n), scale(n);
  f(y, k1);

  double t = 0.0;
  double h = opt.initial_step;
  if (h <= 0) {
    scale = opt.atol + opt.rtol * y.array().abs();
    const double d0 = rms_norm(y, scale), d1 = rms_norm(k1, scale);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, std::max(t_end, 1e-6));
  }
  std::size_t steps = 0;

  auto record = [&](double ts) {
    Eigen::VectorXd s = y;
    for (Eigen::Index i = 0; i < n; ++i)
      if (s[i] < 0 && -s[i] < opt.atol) s[i] = 0.0;
    out.times.push_back(ts);
    out.states.push_back(std::move(s));
  };

  for (double target : samples) {
    while (t < target) {
      if (++steps > opt.max_steps) throw IntegrationError("maximum number of steps exceeded", t);
      const double remaining = target - t;
      const bool clipped = h >= remaining;
      const double step = clipped ? remaining : h;
      if (step < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
        throw IntegrationError("step size underflow (stiff or singular system)", t);

      tmp = y + step * a21 * k1;
      f(tmp, k2);
      tmp = y + step * (a31 * k1 + a32 * k2);
      f(tmp, k3);
      tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      f(tmp, k4);
      tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(tmp, k5);
      tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(tmp, k6);
      y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      f(y_new, k7);
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      scale = opt.atol + opt.rtol * y.array().abs().max(y_new.array().abs());
      const double e = rms_norm(err, scale);

      if (!std::isfinite(e)) {
        h = step * 0.2;
        continue;
      }
      const double factor = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
      if (e <= 1.0) {
        t = clipped ? target : t + step;
        y = y_new;
        k1 = k7;
        if (!y.allFinite()) throw IntegrationError("non-finite state", t);
        // A clipped step says nothing about the natural step length.
        h = clipped ? std::max(h, step * factor) : step * factor;
      } else {
        h = step * std::max(0.2, factor);
      }
    }
    record(target);
  }
  return out;
}

Trajectory integrate(const KineticSystem& sys, const Eigen::VectorXd& c0, double t_end,
                     std::span<const double> sample_times, const IntegratorOptions& options) {
  if (static_cast<std::size_t>(c0.size()) != sys.dimension())
    throw std::invalid_argument("initial concentration vector has wrong length");
  if ((c0.array() < 0).any()) throw std::invalid_argument("initial concentrations must be non-negative");
  return integrate([&sys](const Eigen::VectorXd& c, Eigen::VectorXd& dc) { sys.rhs(c, dc); }, c0, t_end, sample_times,
                   options);
}

std::vector<double> uniform_grid(double t_end, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  std::vector<double> g;
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (t > t_end * (1 + 1e-12) + dt * 1e-6) break;
    g.push_back(std::min(t, t_end));
  }
  return g;
}

ObservationSet sample_with_noise(const Trajectory& traj, const SpeciesSet& species, const NoiseSpec& noise) {
  if (!(noise.relative_sigma >= 0) || noise.relative_sigma >= 1)
    throw std::invalid_argument("relative noise must be in [0, 1)");
  ObservationSet obs;
  obs.times = traj.times;
  obs.species = species.names();
  const auto rows = static_cast<Eigen::Index>(traj.times.size());
  const auto cols = static_cast<Eigen::Index>(species.size());
  obs.values.resize(rows, cols);
  Rng rng(noise.seed);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double truth = traj.states[static_cast<std::size_t>(i)][j];
      double v = truth;
      if (noise.relative_sigma > 0) do {
          v = truth * (1.0 + noise.relative_sigma * rng.normal());
        } while (v < 0);
      obs.values(i, j) = v;
    }
  if (!traj.times.empty() && traj.times.front() == 0.0)
    for (Eigen::Index j = 0; j < cols; ++j) obs.init[species.name(static_cast<std::size_t>(j))] = traj.states.front()[j];
  obs.source = "simulated";
  return obs;
}

}  // namespace crn
