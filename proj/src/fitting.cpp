#include "crn/fitting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "crn/random.hpp"

namespace crn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::optional<double> to_double(const std::string& s) {
  std::string_view v = s;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) return std::nullopt;
  return out;
}

std::string rate_unit(int order) {
  if (order == 1) return "1/time";
  if (order == 2) return "1/(conc*time)";
  return "1/(conc^" + std::to_string(order - 1) + "*time)";
}

std::string init_name(const std::string& species) { return species + "(0)"; }

}  // namespace

const char* to_string(Weights w) { return w == Weights::Unit ? "unit" : "relative"; }

Weights parse_weights(std::string_view s) {
  if (s == "unit") return Weights::Unit;
  if (s == "relative") return Weights::Relative;
  throw std::invalid_argument("weights must be 'unit' or 'relative'");
}

NamedValues parse_named_values(std::string_view text) {
  NamedValues out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find_first_of(",;", start);
    if (end == std::string_view::npos) end = text.size();
    const std::string item = trim_copy(text.substr(start, end - start));
    start = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      auto v = to_double(item);
      if (!v) throw std::invalid_argument("expected name=value, got '" + item + "'");
      out["*"] = *v;
      continue;
    }
    const std::string name = trim_copy(std::string_view(item).substr(0, eq));
    auto v = to_double(trim_copy(std::string_view(item).substr(eq + 1)));
    if (name.empty() || !v) throw std::invalid_argument("malformed assignment '" + item + "'");
    if (!out.emplace(name, *v).second) throw std::invalid_argument("'" + name + "' given twice");
  }
  return out;
}

// ------------------------------------------------------- db parametrization

FitParametrization db_parametrize(const Mechanism& m) {
  if (!m.is_reversible()) throw MechanismError("detailed-balance parametrization requires every step to be reversible");
  const EchelonForm ef = reduced_row_echelon(RationalMatrix(m.gamma()));
  const std::size_t nr = m.reaction_count(), s = ef.pivots.size();
  FitParametrization p;
  p.basis = RationalMatrix(nr, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t r = 0; r < nr; ++r) p.basis(r, i) = ef.reduced(i, r);
  p.pivots = ef.pivots;
  return p;
}

std::vector<double> FitParametrization::reconstruct_backward(const std::vector<double>& k_plus,
                                                             const std::vector<double>& nu) const {
  std::vector<double> k_minus(reactions());
  for (std::size_t r = 0; r < reactions(); ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < rank(); ++i)
      if (basis(r, i) != 0) s += basis(r, i).convert_to<double>() * nu[i];
    k_minus[r] = k_plus[r] * std::exp(-s);
  }
  return k_minus;
}

std::vector<DbViolation> check_db_posthoc(const Mechanism& m, const RateAssignment& rates, double tol) {
  std::vector<DbViolation> out;
  for (const auto& c : classify_db(m).constraints) {
    double sum = 0.0;
    bool positive = true;
    for (std::size_t r = 0; r < c.exponents.size(); ++r) {
      if (c.exponents[r] == 0) continue;
      if (!(rates.k_plus[r] > 0 && rates.k_minus[r] > 0)) positive = false;
      sum += static_cast<double>(c.exponents[r]) * (std::log(rates.k_plus[r]) - std::log(rates.k_minus[r]));
    }
    const double v = positive ? std::abs(sum) : kInf;
    out.push_back({c, v, !(v <= tol)});
  }
  return out;
}

// ------------------------------------------------------------------ problem

FitProblem::FitProblem(Mechanism mechanism, ObservationSet data, FitOptions options)
    : mechanism_(std::move(mechanism)), data_(std::move(data)), options_(std::move(options)) {
  data_.validate();
  const SpeciesSet& sp = mechanism_.species();
  const std::size_t ns = sp.size(), nr = mechanism_.reaction_count();
  if (options_.constrained && !mechanism_.is_reversible())
    throw FitError("a detailed-balance constrained fit requires every step to be reversible");

  for (const auto& name : data_.species) {
    auto idx = sp.index_of(name);
    if (!idx) throw FitError("data species '" + name + "' does not occur in the mechanism");
    observed_.push_back(*idx);
  }
  for (const auto& [name, v] : options_.init) {
    if (!sp.index_of(name)) throw FitError("initial concentration given for unknown species '" + name + "'");
    if (!(v >= 0) || !std::isfinite(v)) throw FitError("initial concentration of " + name + " must be non-negative");
  }

  // Initial state: explicit values, then the data's, then a t = 0 row.
  init_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ns));
  for (std::size_t i = 0; i < ns; ++i) {
    const std::string& name = sp.name(i);
    std::optional<double> v;
    if (auto it = options_.init.find(name); it != options_.init.end()) v = it->second;
    else if (auto jt = data_.init.find(name); jt != data_.init.end()) v = jt->second;
    else if (auto col = data_.column(name); col && !data_.times.empty() && data_.times.front() == 0.0 &&
                                             !is_missing(data_.values(0, static_cast<Eigen::Index>(*col))))
      v = data_.values(0, static_cast<Eigen::Index>(*col));
    if (v) {
      init_[static_cast<Eigen::Index>(i)] = *v;
    } else if (options_.fit_init) {
      free_init_.push_back(i);
    } else if (data_.column(name)) {
      throw FitError("no initial concentration for observed species " + name + " (give it or estimate it)");
    }
  }

  rate_count_ = nr;
  for (std::size_t r = 0; r < nr; ++r) names_.push_back(forward_rate_name(r));
  if (options_.constrained) {
    param_ = db_parametrize(mechanism_);
    free_backward_ = param_->pivots;
    if (options_.allow_negative) {
      rref_int_.assign(param_->rank(), std::vector<long long>(nr));
      for (std::size_t i = 0; i < param_->rank(); ++i)
        for (std::size_t r = 0; r < nr; ++r) {
          const Rational& q = param_->basis(r, i);
          if (denominator(q) != 1)
            throw FitError("plain-space constrained fit needs an integer range basis for this mechanism");
          rref_int_[i][r] = numerator(q).convert_to<long long>();
        }
    }
  } else {
    for (std::size_t r = 0; r < nr; ++r)
      if (mechanism_.step(r).reversible) free_backward_.push_back(r);
  }
  for (auto r : free_backward_) names_.push_back(backward_rate_name(r));
  rate_count_ = names_.size();
  for (auto i : free_init_) names_.push_back(init_name(sp.name(i)));

  for (Eigen::Index i = 0; i < data_.values.rows(); ++i)
    for (Eigen::Index j = 0; j < data_.values.cols(); ++j)
      if (!is_missing(data_.values(i, j)))
        cells_.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), data_.values(i, j)});
  if (cells_.size() < names_.size())
    throw FitError("fewer observations (" + std::to_string(cells_.size()) + ") than parameters (" +
                   std::to_string(names_.size()) + ")");

  double mean_positive = 0.0;
  std::size_t count = 0;
  for (const auto& c : cells_)
    if (c.value > 0) mean_positive += c.value, ++count;
  mean_positive = count ? mean_positive / static_cast<double>(count) : 1.0;
  for (auto i : free_init_) {
    double guess = mean_positive;
    if (auto col = data_.column(sp.name(i)))
      for (Eigen::Index r = 0; r < data_.values.rows(); ++r) {
        const double v = data_.values(r, static_cast<Eigen::Index>(*col));
        if (!is_missing(v) && v > 0) {
          guess = v;
          break;
        }
      }
    default_init_start_.push_back(guess);
  }
}

std::vector<double> FitProblem::natural(const Eigen::VectorXd& theta) const {
  const std::size_t nr = mechanism_.reaction_count();
  std::vector<double> out(names_.size());
  for (std::size_t j = 0; j < nr; ++j) out[j] = log_space() ? std::exp(theta[j]) : theta[j];
  for (std::size_t k = 0; k < free_backward_.size(); ++k) {
    const double t = theta[static_cast<Eigen::Index>(nr + k)];
    if (!log_space()) out[nr + k] = t;
    else if (param_) out[nr + k] = out[free_backward_[k]] * std::exp(-t);
    else out[nr + k] = std::exp(t);
  }
  for (std::size_t j = rate_count_; j < names_.size(); ++j) out[j] = std::exp(theta[static_cast<Eigen::Index>(j)]);
  return out;
}

Eigen::VectorXd FitProblem::theta_from_natural(const std::vector<double>& v) const {
  const std::size_t nr = mechanism_.reaction_count();
  Eigen::VectorXd theta(static_cast<Eigen::Index>(names_.size()));
  auto checked_log = [&](std::size_t j) {
    if (!(v[j] > 0)) throw FitError("starting value of " + names_[j] + " must be positive");
    return std::log(v[j]);
  };
  for (std::size_t j = 0; j < rate_count_; ++j) {
    const auto e = static_cast<Eigen::Index>(j);
    if (!log_space()) theta[e] = v[j];
    else if (param_ && j >= nr) theta[e] = checked_log(free_backward_[j - nr]) - checked_log(j);
    else theta[e] = checked_log(j);
  }
  for (std::size_t j = rate_count_; j < names_.size(); ++j) theta[static_cast<Eigen::Index>(j)] = checked_log(j);
  return theta;
}

Eigen::MatrixXd FitProblem::natural_jacobian(const Eigen::VectorXd& theta) const {
  const std::size_t nr = mechanism_.reaction_count();
  const auto nat = natural(theta);
  const auto p = static_cast<Eigen::Index>(names_.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto u = static_cast<std::size_t>(j);
    const bool logged = log_space() || u >= rate_count_;
    g(j, j) = logged ? nat[u] : 1.0;
  }
  if (log_space() && param_)
    for (std::size_t k = 0; k < free_backward_.size(); ++k) {
      const auto row = static_cast<Eigen::Index>(nr + k);
      g(row, static_cast<Eigen::Index>(free_backward_[k])) = nat[nr + k];
      g(row, row) = -nat[nr + k];
    }
  return g;
}

RateAssignment FitProblem::rates(const Eigen::VectorXd& theta) const {
  const std::size_t nr = mechanism_.reaction_count();
  const auto nat = natural(theta);
  RateAssignment out;
  out.k_plus.assign(nat.begin(), nat.begin() + static_cast<std::ptrdiff_t>(nr));
  out.k_minus.assign(nr, 0.0);
  if (param_ && log_space()) {
    std::vector<double> nu(free_backward_.size());
    for (std::size_t k = 0; k < nu.size(); ++k) nu[k] = theta[static_cast<Eigen::Index>(nr + k)];
    out.k_minus = param_->reconstruct_backward(out.k_plus, nu);
  } else if (param_) {
    // K_f = prod_i K_{pivot_i}^{rref(i, f)}
    std::vector<double> kp(free_backward_.size());
    for (std::size_t i = 0; i < kp.size(); ++i) kp[i] = out.k_plus[free_backward_[i]] / nat[nr + i];
    for (std::size_t r = 0; r < nr; ++r) {
      double k = 1.0;
      for (std::size_t i = 0; i < kp.size(); ++i)
        if (rref_int_[i][r] != 0) k *= std::pow(kp[i], static_cast<double>(rref_int_[i][r]));
      out.k_minus[r] = out.k_plus[r] / k;
    }
    for (std::size_t i = 0; i < kp.size(); ++i) out.k_minus[free_backward_[i]] = nat[nr + i];
  } else {
    for (std::size_t k = 0; k < free_backward_.size(); ++k) out.k_minus[free_backward_[k]] = nat[nr + k];
  }
  return out;
}

Eigen::VectorXd FitProblem::initial_state(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd c0 = init_;
  for (std::size_t k = 0; k < free_init_.size(); ++k)
    c0[static_cast<Eigen::Index>(free_init_[k])] = std::exp(theta[static_cast<Eigen::Index>(rate_count_ + k)]);
  return c0;
}

Trajectory FitProblem::simulate(const Eigen::VectorXd& theta, std::span<const double> times) const {
  if (!theta.allFinite()) throw IntegrationError("non-finite parameters", 0.0);
  const RateAssignment k = rates(theta);
  const Eigen::VectorXd c0 = initial_state(theta);
  const double t_end = times.empty() ? 0.0 : times.back();
  return integrate([&](const Eigen::VectorXd& c, Eigen::VectorXd& dc) { mass_action_rhs(mechanism_, k.k_plus, k.k_minus, c, dc); },
                   c0, t_end, times, options_.integrator);
}

Eigen::VectorXd FitProblem::residuals(const Eigen::VectorXd& theta) const {
  const Trajectory traj = simulate(theta, data_.times);
  Eigen::VectorXd r(static_cast<Eigen::Index>(cells_.size()));
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    double d = traj.states[c.row][static_cast<Eigen::Index>(observed_[c.col])] - c.value;
    if (options_.weights == Weights::Relative) d /= std::max(c.value, kRelativeWeightFloor);
    r[static_cast<Eigen::Index>(i)] = d;
  }
  if (!r.allFinite()) throw IntegrationError("non-finite model values", data_.times.back());
  return r;
}

double FitProblem::data_norm2() const {
  double s = 0.0;
  for (const Cell& c : cells_) {
    const double v = options_.weights == Weights::Relative ? c.value / std::max(c.value, kRelativeWeightFloor) : c.value;
    s += v * v;
  }
  return s;
}

Eigen::MatrixXd FitProblem::jacobian(const Eigen::VectorXd& theta) const {
  const auto p = theta.size();
  Eigen::MatrixXd j(static_cast<Eigen::Index>(cells_.size()), p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double h = 1e-6 * std::max(std::abs(theta[k]), 1.0);
    Eigen::VectorXd tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    std::optional<Eigen::VectorXd> rp, rm;
    try {
      rp = residuals(tp);
    } catch (const IntegrationError&) {
    }
    try {
      rm = residuals(tm);
    } catch (const IntegrationError&) {
    }
    if (rp && rm) j.col(k) = (*rp - *rm) / (2 * h);
    else if (rp) j.col(k) = (*rp - residuals(theta)) / h;
    else if (rm) j.col(k) = (residuals(theta) - *rm) / h;
    else throw IntegrationError("jacobian could not be evaluated", 0.0);
  }
  return j;
}

std::vector<Eigen::VectorXd> FitProblem::start_points() const {
  std::vector<Eigen::VectorXd> out;
  auto from_named = [&](const NamedValues& named) {
    std::vector<double> v(names_.size());
    const auto all = named.find("*");
    for (std::size_t j = 0; j < names_.size(); ++j)
      v[j] = j < rate_count_ ? (all != named.end() ? all->second : 1.0) : default_init_start_[j - rate_count_];
    for (const auto& [name, value] : named) {
      if (name == "*") continue;
      auto it = std::find(names_.begin(), names_.end(), name);
      if (it == names_.end()) throw FitError("unknown parameter '" + name + "' in start");
      v[static_cast<std::size_t>(it - names_.begin())] = value;
    }
    return theta_from_natural(v);
  };
  if (options_.starts.empty()) out.push_back(from_named({}));
  for (const auto& s : options_.starts) out.push_back(from_named(s));
  if (options_.random_starts > 0) {
    Rng rng(options_.seed);
    const double lo = std::log(1e-3), span = std::log(1e3) - lo;
    for (std::size_t s = 0; s < options_.random_starts; ++s) {
      std::vector<double> v(names_.size());
      for (std::size_t j = 0; j < names_.size(); ++j)
        v[j] = j < rate_count_ ? std::exp(lo + span * rng.uniform()) : default_init_start_[j - rate_count_];
      out.push_back(theta_from_natural(v));
    }
  }
  return out;
}

// ------------------------------------------------------------------ fitting

double aic(double rss, std::size_t n, std::size_t p) {
  const double dn = static_cast<double>(n);
  return dn * std::log(rss / dn) + 2.0 * static_cast<double>(p);
}

double bic(double rss, std::size_t n, std::size_t p) {
  const double dn = static_cast<double>(n);
  return dn * std::log(rss / dn) + static_cast<double>(p) * std::log(dn);
}

namespace {

void fill_statistics(const FitProblem& problem, FitResult& res) {
  const std::size_t p = res.p;
  const Eigen::Index ip = static_cast<Eigen::Index>(p);
  res.estimates = problem.natural(res.theta);
  res.std_errors.assign(p, kNaN);
  res.correlation = Eigen::MatrixXd::Identity(ip, ip);
  res.rates = problem.rates(res.theta);
  res.initial_state = problem.initial_state(res.theta);

  Eigen::MatrixXd j;
  try {
    j = problem.jacobian(res.theta);
  } catch (const IntegrationError& e) {
    res.message += "; no covariance: " + std::string(e.what());
    return;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = s.size() ? s[0] * 1e-12 : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > cutoff && s[i] > 0) inv[i] = 1.0 / (s[i] * s[i]);
    else res.rank_deficient = true;
  }
  if (s.size() < ip) res.rank_deficient = true;
  const double sigma2 = res.n > p ? res.rss / static_cast<double>(res.n - p) : kNaN;
  const Eigen::MatrixXd cov_theta = sigma2 * svd.matrixV() * inv.asDiagonal() * svd.matrixV().transpose();
  const Eigen::MatrixXd g = problem.natural_jacobian(res.theta);
  const Eigen::MatrixXd cov = g * cov_theta * g.transpose();
  for (Eigen::Index a = 0; a < ip; ++a) res.std_errors[static_cast<std::size_t>(a)] = std::sqrt(std::max(cov(a, a), 0.0));
  for (Eigen::Index a = 0; a < ip; ++a)
    for (Eigen::Index b = 0; b < ip; ++b) {
      if (a == b) continue;
      const double d = std::sqrt(cov(a, a) * cov(b, b));
      res.correlation(a, b) = d > 0 ? std::clamp(cov(a, b) / d, -1.0, 1.0) : (std::isnan(d) ? kNaN : 0.0);
    }
  if (res.rank_deficient) res.message += "; rank-deficient Jacobian, pseudo-inverse used";
}

}  // namespace

FitResult fit_from(const FitProblem& problem, const Eigen::VectorXd& start) {
  const Mechanism& m = problem.mechanism();
  FitResult res;
  res.names = problem.parameter_names();
  res.n = problem.residual_count();
  res.p = problem.parameter_count();
  for (std::size_t j = 0; j < res.p; ++j) {
    const std::string& name = res.names[j];
    if (name.back() == ')') {
      res.units.push_back("conc");
      continue;
    }
    const bool back = name.rfind("km", 0) == 0;
    const std::size_t r = std::stoul(name.substr(back ? 2 : 1)) - 1;
    res.units.push_back(rate_unit(back ? m.step(r).product.order() : m.step(r).reactant.order()));
  }

  Eigen::VectorXd theta = start, r;
  res.theta = theta;
  try {
    r = problem.residuals(theta);
  } catch (const IntegrationError& e) {
    res.rss = kInf;
    res.aic = res.bic = kInf;
    res.message = std::string("start could not be integrated: ") + e.what();
    res.estimates = problem.natural(theta);
    res.std_errors.assign(res.p, kNaN);
    res.correlation = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(res.p), static_cast<Eigen::Index>(res.p));
    res.rates = problem.rates(theta);
    res.initial_state = problem.initial_state(theta);
    return res;
  }
  double rss = r.squaredNorm();
  double lambda = 1e-3;
  const std::size_t max_it = problem.options().max_iterations;
  // Residuals at the level of integration error: nothing left to fit.
  const double exact_floor = 1e-20 * problem.data_norm2();
  for (;;) {
    if (rss <= exact_floor) {
      res.converged = true;
      res.message = "exact fit";
      break;
    }
    if (res.iterations >= max_it) {
      res.message = "iteration limit reached";
      break;
    }
    Eigen::MatrixXd j;
    try {
      j = problem.jacobian(theta);
    } catch (const IntegrationError& e) {
      res.message = e.what();
      break;
    }
    const Eigen::VectorXd g = j.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-8 * rss) {
      res.converged = true;
      res.message = "gradient below tolerance";
      break;
    }
    const Eigen::MatrixXd a = j.transpose() * j;
    Eigen::VectorXd d = a.diagonal();
    const double dmax = std::max(d.maxCoeff(), std::numeric_limits<double>::min());
    d = d.cwiseMax(1e-12 * dmax);
    ++res.iterations;

    bool accepted = false;
    double improvement = 0.0;
    while (lambda <= 1e16) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * d;
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      if (!delta.allFinite()) {
        lambda *= 10;
        continue;
      }
      const Eigen::VectorXd trial = theta + delta;
      double trial_rss = kInf;
      Eigen::VectorXd trial_r;
      try {
        trial_r = problem.residuals(trial);
        trial_rss = trial_r.squaredNorm();
      } catch (const IntegrationError&) {
      }
      if (trial_rss < rss) {
        improvement = (rss - trial_rss) / rss;
        theta = trial;
        r = std::move(trial_r);
        rss = trial_rss;
        lambda = std::max(lambda / 10, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10;
    }
    if (!accepted) {
      res.converged = true;
      res.message = "no further decrease along the damped step";
      break;
    }
    if (improvement < 1e-10) {
      res.converged = true;
      res.message = "relative improvement below tolerance";
      break;
    }
  }

  res.theta = theta;
  res.rss = rss;
  res.aic = aic(rss, res.n, res.p);
  res.bic = bic(rss, res.n, res.p);
  fill_statistics(problem, res);
  if (!problem.options().constrained && m.is_reversible()) res.db_violations = check_db_posthoc(m, res.rates);
  return res;
}

FitResult fit(const FitProblem& problem) {
  const auto starts = problem.start_points();
  std::optional<FitResult> best;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    FitResult r = fit_from(problem, starts[i]);
    r.start_index = i;
    const bool better = !best || (r.converged && !best->converged) ||
                        (r.converged == best->converged && r.rss < best->rss);
    if (better) best = std::move(r);
  }
  best->starts_tried = starts.size();
  return *best;
}

// --------------------------------------------------------------------- json

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const FitResult& r, const Mechanism& m) {
  using nlohmann::json;
  json params = json::array();
  for (std::size_t j = 0; j < r.p; ++j)
    params.push_back({{"name", r.names[j]},
                      {"estimate", number(r.estimates[j])},
                      {"std_error", number(r.std_errors[j])},
                      {"unit", r.units[j]}});
  json corr = json::array();
  for (Eigen::Index a = 0; a < r.correlation.rows(); ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < r.correlation.cols(); ++b) row.push_back(number(r.correlation(a, b)));
    corr.push_back(row);
  }
  json rates = json::object();
  for (std::size_t s = 0; s < r.rates.k_plus.size(); ++s) {
    rates[forward_rate_name(s)] = number(r.rates.k_plus[s]);
    if (m.step(s).reversible) rates[backward_rate_name(s)] = number(r.rates.k_minus[s]);
  }
  json init = json::object();
  for (Eigen::Index i = 0; i < r.initial_state.size(); ++i)
    init[m.species().name(static_cast<std::size_t>(i))] = number(r.initial_state[i]);
  json viol = json::array();
  for (const auto& v : r.db_violations)
    viol.push_back({{"condition", render_condition(v.constraint)},
                    {"kind", to_string(v.constraint.kind)},
                    {"violation", number(v.violation)},
                    {"flagged", v.flagged}});
  return {{"parameters", params},     {"correlation", corr},
          {"rates", rates},           {"initial", init},
          {"rss", number(r.rss)},     {"n", r.n},
          {"p", r.p},                 {"aic", number(r.aic)},
          {"bic", number(r.bic)},     {"converged", r.converged},
          {"iterations", r.iterations}, {"start_index", r.start_index},
          {"starts_tried", r.starts_tried}, {"rank_deficient", r.rank_deficient},
          {"message", r.message},     {"db_violations", viol}};
}

}  // namespace crn
