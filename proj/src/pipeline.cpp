#include "crn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "crn/random.hpp"

namespace crn {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_number(const json& j, const char* key) {
  if (!j.is_object()) return kNaN;
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return kNaN;
  return it->get<double>();
}

json rational_json(const Rational& q) {
  if (denominator(q) == 1) return json(numerator(q).convert_to<long long>());
  std::ostringstream ss;
  ss << q;
  return json(ss.str());
}

json named_values_json(const NamedValues& v) {
  json out = json::object();
  for (const auto& [k, x] : v) out[k] = x;
  return out;
}

}  // namespace

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::Aic: return "aic";
    case Criterion::Bic: return "bic";
    case Criterion::Rss: return "rss";
  }
  return "?";
}

Criterion parse_criterion(std::string_view s) {
  if (s == "aic") return Criterion::Aic;
  if (s == "bic") return Criterion::Bic;
  if (s == "rss") return Criterion::Rss;
  throw std::invalid_argument("criterion must be aic, bic or rss");
}

const char* to_string(Family f) { return f == Family::All ? "all" : "consecutive"; }

Family parse_family(std::string_view s) {
  if (s == "all") return Family::All;
  if (s == "consecutive") return Family::Consecutive;
  throw std::invalid_argument("family must be 'all' or 'consecutive'");
}

void ScreenConfig::validate() const {
  if (species < 1) throw std::invalid_argument("species count must be at least 1");
  if (family == Family::Consecutive && species < 2) throw std::invalid_argument("consecutive chains need M >= 2");
  if (family == Family::All && steps < 1) throw std::invalid_argument("step count must be at least 1");
  if (top_k < 1) throw std::invalid_argument("top must be at least 1");
  if (cap < 1) throw std::invalid_argument("cap must be at least 1");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

json ScreenConfig::to_json() const {
  json starts = json::array();
  for (const auto& s : fit.starts) starts.push_back(named_values_json(s));
  return {{"species", species},
          {"steps", family == Family::All ? json(steps) : json(nullptr)},
          {"family", to_string(family)},
          {"exact_species", filter.exact_species},
          {"mass_conserving", filter.mass_conserving},
          {"db_class", filter.db_class ? json(to_string(*filter.db_class)) : json(nullptr)},
          {"db_constrained", fit.constrained},
          {"weights", to_string(fit.weights)},
          {"allow_negative", fit.allow_negative},
          {"fit_init", fit.fit_init},
          {"init", named_values_json(fit.init)},
          {"starts", starts},
          {"random_starts", fit.random_starts},
          {"seed", fit.seed},
          {"max_iterations", fit.max_iterations},
          {"rtol", fit.integrator.rtol},
          {"atol", fit.integrator.atol},
          {"criterion", to_string(criterion)},
          {"cap", cap}};
}

// ------------------------------------------------------------------ records

bool ScreenRecord::converged() const {
  return failure.empty() && fit.is_object() && fit.value("converged", false);
}

double ScreenRecord::criterion(Criterion c) const { return get_number(fit, to_string(c)); }

std::size_t ScreenRecord::parameters() const {
  return fit.is_object() ? fit.value("p", std::size_t{0}) : 0;
}

json ScreenRecord::to_json(Criterion c) const {
  return {{"type", "record"},
          {"index", index},
          {"id", id},
          {"mechanism", mechanism},
          {"summary", summary},
          {"fit", fit},
          {"failure", failure.empty() ? json(nullptr) : json(failure)},
          {"criterion", to_string(c)},
          {"rank", rank ? json(*rank) : json(nullptr)},
          {"value", rank ? number(value) : json(nullptr)},
          {"delta", rank ? number(delta) : json(nullptr)}};
}

ScreenRecord ScreenRecord::from_json(const json& j) {
  ScreenRecord r;
  r.index = j.at("index").get<std::uint64_t>();
  r.id = j.at("id").get<std::string>();
  r.mechanism = j.at("mechanism").get<std::string>();
  r.summary = j.value("summary", json(nullptr));
  r.fit = j.value("fit", json(nullptr));
  if (auto it = j.find("failure"); it != j.end() && it->is_string()) r.failure = it->get<std::string>();
  if (auto it = j.find("rank"); it != j.end() && it->is_number()) r.rank = it->get<std::size_t>();
  r.value = get_number(j, "value");
  r.delta = get_number(j, "delta");
  return r;
}

json summary_json(const Mechanism& m, const NetworkSummary& s) {
  json mass = nullptr;
  if (s.mass_vector) {
    mass = json::object();
    for (std::size_t i = 0; i < s.mass_vector->rho.size(); ++i)
      mass[m.species().name(i)] = rational_json(s.mass_vector->rho[i]);
  }
  json conditions = json::array();
  for (const auto& c : s.conditions)
    conditions.push_back({{"kind", to_string(c.kind)}, {"exponents", c.exponents}, {"text", render_condition(c)}});
  return {{"species", s.species},
          {"reactions", s.reactions},
          {"complexes", s.complexes},
          {"linkage_classes", s.linkage_classes},
          {"rank", s.rank},
          {"deficiency", s.deficiency},
          {"reversible", s.reversible},
          {"weakly_reversible", s.weakly_reversible},
          {"mass_conserving", s.mass_conserving},
          {"mass_vector", mass},
          {"db_class", to_string(s.db_class)},
          {"circuit_conditions", s.circuit_conditions},
          {"forest_conditions", s.forest_conditions},
          {"conditions", conditions}};
}

// --------------------------------------------------------------- candidates

std::vector<Mechanism> permuted_consecutive(const SpeciesSet& species) {
  const std::size_t m = species.size();
  if (m < 2) throw std::invalid_argument("a consecutive chain needs at least two species");
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::vector<Mechanism> out;
  std::set<std::string> seen;
  do {
    std::vector<ReactionStep> steps;
    for (std::size_t k = 0; k + 1 < m; ++k)
      steps.push_back({Complex({{order[k], 1}}), Complex({{order[k + 1], 1}}), false});
    Mechanism mech(species, std::move(steps));
    if (seen.insert(canonical_id(mech)).second) out.push_back(std::move(mech));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

SpeciesSet screening_species(std::size_t m, const ObservationSet& data) {
  SpeciesSet species = data.species.size() == m ? SpeciesSet(data.species) : SpeciesSet::standard(m);
  for (const auto& name : data.species)
    if (!species.index_of(name))
      throw DataError("data species '" + name + "' is not among the screened species");
  return species;
}

std::vector<Mechanism> screen_candidates(const ScreenConfig& config, const ObservationSet& data) {
  config.validate();
  const SpeciesSet species = screening_species(config.species, data);
  std::vector<Mechanism> out;
  auto push = [&](Mechanism m) {
    if (out.size() >= config.cap)
      throw CapExceeded("more than " + std::to_string(config.cap) + " candidates pass the filters");
    out.push_back(std::move(m));
  };
  if (config.family == Family::Consecutive) {
    for (auto& m : permuted_consecutive(species))
      if (passes(m, config.filter)) push(std::move(m));
    return out;
  }
  MechanismEnumerator e(species, config.steps, config.filter);
  while (auto m = e.next()) push(std::move(*m));
  return out;
}

// ------------------------------------------------------------------ ranking

std::vector<std::size_t> rank_records(std::vector<ScreenRecord>& records, Criterion c) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    r.rank.reset();
    r.value = r.delta = 0.0;
    if (r.converged() && !std::isnan(r.criterion(c))) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double va = records[a].criterion(c), vb = records[b].criterion(c);
    if (va != vb) return va < vb;
    const auto pa = records[a].parameters(), pb = records[b].parameters();
    if (pa != pb) return pa < pb;
    return records[a].id < records[b].id;
  });
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto& r = records[idx[k]];
    r.rank = k + 1;
    r.value = r.criterion(c);
    r.delta = r.value - records[idx[0]].criterion(c);
  }
  return idx;
}

std::vector<ReportRow> rank_report(std::vector<ScreenRecord> records, Criterion c, std::size_t top_k) {
  const auto order = rank_records(records, c);
  std::vector<ReportRow> rows;
  for (std::size_t k = 0; k < order.size() && k < top_k; ++k) {
    const auto& r = records[order[k]];
    rows.push_back({*r.rank, r.id, r.mechanism, r.value, r.delta, get_number(r.fit, "rss"), r.parameters(),
                    r.converged()});
  }
  return rows;
}

std::string format_report(const std::vector<ReportRow>& rows, Criterion c) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s  %-17s  %12s  %10s  %12s  %2s  %-4s  %s\n", "rank", "id", to_string(c), "delta",
                "rss", "p", "conv", "mechanism");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%4zu  %-17s  %12.6g  %10.4g  %12.6g  %2zu  %-4s  ", r.rank, r.id.c_str(), r.value,
                  r.delta, r.rss, r.p, r.converged ? "yes" : "no");
    out << buf << r.mechanism << "\n";
  }
  return out.str();
}

json report_json(const std::vector<ReportRow>& rows, Criterion c) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"rank", r.rank},
                   {"id", r.id},
                   {"mechanism", r.mechanism},
                   {"value", number(r.value)},
                   {"delta", number(r.delta)},
                   {"rss", number(r.rss)},
                   {"p", r.p},
                   {"converged", r.converged}});
  return {{"criterion", to_string(c)}, {"ranking", arr}};
}

// -------------------------------------------------------------- persistence

namespace {

json make_header(const ScreenConfig& config, const ObservationSet& data) {
  return {{"type", "header"},
          {"format", 1},
          {"config", config.to_json()},
          {"data", {{"source", data.source},
                    {"species", data.species},
                    {"times", data.times.size()},
                    {"observations", data.observation_count()}}},
          {"rng", Rng::kAlgorithm}};
}

json make_summary(const ScreenOutcome& o, Criterion c) {
  json ranking = json::array();
  for (auto i : o.ranking) ranking.push_back(o.records[i].id);
  std::size_t failed = 0;
  for (const auto& r : o.records) failed += !r.converged();
  return {{"type", "summary"},
          {"criterion", to_string(c)},
          {"candidates", o.candidates},
          {"ranked", o.ranking.size()},
          {"failed", failed},
          {"ranking", ranking}};
}

// Complete lines only; a trailing partial line (interrupted write) is dropped.
std::vector<json> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<json> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("corrupt line in " + path.string());
    out.push_back(std::move(j));
  }
  return out;
}

void write_final(const std::filesystem::path& path, const json& header, const ScreenOutcome& o, Criterion c) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << header.dump() << '\n';
    for (const auto& r : o.records) out << r.to_json(c).dump() << '\n';
    out << make_summary(o, c).dump() << '\n';
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ScreenRecord evaluate(const Mechanism& m, std::uint64_t index, const ScreenConfig& config,
                      const ObservationSet& data) {
  ScreenRecord rec;
  rec.index = index;
  rec.id = canonical_id(m);
  rec.mechanism = serialize_mechanism(m);
  rec.summary = summary_json(m, summarize(m));
  FitOptions options = config.fit;
  options.constrained = options.constrained && m.is_reversible();
  try {
    const FitProblem problem(m, data, options);
    const FitResult result = fit(problem);
    rec.fit = to_json(result, m);
    if (!result.converged) rec.failure = "not converged: " + result.message;
  } catch (const std::exception& e) {
    rec.fit = nullptr;
    rec.failure = e.what();
  }
  return rec;
}

}  // namespace

ResultsFile read_results(const std::filesystem::path& path) {
  ResultsFile f;
  for (auto& j : read_lines(path)) {
    const std::string type = j.value("type", "");
    if (type == "header") f.header = std::move(j);
    else if (type == "record") f.records.push_back(ScreenRecord::from_json(j));
  }
  if (f.header.is_null()) throw std::runtime_error(path.string() + " has no header line");
  std::stable_sort(f.records.begin(), f.records.end(),
                   [](const ScreenRecord& a, const ScreenRecord& b) { return a.index < b.index; });
  return f;
}

ScreenOutcome screen(const ScreenConfig& config, const ObservationSet& data) {
  data.validate();
  const auto candidates = screen_candidates(config, data);
  const json header = make_header(config, data);
  ScreenOutcome outcome;
  outcome.candidates = candidates.size();
  const bool persist = !config.output.empty();

  std::map<std::string, ScreenRecord> done;
  if (persist && config.resume && std::filesystem::exists(config.output)) {
    const auto lines = read_lines(config.output);
    if (lines.empty() || lines.front() != header)
      throw std::runtime_error("cannot resume: " + config.output.string() + " was written with a different setup");
    for (const auto& j : lines)
      if (j.value("type", "") == "record") {
        auto r = ScreenRecord::from_json(j);
        done.emplace(r.id, std::move(r));
      }
  }

  std::ofstream out;
  if (persist) {
    out.open(config.output, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + config.output.string());
    out << header.dump() << '\n';
    for (const auto& [id, r] : done) out << r.to_json(config.criterion).dump() << '\n';
    out.flush();
  }

  std::vector<std::optional<ScreenRecord>> slots(candidates.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (auto it = done.find(canonical_id(candidates[i])); it != done.end()) {
      slots[i] = it->second;
      slots[i]->index = i;
    } else {
      pending.push_back(i);
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next++;
      if (k >= pending.size()) return;
      const std::size_t i = pending[k];
      try {
        ScreenRecord rec = evaluate(candidates[i], i, config, data);
        std::lock_guard lock(mu);
        if (persist) {
          out << rec.to_json(config.criterion).dump() << '\n';
          out.flush();
        }
        slots[i] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = pending.size();
      }
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(pending.size())));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  outcome.fitted_now = pending.size();
  if (persist) out.close();

  for (auto& s : slots) outcome.records.push_back(std::move(*s));
  outcome.ranking = rank_records(outcome.records, config.criterion);
  outcome.exit_code = candidates.empty() ? 2 : 0;
  if (persist) write_final(config.output, header, outcome, config.criterion);
  return outcome;
}

// ---------------------------------------------------------------- plot data

RateAssignment record_rates(const ScreenRecord& r, const Mechanism& m) {
  if (!r.fit.is_object()) throw std::runtime_error("record " + r.id + " carries no fit");
  const json& k = r.fit.at("rates");
  RateAssignment out;
  for (std::size_t s = 0; s < m.reaction_count(); ++s) {
    out.k_plus.push_back(get_number(k, forward_rate_name(s).c_str()));
    out.k_minus.push_back(m.step(s).reversible ? get_number(k, backward_rate_name(s).c_str()) : 0.0);
  }
  return out;
}

Eigen::VectorXd record_initial(const ScreenRecord& r, const Mechanism& m) {
  if (!r.fit.is_object()) throw std::runtime_error("record " + r.id + " carries no fit");
  const json& init = r.fit.at("initial");
  Eigen::VectorXd c0(static_cast<Eigen::Index>(m.species_count()));
  for (std::size_t i = 0; i < m.species_count(); ++i)
    c0[static_cast<Eigen::Index>(i)] = get_number(init, m.species().name(i).c_str());
  return c0;
}

std::vector<std::filesystem::path> emit_plot_data(const Mechanism& m, const RateAssignment& rates,
                                                  const Eigen::VectorXd& c0, const ObservationSet& data,
                                                  std::size_t grid, const std::filesystem::path& dir,
                                                  const std::string& prefix) {
  data.validate();
  const double t0 = data.times.front(), t1 = data.times.back();
  std::vector<double> times(data.times);
  if (grid == 1) times.push_back(t0);
  for (std::size_t i = 0; grid > 1 && i < grid; ++i)
    times.push_back(i + 1 == grid ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(grid - 1));
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const Trajectory traj = integrate(
      [&](const Eigen::VectorXd& c, Eigen::VectorXd& dc) { mass_action_rhs(m, rates.k_plus, rates.k_minus, c, dc); }, c0,
      t1, times, IntegratorOptions{1e-10, 1e-14, 0.0, 500'000});

  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t j = 0; j < data.species.size(); ++j) {
    const auto col = m.species().index_of(data.species[j]);
    if (!col) throw DataError("data species '" + data.species[j] + "' does not occur in the mechanism");
    const auto path = dir / (prefix + data.species[j] + ".csv");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t,observed,fitted\n";
    std::size_t row = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      out << format_double(times[i]) << ',';
      while (row < data.times.size() && data.times[row] < times[i]) ++row;
      if (row < data.times.size() && data.times[row] == times[i]) {
        const double v = data.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
        if (!is_missing(v)) out << format_double(v);
      }
      out << ',' << format_double(traj.states[i][static_cast<Eigen::Index>(*col)]) << '\n';
    }
    written.push_back(path);
  }
  return written;
}

std::vector<std::filesystem::path> emit_plot_data(const FitResult& result, const FitProblem& problem, std::size_t grid,
                                                  const std::filesystem::path& dir, const std::string& prefix) {
  return emit_plot_data(problem.mechanism(), result.rates, result.initial_state, problem.data(), grid, dir, prefix);
}

}  // namespace crn
