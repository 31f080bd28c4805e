#include "crn/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "crn/analysis.hpp"
#include "crn/enumeration.hpp"
#include "crn/fitting.hpp"
#include "crn/kinetics.hpp"
#include "crn/observations.hpp"
#include "crn/pipeline.hpp"
#include "crn/random.hpp"
#include "crn/settings.hpp"

namespace crn {

using nlohmann::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitEmpty = 2;
constexpr int kExitCap = 3;

// A subcommand whose options are collected into a flat SettingMap so that a
// config file and the flags go through the same typed validation.
struct Command {
  CLI::App* app = nullptr;
  std::vector<std::pair<std::string, CLI::Option*>> values;
  std::vector<std::pair<std::string, CLI::Option*>> switches;
  std::string config;

  void value(const std::string& key, const std::string& help, const std::string& short_name = "") {
    const std::string names = short_name.empty() ? "--" + key : short_name + ",--" + key;
    values.emplace_back(key, app->add_option(names, help)->type_name("VALUE"));
  }
  void toggle(const std::string& key, const std::string& help) {
    switches.emplace_back(key, app->add_flag("--" + key, help));
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> k;
    for (const auto& [name, opt] : values) k.push_back(name);
    for (const auto& [name, opt] : switches) k.push_back(name);
    return k;
  }

  Settings settings() const {
    SettingMap flags;
    for (const auto& [name, opt] : values)
      if (opt->count() > 0) flags[name] = opt->as<std::string>();
    for (const auto& [name, opt] : switches)
      if (opt->count() > 0) flags[name] = "true";
    SettingMap file;
    if (!config.empty()) file = load_config(config);
    Settings s(merge_settings(file, flags));
    s.check_known(keys(), app->get_name());
    return s;
  }
};

std::string read_mechanism_text(const std::string& arg) {
  if (arg.empty() || arg.front() != '@') return arg;
  std::ifstream in(arg.substr(1), std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open mechanism file " + arg.substr(1));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json big_json(const BigInt& v) {
  if (v >= 0 && v <= BigInt(std::numeric_limits<std::uint64_t>::max())) return json(v.convert_to<std::uint64_t>());
  if (v < 0 && v >= BigInt(std::numeric_limits<std::int64_t>::min())) return json(v.convert_to<std::int64_t>());
  return json(v.str());
}


std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::optional<DbClass> parse_db_class(const Settings& s) {
  auto v = s.text("db-class");
  if (!v || *v == "any") return std::nullopt;
  if (*v == "udb") return DbClass::Unconditional;
  if (*v == "cdb") return DbClass::Conditional;
  throw SettingsError("--db-class must be udb, cdb or any");
}

EnumerationFilter filter_from(const Settings& s) {
  EnumerationFilter f;
  f.exact_species = s.flag("exact-species");
  f.mass_conserving = s.flag("mass-conserving");
  f.db_class = parse_db_class(s);
  return f;
}

IntegratorOptions integrator_from(const Settings& s, IntegratorOptions base) {
  base.rtol = s.real("rtol", base.rtol, 1e-14, 1e-2);
  base.atol = s.real("atol", base.atol, 1e-300, 1.0);
  return base;
}

// Fit options shared by `fit` and `screen`; the seed is only consulted when
// random starts are requested.
FitOptions fit_options_from(const Settings& s, std::ostream& err, std::optional<std::uint64_t>& seed_used) {
  FitOptions o;
  o.constrained = s.flag("db-constrained");
  o.weights = parse_weights(s.text("weights", "unit"));
  o.allow_negative = s.flag("allow-negative");
  o.fit_init = s.flag("fit-init");
  if (auto v = s.text("init")) o.init = parse_named_values(*v);
  if (auto v = s.text("start")) o.starts.push_back(parse_named_values(*v));
  o.random_starts = s.integer("starts", 0, 0, 100000);
  o.max_iterations = s.integer("max-iterations", o.max_iterations, 1, 1000000);
  o.integrator = integrator_from(s, o.integrator);
  if (o.random_starts > 0) {
    const SeedChoice c = resolve_seed(s);
    o.seed = c.seed;
    seed_used = c.seed;
    err << "seed: " << c.seed << (c.generated ? " (generated)" : "") << "\n";
  }
  return o;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

// ------------------------------------------------------------------- count

int cmd_count(const Settings& s, std::ostream& out) {
  const std::size_t m = s.integer("species", 0, 1, 64);
  const auto by_type = count_steps_by_type(m);
  const BigInt steps = count_steps(m);
  json types = json::object();
  for (std::size_t t = 0; t < kStepTypeCount; ++t)
    types[step_type_pattern(static_cast<StepType>(t))] = big_json(by_type[t]);
  json j = {{"species", m}, {"steps", big_json(steps)}, {"steps_by_type", types}};
  std::optional<std::size_t> r;
  BigInt all, exact;
  if (s.has("steps")) {
    r = s.integer("steps", 1, 1, UINT32_MAX);
    all = count_mechanisms(m, *r, false);
    exact = count_mechanisms(m, *r, true);
    j["reaction_steps"] = *r;
    j["mechanisms"] = big_json(all);
    j["mechanisms_exact_species"] = big_json(exact);
  }
  if (s.flag("json")) {
    emit(out, j);
    return 0;
  }
  out << "M = " << m << ": " << steps << " reaction steps\n";
  for (std::size_t t = 0; t < kStepTypeCount; ++t)
    out << "  " << step_type_pattern(static_cast<StepType>(t)) << "  " << by_type[t] << "\n";
  if (r) {
    out << "R = " << *r << ": " << all << " mechanisms, " << exact << " using every species\n";
  }
  return 0;
}

// --------------------------------------------------------------- enumerate

int cmd_enumerate(const Settings& s, std::ostream& out, std::ostream& err) {
  const std::size_t m = s.integer("species", 0, 1, 64);
  const std::size_t r = s.integer("steps", 0, 1, 1000);
  const std::uint64_t cap = s.integer("cap", kDefaultCap, 1, UINT64_MAX);
  const bool as_json = s.flag("json");
  if (s.flag("census")) {
    const unsigned workers = static_cast<unsigned>(s.integer("workers", 1, 1, 256));
    const CensusCounts c = census(m, r, cap, workers);
    if (as_json) {
      emit(out, {{"species", m},
                 {"steps", r},
                 {"total", c.total},
                 {"mass_conserving", c.mass_conserving},
                 {"udb", c.udb},
                 {"cdb", c.cdb}});
    } else {
      out << "M = " << m << ", R = " << r << ": total " << c.total << ", mass conserving " << c.mass_conserving
          << ", UDB " << c.udb << ", CDB " << c.cdb << "\n";
    }
    return 0;
  }
  const std::uint64_t limit = s.integer("limit", UINT64_MAX, 0, UINT64_MAX);
  MechanismEnumerator e(m, r, filter_from(s));
  json list = json::array();
  std::uint64_t count = 0;
  while (count < limit) {
    auto mech = e.next();
    if (!mech) break;
    if (++count > cap) throw CapExceeded("more than " + std::to_string(cap) + " mechanisms");
    const std::string id = canonical_id(*mech), text = serialize_mechanism(*mech);
    if (as_json) list.push_back({{"index", e.last_rank()}, {"id", id}, {"mechanism", text}});
    else out << id << "\t" << text << "\n";
  }
  if (as_json) emit(out, {{"species", m}, {"steps", r}, {"count", count}, {"mechanisms", list}});
  else err << count << " mechanisms\n";
  return 0;
}

// ----------------------------------------------------------------- analyze

int cmd_analyze(const Settings& s, std::ostream& out) {
  const Mechanism m = parse_mechanism(read_mechanism_text(s.required("mechanism")));
  const NetworkSummary sum = summarize(m);
  if (s.flag("json")) {
    json j = summary_json(m, sum);
    j["mechanism"] = serialize_mechanism(m);
    j["canonical_form"] = canonical_form(m);
    j["id"] = canonical_id(m);
    j["species_names"] = m.species().names();
    emit(out, j);
    return 0;
  }
  out << serialize_mechanism(m) << "\n";
  out << "id " << canonical_id(m) << "\n";
  out << "species M = " << sum.species << ", steps R = " << sum.reactions << ", complexes N = " << sum.complexes
      << ", linkage classes L = " << sum.linkage_classes << ", rank S = " << sum.rank << ", deficiency "
      << sum.deficiency << "\n";
  out << "reversible " << (sum.reversible ? "yes" : "no") << ", weakly reversible "
      << (sum.weakly_reversible ? "yes" : "no") << "\n";
  out << "mass conserving " << (sum.mass_conserving ? "yes" : "no");
  if (sum.mass_vector) {
    out << " (";
    for (std::size_t i = 0; i < sum.mass_vector->rho.size(); ++i)
      out << (i ? ", " : "") << m.species().name(i) << " " << sum.mass_vector->rho[i];
    out << ")";
  }
  out << "\n";
  out << "detailed balance " << to_string(sum.db_class) << "\n";
  for (const auto& c : sum.conditions) out << "  " << to_string(c.kind) << "  " << render_condition(c) << "\n";
  return 0;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Settings& s, std::ostream& out, std::ostream& err) {
  const Mechanism m = parse_mechanism(read_mechanism_text(s.required("mechanism")));
  const std::size_t nr = m.reaction_count();
  const NamedValues given = parse_named_values(s.required("rates"));
  std::vector<double> k_plus(nr, 0.0);
  std::vector<std::optional<double>> k_minus(nr);
  for (const auto& [name, v] : given) {
    bool matched = false;
    for (std::size_t r = 0; r < nr && !matched; ++r) {
      if (name == forward_rate_name(r)) k_plus[r] = v, matched = true;
      else if (name == backward_rate_name(r) && m.step(r).reversible) k_minus[r] = v, matched = true;
    }
    if (!matched) throw std::invalid_argument("unknown rate coefficient '" + name + "'");
  }
  for (std::size_t r = 0; r < nr; ++r)
    if (!given.count(forward_rate_name(r))) throw std::invalid_argument(forward_rate_name(r) + " is missing");
  RateAssignment rates;
  if (s.flag("db-complete")) {
    rates = complete_backward_rates(m, k_plus, k_minus);
  } else {
    rates.k_plus = k_plus;
    rates.k_minus.assign(nr, 0.0);
    for (std::size_t r = 0; r < nr; ++r) {
      if (!m.step(r).reversible) continue;
      if (!k_minus[r]) throw std::invalid_argument(backward_rate_name(r) + " is missing (or use --db-complete)");
      rates.k_minus[r] = *k_minus[r];
    }
  }

  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.species_count()));
  for (const auto& [name, v] : parse_named_values(s.text("init", ""))) {
    auto idx = m.species().index_of(name);
    if (!idx) throw std::invalid_argument("unknown species '" + name + "' in --init");
    c0[static_cast<Eigen::Index>(*idx)] = v;
  }
  const double t_end = s.real("t-end", 10.0, 1e-12, 1e12);
  const double dt = s.real("dt", 0.1, 1e-12, t_end);
  const double noise = s.real("noise", 0.0, 0.0, 0.999999);
  IntegratorOptions io = integrator_from(s, IntegratorOptions{1e-10, 1e-12, 0.0, 500'000});

  std::optional<std::uint64_t> seed;
  if (noise > 0) {
    const SeedChoice c = resolve_seed(s);
    seed = c.seed;
    err << "seed: " << c.seed << (c.generated ? " (generated)" : "") << "\n";
  }
  const KineticSystem sys(m, rates);
  const auto grid = uniform_grid(t_end, dt);
  const Trajectory traj = integrate(sys, c0, t_end, grid, io);
  const ObservationSet data = sample_with_noise(traj, m.species(), NoiseSpec{noise, seed.value_or(0)});

  const auto output = s.text("output");
  if (output) save_csv(data, *output);
  if (s.flag("json")) {
    json rj = json::object(), ij = json::object();
    for (std::size_t r = 0; r < nr; ++r) {
      rj[forward_rate_name(r)] = rates.k_plus[r];
      if (m.step(r).reversible) rj[backward_rate_name(r)] = rates.k_minus[r];
    }
    for (std::size_t i = 0; i < m.species_count(); ++i) ij[m.species().name(i)] = c0[static_cast<Eigen::Index>(i)];
    json values = json::array();
    for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < data.values.cols(); ++j) row.push_back(data.values(i, j));
      values.push_back(row);
    }
    emit(out, {{"mechanism", serialize_mechanism(m)},
               {"rates", rj},
               {"init", ij},
               {"t_end", t_end},
               {"dt", dt},
               {"noise", noise},
               {"seed", seed ? json(*seed) : json(nullptr)},
               {"rng", Rng::kAlgorithm},
               {"output", output ? json(*output) : json(nullptr)},
               {"times", data.times},
               {"species", data.species},
               {"values", values}});
  } else if (!output) {
    out << to_csv(data);
  } else {
    err << "wrote " << data.times.size() << " rows to " << *output << "\n";
  }
  return 0;
}

// --------------------------------------------------------------------- fit

void print_fit(std::ostream& out, const FitResult& r) {
  out << (r.converged ? "converged" : "NOT converged") << " after " << r.iterations << " iterations (" << r.message
      << ")\n";
  for (std::size_t j = 0; j < r.p; ++j)
    out << "  " << r.names[j] << " = " << fmt(r.estimates[j], "%.7g") << " +- " << fmt(r.std_errors[j], "%.3g") << "  ["
        << r.units[j] << "]\n";
  out << "correlation:\n";
  for (Eigen::Index a = 0; a < r.correlation.rows(); ++a) {
    out << " ";
    for (Eigen::Index b = 0; b < r.correlation.cols(); ++b) out << " " << fmt(r.correlation(a, b), "%9.6f");
    out << "\n";
  }
  out << "rss " << fmt(r.rss, "%.6g") << ", n " << r.n << ", p " << r.p << ", aic " << fmt(r.aic, "%.4f") << ", bic "
      << fmt(r.bic, "%.4f") << "\n";
  for (const auto& v : r.db_violations)
    if (v.flagged) out << "detailed balance violated: " << render_condition(v.constraint) << " (|log| = " << fmt(v.violation) << ")\n";
}

int cmd_fit(const Settings& s, std::ostream& out, std::ostream& err) {
  const ObservationSet data = load_data(s.required("data"));
  const Mechanism m = parse_mechanism(read_mechanism_text(s.required("mechanism")));
  std::optional<std::uint64_t> seed;
  const FitOptions options = fit_options_from(s, err, seed);
  const FitProblem problem(m, data, options);
  const FitResult result = fit(problem);

  if (auto dir = s.text("plots")) {
    const auto grid = s.integer("grid", 200, 1, 10'000'000);
    for (const auto& p : emit_plot_data(result, problem, grid, *dir)) err << "wrote " << p.string() << "\n";
  }
  if (s.flag("json")) {
    json j = to_json(result, m);
    j["mechanism"] = serialize_mechanism(m);
    j["id"] = canonical_id(m);
    j["data"] = data.source;
    j["db_constrained"] = options.constrained;
    j["weights"] = to_string(options.weights);
    j["seed"] = seed ? json(*seed) : json(nullptr);
    emit(out, j);
  } else {
    out << serialize_mechanism(m) << "  [" << data.source << "]\n";
    print_fit(out, result);
  }
  return result.converged ? 0 : kExitError;
}

// ------------------------------------------------------------ screen, rank

int cmd_screen(const Settings& s, std::ostream& out, std::ostream& err) {
  const ObservationSet data = load_data(s.required("data"));
  ScreenConfig c;
  c.family = parse_family(s.text("family", "all"));
  c.species = s.integer("species", 0, 1, 64);
  if (c.family == Family::All) c.steps = s.integer("steps", 0, 1, 1000);
  else if (!s.has("species")) c.species = data.species.size();
  c.filter = filter_from(s);
  std::optional<std::uint64_t> seed;
  c.fit = fit_options_from(s, err, seed);
  c.criterion = parse_criterion(s.text("criterion", "aic"));
  c.top_k = s.integer("top", 10, 1, UINT32_MAX);
  c.cap = s.integer("cap", kDefaultCap, 1, UINT64_MAX);
  c.workers = static_cast<unsigned>(s.integer("workers", 1, 1, 256));
  c.resume = s.flag("resume");
  if (auto o = s.text("output")) c.output = *o;

  const ScreenOutcome o = screen(c, data);
  err << o.candidates << " candidates, " << o.fitted_now << " fitted now, " << o.ranking.size() << " ranked\n";
  const auto rows = rank_report(o.records, c.criterion, c.top_k);
  if (s.flag("json")) {
    json j = report_json(rows, c.criterion);
    j["candidates"] = o.candidates;
    j["fitted_now"] = o.fitted_now;
    j["ranked"] = o.ranking.size();
    j["output"] = c.output.empty() ? json(nullptr) : json(c.output.string());
    j["seed"] = seed ? json(*seed) : json(nullptr);
    emit(out, j);
  } else if (!rows.empty()) {
    out << format_report(rows, c.criterion);
  }
  return o.exit_code;
}

int cmd_rank(const Settings& s, std::ostream& out, std::ostream& err) {
  const ResultsFile f = read_results(s.required("input"));
  const std::string default_criterion = f.header.contains("config") ? f.header["config"].value("criterion", "aic") : "aic";
  const Criterion crit = parse_criterion(s.text("criterion", default_criterion));
  const std::size_t top = s.integer("top", 10, 1, UINT32_MAX);
  if (f.records.empty()) {
    err << "no records\n";
    return kExitEmpty;
  }
  const auto rows = rank_report(f.records, crit, top);

  if (auto dir = s.text("plots")) {
    const auto grid = s.integer("grid", 200, 1, 10'000'000);
    const ObservationSet data = load_data(f.header.at("data").at("source").get<std::string>());
    const std::size_t species = f.header.at("config").at("species").get<std::size_t>();
    const SpeciesSet names = screening_species(species, data);
    for (const auto& row : rows) {
      const auto it = std::find_if(f.records.begin(), f.records.end(), [&](const ScreenRecord& r) { return r.id == row.id; });
      const Mechanism m = parse_mechanism(it->mechanism, names);
      const auto target = std::filesystem::path(*dir) / (std::to_string(row.rank) + "-" + row.id);
      for (const auto& p : emit_plot_data(m, record_rates(*it, m), record_initial(*it, m), data, grid, target))
        err << "wrote " << p.string() << "\n";
    }
  }
  if (s.flag("json")) emit(out, report_json(rows, crit));
  else out << format_report(rows, crit);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reaction mechanism enumeration, analysis, simulation, fitting and screening"};
  app.name("crn");
  app.require_subcommand(1);

  auto make = [&](const std::string& name, const std::string& help) {
    auto cmd = std::make_unique<Command>();
    cmd->app = app.add_subcommand(name, help);
    cmd->app->add_option("--config", cmd->config, "flat key = value file; flags override it");
    cmd->toggle("json", "print one JSON document on standard output");
    return cmd;
  };
  auto add_fit_options = [](Command& c) {
    c.toggle("db-constrained", "impose detailed balance on reversible candidates");
    c.value("weights", "unit or relative");
    c.value("start", "starting values, e.g. \"k1=1,k2=1\" or a single number for all");
    c.value("starts", "additional random starts, log-uniform in [1e-3, 1e3]");
    c.value("seed", "random seed (default: CRN_SEED, else generated and printed)");
    c.toggle("fit-init", "estimate initial concentrations that are not known");
    c.toggle("allow-negative", "fit plain coefficients instead of logarithms");
    c.value("init", "known initial concentrations, e.g. \"X=2,Y=3\"");
    c.value("rtol", "integrator relative tolerance");
    c.value("atol", "integrator absolute tolerance");
    c.value("max-iterations", "Levenberg-Marquardt iteration limit");
  };
  auto add_filters = [](Command& c) {
    c.toggle("exact-species", "every species must occur");
    c.toggle("mass-conserving", "keep mass-conserving mechanisms only");
    c.value("db-class", "udb, cdb or any");
  };

  auto count = make("count", "count reaction steps and mechanisms");
  count->value("species", "number of species M");
  count->value("steps", "number of reaction steps R");

  auto enumerate = make("enumerate", "list mechanisms or tabulate their structural census");
  enumerate->value("species", "number of species M");
  enumerate->value("steps", "number of reaction steps R");
  add_filters(*enumerate);
  enumerate->value("limit", "stop after this many mechanisms");
  enumerate->value("cap", "refuse to go beyond this many mechanisms");
  enumerate->toggle("census", "count total, mass-conserving, UDB and CDB mechanisms");
  enumerate->value("workers", "threads for the census");

  auto analyze = make("analyze", "structural analysis of one mechanism");
  analyze->value("mechanism", "mechanism text, or @file");

  auto simulate = make("simulate", "integrate a mechanism and sample it, optionally with noise");
  simulate->value("mechanism", "mechanism text, or @file");
  simulate->value("rates", "coefficients, e.g. \"k1=0.1,km1=0.1,k2=1\"");
  simulate->toggle("db-complete", "derive missing backward coefficients from detailed balance");
  simulate->value("init", "initial concentrations, e.g. \"X=2,Y=3\"");
  simulate->value("t-end", "time horizon");
  simulate->value("dt", "sampling step");
  simulate->value("noise", "relative noise level, e.g. 0.02");
  simulate->value("seed", "random seed");
  simulate->value("output", "CSV output path", "-o");
  simulate->value("rtol", "integrator relative tolerance");
  simulate->value("atol", "integrator absolute tolerance");

  auto fitc = make("fit", "estimate rate coefficients from data");
  fitc->value("mechanism", "mechanism text, or @file");
  fitc->value("data", "CSV path or fixture:<name>");
  add_fit_options(*fitc);
  fitc->value("plots", "directory for observed/fitted CSV files");
  fitc->value("grid", "points of the dense fitted curve");

  auto screenc = make("screen", "fit every candidate mechanism and rank them");
  screenc->value("species", "number of species M");
  screenc->value("steps", "number of reaction steps R");
  screenc->value("data", "CSV path or fixture:<name>");
  screenc->value("family", "all (enumerated) or consecutive (permuted chains)");
  add_filters(*screenc);
  add_fit_options(*screenc);
  screenc->value("criterion", "aic, bic or rss");
  screenc->value("top", "rows in the report");
  screenc->value("workers", "parallel fits");
  screenc->value("cap", "maximum number of candidates");
  screenc->toggle("resume", "skip candidates already in the output file");
  screenc->value("output", "JSON-lines results file", "-o");

  auto rank = make("rank", "rank a results file");
  rank->value("input", "JSON-lines results file", "-i");
  rank->value("criterion", "aic, bic or rss");
  rank->value("top", "rows in the report");
  rank->value("plots", "directory for per-record plot data");
  rank->value("grid", "points of the dense fitted curve");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (count->app->parsed()) return cmd_count(count->settings(), out);
    if (enumerate->app->parsed()) return cmd_enumerate(enumerate->settings(), out, err);
    if (analyze->app->parsed()) return cmd_analyze(analyze->settings(), out);
    if (simulate->app->parsed()) return cmd_simulate(simulate->settings(), out, err);
    if (fitc->app->parsed()) return cmd_fit(fitc->settings(), out, err);
    if (screenc->app->parsed()) return cmd_screen(screenc->settings(), out, err);
    if (rank->app->parsed()) return cmd_rank(rank->settings(), out, err);
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace crn
