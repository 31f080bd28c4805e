// Acceptance checks, one per criterion. Usage: acceptance [N]; without N all
// criteria run. Prints "criterion N: PASS|FAIL  details" and exits non-zero
// when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crn/analysis.hpp"
#include "crn/enumeration.hpp"
#include "crn/fitting.hpp"
#include "crn/kinetics.hpp"
#include "crn/pipeline.hpp"

using namespace crn;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[mismatch] " << what << "; ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Is every expected exponent vector a rational combination of the computed ones,
// and do both sets have the same size?
bool same_conditions(const std::vector<DbConstraint>& got, const std::vector<IntVector>& expected) {
  if (got.size() != expected.size()) return false;
  if (got.empty()) return true;
  const auto r = static_cast<Eigen::Index>(got[0].exponents.size());
  IntMatrix a(r, static_cast<Eigen::Index>(got.size()));
  for (std::size_t k = 0; k < got.size(); ++k)
    for (Eigen::Index j = 0; j < r; ++j) a(j, static_cast<Eigen::Index>(k)) = got[k].exponents[static_cast<std::size_t>(j)];
  const std::size_t base = exact_rank(a);
  for (const auto& e : expected) {
    IntMatrix b(r, a.cols() + 1);
    b << a, Eigen::Map<const Eigen::Matrix<long long, Eigen::Dynamic, 1>>(e.data(), r);
    if (exact_rank(b) != base) return false;
  }
  return true;
}

// Truth of the simulated two-species study.
const char* kTrueMechanism = "X <=> Y; 2 X <=> X + Y";

ObservationSet simulate_run(std::uint64_t seed) {
  const Mechanism m = parse_mechanism(kTrueMechanism);
  const RateAssignment k = complete_backward_rates(m, {0.1, 1.0}, {0.1, std::nullopt});
  Eigen::VectorXd c0(2);
  c0 << 2, 3;
  const auto grid = uniform_grid(10, 0.1);
  const Trajectory traj = integrate(KineticSystem(m, k), c0, 10, grid, {1e-10, 1e-12});
  return sample_with_noise(traj, m.species(), {0.02, seed});
}

// ---------------------------------------------------------------- criteria

void criterion1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const long expected[] = {5, 24, 69, 155, 300, 525, 854};
  for (std::size_t m = 2; m <= 8; ++m) {
    const BigInt got = count_steps(m);
    o.expect(got == expected[m - 2], "count_steps(" + std::to_string(m) + ") = " + got.str());
  }
  o.detail << "count_steps(2..8) = 5 24 69 155 300 525 854 in " << seconds_since(t0) * 1e3 << " ms";
}

void criterion2(Outcome& o) {
  for (std::size_t m = 2; m <= 6; ++m)
    o.expect(BigInt(enumerate_steps(m).size()) == count_steps(m), "generator length M=" + std::to_string(m));
  // Table rows in StepType order, columns M = 2, 3, 4.
  const int table[kStepTypeCount][3] = {{1, 3, 6}, {2, 6, 12}, {2, 6, 12}, {0, 3, 12},
                                        {0, 3, 12}, {0, 3, 12}, {0, 0, 3}};
  for (std::size_t m = 2; m <= 4; ++m) {
    std::array<int, kStepTypeCount> seen{};
    for (const auto& t : enumerate_typed_steps(m)) ++seen[static_cast<std::size_t>(t.type)];
    const auto formula = count_steps_by_type(m);
    for (std::size_t k = 0; k < kStepTypeCount; ++k) {
      const std::string cell = std::string(step_type_pattern(static_cast<StepType>(k))) + " M=" + std::to_string(m);
      o.expect(seen[k] == table[k][m - 2], "generated " + cell);
      o.expect(formula[k] == table[k][m - 2], "formula " + cell);
    }
  }
  o.detail << "generator matches count_steps for M<=6; all 21 per-type cells for M=2,3,4 agree";
}

void criterion3(Outcome& o) {
  const long exact[] = {9, 246, 1994, 10611, 42501, 134596};
  const long at_most[] = {24, 276, 2024, 10626, 42504, 134596};
  for (std::size_t r = 1; r <= 6; ++r) {
    o.expect(count_mechanisms(3, r, true) == exact[r - 1], "exactly 3 species, R=" + std::to_string(r));
    o.expect(count_mechanisms(3, r, false) == at_most[r - 1], "at most 3 species, R=" + std::to_string(r));
  }
  std::uint64_t materialized = 0;
  for (std::size_t r = 1; r <= 4; ++r) {
    std::uint64_t all = 0, full = 0;
    MechanismEnumerator e(3, r);
    while (auto m = e.next()) {
      ++all;
      full += m->uses_all_species();
    }
    o.expect(all == static_cast<std::uint64_t>(at_most[r - 1]), "generator total R=" + std::to_string(r));
    o.expect(full == static_cast<std::uint64_t>(exact[r - 1]), "generator exact R=" + std::to_string(r));
    materialized += all;
  }
  o.detail << "both rows for R=1..6 exact; generator agrees for R<=4 (" << materialized << " mechanisms built)";
}

void criterion4(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Row {
    std::size_t m, r;
    CensusCounts expected;
  };
  const Row rows[] = {{3, 1, {24, 24, 24, 0}},
                      {3, 2, {276, 207, 189, 18}},
                      {3, 3, {2024, 602, 0, 602}},
                      {4, 1, {69, 69, 69, 0}},
                      {4, 2, {2346, 2064, 2004, 60}}};
  for (const auto& row : rows) {
    const CensusCounts c = census(row.m, row.r);
    std::ostringstream s;
    s << "census(" << row.m << "," << row.r << ") = " << c.total << "/" << c.mass_conserving << "/" << c.udb << "/"
      << c.cdb;
    o.expect(c == row.expected, s.str());
  }
  const CensusCounts big = census(4, 3);
  o.expect(big.total == 52394, "census(4,3) total " + std::to_string(big.total));
  o.detail << "five rows exact; census(4,3) total " << big.total << ", MC " << big.mass_conserving << " = UDB "
           << big.udb << " + CDB " << big.cdb << " (reported only) in "
           << seconds_since(t0) << " s";
}

void criterion5(Outcome& o) {
  const auto sp2 = SpeciesSet::standard(2), sp3 = SpeciesSet::standard(3);
  // prod (k+_r / k-_r)^{a_r} = 1
  o.expect(same_conditions(classify_db(parse_mechanism("X <=> Y; 2 X <=> X + Y", sp2)).constraints, {{1, -1}}),
           "two-step cycle");
  o.expect(same_conditions(classify_db(parse_mechanism("X <=> Y; Y <=> Z; Z <=> X", sp3)).constraints, {{1, 1, 1}}),
           "triangle");
  const auto four_step = classify_db(parse_mechanism("X <=> Y; 2 X <=> X + Y; 2 X <=> 2 Y; X + Y <=> 2 Y", sp2));
  o.expect(same_conditions(four_step.constraints, {{2, 0, -1, 0}, {1, -1, 0, 0}, {0, 1, -1, 1}}), "two forest + circuit");
  std::size_t circuits = 0, forests = 0;
  for (const auto& c : four_step.constraints) (c.kind == ConstraintKind::Circuit ? circuits : forests)++;
  o.expect(circuits == 1 && forests == 2, "condition kinds of the four-step mechanism");

  // Substitutions for the three mass-conserving two-step mechanisms: k-2 from k1, k-1, k2.
  struct Sub {
    const char* text;
    std::function<double(double, double, double)> km2;
  };
  const Sub subs[] = {{"X <=> Y; 2 X <=> X + Y", [](double k1, double km1, double k2) { return km1 * k2 / k1; }},
                      {"X <=> Y; 2 Y <=> X + Y", [](double k1, double km1, double k2) { return k1 * k2 / km1; }},
                      {"2 X <=> X + Y; 2 Y <=> X + Y", [](double k1, double km1, double k2) { return k1 * k2 / km1; }}};
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0.1, 10);
  for (const auto& s : subs) {
    const Mechanism m = parse_mechanism(s.text, sp2);
    for (int trial = 0; trial < 20; ++trial) {
      const double k1 = u(g), km1 = u(g), k2 = u(g);
      const auto r = complete_backward_rates(m, {k1, k2}, {km1, std::nullopt});
      o.expect(std::abs(r.k_minus[1] / s.km2(k1, km1, k2) - 1) < 1e-12, std::string("substitution for ") + s.text);
      const auto p = db_parametrize(m);
      const auto km = p.reconstruct_backward({k1, k2}, {std::log(k1 / km1)});
      o.expect(std::abs(km[1] / s.km2(k1, km1, k2) - 1) < 1e-12, std::string("parametrization for ") + s.text);
    }
  }

  std::size_t checked = 0;
  for (std::size_t ms = 2; ms <= 3; ++ms)
    for (std::size_t r = 1; r <= 3; ++r) {
      MechanismEnumerator e(ms, r);
      while (auto m = e.next()) {
        const auto s = summarize(*m);
        const auto c = classify_db(*m);
        std::size_t nc = 0, nf = 0;
        for (const auto& k : c.constraints) (k.kind == ConstraintKind::Circuit ? nc : nf)++;
        const std::size_t circuit = r - (s.complexes - s.linkage_classes);
        const std::size_t forest = s.complexes - s.linkage_classes - s.rank;
        if (nc != circuit || nf != forest) o.expect(false, "condition counts for " + serialize_mechanism(*m));
        ++checked;
      }
    }
  o.detail << "two-step cycle, triangle, three substitutions and the 2 forest + 1 circuit set agree; counts hold on "
           << checked << " mechanisms";
}

void criterion6(Outcome& o) {
  const auto s = summarize(parse_mechanism("X + Y <=> Z; Z <=> 2 X", SpeciesSet::standard(3)));
  o.expect(s.complexes == 3 && s.linkage_classes == 1 && s.rank == 2 && s.deficiency == 0, "N, L, S, deficiency");
  o.expect(s.db_class == DbClass::Unconditional, "UDB");
  o.detail << "N=" << s.complexes << " L=" << s.linkage_classes << " S=" << s.rank << " deficiency=" << s.deficiency
           << " " << to_string(s.db_class);
}

void criterion7(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto f = load_fixture("salicylic");
  const Mechanism m = parse_mechanism(f.mechanism);
  FitOptions opt;
  opt.starts = {NamedValues{{"k1", 1}, {"k2", 1}}};
  const FitResult r = fit(FitProblem(m, f.data, opt));
  const double k1 = r.estimates[0], k2 = r.estimates[1], corr = r.correlation(0, 1);
  const double secs = seconds_since(t0);
  o.expect(r.converged, "converged");
  o.expect(std::abs(k1 - 0.0786) <= 0.002, "k1");
  o.expect(std::abs(k2 - 0.1813) <= 0.010, "k2");
  o.expect(std::abs(corr + 0.50) <= 0.05, "correlation " + std::to_string(corr) + " outside -0.50 +- 0.05");
  o.expect(secs < 5, "time");
  o.detail << "k1=" << k1 << " (se " << r.std_errors[0] << ") k2=" << k2 << " (se " << r.std_errors[1]
           << ") corr=" << corr << " in " << secs << " s";
}

void criterion8(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Mechanism m = parse_mechanism(kTrueMechanism);
  const RateAssignment truth = complete_backward_rates(m, {0.1, 1.0}, {0.1, std::nullopt});
  int recovered = 0;
  std::ostringstream misses;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    FitOptions opt{.constrained = true};
    opt.starts = {NamedValues{{"*", 0.5}}};  // reference starting estimates
    const FitProblem prob(m, simulate_run(seed), opt);
    const FitResult r = fit(prob);
    bool ok = r.converged;
    for (std::size_t j = 0; j < r.names.size(); ++j) {
      const std::string& n = r.names[j];
      const std::size_t step = std::stoul(n.substr(n[1] == 'm' ? 2 : 1)) - 1;
      const double t = n[1] == 'm' ? truth.k_minus[step] : truth.k_plus[step];
      ok = ok && std::isfinite(r.std_errors[j]) && std::abs(r.estimates[j] - t) <= 3 * r.std_errors[j];
    }
    if (ok) ++recovered;
    else misses << seed << " ";
  }
  o.expect(recovered >= 18, "recovered in " + std::to_string(recovered) + "/20 runs");
  o.detail << recovered << "/20 runs within 3 SE (missed seeds: " << misses.str() << ") in " << seconds_since(t0)
           << " s";
}

void criterion9(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string truth = canonical_id(parse_mechanism(kTrueMechanism, SpeciesSet::standard(2)));
  int first = 0;
  std::ostringstream misses;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScreenConfig c;
    c.species = 2;
    c.steps = 2;
    c.filter.mass_conserving = true;
    c.fit.constrained = true;
    c.fit.starts = {NamedValues{{"*", 0.5}}};
    const ScreenOutcome out = screen(c, simulate_run(seed));
    o.expect(out.candidates == 3, "three candidates");
    if (!out.ranking.empty() && out.records[out.ranking[0]].id == truth) ++first;
    else misses << seed << " ";
  }
  o.expect(first >= 16, "generator ranked first in " + std::to_string(first) + "/20 runs");
  o.detail << "generator first in " << first << "/20 runs (missed seeds: " << misses.str() << ") in "
           << seconds_since(t0) << " s";
}

void criterion10(Outcome& o) {
  // Detailed-balance parametrization residuals.
  std::mt19937_64 g(10);
  std::normal_distribution<double> n(0, 2);
  double worst = 0;
  std::size_t mechanisms = 0;
  for (std::size_t ms = 2; ms <= 3; ++ms)
    for (std::size_t r = 1; r <= 2; ++r) {
      MechanismEnumerator e(ms, r, EnumerationFilter{.db_class = DbClass::Conditional});
      while (auto m = e.next()) {
        ++mechanisms;
        const auto p = db_parametrize(*m);
        for (int t = 0; t < 100; ++t) {
          std::vector<double> kp(r), nu(p.rank());
          for (auto& k : kp) k = std::exp(n(g));
          for (auto& v : nu) v = n(g);
          for (const auto& v : check_db_posthoc(*m, {kp, p.reconstruct_backward(kp, nu)}))
            worst = std::max(worst, v.violation);
        }
      }
    }
  o.expect(worst < 1e-12, "parametrization residual");

  // Mass drift on the two worked systems.
  const double rtol = 1e-8;
  double drift = 0;
  {
    const Mechanism m = parse_mechanism(kTrueMechanism);
    Eigen::VectorXd c0(2);
    c0 << 2, 3;
    const auto grid = uniform_grid(10, 0.1);
    const auto traj = integrate(KineticSystem(m, {{0.1, 1}, {0.1, 1}}), c0, 10, grid, {rtol, 1e-12});
    for (const auto& s : traj.states) drift = std::max(drift, std::abs(s.sum() - 5) / 5);
  }
  {
    const auto f = load_fixture("salicylic");
    const Mechanism m = parse_mechanism(f.mechanism);
    Eigen::VectorXd c0(3);
    c0 << kSalicylicInitialX, 0, 0;
    const auto grid = uniform_grid(10, 0.5);
    const auto traj = integrate(KineticSystem(m, {{0.0786, 0.1813}, {0, 0}}), c0, 10, grid, {rtol, 1e-14});
    for (const auto& s : traj.states) drift = std::max(drift, std::abs(s.sum() - kSalicylicInitialX) / kSalicylicInitialX);
  }
  o.expect(drift < 10 * rtol, "mass drift");

  // Finite-difference Jacobian against forward sensitivities.
  const Mechanism m = parse_mechanism(kTrueMechanism);
  const auto data = simulate_run(1);
  const FitProblem prob(m, data);
  const Eigen::VectorXd theta = prob.theta_from_natural({0.2, 0.7, 0.15, 1.3});
  const Eigen::MatrixXd jfd = prob.jacobian(theta);
  const auto nat = prob.natural(theta);
  const double k1 = nat[0], k2 = nat[1], km1 = nat[2], km2 = nat[3];
  auto rhs = [&](const Eigen::VectorXd& u, Eigen::VectorXd& du) {
    const double x = u[0], y = u[1];
    const double w = k1 * x - km1 * y + k2 * x * x - km2 * x * y;
    const double dwdx = k1 + 2 * k2 * x - km2 * y, dwdy = -km1 - km2 * x;
    const double dwdp[4] = {k1 * x, k2 * x * x, -km1 * y, -km2 * x * y};
    du.resize(10);
    du[0] = -w;
    du[1] = w;
    for (int p = 0; p < 4; ++p) {
      const double dw = dwdx * u[2 + p] + dwdy * u[6 + p] + dwdp[p];
      du[2 + p] = -dw;
      du[6 + p] = dw;
    }
  };
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(10);
  u0[0] = 2;
  u0[1] = 3;
  const auto traj = integrate(rhs, u0, data.times.back(), data.times, {1e-12, 1e-15});
  Eigen::MatrixXd jsens(jfd.rows(), jfd.cols());
  for (std::size_t i = 0; i < data.times.size(); ++i)
    for (int s = 0; s < 2; ++s)
      for (int p = 0; p < 4; ++p) jsens(static_cast<Eigen::Index>(2 * i) + s, p) = traj.states[i][2 + 4 * s + p];
  const double jac_err = (jfd - jsens).norm() / jsens.norm();
  o.expect(jac_err < 1e-4, "jacobian relative error");

  // Parallel screening output equals serial output byte for byte.
  const auto dir = std::filesystem::temp_directory_path() / "crn_acceptance";
  std::filesystem::create_directories(dir);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  ScreenConfig c;
  c.species = 2;
  c.steps = 2;
  c.output = dir / "serial.jsonl";
  screen(c, data);
  c.workers = 4;
  c.output = dir / "parallel.jsonl";
  screen(c, data);
  const bool same = slurp(dir / "serial.jsonl") == slurp(dir / "parallel.jsonl");
  o.expect(same, "parallel output differs from serial");

  o.detail << "DB residual " << worst << " over " << mechanisms << " mechanisms; mass drift " << drift
           << "; jacobian rel. error " << jac_err << "; parallel == serial: " << (same ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void(Outcome&)>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                            criterion5, criterion6, criterion7, criterion8,
                                                            criterion9, criterion10};
  std::vector<int> selected;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::cerr << "usage: acceptance [1-" << criteria.size() << "]\n";
      return 2;
    }
    selected.push_back(n);
  } else {
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) selected.push_back(n);
  }
  bool all = true;
  for (int n : selected) {
    Outcome o;
    try {
      criteria[static_cast<std::size_t>(n - 1)](o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
