#include <doctest.h>

#include <numeric>
#include <set>

#include "crn/enumeration.hpp"

using namespace crn;

namespace {

// Brute force: unordered pairs of distinct complexes of order 1 or 2 whose
// net change has entries of both signs and no common factor.
std::size_t oracle_step_count(std::size_t m) {
  std::vector<std::vector<int>> cx;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<int> v(m, 0);
    v[i] = 1;
    cx.push_back(v);
    for (std::size_t j = i; j < m; ++j) {
      std::vector<int> w(m, 0);
      ++w[i];
      ++w[j];
      cx.push_back(w);
    }
  }
  std::size_t n = 0;
  for (std::size_t a = 0; a < cx.size(); ++a)
    for (std::size_t b = a + 1; b < cx.size(); ++b) {
      bool pos = false, neg = false;
      int g = 0;
      for (std::size_t s = 0; s < m; ++s) {
        const int d = cx[b][s] - cx[a][s];
        pos |= d > 0;
        neg |= d < 0;
        g = std::gcd(g, d < 0 ? -d : d);
      }
      n += pos && neg && g == 1;
    }
  return n;
}

}  // namespace

TEST_CASE("step counts match brute force and the closed form") {
  for (std::size_t m = 1; m <= 8; ++m) {
    CHECK(count_steps(m) == oracle_step_count(m));
    CHECK(enumerate_steps(m).size() == oracle_step_count(m));
    const auto by_type = count_steps_by_type(m);
    CHECK(std::accumulate(by_type.begin(), by_type.end(), BigInt(0)) == count_steps(m));
  }
}

TEST_CASE("step counts by type follow binomial formulas") {
  for (std::size_t m = 2; m <= 7; ++m) {
    const auto c = count_steps_by_type(m);
    const BigInt b2 = binomial(m, 2), b3 = binomial(m, 3), b4 = binomial(m, 4);
    CHECK(c[0] == b2);
    CHECK(c[1] == 2 * b2);
    CHECK(c[2] == 2 * b2);
    CHECK(c[3] == 3 * b3);
    CHECK(c[4] == 3 * b3);
    CHECK(c[5] == 6 * b3 / 2);
    CHECK(c[6] == 3 * b4);
    std::array<std::size_t, kStepTypeCount> seen{};
    for (const auto& t : enumerate_typed_steps(m)) ++seen[static_cast<std::size_t>(t.type)];
    for (std::size_t k = 0; k < kStepTypeCount; ++k) CHECK(BigInt(seen[k]) == c[k]);
  }
}

TEST_CASE("complex counts") {
  for (std::size_t m = 1; m <= 6; ++m) {
    CHECK(count_short_complexes(m) == short_complexes(m).size());
    CHECK(count_short_complexes(m) == m + m * (m + 1) / 2);
    CHECK(count_order3_complexes(m) == binomial(m + 2, 3));
  }
}

TEST_CASE("steps are distinct and oriented") {
  const auto steps = enumerate_typed_steps(4);
  const SpeciesSet sp = SpeciesSet::standard(4);
  std::set<std::string> seen;
  for (const auto& t : steps) {
    CHECK(t.step.reversible);
    CHECK(t.step.reactant.is_short());
    CHECK(t.step.product.is_short());
    CHECK(seen.insert(oriented_step_string(t.step, sp)).second);
    CHECK(serialize_step(t.step, sp) == oriented_step_string(t.step, sp));
  }
}

TEST_CASE("mechanism counts match the materialized generator") {
  for (std::size_t m = 2; m <= 3; ++m)
    for (std::size_t r = 1; r <= 3; ++r) {
      MechanismEnumerator all(m, r);
      std::uint64_t n_all = 0;
      while (all.next()) ++n_all;
      CHECK(count_mechanisms(m, r, false) == n_all);
      CHECK(count_mechanisms(m, r, false) == binomial(oracle_step_count(m), r));

      MechanismEnumerator exact(m, r, EnumerationFilter{.exact_species = true});
      std::uint64_t n_exact = 0;
      while (auto mech = exact.next()) {
        CHECK(mech->uses_all_species());
        ++n_exact;
      }
      CHECK(count_mechanisms(m, r, true) == n_exact);
    }
  // Four species, two steps: exact-species count by inclusion-exclusion over the generator.
  MechanismEnumerator e(4, 2, EnumerationFilter{.exact_species = true});
  std::uint64_t n = 0;
  while (e.next()) ++n;
  CHECK(count_mechanisms(4, 2, true) == n);
}

TEST_CASE("binomial coefficients") {
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(3, 5) == 0);
  CHECK(binomial(69, 3) == 52394);
}

TEST_CASE("partitioned enumerators cover the range exactly once") {
  MechanismEnumerator whole(3, 2);
  std::vector<std::string> expected;
  while (auto m = whole.next()) expected.push_back(canonical_form(*m));
  const std::uint64_t total = whole.total();
  REQUIRE(total == 276);

  std::vector<std::string> joined;
  const std::uint64_t cuts[] = {0, 1, 50, 51, 200, total};
  for (std::size_t i = 0; i + 1 < std::size(cuts); ++i) {
    MechanismEnumerator part(3, 2, {}, cuts[i], cuts[i + 1]);
    while (auto m = part.next()) {
      CHECK(part.last_rank() >= cuts[i]);
      CHECK(part.last_rank() < cuts[i + 1]);
      joined.push_back(canonical_form(*m));
    }
  }
  CHECK(joined == expected);
}

TEST_CASE("filters") {
  const Mechanism chain = parse_mechanism("X -> Y; Y -> Z");
  CHECK(passes(chain, {}));
  CHECK_FALSE(passes(chain, EnumerationFilter{.db_class = DbClass::Unconditional}));
  const Mechanism open = parse_mechanism("X <=> 2 X", SpeciesSet::standard(2));
  CHECK_FALSE(passes(open, EnumerationFilter{.mass_conserving = true}));
  CHECK_FALSE(passes(open, EnumerationFilter{.exact_species = true}));
}
