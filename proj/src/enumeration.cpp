#include "crn/enumeration.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <utility>

namespace crn {

const char* step_type_pattern(StepType t) {
  switch (t) {
    case StepType::Isomerization: return "X <=> Y";
    case StepType::Dissociation: return "X <=> 2 Y";
    case StepType::Exchange: return "2 X <=> X + Y";
    case StepType::Association: return "X + Y <=> Z";
    case StepType::PairToDouble: return "X + Y <=> 2 Z";
    case StepType::Transfer: return "X + Y <=> X + Z";
    case StepType::PairToPair: return "X + Y <=> Z + A";
  }
  return "?";
}

BigInt binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

BigInt count_short_complexes(std::size_t species) {
  if (species < 1) throw std::invalid_argument("species count must be at least 1");
  const BigInt m = species;
  return m * (m + 3) / 2;
}

BigInt count_order3_complexes(std::size_t species) {
  if (species < 1) throw std::invalid_argument("species count must be at least 1");
  return binomial(species + 2, 3);
}

std::vector<Complex> short_complexes(std::size_t species) {
  std::vector<Complex> out;
  for (std::size_t i = 0; i < species; ++i) out.emplace_back(std::vector<Complex::Term>{{i, 1}});
  for (std::size_t i = 0; i < species; ++i) out.emplace_back(std::vector<Complex::Term>{{i, 2}});
  for (std::size_t i = 0; i < species; ++i)
    for (std::size_t j = i + 1; j < species; ++j) out.emplace_back(std::vector<Complex::Term>{{i, 1}, {j, 1}});
  return out;
}

BigInt count_steps(std::size_t species) {
  if (species < 1) throw std::invalid_argument("species count must be at least 1");
  const BigInt m = species;
  return (m - 1) * m * (m * m + 7 * m + 2) / 8;
}

std::array<BigInt, kStepTypeCount> count_steps_by_type(std::size_t species) {
  const BigInt m = species;
  const BigInt pairs = binomial(species, 2);
  const BigInt ordered = m * (m - 1);
  const BigInt pair_other = species >= 2 ? BigInt(pairs * (m - 2)) : BigInt(0);
  return {pairs, ordered, ordered, pair_other, pair_other, pair_other, 3 * binomial(species, 4)};
}

namespace {

Complex single(std::size_t i, int c = 1) { return Complex({{i, c}}); }
Complex pair(std::size_t i, std::size_t j) { return Complex({{i, 1}, {j, 1}}); }

}  // namespace

std::vector<TypedStep> enumerate_typed_steps(const SpeciesSet& names) {
  const std::size_t m = names.size();
  std::vector<TypedStep> out;
  auto add = [&](Complex a, Complex b, StepType t) { out.push_back({ReactionStep{std::move(a), std::move(b), true}, t}); };

  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      if (i < j) add(single(i), single(j), StepType::Isomerization);
      add(single(i), single(j, 2), StepType::Dissociation);
      add(single(i, 2), pair(std::min(i, j), std::max(i, j)), StepType::Exchange);
    }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k) {
        if (k == i || k == j) continue;
        add(pair(i, j), single(k), StepType::Association);
        add(pair(i, j), single(k, 2), StepType::PairToDouble);
      }
  for (std::size_t shared = 0; shared < m; ++shared)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = j + 1; k < m; ++k) {
        if (j == shared || k == shared) continue;
        add(pair(std::min(shared, j), std::max(shared, j)), pair(std::min(shared, k), std::max(shared, k)),
            StepType::Transfer);
      }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      for (std::size_t c = b + 1; c < m; ++c)
        for (std::size_t d = c + 1; d < m; ++d) {
          add(pair(a, b), pair(c, d), StepType::PairToPair);
          add(pair(a, c), pair(b, d), StepType::PairToPair);
          add(pair(a, d), pair(b, c), StepType::PairToPair);
        }

  std::vector<std::pair<std::string, TypedStep>> keyed;
  keyed.reserve(out.size());
  for (auto& ts : out) {
    std::string lhs = serialize_complex(ts.step.reactant, names);
    std::string rhs = serialize_complex(ts.step.product, names);
    if (rhs < lhs) std::swap(ts.step.reactant, ts.step.product);
    keyed.emplace_back(oriented_step_string(ts.step, names), std::move(ts));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  out.clear();
  for (auto& [key, ts] : keyed) out.push_back(std::move(ts));
  return out;
}

std::vector<TypedStep> enumerate_typed_steps(std::size_t species) {
  if (species < 1) throw std::invalid_argument("species count must be at least 1");
  return enumerate_typed_steps(SpeciesSet::standard(species));
}

std::vector<ReactionStep> enumerate_steps(std::size_t species) {
  std::vector<ReactionStep> out;
  for (auto& ts : enumerate_typed_steps(species)) out.push_back(std::move(ts.step));
  return out;
}

BigInt count_mechanisms(std::size_t species, std::size_t steps, bool exact_species) {
  if (species < 1) throw std::invalid_argument("species count must be at least 1");
  const BigInt available = count_steps(species);
  if (steps < 1 || BigInt(steps) > available)
    throw std::out_of_range("number of steps out of range for " + std::to_string(species) + " species");
  if (!exact_species) return binomial(available.convert_to<std::size_t>(), steps);
  // Inclusion-exclusion over the species actually used.
  BigInt total = 0;
  for (std::size_t k = 1; k <= species; ++k) {
    const BigInt term = binomial(species, k) * binomial(count_steps(k).convert_to<std::size_t>(), steps);
    if ((species - k) % 2 == 0)
      total += term;
    else
      total -= term;
  }
  return total;
}

bool passes(const Mechanism& m, const EnumerationFilter& filter) {
  if (filter.exact_species && !m.uses_all_species()) return false;
  if (filter.mass_conserving && !mass_conserving(m)) return false;
  if (filter.db_class) {
    const DbClass c = m.is_reversible() ? classify_db(m).db_class : DbClass::NotApplicable;
    if (c != *filter.db_class) return false;
  }
  return true;
}

// ---------------------------------------------------------------- enumerator

namespace {

std::uint64_t to_u64(const BigInt& v, const char* what) {
  if (v > BigInt(std::numeric_limits<std::uint64_t>::max())) throw std::overflow_error(what);
  return v.convert_to<std::uint64_t>();
}

// Lexicographic unranking of k-subsets of {0..n-1}.
std::vector<std::size_t> unrank_combination(std::size_t n, std::size_t k, std::uint64_t rank) {
  std::vector<std::size_t> combo;
  std::size_t next = 0;
  for (std::size_t slot = 0; slot < k; ++slot) {
    for (std::size_t v = next;; ++v) {
      const std::uint64_t block = to_u64(binomial(n - v - 1, k - slot - 1), "subset rank overflow");
      if (rank < block) {
        combo.push_back(v);
        next = v + 1;
        break;
      }
      rank -= block;
    }
  }
  return combo;
}

}  // namespace

MechanismEnumerator::MechanismEnumerator(std::size_t species, std::size_t steps, EnumerationFilter filter,
                                         std::uint64_t first, std::optional<std::uint64_t> last)
    : MechanismEnumerator(SpeciesSet::standard(species), steps, filter, first, last) {}

MechanismEnumerator::MechanismEnumerator(SpeciesSet species, std::size_t steps, EnumerationFilter filter,
                                         std::uint64_t first, std::optional<std::uint64_t> last)
    : species_(std::move(species)), r_(steps), filter_(filter) {
  for (auto& ts : enumerate_typed_steps(species_)) steps_.push_back(std::move(ts.step));
  if (r_ < 1 || r_ > steps_.size())
    throw std::out_of_range("number of steps out of range for " + std::to_string(species_.size()) + " species");
  total_ = to_u64(binomial(steps_.size(), r_), "too many mechanisms to enumerate");
  end_ = std::min(last.value_or(total_), total_);
  rank_ = std::min(first, end_);
  if (rank_ < end_) combo_ = unrank_combination(steps_.size(), r_, rank_);
}

void MechanismEnumerator::advance() {
  ++rank_;
  if (rank_ >= end_) return;
  const std::size_t n = steps_.size();
  std::size_t i = r_;
  while (i-- > 0) {
    if (combo_[i] < n - r_ + i) {
      ++combo_[i];
      for (std::size_t j = i + 1; j < r_; ++j) combo_[j] = combo_[j - 1] + 1;
      return;
    }
  }
}

std::optional<Mechanism> MechanismEnumerator::next() {
  while (rank_ < end_) {
    std::vector<ReactionStep> chosen;
    chosen.reserve(r_);
    for (std::size_t idx : combo_) chosen.push_back(steps_[idx]);
    const std::uint64_t here = rank_;
    advance();
    Mechanism m(species_, std::move(chosen));
    if (passes(m, filter_)) {
      last_rank_ = here;
      return m;
    }
  }
  return std::nullopt;
}

}  // namespace crn
