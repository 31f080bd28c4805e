#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "crn/analysis.hpp"
#include "crn/exact.hpp"
#include "crn/mechanism.hpp"

namespace crn {

/// Templates of admissible reversible steps between short complexes.
/// Letters stand for pairwise distinct species.
enum class StepType {
  Isomerization,  // X <=> Y
  Dissociation,   // X <=> 2Y
  Exchange,       // 2X <=> X + Y
  Association,    // X + Y <=> Z
  PairToDouble,   // X + Y <=> 2Z
  Transfer,       // X + Y <=> X + Z
  PairToPair,     // X + Y <=> Z + A
};
inline constexpr std::size_t kStepTypeCount = 7;

const char* step_type_pattern(StepType t);

struct TypedStep {
  ReactionStep step;
  StepType type;
};

BigInt count_short_complexes(std::size_t species);
BigInt count_order3_complexes(std::size_t species);
/// All complexes of order 1 or 2 over `species` species.
std::vector<Complex> short_complexes(std::size_t species);

/// Closed-form number of admissible steps, (M-1)M(M^2+7M+2)/8.
BigInt count_steps(std::size_t species);
std::array<BigInt, kStepTypeCount> count_steps_by_type(std::size_t species);

/// Admissible steps sorted by oriented step string, each oriented with its
/// smaller side first. The size_t overloads use SpeciesSet::standard names.
std::vector<TypedStep> enumerate_typed_steps(const SpeciesSet& species);
std::vector<TypedStep> enumerate_typed_steps(std::size_t species);
std::vector<ReactionStep> enumerate_steps(std::size_t species);

/// Number of R-step mechanisms; with `exact_species` only those using every species.
BigInt count_mechanisms(std::size_t species, std::size_t steps, bool exact_species);

BigInt binomial(std::size_t n, std::size_t k);

struct EnumerationFilter {
  bool exact_species = false;
  bool mass_conserving = false;
  std::optional<DbClass> db_class;  // Unconditional or Conditional
};

bool passes(const Mechanism& m, const EnumerationFilter& filter);

/// Streams the R-subsets of enumerate_steps(M) in lexicographic subset order,
/// skipping mechanisms rejected by the filter. A half-open range of subset
/// ranks [first, last) can be selected so independent enumerators can cover
/// disjoint partitions.
class MechanismEnumerator {
 public:
  MechanismEnumerator(std::size_t species, std::size_t steps, EnumerationFilter filter = {},
                      std::uint64_t first = 0, std::optional<std::uint64_t> last = std::nullopt);
  MechanismEnumerator(SpeciesSet species, std::size_t steps, EnumerationFilter filter = {},
                      std::uint64_t first = 0, std::optional<std::uint64_t> last = std::nullopt);

  /// Next accepted mechanism, or nullopt when the range is exhausted.
  std::optional<Mechanism> next();

  /// Rank of the subset that the next call will examine.
  std::uint64_t position() const { return rank_; }
  /// Rank of the most recently returned mechanism.
  std::uint64_t last_rank() const { return last_rank_; }
  std::uint64_t total() const { return total_; }
  const SpeciesSet& species() const { return species_; }

 private:
  void advance();

  SpeciesSet species_;
  std::vector<ReactionStep> steps_;
  std::size_t r_;
  EnumerationFilter filter_;
  std::vector<std::size_t> combo_;
  std::uint64_t rank_ = 0;
  std::uint64_t end_ = 0;
  std::uint64_t total_ = 0;
  std::uint64_t last_rank_ = 0;
};

}  // namespace crn
