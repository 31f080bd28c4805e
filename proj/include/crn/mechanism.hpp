#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crn/exact.hpp"

namespace crn {

/// Raised for mechanisms that violate a structural invariant.
class MechanismError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the text parser; `position` is a byte offset into the input.
class ParseError : public MechanismError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : MechanismError(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class SpeciesSet {
 public:
  SpeciesSet() = default;
  explicit SpeciesSet(std::vector<std::string> names);

  /// X, Y, Z, U, V, W for up to six species, X1..Xn beyond that.
  static SpeciesSet standard(std::size_t count);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  static bool is_valid_name(std::string_view name);

  friend bool operator==(const SpeciesSet&, const SpeciesSet&) = default;

 private:
  std::vector<std::string> names_;
};

/// A non-empty formal linear combination of species with positive integer
/// coefficients. Terms are kept sorted by species index.
class Complex {
 public:
  using Term = std::pair<std::size_t, int>;  // species index, coefficient

  Complex() = default;
  /// Merges repeated species; rejects empty input and non-positive coefficients.
  explicit Complex(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  int order() const;
  int coefficient(std::size_t species) const;
  bool is_short() const { return order() <= 2; }

  friend bool operator==(const Complex&, const Complex&) = default;
  friend auto operator<=>(const Complex&, const Complex&) = default;

 private:
  std::vector<Term> terms_;
};

struct ReactionStep {
  Complex reactant;
  Complex product;
  bool reversible = true;

  friend bool operator==(const ReactionStep&, const ReactionStep&) = default;
};

/// Species plus an ordered list of reaction steps, with stoichiometric
/// matrices alpha (reactants), beta (products) and gamma = beta - alpha.
/// Columns are indexed by step; R counts steps, P counts directed steps.
class Mechanism {
 public:
  Mechanism(SpeciesSet species, std::vector<ReactionStep> steps);

  const SpeciesSet& species() const { return species_; }
  const std::vector<ReactionStep>& steps() const { return steps_; }
  const ReactionStep& step(std::size_t r) const { return steps_.at(r); }
  std::size_t species_count() const { return species_.size(); }
  std::size_t reaction_count() const { return steps_.size(); }
  std::size_t directed_step_count() const;
  bool is_reversible() const;

  const IntMatrix& alpha() const { return alpha_; }
  const IntMatrix& beta() const { return beta_; }
  const IntMatrix& gamma() const { return gamma_; }

  /// True when every species index occurs in at least one complex.
  bool uses_all_species() const;

  friend bool operator==(const Mechanism& a, const Mechanism& b) {
    return a.species_ == b.species_ && a.steps_ == b.steps_;
  }

 private:
  SpeciesSet species_;
  std::vector<ReactionStep> steps_;
  IntMatrix alpha_;
  IntMatrix beta_;
  IntMatrix gamma_;
};

/// Forward and backward rate coefficients, one entry per step.
/// Irreversible steps carry k_minus == 0.
struct RateAssignment {
  std::vector<double> k_plus;
  std::vector<double> k_minus;

  void validate(const Mechanism& m) const;
};

/// Rate-coefficient names used on the command line and in reports:
/// k1, km1, k2, km2, ... (1-based).
std::string forward_rate_name(std::size_t step);
std::string backward_rate_name(std::size_t step);

Mechanism parse_mechanism(std::string_view text, const std::optional<SpeciesSet>& species_hint = std::nullopt);

std::string serialize_complex(const Complex& c, const SpeciesSet& species);
std::string serialize_step(const ReactionStep& s, const SpeciesSet& species);
std::string serialize_mechanism(const Mechanism& m);

/// Serialized step with a reversible step turned so that its lexicographically
/// smaller side comes first.
std::string oriented_step_string(const ReactionStep& s, const SpeciesSet& species);

/// Oriented step strings sorted and joined with "; ".
std::string canonical_form(const Mechanism& m);

/// Short stable identifier derived from canonical_form: "m" + 16 hex digits.
std::string canonical_id(const Mechanism& m);

}  // namespace crn
