#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crn/exact.hpp"
#include "crn/mechanism.hpp"

namespace crn {

enum class DbClass { Unconditional, Conditional, NotApplicable };
const char* to_string(DbClass c);

/// Feinberg-Horn-Jackson graph: distinct complexes as vertices, one directed
/// edge (reactant -> product) per step.
struct FhjGraph {
  struct Edge {
    std::size_t from;
    std::size_t to;
    std::size_t step;
  };
  std::vector<Complex> vertices;
  std::vector<Edge> edges;
  std::vector<std::size_t> component;  // linkage class of each vertex
  std::size_t linkage_classes = 0;
};

FhjGraph build_fhj(const Mechanism& m);

/// Strictly positive mass assignment with rho^T gamma = 0. Entries are
/// integers (cleared denominators), hence all >= 1.
struct MassVector {
  std::vector<Rational> rho;
};

/// Exact LP decision; nullopt when no positive mass vector exists.
std::optional<MassVector> mass_conserving(const Mechanism& m);

/// Stiemke alternative: y with gamma y >= 0, gamma y != 0. Exists exactly
/// when mass_conserving() returns nullopt. Returns gamma y (normalized to
/// sum 1) together with y.
struct ConservationObstruction {
  std::vector<Rational> y;
  std::vector<Rational> gamma_y;
};
std::optional<ConservationObstruction> conservation_obstruction(const Mechanism& m);

std::vector<IntVector> integer_kernel_basis(const Mechanism& m);

enum class ConstraintKind { Circuit, Forest };
const char* to_string(ConstraintKind k);

/// prod_r (k+_r / k-_r)^{a_r} = 1
struct DbConstraint {
  IntVector exponents;
  ConstraintKind kind;
};

struct DbClassification {
  DbClass db_class;
  std::vector<DbConstraint> constraints;  // circuits first, then forest conditions
};

/// Requires a fully reversible mechanism (throws MechanismError otherwise).
DbClassification classify_db(const Mechanism& m);

/// "k-1^2 k3 = k-3 k1^2" style rendering with 1-based step numbers.
std::string render_condition(const DbConstraint& c);

bool weakly_reversible(const Mechanism& m);
bool is_complex_balanced_structural(const Mechanism& m);

struct NetworkSummary {
  std::size_t species = 0;    // M
  std::size_t reactions = 0;  // R
  std::size_t complexes = 0;  // N
  std::size_t linkage_classes = 0;  // L
  std::size_t rank = 0;       // S
  std::size_t deficiency = 0;
  bool reversible = false;
  bool weakly_reversible = false;
  bool mass_conserving = false;
  std::optional<MassVector> mass_vector;
  DbClass db_class = DbClass::NotApplicable;
  std::vector<DbConstraint> conditions;
  std::size_t circuit_conditions = 0;
  std::size_t forest_conditions = 0;
};

NetworkSummary summarize(const Mechanism& m);

struct CensusCounts {
  std::uint64_t total = 0;
  std::uint64_t mass_conserving = 0;
  std::uint64_t udb = 0;  // among the mass conserving ones
  std::uint64_t cdb = 0;  // among the mass conserving ones

  CensusCounts& operator+=(const CensusCounts& o);
  friend bool operator==(const CensusCounts&, const CensusCounts&) = default;
};

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultCap = 1'000'000;

/// Classifies every R-step mechanism over M species. Throws CapExceeded when
/// the number of mechanisms exceeds `cap`.
CensusCounts census(std::size_t species, std::size_t steps, std::uint64_t cap = kDefaultCap, unsigned workers = 1);

}  // namespace crn
