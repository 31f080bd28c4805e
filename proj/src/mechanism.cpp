#include "crn/mechanism.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>

namespace crn {

// ---------------------------------------------------------------- species

bool SpeciesSet::is_valid_name(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

SpeciesSet::SpeciesSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw MechanismError("species set must not be empty");
  std::set<std::string_view> seen;
  for (const auto& n : names_) {
    if (!is_valid_name(n)) throw MechanismError("invalid species name '" + n + "'");
    if (!seen.insert(n).second) throw MechanismError("duplicate species name '" + n + "'");
  }
}

SpeciesSet SpeciesSet::standard(std::size_t count) {
  static const char* kShort[] = {"X", "Y", "Z", "U", "V", "W"};
  std::vector<std::string> names;
  for (std::size_t i = 0; i < count; ++i)
    names.push_back(count <= 6 ? std::string(kShort[i]) : "X" + std::to_string(i + 1));
  return SpeciesSet(std::move(names));
}

std::optional<std::size_t> SpeciesSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------- complex

Complex::Complex(std::vector<Term> terms) {
  if (terms.empty()) throw MechanismError("empty complex");
  std::sort(terms.begin(), terms.end());
  for (const auto& [species, coeff] : terms) {
    if (coeff < 1) throw MechanismError("stoichiometric coefficients must be positive");
    if (!terms_.empty() && terms_.back().first == species)
      terms_.back().second += coeff;
    else
      terms_.emplace_back(species, coeff);
  }
}

int Complex::order() const {
  int total = 0;
  for (const auto& t : terms_) total += t.second;
  return total;
}

int Complex::coefficient(std::size_t species) const {
  for (const auto& t : terms_)
    if (t.first == species) return t.second;
  return 0;
}

// ---------------------------------------------------------------- mechanism

namespace {

std::pair<const Complex*, const Complex*> unordered_pair(const ReactionStep& s) {
  if (s.product < s.reactant) return {&s.product, &s.reactant};
  return {&s.reactant, &s.product};
}

}  // namespace

Mechanism::Mechanism(SpeciesSet species, std::vector<ReactionStep> steps)
    : species_(std::move(species)), steps_(std::move(steps)) {
  if (species_.size() == 0) throw MechanismError("mechanism needs at least one species");
  if (steps_.empty()) throw MechanismError("mechanism needs at least one step");
  const auto m = static_cast<Eigen::Index>(species_.size());
  const auto r = static_cast<Eigen::Index>(steps_.size());
  alpha_ = IntMatrix::Zero(m, r);
  beta_ = IntMatrix::Zero(m, r);

  std::set<std::pair<Complex, Complex>> seen;
  for (Eigen::Index j = 0; j < r; ++j) {
    const ReactionStep& s = steps_[static_cast<std::size_t>(j)];
    if (s.reactant.terms().empty() || s.product.terms().empty()) throw MechanismError("empty complex");
    if (s.reactant == s.product) throw MechanismError("reactant equals product in step " + std::to_string(j + 1));
    for (const auto& [i, c] : s.reactant.terms()) {
      if (i >= species_.size()) throw MechanismError("species index out of range");
      alpha_(static_cast<Eigen::Index>(i), j) = c;
    }
    for (const auto& [i, c] : s.product.terms()) {
      if (i >= species_.size()) throw MechanismError("species index out of range");
      beta_(static_cast<Eigen::Index>(i), j) = c;
    }
    auto [lo, hi] = unordered_pair(s);
    if (!seen.emplace(*lo, *hi).second)
      throw MechanismError("duplicate step (or reverse of an earlier step) at step " + std::to_string(j + 1));
  }
  gamma_ = beta_ - alpha_;
}

std::size_t Mechanism::directed_step_count() const {
  std::size_t p = 0;
  for (const auto& s : steps_) p += s.reversible ? 2 : 1;
  return p;
}

bool Mechanism::is_reversible() const {
  return std::all_of(steps_.begin(), steps_.end(), [](const ReactionStep& s) { return s.reversible; });
}

bool Mechanism::uses_all_species() const {
  for (Eigen::Index i = 0; i < alpha_.rows(); ++i)
    if (alpha_.row(i).sum() == 0 && beta_.row(i).sum() == 0) return false;
  return true;
}

void RateAssignment::validate(const Mechanism& m) const {
  const std::size_t r = m.reaction_count();
  if (k_plus.size() != r || k_minus.size() != r)
    throw MechanismError("rate vector length does not match the number of steps");
  for (std::size_t j = 0; j < r; ++j) {
    if (!(k_plus[j] > 0) || !std::isfinite(k_plus[j]))
      throw MechanismError(forward_rate_name(j) + " must be positive and finite");
    if (m.step(j).reversible) {
      if (!(k_minus[j] > 0) || !std::isfinite(k_minus[j]))
        throw MechanismError(backward_rate_name(j) + " must be positive and finite");
    } else if (k_minus[j] != 0) {
      throw MechanismError(backward_rate_name(j) + " given for an irreversible step");
    }
  }
}

std::string forward_rate_name(std::size_t step) { return "k" + std::to_string(step + 1); }
std::string backward_rate_name(std::size_t step) { return "km" + std::to_string(step + 1); }

// ---------------------------------------------------------------- parser

namespace {

enum class Tok { Integer, Identifier, Plus, Separator, Reversible, Forward, End };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) { advance(); }

  const Token& peek() const { return current_; }
  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r')) ++i_;
    const std::size_t start = i_;
    if (i_ >= s_.size()) {
      current_ = {Tok::End, {}, start};
      return;
    }
    const char c = s_[i_];
    if (c == ';' || c == '\n') {
      ++i_;
      current_ = {Tok::Separator, s_.substr(start, 1), start};
    } else if (c == '+') {
      ++i_;
      current_ = {Tok::Plus, s_.substr(start, 1), start};
    } else if (s_.substr(i_, 3) == "<=>") {
      i_ += 3;
      current_ = {Tok::Reversible, s_.substr(start, 3), start};
    } else if (s_.substr(i_, 2) == "->") {
      i_ += 2;
      current_ = {Tok::Forward, s_.substr(start, 2), start};
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      current_ = {Tok::Integer, s_.substr(start, i_ - start), start};
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
      current_ = {Tok::Identifier, s_.substr(start, i_ - start), start};
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
  Token current_{Tok::End, {}, 0};
};

struct RawTerm {
  int coeff;
  std::string name;
  std::size_t pos;
};

std::vector<RawTerm> parse_complex(Lexer& lex) {
  std::vector<RawTerm> terms;
  for (;;) {
    const Token t = lex.peek();
    int coeff = 1;
    std::size_t pos = t.pos;
    if (t.kind == Tok::Integer) {
      Token num = lex.take();
      int value = 0;
      auto [ptr, ec] = std::from_chars(num.text.data(), num.text.data() + num.text.size(), value);
      if (ec != std::errc() || ptr != num.text.data() + num.text.size())
        throw ParseError("coefficient out of range", num.pos);
      if (value == 0 && lex.peek().kind != Tok::Identifier) throw ParseError("empty complex", num.pos);
      if (value < 1) throw ParseError("coefficient must be a positive integer", num.pos);
      coeff = value;
    }
    const Token& id = lex.peek();
    if (id.kind != Tok::Identifier) {
      if (terms.empty() && t.kind != Tok::Integer) throw ParseError("empty complex", id.pos);
      throw ParseError("expected species name", id.pos);
    }
    terms.push_back({coeff, std::string(lex.take().text), pos});
    if (lex.peek().kind != Tok::Plus) break;
    lex.take();
  }
  return terms;
}

}  // namespace

Mechanism parse_mechanism(std::string_view text, const std::optional<SpeciesSet>& species_hint) {
  Lexer lex(text);
  struct RawStep {
    std::vector<RawTerm> lhs, rhs;
    bool reversible;
    std::size_t pos;
  };
  std::vector<RawStep> raw;
  for (;;) {
    while (lex.peek().kind == Tok::Separator) lex.take();
    if (lex.peek().kind == Tok::End) break;
    RawStep step;
    step.pos = lex.peek().pos;
    step.lhs = parse_complex(lex);
    const Token arrow = lex.take();
    if (arrow.kind != Tok::Reversible && arrow.kind != Tok::Forward) throw ParseError("expected '<=>' or '->'", arrow.pos);
    step.reversible = arrow.kind == Tok::Reversible;
    step.rhs = parse_complex(lex);
    const Token& next = lex.peek();
    if (next.kind != Tok::Separator && next.kind != Tok::End) throw ParseError("expected ';' or end of step", next.pos);
    raw.push_back(std::move(step));
  }
  if (raw.empty()) throw ParseError("no reaction steps", text.size());

  std::vector<std::string> names;
  auto lookup = [&](const RawTerm& t) -> std::size_t {
    if (species_hint) {
      auto idx = species_hint->index_of(t.name);
      if (!idx) throw ParseError("unknown species '" + t.name + "'", t.pos);
      return *idx;
    }
    auto it = std::find(names.begin(), names.end(), t.name);
    if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
    names.push_back(t.name);
    return names.size() - 1;
  };

  std::vector<ReactionStep> steps;
  for (const RawStep& rs : raw) {
    std::vector<Complex::Term> lhs, rhs;
    for (const auto& t : rs.lhs) lhs.emplace_back(lookup(t), t.coeff);
    for (const auto& t : rs.rhs) rhs.emplace_back(lookup(t), t.coeff);
    ReactionStep s{Complex(std::move(lhs)), Complex(std::move(rhs)), rs.reversible};
    if (s.reactant == s.product) throw ParseError("reactant equals product", rs.pos);
    steps.push_back(std::move(s));
  }
  try {
    return Mechanism(species_hint ? *species_hint : SpeciesSet(std::move(names)), std::move(steps));
  } catch (const ParseError&) {
    throw;
  } catch (const MechanismError& e) {
    throw ParseError(e.what(), 0);
  }
}

// ---------------------------------------------------------------- output

std::string serialize_complex(const Complex& c, const SpeciesSet& species) {
  std::string out;
  for (const auto& [i, coeff] : c.terms()) {
    if (!out.empty()) out += " + ";
    if (coeff != 1) out += std::to_string(coeff) + " ";
    out += species.name(i);
  }
  return out;
}

std::string serialize_step(const ReactionStep& s, const SpeciesSet& species) {
  return serialize_complex(s.reactant, species) + (s.reversible ? " <=> " : " -> ") +
         serialize_complex(s.product, species);
}

std::string serialize_mechanism(const Mechanism& m) {
  std::string out;
  for (const auto& s : m.steps()) {
    if (!out.empty()) out += "; ";
    out += serialize_step(s, m.species());
  }
  return out;
}

std::string oriented_step_string(const ReactionStep& s, const SpeciesSet& species) {
  std::string lhs = serialize_complex(s.reactant, species);
  std::string rhs = serialize_complex(s.product, species);
  if (s.reversible && rhs < lhs) std::swap(lhs, rhs);
  return lhs + (s.reversible ? " <=> " : " -> ") + rhs;
}

std::string canonical_form(const Mechanism& m) {
  std::vector<std::string> parts;
  for (const auto& s : m.steps()) parts.push_back(oriented_step_string(s, m.species()));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

std::string canonical_id(const Mechanism& m) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical_form(m)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[18];
  std::snprintf(buf, sizeof buf, "m%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace crn
