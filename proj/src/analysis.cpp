#include "crn/analysis.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <thread>

#include "crn/enumeration.hpp"

namespace crn {

const char* to_string(DbClass c) {
  switch (c) {
    case DbClass::Unconditional: return "UDB";
    case DbClass::Conditional: return "CDB";
    case DbClass::NotApplicable: return "NOT_APPLICABLE";
  }
  return "?";
}

const char* to_string(ConstraintKind k) { return k == ConstraintKind::Circuit ? "CIRCUIT" : "FOREST"; }

// ---------------------------------------------------------------- FHJ graph

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::size_t vertex_of(std::vector<Complex>& vertices, const Complex& c) {
  auto it = std::find(vertices.begin(), vertices.end(), c);
  if (it != vertices.end()) return static_cast<std::size_t>(it - vertices.begin());
  vertices.push_back(c);
  return vertices.size() - 1;
}

}  // namespace

FhjGraph build_fhj(const Mechanism& m) {
  FhjGraph g;
  for (std::size_t r = 0; r < m.reaction_count(); ++r) {
    const std::size_t from = vertex_of(g.vertices, m.step(r).reactant);
    const std::size_t to = vertex_of(g.vertices, m.step(r).product);
    g.edges.push_back({from, to, r});
  }
  UnionFind uf(g.vertices.size());
  for (const auto& e : g.edges) uf.unite(e.from, e.to);
  g.component.assign(g.vertices.size(), 0);
  std::vector<std::size_t> label(g.vertices.size(), g.vertices.size());
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    const std::size_t root = uf.find(v);
    if (label[root] == g.vertices.size()) label[root] = g.linkage_classes++;
    g.component[v] = label[root];
  }
  return g;
}

// ---------------------------------------------------------------- mass conservation

std::optional<MassVector> mass_conserving(const Mechanism& m) {
  // rho = 1 + s, s >= 0:  gamma^T s = -gamma^T 1, minimize sum(s).
  const IntMatrix& gamma = m.gamma();
  const std::size_t ns = m.species_count();
  const std::size_t nr = m.reaction_count();
  RationalMatrix a(nr, ns);
  std::vector<Rational> b(nr), c(ns, Rational(1));
  for (std::size_t r = 0; r < nr; ++r) {
    long long column_sum = 0;
    for (std::size_t i = 0; i < ns; ++i) {
      const long long g = gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r));
      a(r, i) = g;
      column_sum += g;
    }
    b[r] = -column_sum;
  }
  const LpResult lp = solve_lp(a, std::move(b), c);
  if (lp.status != LpStatus::Optimal) return std::nullopt;
  std::vector<Rational> rho(ns);
  for (std::size_t i = 0; i < ns; ++i) rho[i] = lp.x[i] + 1;
  MassVector out;
  for (long long v : primitive_integer_vector(rho)) out.rho.emplace_back(v);
  return out;
}

std::optional<ConservationObstruction> conservation_obstruction(const Mechanism& m) {
  // Variables (y+, y-, w) >= 0:  gamma (y+ - y-) - w = 0,  sum(w) = 1.
  const IntMatrix& gamma = m.gamma();
  const std::size_t ns = m.species_count();
  const std::size_t nr = m.reaction_count();
  RationalMatrix a(ns + 1, 2 * nr + ns);
  std::vector<Rational> b(ns + 1);
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t r = 0; r < nr; ++r) {
      const long long g = gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r));
      a(i, r) = g;
      a(i, nr + r) = -g;
    }
    a(i, 2 * nr + i) = -1;
    a(ns, 2 * nr + i) = 1;
  }
  b[ns] = 1;
  const LpResult lp = solve_lp(a, std::move(b), std::vector<Rational>(2 * nr + ns));
  if (lp.status != LpStatus::Optimal) return std::nullopt;
  ConservationObstruction out;
  for (std::size_t r = 0; r < nr; ++r) out.y.push_back(lp.x[r] - lp.x[nr + r]);
  for (std::size_t i = 0; i < ns; ++i) out.gamma_y.push_back(lp.x[2 * nr + i]);
  return out;
}

// ---------------------------------------------------------------- detailed balance

std::vector<IntVector> integer_kernel_basis(const Mechanism& m) { return integer_kernel(m.gamma()); }

namespace {

struct TreeLink {
  std::size_t parent;
  std::size_t step;
  int sign;  // +1 when the step points parent -> child
};

}  // namespace

DbClassification classify_db(const Mechanism& m) {
  if (!m.is_reversible()) throw MechanismError("detailed balance classification needs a fully reversible mechanism");
  const std::size_t nr = m.reaction_count();
  DbClassification out;
  const std::size_t rank = exact_rank(m.gamma());
  if (rank == nr) {
    out.db_class = DbClass::Unconditional;
    return out;
  }
  out.db_class = DbClass::Conditional;

  const FhjGraph g = build_fhj(m);
  const std::size_t nv = g.vertices.size();
  std::vector<std::vector<std::size_t>> incident(nv);  // edge indices, increasing step order
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    incident[g.edges[e].from].push_back(e);
    incident[g.edges[e].to].push_back(e);
  }

  // Breadth-first spanning forest rooted at the lowest-index vertex of each class.
  std::vector<bool> visited(nv, false), tree_edge(g.edges.size(), false);
  std::vector<std::optional<TreeLink>> link(nv);
  std::vector<std::size_t> depth(nv, 0);
  for (std::size_t root = 0; root < nv; ++root) {
    if (visited[root]) continue;
    visited[root] = true;
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t e : incident[u]) {
        const auto& edge = g.edges[e];
        const std::size_t v = edge.from == u ? edge.to : edge.from;
        if (visited[v]) continue;
        visited[v] = true;
        tree_edge[e] = true;
        link[v] = TreeLink{u, edge.step, edge.from == u ? 1 : -1};
        depth[v] = depth[u] + 1;
        queue.push_back(v);
      }
    }
  }

  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (tree_edge[e]) continue;
    const auto& edge = g.edges[e];
    IntVector a(nr, 0);
    a[edge.step] += 1;  // from -> to, then back to `from` through the tree
    std::size_t up = edge.to, down = edge.from;
    std::vector<TreeLink> descent;
    while (up != down) {
      if (depth[up] >= depth[down]) {
        const TreeLink& l = *link[up];
        a[l.step] -= l.sign;  // child -> parent
        up = l.parent;
      } else {
        descent.push_back(*link[down]);
        down = link[down]->parent;
      }
    }
    for (const TreeLink& l : descent) a[l.step] += l.sign;  // parent -> child
    normalize_sign(a);
    out.constraints.push_back({std::move(a), ConstraintKind::Circuit});
  }

  std::vector<std::size_t> forest_steps;
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (tree_edge[e]) forest_steps.push_back(g.edges[e].step);
  std::sort(forest_steps.begin(), forest_steps.end());
  IntMatrix sub(m.gamma().rows(), static_cast<Eigen::Index>(forest_steps.size()));
  for (std::size_t j = 0; j < forest_steps.size(); ++j)
    sub.col(static_cast<Eigen::Index>(j)) = m.gamma().col(static_cast<Eigen::Index>(forest_steps[j]));
  for (const IntVector& k : integer_kernel(sub)) {
    IntVector a(nr, 0);
    for (std::size_t j = 0; j < forest_steps.size(); ++j) a[forest_steps[j]] = k[j];
    out.constraints.push_back({std::move(a), ConstraintKind::Forest});
  }
  if (out.constraints.size() != nr - rank)
    throw std::logic_error("detailed balance constraint count does not match R - S");
  return out;
}

std::string render_condition(const DbConstraint& c) {
  auto term = [](bool backward, std::size_t r, long long power) {
    std::string s = std::string(backward ? "k-" : "k") + std::to_string(r + 1);
    if (power != 1) s += "^" + std::to_string(power);
    return s;
  };
  std::string lhs, rhs;
  for (std::size_t r = 0; r < c.exponents.size(); ++r) {
    const long long a = c.exponents[r];
    if (a == 0) continue;
    std::string& l = lhs;
    std::string& rr = rhs;
    if (!l.empty()) l += " ";
    if (!rr.empty()) rr += " ";
    l += term(a > 0, r, a > 0 ? a : -a);
    rr += term(a < 0, r, a > 0 ? a : -a);
  }
  return lhs + " = " + rhs;
}

// ---------------------------------------------------------------- reversibility

bool weakly_reversible(const Mechanism& m) {
  const FhjGraph g = build_fhj(m);
  const std::size_t nv = g.vertices.size();
  std::vector<std::vector<std::size_t>> out(nv);
  for (const auto& e : g.edges) {
    out[e.from].push_back(e.to);
    if (m.step(e.step).reversible) out[e.to].push_back(e.from);
  }
  auto reaches = [&](std::size_t from, std::size_t to) {
    std::vector<bool> seen(nv, false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      if (u == to) return true;
      for (std::size_t v : out[u])
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
    }
    return false;
  };
  for (const auto& e : g.edges)
    if (!m.step(e.step).reversible && !reaches(e.to, e.from)) return false;
  return true;
}

NetworkSummary summarize(const Mechanism& m) {
  NetworkSummary s;
  const FhjGraph g = build_fhj(m);
  s.species = m.species_count();
  s.reactions = m.reaction_count();
  s.complexes = g.vertices.size();
  s.linkage_classes = g.linkage_classes;
  s.rank = exact_rank(m.gamma());
  s.deficiency = s.complexes - s.linkage_classes - s.rank;
  s.reversible = m.is_reversible();
  s.weakly_reversible = weakly_reversible(m);
  s.mass_vector = mass_conserving(m);
  s.mass_conserving = s.mass_vector.has_value();
  if (s.reversible) {
    DbClassification db = classify_db(m);
    s.db_class = db.db_class;
    for (const auto& c : db.constraints)
      (c.kind == ConstraintKind::Circuit ? s.circuit_conditions : s.forest_conditions) += 1;
    s.conditions = std::move(db.constraints);
  }
  return s;
}

bool is_complex_balanced_structural(const Mechanism& m) {
  const FhjGraph g = build_fhj(m);
  const std::size_t rank = exact_rank(m.gamma());
  return weakly_reversible(m) && g.vertices.size() == g.linkage_classes + rank;
}

// ---------------------------------------------------------------- census

CensusCounts& CensusCounts::operator+=(const CensusCounts& o) {
  total += o.total;
  mass_conserving += o.mass_conserving;
  udb += o.udb;
  cdb += o.cdb;
  return *this;
}

CensusCounts census(std::size_t species, std::size_t steps, std::uint64_t cap, unsigned workers) {
  const BigInt count = count_mechanisms(species, steps, false);
  if (count > BigInt(cap))
    throw CapExceeded("census of " + count.str() + " mechanisms exceeds the cap of " + std::to_string(cap));
  const auto total = count.convert_to<std::uint64_t>();
  workers = std::max(1u, workers);

  auto run = [species, steps](std::uint64_t first, std::uint64_t last) {
    CensusCounts c;
    MechanismEnumerator it(species, steps, {}, first, last);
    while (auto mech = it.next()) {
      ++c.total;
      if (!mass_conserving(*mech)) continue;
      ++c.mass_conserving;
      if (exact_rank(mech->gamma()) == mech->reaction_count())
        ++c.udb;
      else
        ++c.cdb;
    }
    return c;
  };

  if (workers == 1) return run(0, total);
  std::vector<CensusCounts> parts(workers);
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t first = total * w / workers, last = total * (w + 1) / workers;
    threads.emplace_back([&, w, first, last] { parts[w] = run(first, last); });
  }
  for (auto& t : threads) t.join();
  CensusCounts sum;
  for (const auto& p : parts) sum += p;
  return sum;
}

}  // namespace crn
