#include "qadv/critical.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "qadv/errors.hpp"

namespace qadv {

namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

std::size_t sat_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::size_t sat_add(std::size_t a, std::size_t b) { return a > kSaturated - b ? kSaturated : a + b; }

struct Triple {
  Mask zero;
  Mask one;
  int flip;
};

struct SubtreeSets {
  std::vector<Mask> zeros;
  std::vector<Mask> ones;
  std::vector<int> typed;  // per element of the typed side, 1-based root child
  std::vector<Triple> relation;
};

// All OR-combinations picking one mask from each list except `skip`.
std::vector<Mask> product_except(const std::vector<const std::vector<Mask>*>& lists,
                                 std::size_t skip) {
  std::vector<Mask> acc{0};
  for (std::size_t j = 0; j < lists.size(); ++j) {
    if (j == skip) continue;
    std::vector<Mask> next;
    next.reserve(acc.size() * lists[j]->size());
    for (Mask a : acc) {
      for (Mask b : *lists[j]) next.push_back(a | b);
    }
    acc = std::move(next);
  }
  return acc;
}

SubtreeSets enumerate(const FormulaTree& t, int n, bool with_relation) {
  SubtreeSets out;
  if (t.is_leaf()) {
    out.zeros = {0};
    out.ones = {var_bit(t.var, n)};
    if (with_relation) out.relation.push_back({0, var_bit(t.var, n), t.var});
    return out;
  }

  std::vector<SubtreeSets> kids;
  kids.reserve(t.children.size());
  for (const auto& c : t.children) kids.push_back(enumerate(c, n, with_relation));

  const bool is_and = t.kind == NodeKind::And;
  // For an AND the "steady" side (every child contributes one of its ones) is
  // Y and the typed side is X; an OR swaps the roles.
  std::vector<const std::vector<Mask>*> steady;
  for (const auto& k : kids) steady.push_back(is_and ? &k.ones : &k.zeros);
  const std::size_t none = kids.size();

  std::vector<Mask> steady_all = product_except(steady, none);
  std::vector<Mask> typed_all;
  std::vector<int> typed_idx;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    const std::vector<Mask> rest = product_except(steady, i);
    const auto& own = is_and ? kids[i].zeros : kids[i].ones;
    for (Mask w : own) {
      for (Mask z : rest) {
        typed_all.push_back(w | z);
        typed_idx.push_back(static_cast<int>(i) + 1);
      }
    }
    if (with_relation) {
      for (const Triple& p : kids[i].relation) {
        for (Mask z : rest) out.relation.push_back({p.zero | z, p.one | z, p.flip});
      }
    }
  }

  if (is_and) {
    out.ones = std::move(steady_all);
    out.zeros = std::move(typed_all);
  } else {
    out.zeros = std::move(steady_all);
    out.ones = std::move(typed_all);
  }
  out.typed = std::move(typed_idx);
  return out;
}

void check_width(int n) {
  if (n < 1 || n > kMaxVariables) {
    throw SizeLimit("formula uses " + std::to_string(n) + " variables; supported range is 1.." +
                    std::to_string(kMaxVariables));
  }
}

void check_cap(const FormulaTree& tree, const EnumerationLimits& limits) {
  const auto [nx, ny] = critical_counts(tree);
  const std::size_t total = sat_add(nx, ny);
  if (total > limits.max_critical_inputs) {
    throw SizeLimit("formula has " +
                    (total == kSaturated ? std::string("too many") : std::to_string(total)) +
                    " critical inputs; cap is " + std::to_string(limits.max_critical_inputs));
  }
}

bool crit_node(const FormulaTree& t, Mask x, int n, bool& value) {
  if (t.is_leaf()) {
    value = bit_of(x, t.var, n);
    return true;
  }
  int zeros = 0;
  int ones = 0;
  for (const auto& c : t.children) {
    bool v = false;
    if (!crit_node(c, x, n, v)) return false;
    (v ? ones : zeros) += 1;
  }
  if (t.kind == NodeKind::And) {
    value = zeros == 0;
    return zeros <= 1;
  }
  value = ones > 0;
  return ones <= 1;
}

}  // namespace

int variable_width(const FormulaTree& tree) {
  const int n = max_variable(tree);
  check_width(n);
  return n;
}

std::pair<std::size_t, std::size_t> critical_counts(const FormulaTree& tree) {
  if (tree.is_leaf()) return {1, 1};
  std::vector<std::pair<std::size_t, std::size_t>> kids;
  for (const auto& c : tree.children) kids.push_back(critical_counts(c));
  const bool is_and = tree.kind == NodeKind::And;
  auto steady = [&](std::size_t j) { return is_and ? kids[j].second : kids[j].first; };
  auto typed = [&](std::size_t j) { return is_and ? kids[j].first : kids[j].second; };

  std::size_t steady_total = 1;
  for (std::size_t j = 0; j < kids.size(); ++j) steady_total = sat_mul(steady_total, steady(j));
  std::size_t typed_total = 0;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    std::size_t term = typed(i);
    for (std::size_t j = 0; j < kids.size(); ++j) {
      if (j != i) term = sat_mul(term, steady(j));
    }
    typed_total = sat_add(typed_total, term);
  }
  return is_and ? std::pair{typed_total, steady_total} : std::pair{steady_total, typed_total};
}

CriticalInputSet critical_inputs(const FormulaTree& tree, const EnumerationLimits& limits) {
  const int n = variable_width(tree);
  check_cap(tree, limits);

  SubtreeSets sets = enumerate(tree, n, false);
  CriticalInputSet cs;
  cs.n = n;
  if (!tree.is_leaf()) {
    const bool is_and = tree.kind == NodeKind::And;
    cs.typed_side = is_and ? TypedSide::Zeros : TypedSide::Ones;
    const auto& typed = is_and ? sets.zeros : sets.ones;
    for (std::size_t k = 0; k < typed.size(); ++k) cs.type.emplace(typed[k], sets.typed[k]);
  }
  cs.zeros = std::move(sets.zeros);
  cs.ones = std::move(sets.ones);
  std::sort(cs.zeros.begin(), cs.zeros.end());
  std::sort(cs.ones.begin(), cs.ones.end());
  return cs;
}

NeighborRelation neighbor_relation(const FormulaTree& tree, const CriticalInputSet& cs) {
  const int n = variable_width(tree);
  if (n != cs.n) throw std::invalid_argument("critical set was built for a different formula");
  EnumerationLimits limits;
  limits.max_critical_inputs = std::max(limits.max_critical_inputs, cs.size());
  check_cap(tree, limits);

  SubtreeSets sets = enumerate(tree, n, true);
  std::sort(sets.relation.begin(), sets.relation.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.zero, a.one) < std::tie(b.zero, b.one);
  });

  NeighborRelation rel;
  rel.n = n;
  rel.pairs.reserve(sets.relation.size());
  for (const Triple& p : sets.relation) {
    if (!std::binary_search(cs.zeros.begin(), cs.zeros.end(), p.zero) ||
        !std::binary_search(cs.ones.begin(), cs.ones.end(), p.one)) {
      throw std::invalid_argument("critical set was built for a different formula");
    }
    rel.pairs.emplace_back(p.zero, p.one);
    rel.flip.emplace(std::pair{p.zero, p.one}, p.flip);
  }
  return rel;
}

std::map<Mask, std::vector<Mask>> NeighborRelation::symmetric_adjacency() const {
  std::map<Mask, std::vector<Mask>> adj;
  for (const auto& [x, y] : pairs) {
    adj[x].push_back(y);
    adj[y].push_back(x);
  }
  for (auto& [w, nb] : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

bool is_critical(const FormulaTree& tree, Mask x, int n) {
  bool value = false;
  return crit_node(tree, x, n, value);
}

bool is_connected(const CriticalInputSet& cs, const NeighborRelation& rel) {
  std::vector<Mask> nodes = cs.zeros;
  nodes.insert(nodes.end(), cs.ones.begin(), cs.ones.end());
  std::sort(nodes.begin(), nodes.end());
  if (nodes.size() <= 1) return true;

  std::vector<std::size_t> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto index = [&](Mask m) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), m) -
                                    nodes.begin());
  };
  std::size_t components = nodes.size();
  for (const auto& [x, y] : rel.pairs) {
    const std::size_t a = find(index(x));
    const std::size_t b = find(index(y));
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace qadv
