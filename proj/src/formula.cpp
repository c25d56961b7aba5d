#include "qadv/formula.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "qadv/errors.hpp"

namespace qadv {

FormulaTree FormulaTree::leaf(int var, bool negated) {
  FormulaTree t;
  t.kind = NodeKind::Leaf;
  t.var = var;
  t.negated = negated;
  return t;
}

FormulaTree FormulaTree::gate(NodeKind kind, std::vector<FormulaTree> children) {
  FormulaTree t;
  t.kind = kind;
  t.children = std::move(children);
  return t;
}

namespace {

// Recursive descent over
//   formula := term { "|" term }
//   term    := factor { "&" factor }
//   factor  := ["!"] ( "x" integer | "(" formula ")" )
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  FormulaTree parse_all() {
    FormulaTree t = formula();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return t;
  }

  const std::set<int>& seen() const { return seen_; }

 private:
  FormulaTree formula() {
    std::vector<FormulaTree> terms;
    terms.push_back(term());
    while (accept('|')) terms.push_back(term());
    if (terms.size() == 1) return std::move(terms.front());
    return FormulaTree::gate(NodeKind::Or, std::move(terms));
  }

  FormulaTree term() {
    std::vector<FormulaTree> factors;
    factors.push_back(factor());
    while (accept('&')) factors.push_back(factor());
    if (factors.size() == 1) return std::move(factors.front());
    return FormulaTree::gate(NodeKind::And, std::move(factors));
  }

  FormulaTree factor() {
    const bool neg = accept('!');
    if (accept('(')) {
      FormulaTree inner = formula();
      if (!accept(')')) fail("expected ')'");
      if (neg) inner.negated = !inner.negated;
      return inner;
    }
    if (accept('x')) {
      const int var = integer();
      if (!seen_.insert(var).second) {
        throw ReadOnceViolation("variable x" + std::to_string(var) + " appears more than once");
      }
      return FormulaTree::leaf(var, neg);
    }
    fail("expected 'x<index>' or '('");
  }

  int integer() {
    // No whitespace between 'x' and its index.
    const std::size_t start = pos_;
    long long value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      if (value > std::numeric_limits<int>::max()) fail("variable index too large");
      ++pos_;
    }
    if (pos_ == start) fail("expected variable index");
    if (value < 1) fail("variable indices start at 1");
    return static_cast<int>(value);
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(what + " at offset " + std::to_string(pos_) + " in '" +
                      std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::set<int> seen_;
};

void collect_vars(const FormulaTree& t, std::vector<int>& out) {
  if (t.is_leaf()) {
    out.push_back(t.var);
    return;
  }
  for (const auto& c : t.children) collect_vars(c, out);
}

NodeKind dual(NodeKind k) { return k == NodeKind::And ? NodeKind::Or : NodeKind::And; }

// De Morgan pushdown; afterwards only leaves carry negation flags.
FormulaTree push_negations(const FormulaTree& t, bool negate) {
  const bool flip = t.negated != negate;
  if (t.is_leaf()) return FormulaTree::leaf(t.var, flip);
  std::vector<FormulaTree> kids;
  kids.reserve(t.children.size());
  for (const auto& c : t.children) kids.push_back(push_negations(c, flip));
  return FormulaTree::gate(flip ? dual(t.kind) : t.kind, std::move(kids));
}

FormulaTree flatten(const FormulaTree& t) {
  if (t.is_leaf()) return t;
  std::vector<FormulaTree> kids;
  for (const auto& c : t.children) {
    FormulaTree fc = flatten(c);
    if (fc.kind == t.kind) {
      for (auto& g : fc.children) kids.push_back(std::move(g));
    } else {
      kids.push_back(std::move(fc));
    }
  }
  if (kids.size() == 1) return std::move(kids.front());
  return FormulaTree::gate(t.kind, std::move(kids));
}

void remap_and_strip(FormulaTree& t, const std::map<int, int>& vmap, std::set<int>& negated) {
  if (t.is_leaf()) {
    t.var = vmap.at(t.var);
    if (t.negated) negated.insert(t.var);
    t.negated = false;
    return;
  }
  for (auto& c : t.children) remap_and_strip(c, vmap, negated);
}

void sort_children(FormulaTree& t) {
  if (t.is_leaf()) return;
  for (auto& c : t.children) sort_children(c);
  std::stable_sort(t.children.begin(), t.children.end(),
                   [](const FormulaTree& a, const FormulaTree& b) {
                     return min_variable(a) < min_variable(b);
                   });
}

void serialize_into(const FormulaTree& t, std::string& out) {
  if (t.negated) out += '!';
  if (t.is_leaf()) {
    out += 'x';
    out += std::to_string(t.var);
    return;
  }
  std::vector<const FormulaTree*> order;
  for (const auto& c : t.children) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(), [](const FormulaTree* a, const FormulaTree* b) {
    return min_variable(*a) < min_variable(*b);
  });
  out += '(';
  const char* sep = t.kind == NodeKind::And ? " & " : " | ";
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) out += sep;
    serialize_into(*order[i], out);
  }
  out += ')';
}

bool eval_node(const FormulaTree& t, Mask x, int n) {
  bool v;
  if (t.is_leaf()) {
    v = bit_of(x, t.var, n);
  } else if (t.kind == NodeKind::And) {
    v = std::all_of(t.children.begin(), t.children.end(),
                    [&](const FormulaTree& c) { return eval_node(c, x, n); });
  } else {
    v = std::any_of(t.children.begin(), t.children.end(),
                    [&](const FormulaTree& c) { return eval_node(c, x, n); });
  }
  return v != t.negated;
}

bool normalized_node(const FormulaTree& t, NodeKind parent, bool at_root) {
  if (t.negated) return false;
  if (t.is_leaf()) return true;
  if (t.children.size() < 2) return false;
  if (!at_root && t.kind == parent) return false;
  return std::all_of(t.children.begin(), t.children.end(), [&](const FormulaTree& c) {
    return normalized_node(c, t.kind, false);
  });
}

}  // namespace

FormulaTree parse(std::string_view text) { return Parser(text).parse_all(); }

NormalizedFormula normalize(const FormulaTree& tree) {
  NormalizedFormula out;
  out.tree = flatten(push_negations(tree, false));

  std::vector<int> vars;
  collect_vars(out.tree, vars);
  std::sort(vars.begin(), vars.end());
  if (std::adjacent_find(vars.begin(), vars.end()) != vars.end()) {
    throw ReadOnceViolation("tree repeats a variable");
  }
  for (std::size_t i = 0; i < vars.size(); ++i) {
    out.variable_map[vars[i]] = static_cast<int>(i) + 1;
  }
  out.n = static_cast<int>(vars.size());
  remap_and_strip(out.tree, out.variable_map, out.negated);
  sort_children(out.tree);
  return out;
}

NormalizedFormula parse_normalized(std::string_view text) { return normalize(parse(text)); }

Mask NormalizedFormula::apply_negations(Mask x) const {
  for (int v : negated) x ^= var_bit(v, n);
  return x;
}

std::string serialize(const FormulaTree& tree) {
  std::string out;
  serialize_into(tree, out);
  return out;
}

int leaf_count(const FormulaTree& tree) {
  if (tree.is_leaf()) return 1;
  int total = 0;
  for (const auto& c : tree.children) total += leaf_count(c);
  return total;
}

int max_variable(const FormulaTree& tree) {
  if (tree.is_leaf()) return tree.var;
  int m = 0;
  for (const auto& c : tree.children) m = std::max(m, max_variable(c));
  return m;
}

int min_variable(const FormulaTree& tree) {
  if (tree.is_leaf()) return tree.var;
  int m = std::numeric_limits<int>::max();
  for (const auto& c : tree.children) m = std::min(m, min_variable(c));
  return m;
}

bool evaluate(const FormulaTree& tree, std::string_view bits) {
  const int n = max_variable(tree);
  if (static_cast<int>(bits.size()) != n) {
    throw LengthMismatch("input has " + std::to_string(bits.size()) + " bits, formula expects " +
                         std::to_string(n));
  }
  return eval_node(tree, parse_bitstring(bits), n);
}

bool evaluate(const FormulaTree& tree, Mask x, int n) {
  if (max_variable(tree) > n || n > kMaxVariables) {
    throw LengthMismatch("input width " + std::to_string(n) + " does not cover the formula");
  }
  return eval_node(tree, x, n);
}

Evaluator make_evaluator(FormulaTree tree, int n) {
  if (max_variable(tree) > n || n > kMaxVariables) {
    throw LengthMismatch("input width " + std::to_string(n) + " does not cover the formula");
  }
  return [t = std::move(tree), n](Mask x) { return eval_node(t, x, n); };
}

bool is_normalized(const FormulaTree& tree) {
  if (!normalized_node(tree, tree.kind, true)) return false;
  std::vector<int> vars;
  collect_vars(tree, vars);
  std::sort(vars.begin(), vars.end());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] != static_cast<int>(i) + 1) return false;
  }
  return true;
}

}  // namespace qadv
