#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qadv/bits.hpp"

namespace qadv {

enum class NodeKind { And, Or, Leaf };

/// AND/OR tree over distinct variables. Leaves carry a 1-based variable
/// index. The negation flag only appears on freshly parsed trees; normalize()
/// pushes it to the leaves and strips it.
struct FormulaTree {
  NodeKind kind = NodeKind::Leaf;
  std::vector<FormulaTree> children;
  int var = 0;
  bool negated = false;

  static FormulaTree leaf(int var, bool negated = false);
  static FormulaTree gate(NodeKind kind, std::vector<FormulaTree> children);

  bool is_leaf() const { return kind == NodeKind::Leaf; }

  friend bool operator==(const FormulaTree&, const FormulaTree&) = default;
};

/// Result of normalize(): the monotone alternating tree over 1..n plus the
/// bookkeeping needed to evaluate it as the original formula.
struct NormalizedFormula {
  FormulaTree tree;
  int n = 0;
  /// Normalized indices whose leaf was negated in the source formula.
  std::set<int> negated;
  /// Original variable index -> normalized index (order preserving).
  std::map<int, int> variable_map;

  /// Applies the negation map to an input over the normalized variables.
  Mask apply_negations(Mask x) const;
};

FormulaTree parse(std::string_view text);

NormalizedFormula normalize(const FormulaTree& tree);

/// Parse followed by normalize.
NormalizedFormula parse_normalized(std::string_view text);

/// Fully parenthesized rendering with children ordered by their smallest
/// variable index. Re-parses to an equal tree on normalized input.
std::string serialize(const FormulaTree& tree);

int leaf_count(const FormulaTree& tree);
int max_variable(const FormulaTree& tree);
int min_variable(const FormulaTree& tree);

/// Evaluates with bit j of the input string feeding variable j. Input
/// length must equal max_variable(tree).
bool evaluate(const FormulaTree& tree, std::string_view bits);
bool evaluate(const FormulaTree& tree, Mask x, int n);

using Evaluator = std::function<bool(Mask)>;

/// Evaluator over n-bit masks. The tree is copied into the closure.
Evaluator make_evaluator(FormulaTree tree, int n);

/// True if every node is an alternating, negation-free AND/OR with at least
/// two children and the leaves cover 1..n exactly once.
bool is_normalized(const FormulaTree& tree);

}  // namespace qadv
