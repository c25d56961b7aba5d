#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "qadv/bits.hpp"
#include "qadv/formula.hpp"

namespace qadv {

struct EnumerationLimits {
  /// Maximum |X| + |Y|.
  std::size_t max_critical_inputs = std::size_t{1} << 20;
};

enum class TypedSide { None, Zeros, Ones };

/// Critical zeros X and critical ones Y of a read-once tree, both sorted by
/// integer value. For an AND root each critical zero has a type: the
/// 1-based index of the root child that evaluates to 0. For an OR root the
/// critical ones carry the type instead.
struct CriticalInputSet {
  int n = 0;
  std::vector<Mask> zeros;
  std::vector<Mask> ones;
  TypedSide typed_side = TypedSide::None;
  std::map<Mask, int> type;

  std::size_t size() const { return zeros.size() + ones.size(); }
};

/// R as ordered (critical zero, critical one) pairs, sorted. Stored
/// one-sided; see symmetric_adjacency() for the undirected view.
struct NeighborRelation {
  int n = 0;
  std::vector<std::pair<Mask, Mask>> pairs;
  std::map<std::pair<Mask, Mask>, int> flip;

  /// Undirected neighbor lists keyed by input, neighbors sorted.
  std::map<Mask, std::vector<Mask>> symmetric_adjacency() const;
};

/// The number of variables a tree's masks are laid out over.
int variable_width(const FormulaTree& tree);

CriticalInputSet critical_inputs(const FormulaTree& tree, const EnumerationLimits& limits = {});

NeighborRelation neighbor_relation(const FormulaTree& tree, const CriticalInputSet& cs);

/// Node-by-node check of the criticality predicate: every AND node has at
/// most one child evaluating to 0 and every OR node at most one child
/// evaluating to 1. Independent of the recursive enumeration.
bool is_critical(const FormulaTree& tree, Mask x, int n);

/// Whether the undirected neighbor graph on X ∪ Y is connected.
bool is_connected(const CriticalInputSet& cs, const NeighborRelation& rel);

/// Predicted |X| and |Y| without enumerating; saturates at SIZE_MAX.
std::pair<std::size_t, std::size_t> critical_counts(const FormulaTree& tree);

}  // namespace qadv
