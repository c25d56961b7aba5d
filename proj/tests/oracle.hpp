// Brute-force reference implementations used only by the tests. Nothing here
// calls into the recursive machinery of the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qadv/formula.hpp"

namespace oracle {

using qadv::FormulaTree;
using qadv::Mask;
using qadv::NodeKind;

inline bool value(const FormulaTree& t, Mask x, int n) {
  switch (t.kind) {
    case NodeKind::Leaf: {
      const bool b = (x >> (n - t.var)) & 1U;
      return t.negated ? !b : b;
    }
    case NodeKind::And:
      for (const auto& c : t.children) {
        if (!value(c, x, n)) return t.negated;
      }
      return !t.negated;
    case NodeKind::Or:
      for (const auto& c : t.children) {
        if (value(c, x, n)) return !t.negated;
      }
      return t.negated;
  }
  return false;
}

// Every AND node has at most one false child, every OR node at most one true child.
inline bool critical(const FormulaTree& t, Mask x, int n) {
  if (t.kind == NodeKind::Leaf) return true;
  int zeros = 0;
  int ones = 0;
  for (const auto& c : t.children) {
    if (!critical(c, x, n)) return false;
    (value(c, x, n) ? ones : zeros)++;
  }
  return t.kind == NodeKind::And ? zeros <= 1 : ones <= 1;
}

struct Split {
  std::vector<Mask> zeros;
  std::vector<Mask> ones;
};

// Exhaustive filtering over all 2^n inputs.
inline Split critical_sets(const FormulaTree& t, int n) {
  Split s;
  for (Mask x = 0; x < (Mask{1} << n); ++x) {
    if (!critical(t, x, n)) continue;
    (value(t, x, n) ? s.ones : s.zeros).push_back(x);
  }
  return s;
}

// Critical (zero, one) pairs at Hamming distance one.
inline std::vector<std::pair<Mask, Mask>> hamming_pairs(const Split& s) {
  std::vector<std::pair<Mask, Mask>> out;
  for (Mask x : s.zeros) {
    for (Mask y : s.ones) {
      if (__builtin_popcountll(x ^ y) == 1) out.emplace_back(x, y);
    }
  }
  return out;
}

struct Spectrum {
  double lambda_max = 0.0;
  double second = 0.0;
  std::map<Mask, double> vector;
};

// Dense symmetric eigendecomposition of the 0/1 adjacency of the pairs.
inline Spectrum dense_spectrum(const std::vector<std::pair<Mask, Mask>>& pairs) {
  std::set<Mask> nodes;
  for (const auto& [x, y] : pairs) {
    nodes.insert(x);
    nodes.insert(y);
  }
  std::vector<Mask> order(nodes.begin(), nodes.end());
  auto idx = [&](Mask m) {
    return static_cast<Eigen::Index>(std::lower_bound(order.begin(), order.end(), m) -
                                     order.begin());
  };
  const auto d = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [x, y] : pairs) {
    a(idx(x), idx(y)) = 1.0;
    a(idx(y), idx(x)) = 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Spectrum s;
  s.lambda_max = es.eigenvalues()(d - 1);
  s.second = d > 1 ? es.eigenvalues()(d - 2) : 0.0;
  Eigen::VectorXd v = es.eigenvectors().col(d - 1);
  if (v.sum() < 0) v = -v;
  for (Eigen::Index k = 0; k < d; ++k) s.vector[order[static_cast<std::size_t>(k)]] = v(k);
  return s;
}

}  // namespace oracle
