#include <doctest.h>

#include <cmath>
#include <random>

#include "formulas.hpp"
#include "oracle.hpp"
#include "qadv/errors.hpp"
#include "qadv/readonce.hpp"
#include "random_formula.hpp"

using namespace qadv;
using doctest::Approx;

namespace {

FormulaTree tree_of(std::string_view text) { return parse_normalized(text).tree; }

// Renumbers leaves 1..n in left-to-right order; returns old -> new.
std::map<int, int> relabel_in_leaf_order(FormulaTree& t) {
  std::map<int, int> m;
  std::function<void(FormulaTree&)> walk = [&](FormulaTree& node) {
    if (node.is_leaf()) {
      const int next = static_cast<int>(m.size()) + 1;
      m[node.var] = next;
      node.var = next;
      return;
    }
    for (auto& c : node.children) walk(c);
  };
  walk(t);
  return m;
}

Mask permute(Mask x, const std::map<int, int>& m, int n) {
  Mask y = 0;
  for (const auto& [from, to] : m) {
    if (bit_of(x, from, n)) y |= var_bit(to, n);
  }
  return y;
}

}  // namespace

TEST_CASE("leaf base case") {
  const AmplitudeAssignment a = construct_alpha(FormulaTree::leaf(1));
  CHECK(a.C == 1.0);
  CHECK(a.alpha(0) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(a.alpha(1) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(foc_residual(a, neighbor_relation(FormulaTree::leaf(1), critical_inputs(FormulaTree::leaf(1)))) == 0.0);
}

TEST_CASE("AND of two") {
  const AmplitudeAssignment a = construct_alpha(tree_of("x1 & x2"));
  CHECK(std::abs(a.C - 1.0 / std::sqrt(2.0)) <= 1e-12);
  CHECK(std::abs(a.alpha(0b11) - 1.0 / std::sqrt(2.0)) <= 1e-12);
  CHECK(std::abs(a.alpha(0b01) - 0.5) <= 1e-12);
  CHECK(std::abs(a.alpha(0b10) - 0.5) <= 1e-12);
}

TEST_CASE("OR of two mirrors AND of two") {
  const AmplitudeAssignment a = construct_alpha(tree_of("x1 | x2"));
  CHECK(std::abs(a.alpha(0b00) - 1.0 / std::sqrt(2.0)) <= 1e-12);
  CHECK(std::abs(a.alpha(0b01) - 0.5) <= 1e-12);
  CHECK(std::abs(a.alpha(0b10) - 0.5) <= 1e-12);
}

TEST_CASE("AND of ORs is uniform") {
  const FormulaTree t = tree_of("(x1|x2)&(x3|x4)");
  const AmplitudeAssignment a = construct_alpha(t);
  CHECK(std::abs(a.C - 0.5) <= 1e-12);
  for (const auto& side : {a.zeros, a.ones}) {
    REQUIRE(side.size() == 4);
    for (const auto& [w, v] : side) CHECK(std::abs(v - std::sqrt(2.0) / 4.0) <= 1e-12);
  }
  CHECK(foc_residual(a, neighbor_relation(t, critical_inputs(t))) <= 1e-12);
}

TEST_CASE("unbalanced AND over an OR of three") {
  // Frozen from a dense eigensolver on the 7-vertex neighbor graph.
  const AmplitudeAssignment a = construct_alpha(tree_of("x1 & (x2 | x3 | x4)"));
  const double s6 = std::sqrt(6.0);
  for (Mask x : {Mask{0b0001}, Mask{0b0010}, Mask{0b0100}}) CHECK(std::abs(a.alpha(x) - 1.0 / (2.0 * s6)) <= 1e-12);
  CHECK(std::abs(a.alpha(0b1000) - s6 / 4.0) <= 1e-12);
  for (Mask y : {Mask{0b1001}, Mask{0b1010}, Mask{0b1100}}) CHECK(std::abs(a.alpha(y) - 1.0 / s6) <= 1e-12);
}

TEST_CASE("root scale has the closed form 2^((r-1)/2)") {
  for (int r = 2; r <= 6; ++r) {
    std::string text;
    for (int i = 1; i <= r; ++i) text += (i > 1 ? " & x" : "x") + std::to_string(i);
    const AmplitudeAssignment a = construct_alpha(tree_of(text));
    CHECK(a.root_scale == Approx(std::pow(2.0, (r - 1) / 2.0)).epsilon(1e-12));
  }
  std::mt19937 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const FormulaTree t = tree_of(fixtures::random_formula(rng, 2 + trial % 10, false));
    const AmplitudeAssignment a = construct_alpha(t);
    const auto r = static_cast<double>(t.children.size());
    CHECK(a.root_scale == Approx(std::pow(2.0, (r - 1.0) / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("construction invariants on random trees") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 12;
    const FormulaTree t = tree_of(fixtures::random_formula(rng, n, false));
    const ReadOnceInstance inst = build_instance(t);
    const AmplitudeAssignment& a = inst.assignment;
    CHECK(std::abs(a.C * std::sqrt(static_cast<double>(n)) - 1.0) <= 1e-12);
    CHECK(std::abs(a.mass_zeros() - 0.5) <= 1e-12);
    CHECK(std::abs(a.mass_ones() - 0.5) <= 1e-12);
    CHECK(foc_residual(a, inst.relation) <= 1e-10);
    CHECK(std::abs(objective(inst.gamma, inst.alpha) - std::sqrt(static_cast<double>(n)) / 2.0) <= 1e-10);
    for (const auto& [w, v] : a.zeros) CHECK(v > 0.0);
    for (const auto& [w, v] : a.ones) CHECK(v > 0.0);
  }
}

TEST_CASE("perturbing one entry breaks the FOC") {
  const FormulaTree t = tree_of("(x1|x2)&(x3|x4)");
  const CriticalInputSet cs = critical_inputs(t);
  const NeighborRelation rel = neighbor_relation(t, cs);
  for (Mask w : {cs.zeros.front(), cs.ones.back()}) {
    AmplitudeAssignment a = construct_alpha(t);
    if (a.zeros.count(w)) {
      a.zeros[w] += 0.1;
    } else {
      a.ones[w] += 0.1;
    }
    CHECK(foc_residual(a, rel) >= 0.01);
  }
}

TEST_CASE("permuting root children permutes alpha") {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 9;
    const FormulaTree t = tree_of(fixtures::random_formula(rng, n, false));
    FormulaTree p = t;
    std::shuffle(p.children.begin(), p.children.end(), rng);
    const auto m = relabel_in_leaf_order(p);
    const AmplitudeAssignment a = construct_alpha(t);
    const AmplitudeAssignment b = construct_alpha(p);
    CHECK(a.C == Approx(b.C).epsilon(1e-14));
    REQUIRE(a.zeros.size() == b.zeros.size());
    REQUIRE(a.ones.size() == b.ones.size());
    for (const auto& [x, v] : a.zeros) CHECK(b.alpha(permute(x, m, n)) == Approx(v).epsilon(1e-12));
    for (const auto& [y, v] : a.ones) CHECK(b.alpha(permute(y, m, n)) == Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("power iteration on small graphs") {
  const FormulaTree leaf = FormulaTree::leaf(1);
  CHECK(principal_eigen_oracle(neighbor_relation(leaf, critical_inputs(leaf))).lambda_max == Approx(1.0));
  const FormulaTree aor = tree_of("(x1|x2)&(x3|x4)");
  CHECK(std::abs(principal_eigen_oracle(neighbor_relation(aor, critical_inputs(aor))).lambda_max - 2.0) <= 1e-8);
  const FormulaTree big = tree_of("(x1&x2&x3)|(x4&x5&x6)|(x7&x8&x9)");
  CHECK(std::abs(principal_eigen_oracle(neighbor_relation(big, critical_inputs(big))).lambda_max - 3.0) <= 1e-8);
}

TEST_CASE("power iteration agrees with a dense eigensolver") {
  std::mt19937 rng(44);
  auto agree = [](const FormulaTree& t, int n) {
    const oracle::Split s = oracle::critical_sets(t, n);
    const oracle::Spectrum dense = oracle::dense_spectrum(oracle::hamming_pairs(s));
    const CriticalInputSet cs = critical_inputs(t);
    const EigenResult eig = principal_eigen_oracle(neighbor_relation(t, cs));
    CHECK(std::abs(eig.lambda_max - dense.lambda_max) <= 1e-8);
    CHECK(std::abs(dense.lambda_max - std::sqrt(static_cast<double>(n))) <= 1e-10);
    const AmplitudeAssignment a = construct_alpha(t);
    for (const auto& [w, v] : dense.vector) {
      CHECK(std::abs(eig.vector.at(w) - v) <= 1e-6);
      CHECK(std::abs(a.alpha(w) - v) <= 1e-10);
    }
  };
  for (const auto& f : fixtures::kCertificationFormulas) agree(tree_of(f.text), f.n);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 9;
    agree(tree_of(fixtures::random_formula(rng, n, false)), n);
  }
}

TEST_CASE("power iteration limits") {
  const FormulaTree t = tree_of("(x1&x2&x3)|(x4&x5&x6)|(x7&x8&x9)");
  const NeighborRelation rel = neighbor_relation(t, critical_inputs(t));
  PowerIterationOptions tight;
  tight.max_vertices = 53;
  CHECK_THROWS_AS(principal_eigen_oracle(rel, tight), SizeLimit);
  PowerIterationOptions short_run;
  short_run.max_iterations = 1;
  const FormulaTree unbalanced = tree_of("x1 & (x2 | x3 | x4)");
  CHECK_THROWS_AS(principal_eigen_oracle(neighbor_relation(unbalanced, critical_inputs(unbalanced)), short_run),
                  NonConvergence);
}

TEST_CASE("certify examples") {
  const Certificate four = certify(tree_of("(x1|x2)&(x3|x4)"), 0.1);
  CHECK(four.passed());
  REQUIRE(four.report);
  CHECK(four.report->objective == Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(four.report->theorem_bound - 0.4) <= 1e-12);

  const Certificate one = certify(FormulaTree::leaf(1), 1e-9);
  CHECK(one.passed());
  CHECK(one.report->objective == Approx(0.5).epsilon(1e-12));

  const Certificate nine = certify(tree_of("(x1&x2&x3)|(x4&x5&x6)|(x7&x8&x9)"), 0.1);
  CHECK(nine.passed());
  CHECK(nine.report->objective == Approx(1.5).epsilon(1e-10));
}

TEST_CASE("certificate records every check") {
  const Certificate c = verify_construction(tree_of("x1 & (x2 | x3 | x4)"));
  CHECK_FALSE(c.report);
  std::vector<std::string> names;
  for (const auto& k : c.checks) names.push_back(k.name);
  CHECK(names == std::vector<std::string>{"C_times_sqrt_n", "unit_norm", "mass_zeros", "mass_ones",
                                          "foc_residual", "nu", "objective", "lambda_max",
                                          "eigenvector_deviation"});
  CHECK(c.connected);
  CHECK(c.passed());
}
