#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "formulas.hpp"
#include "qadv/adversary.hpp"
#include "qadv/errors.hpp"
#include "qadv/readonce.hpp"
#include "random_formula.hpp"

using namespace qadv;
using doctest::Approx;

namespace {

const Evaluator and2 = [](Mask x) { return x == 0b11; };

}  // namespace

TEST_CASE("kappa and bound arithmetic") {
  const BoundReport r = make_bound_report(1.0, 1.0, 0.1);
  CHECK(r.kappa == Approx(0.6).epsilon(1e-12));
  CHECK(std::abs(r.theorem_bound - 0.4) <= 1e-12);
  CHECK(r.proof_traced_bound == r.theorem_bound / 2.0);
}

TEST_CASE("bound approaches objective over sqrt nu as epsilon vanishes") {
  const BoundReport r = make_bound_report(3.0, 4.0, 1e-14);
  CHECK(r.theorem_bound == Approx(1.5).epsilon(1e-6));
}

TEST_CASE("epsilon and nu preconditions") {
  CHECK_THROWS_AS(make_bound_report(1.0, 1.0, 0.5), BadEpsilon);
  CHECK_THROWS_AS(make_bound_report(1.0, 1.0, 0.0), BadEpsilon);
  CHECK_THROWS_AS(make_bound_report(1.0, 1.0, -0.1), BadEpsilon);
  CHECK_THROWS_AS(make_bound_report(1.0, 1.0, std::nan("")), BadEpsilon);
  CHECK_THROWS_AS(make_bound_report(1.0, 0.0, 0.1), DegenerateNu);
}

TEST_CASE("bound is nonincreasing in epsilon") {
  double prev = std::numeric_limits<double>::infinity();
  for (double eps = 0.001; eps < 0.5; eps += 0.001) {
    const double b = make_bound_report(1.0, 1.0, eps).theorem_bound;
    CHECK(b <= prev);
    CHECK(b >= 0.0);
    prev = b;
  }
}

TEST_CASE("support validation") {
  WeightMatrix ok(2, Convention::OneSided);
  ok.set(0b01, 0b11, 1.0);
  ok.set(0b10, 0b11, 1.0);
  CHECK_NOTHROW(validate_support(ok, and2));

  WeightMatrix diag(2, Convention::OneSided);
  diag.set(0b11, 0b11, 1.0);
  CHECK_THROWS_AS(validate_support(diag, and2), SupportViolation);

  WeightMatrix zeros(2, Convention::OneSided);
  zeros.set(0b01, 0b10, 1.0);
  CHECK_THROWS_WITH_AS(validate_support(zeros, and2), doctest::Contains("(01, 10)"),
                       SupportViolation);

  WeightMatrix lopsided(2, Convention::Symmetric);
  lopsided.set(0b01, 0b11, 1.0);
  CHECK_THROWS_AS(validate_support(lopsided, and2), SupportViolation);
}

TEST_CASE("read-once relation passes support validation") {
  for (const auto& f : fixtures::kCertificationFormulas) {
    const ReadOnceInstance inst = build_instance(parse_normalized(f.text).tree);
    CHECK_NOTHROW(validate_support(inst.gamma, make_evaluator(inst.tree, inst.n)));
  }
}

TEST_CASE("invalid weights and amplitudes") {
  WeightMatrix g(2, Convention::OneSided);
  CHECK_THROWS_AS(g.set(0, 1, -1.0), InvalidWeight);
  CHECK_THROWS_AS(g.set(0, 1, std::nan("")), InvalidWeight);
  CHECK_THROWS_AS(g.set(0, 4, 1.0), LengthMismatch);
  g.set(0, 1, 0.0);
  CHECK(g.empty());
  CHECK_THROWS_AS(AmplitudeVector(2, {{0, 0.5}}), InvalidWeight);
  CHECK_THROWS_AS(AmplitudeVector(2, {{0, -1.0}}), InvalidWeight);
  CHECK_NOTHROW(AmplitudeVector(2, {{0, 0.6}, {3, 0.8}}));
}

TEST_CASE("objective") {
  const ReadOnceInstance leaf = build_instance(FormulaTree::leaf(1));
  CHECK(objective(leaf.gamma, leaf.alpha) == Approx(0.5).epsilon(1e-14));

  const ReadOnceInstance aor = build_instance(parse_normalized("(x1|x2)&(x3|x4)").tree);
  CHECK(objective(aor.gamma, aor.alpha) == Approx(1.0).epsilon(1e-12));

  std::map<Mask, double> ones_only;
  for (Mask y : aor.critical.ones) ones_only[y] = 0.5;
  CHECK(objective(aor.gamma, AmplitudeVector(4, ones_only)) == 0.0);
}

TEST_CASE("symmetric storage halves the full form") {
  const ReadOnceInstance inst = build_instance(parse_normalized("x1 & (x2 | x3 | x4)").tree);
  WeightMatrix sym(inst.n, Convention::Symmetric);
  for (const auto& [p, w] : inst.gamma.entries()) {
    sym.set(p.first, p.second, w);
    sym.set(p.second, p.first, w);
  }
  const Evaluator f = make_evaluator(inst.tree, inst.n);
  CHECK(objective(sym, inst.alpha) == Approx(objective(inst.gamma, inst.alpha)).epsilon(1e-14));
  CHECK(nu_stats(sym, f).nu == nu_stats(inst.gamma, f).nu);
}

TEST_CASE("nu of a read-once relation is one") {
  for (const auto& f : fixtures::kCertificationFormulas) {
    CAPTURE(f.name);
    const ReadOnceInstance inst = build_instance(parse_normalized(f.text).tree);
    const NuStats s = nu_stats(inst.relation, make_evaluator(inst.tree, inst.n));
    CHECK(s.nu == 1.0);
    for (const auto& [x, per] : s.per_input) {
      for (double v : per) CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("empty weights give nu zero and a degenerate bound") {
  const WeightMatrix g(2, Convention::OneSided);
  CHECK(nu_stats(g, and2).nu == 0.0);
  CHECK_THROWS_AS(bound(g, AmplitudeVector(2, {{0b11, 1.0}}), 0.1, and2), DegenerateNu);
}

TEST_CASE("scaling gamma leaves the bound invariant") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  std::uniform_real_distribution<double> eps(0.01, 0.49);
  for (int trial = 0; trial < 40; ++trial) {
    const auto nf = parse_normalized(fixtures::random_formula(rng, 1 + trial % 8, false));
    const ReadOnceInstance inst = build_instance(nf.tree);
    const Evaluator f = make_evaluator(nf.tree, nf.n);
    const double c = scale(rng);
    const double e = eps(rng);
    const BoundReport base = bound(inst.gamma, inst.alpha, e, f);
    const WeightMatrix scaled = inst.gamma.scaled(c);
    const BoundReport r = bound(scaled, inst.alpha, e, f);
    CHECK(r.objective == Approx(c * base.objective).epsilon(1e-12));
    CHECK(r.nu == Approx(c * c * base.nu).epsilon(1e-12));
    CHECK(r.theorem_bound == Approx(base.theorem_bound).epsilon(1e-12));
  }
}

TEST_CASE("objective never exceeds the top eigenvalue") {
  std::mt19937 rng(32);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 40; ++trial) {
    const auto nf = parse_normalized(fixtures::random_formula(rng, 1 + trial % 9, false));
    const ReadOnceInstance inst = build_instance(nf.tree);
    const double lambda = principal_eigen_oracle(inst.relation).lambda_max;
    for (int k = 0; k < 20; ++k) {
      std::map<Mask, double> raw;
      double norm2 = 0.0;
      for (const auto& [x, a] : inst.alpha.entries()) {
        const double v = std::abs(g(rng));
        raw[x] = v;
        norm2 += v * v;
      }
      for (auto& [x, v] : raw) v /= std::sqrt(norm2);
      const AmplitudeVector alpha(nf.n, raw);
      CHECK(objective(inst.gamma, alpha) <= lambda + 1e-12);
    }
    CHECK(objective(inst.gamma, inst.alpha) <= lambda + 1e-12);
  }
}

TEST_CASE("weight and amplitude files") {
  std::istringstream gamma_text(
      "# AND of two\n"
      "01,11 1.0\n"
      "10,11 1   # trailing comment\n"
      "\n");
  const WeightMatrix g = read_weight_file(gamma_text, 2, Convention::OneSided);
  CHECK(g.entries().size() == 2);
  std::istringstream alpha_text("01 0.5\n10 0.5\n11 0.7071067811865476\n");
  const AmplitudeVector a = read_amplitude_file(alpha_text, 2);
  const BoundReport r = bound(g, a, 0.1, and2);
  CHECK(r.objective == Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK(r.nu == 1.0);

  std::istringstream dup("01,11 1\n01,11 2\n");
  CHECK_THROWS_AS(read_weight_file(dup, 2, Convention::OneSided), SyntaxError);
  std::istringstream wrong_len("011,11 1\n");
  CHECK_THROWS_AS(read_weight_file(wrong_len, 2, Convention::OneSided), LengthMismatch);
  std::istringstream bad_num("01,11 one\n");
  CHECK_THROWS_AS(read_weight_file(bad_num, 2, Convention::OneSided), SyntaxError);
  std::istringstream no_comma("0111 1\n");
  CHECK_THROWS_AS(read_weight_file(no_comma, 2, Convention::OneSided), SyntaxError);
  std::istringstream neg("01,11 -1\n");
  CHECK_THROWS_AS(read_weight_file(neg, 2, Convention::OneSided), InvalidWeight);
}
