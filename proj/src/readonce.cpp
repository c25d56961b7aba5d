#include "qadv/readonce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qadv/errors.hpp"

namespace qadv {

namespace {

using Weighted = std::vector<std::pair<Mask, double>>;

struct SubtreeAlpha {
  Weighted zeros;
  Weighted ones;
  double C = 1.0;
  double root_scale = 1.0;
  std::vector<double> branch_scales;
};

Weighted product_except(const std::vector<const Weighted*>& lists, std::size_t skip) {
  Weighted acc{{0, 1.0}};
  for (std::size_t j = 0; j < lists.size(); ++j) {
    if (j == skip) continue;
    Weighted next;
    next.reserve(acc.size() * lists[j]->size());
    for (const auto& [m, a] : acc) {
      for (const auto& [mj, aj] : *lists[j]) next.emplace_back(m | mj, a * aj);
    }
    acc = std::move(next);
  }
  return acc;
}

double squared_mass(const Weighted& w) {
  double s = 0.0;
  for (const auto& [m, a] : w) s += a * a;
  return s;
}

// Product ansatz at an AND root (OR swaps zeros and ones):
//   α_y           = 𝒜 · Π_j α^j_{y^j}
//   α_x (type i)  = ℬ_i · α^i_{x^i} · Π_{j≠i} α^j_{y^j},   ℬ_i = C𝒜 / C_i
//   1/C²          = Σ_i 1/C_i²
// with 𝒜 fixed by Σ α² = 1.
SubtreeAlpha build(const FormulaTree& t, int n) {
  SubtreeAlpha out;
  if (t.is_leaf()) {
    const double h = 1.0 / std::sqrt(2.0);
    out.zeros = {{0, h}};
    out.ones = {{var_bit(t.var, n), h}};
    out.C = 1.0;
    return out;
  }

  std::vector<SubtreeAlpha> kids;
  kids.reserve(t.children.size());
  for (const auto& c : t.children) kids.push_back(build(c, n));

  const bool is_and = t.kind == NodeKind::And;
  std::vector<const Weighted*> steady;
  for (const auto& k : kids) steady.push_back(is_and ? &k.ones : &k.zeros);

  double inv_c2 = 0.0;
  for (const auto& k : kids) inv_c2 += 1.0 / (k.C * k.C);
  const double C = 1.0 / std::sqrt(inv_c2);

  Weighted steady_all = product_except(steady, kids.size());
  Weighted typed_all;
  std::vector<double> ratios;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    const double ratio = C / kids[i].C;
    ratios.push_back(ratio);
    const Weighted rest = product_except(steady, i);
    for (const auto& [w, aw] : is_and ? kids[i].zeros : kids[i].ones) {
      for (const auto& [z, az] : rest) typed_all.emplace_back(w | z, ratio * aw * az);
    }
  }

  const double scale = 1.0 / std::sqrt(squared_mass(steady_all) + squared_mass(typed_all));
  for (auto& [m, a] : steady_all) a *= scale;
  for (auto& [m, a] : typed_all) a *= scale;

  out.C = C;
  out.root_scale = scale;
  for (double r : ratios) out.branch_scales.push_back(r * scale);
  if (is_and) {
    out.ones = std::move(steady_all);
    out.zeros = std::move(typed_all);
  } else {
    out.zeros = std::move(steady_all);
    out.ones = std::move(typed_all);
  }
  return out;
}

double total_mass(const std::map<Mask, double>& m) {
  double s = 0.0;
  for (const auto& [x, a] : m) s += a * a;
  return s;
}

CertificateCheck check_abs(std::string name, double value, double target, double tol) {
  return {std::move(name), value, target, tol, std::abs(value - target) <= tol};
}

}  // namespace

double AmplitudeAssignment::alpha(Mask x) const {
  if (auto it = zeros.find(x); it != zeros.end()) return it->second;
  if (auto it = ones.find(x); it != ones.end()) return it->second;
  return 0.0;
}

double AmplitudeAssignment::mass_zeros() const { return total_mass(zeros); }
double AmplitudeAssignment::mass_ones() const { return total_mass(ones); }

AmplitudeVector AmplitudeAssignment::vector() const {
  std::map<Mask, double> all = zeros;
  all.insert(ones.begin(), ones.end());
  return AmplitudeVector(n, std::move(all));
}

AmplitudeAssignment construct_alpha(const FormulaTree& tree, const EnumerationLimits& limits) {
  const int n = variable_width(tree);
  const auto [nx, ny] = critical_counts(tree);
  if (nx > limits.max_critical_inputs || ny > limits.max_critical_inputs - nx) {
    throw SizeLimit("critical inputs exceed the cap of " +
                    std::to_string(limits.max_critical_inputs));
  }
  SubtreeAlpha root = build(tree, n);
  AmplitudeAssignment a;
  a.n = n;
  a.zeros.insert(root.zeros.begin(), root.zeros.end());
  a.ones.insert(root.ones.begin(), root.ones.end());
  a.C = root.C;
  a.root_scale = root.root_scale;
  a.branch_scales = std::move(root.branch_scales);
  return a;
}

double foc_residual(const AmplitudeAssignment& a, const NeighborRelation& rel) {
  const auto adj = rel.symmetric_adjacency();
  double worst = 0.0;
  auto visit = [&](Mask w) {
    double s = 0.0;
    if (auto it = adj.find(w); it != adj.end()) {
      for (Mask v : it->second) s += a.alpha(v);
    }
    worst = std::max(worst, std::abs(a.alpha(w) - a.C * s));
  };
  for (const auto& [w, _] : a.zeros) visit(w);
  for (const auto& [w, _] : a.ones) visit(w);
  for (const auto& [w, _] : adj) {
    if (!a.zeros.contains(w) && !a.ones.contains(w)) visit(w);
  }
  return worst;
}

EigenResult principal_eigen_oracle(const NeighborRelation& rel,
                                   const PowerIterationOptions& options) {
  const auto adj_map = rel.symmetric_adjacency();
  const std::size_t dim = adj_map.size();
  if (dim > options.max_vertices) {
    throw SizeLimit("neighbor graph has " + std::to_string(dim) + " vertices; oracle cap is " +
                    std::to_string(options.max_vertices));
  }
  EigenResult result;
  if (dim == 0) return result;

  std::vector<Mask> nodes;
  nodes.reserve(dim);
  for (const auto& [w, _] : adj_map) nodes.push_back(w);
  std::vector<std::vector<std::size_t>> adj(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    for (Mask v : adj_map.at(nodes[k])) {
      adj[k].push_back(static_cast<std::size_t>(
          std::lower_bound(nodes.begin(), nodes.end(), v) - nodes.begin()));
    }
  }

  auto multiply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t k = 0; k < dim; ++k) {
      double s = 0.0;
      for (std::size_t j : adj[k]) s += v[j];
      out[k] = s;
    }
  };
  auto normalize = [](std::vector<double>& v) {
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (double& x : v) x /= norm;
  };

  std::vector<double> v(dim, 1.0);
  normalize(v);
  std::vector<double> av(dim);
  multiply(v, av);
  double lambda = std::inner_product(v.begin(), v.end(), av.begin(), 0.0);

  for (int it = 1; it <= options.max_iterations; ++it) {
    std::vector<double> next(dim);
    for (std::size_t k = 0; k < dim; ++k) next[k] = av[k] + v[k];
    normalize(next);
    double step = 0.0;
    for (std::size_t k = 0; k < dim; ++k) step = std::max(step, std::abs(next[k] - v[k]));
    v = std::move(next);
    multiply(v, av);
    const double estimate = std::inner_product(v.begin(), v.end(), av.begin(), 0.0);
    const double change = std::abs(estimate - lambda);
    lambda = estimate;
    if (change < options.eigenvalue_tolerance && step < options.vector_tolerance) {
      result.lambda_max = lambda;
      result.iterations = it;
      for (std::size_t k = 0; k < dim; ++k) result.vector.emplace(nodes[k], v[k]);
      return result;
    }
  }
  throw NonConvergence("power iteration did not converge in " +
                       std::to_string(options.max_iterations) + " iterations");
}

ReadOnceInstance build_instance(const FormulaTree& tree, const EnumerationLimits& limits) {
  CriticalInputSet cs = critical_inputs(tree, limits);
  NeighborRelation rel = neighbor_relation(tree, cs);
  AmplitudeAssignment a = construct_alpha(tree, limits);
  WeightMatrix gamma = WeightMatrix::from_relation(rel);
  AmplitudeVector alpha = a.vector();
  const int n = cs.n;
  return ReadOnceInstance{tree,           n,
                          std::move(cs),  std::move(rel),
                          std::move(a),   std::move(gamma),
                          std::move(alpha)};
}

bool Certificate::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CertificateCheck& c) { return c.passed; });
}

Certificate verify_construction(const FormulaTree& tree, const CertifyTolerances& tol,
                         const EnumerationLimits& limits, const PowerIterationOptions& power) {
  const ReadOnceInstance inst = build_instance(tree, limits);
  const Evaluator f = make_evaluator(tree, inst.n);
  validate_support(inst.gamma, f);

  Certificate cert;
  cert.n = inst.n;
  cert.zeros = inst.critical.zeros.size();
  cert.ones = inst.critical.ones.size();
  cert.relation_size = inst.relation.pairs.size();
  cert.C = inst.assignment.C;
  cert.foc_residual = foc_residual(inst.assignment, inst.relation);
  cert.mass_zeros = inst.assignment.mass_zeros();
  cert.mass_ones = inst.assignment.mass_ones();
  cert.connected = is_connected(inst.critical, inst.relation);

  const double root_n = std::sqrt(static_cast<double>(inst.n));
  const NuStats nu = nu_stats(inst.gamma, f);
  const double obj = objective(inst.gamma, inst.alpha);

  auto& checks = cert.checks;
  checks.push_back(check_abs("C_times_sqrt_n", cert.C * root_n, 1.0, tol.construction));
  checks.push_back(
      check_abs("unit_norm", cert.mass_zeros + cert.mass_ones, 1.0, tol.construction));
  checks.push_back(check_abs("mass_zeros", cert.mass_zeros, 0.5, tol.construction));
  checks.push_back(check_abs("mass_ones", cert.mass_ones, 0.5, tol.construction));
  checks.push_back(check_abs("foc_residual", cert.foc_residual, 0.0, tol.foc));
  checks.push_back(check_abs("nu", nu.nu, 1.0, 0.0));
  checks.push_back(check_abs("objective", obj, root_n / 2.0, tol.objective));

  if (inst.critical.size() <= power.max_vertices) {
    const EigenResult eig = principal_eigen_oracle(inst.relation, power);
    EigenCheck ec;
    ec.lambda_max = eig.lambda_max;
    ec.iterations = eig.iterations;
    for (const auto& [w, v] : eig.vector) {
      ec.max_vector_deviation =
          std::max(ec.max_vector_deviation, std::abs(v - inst.assignment.alpha(w)));
    }
    cert.eigen = ec;
    if (cert.connected) {
      checks.push_back(check_abs("lambda_max", ec.lambda_max, root_n, tol.eigenvalue));
      checks.push_back(
          check_abs("eigenvector_deviation", ec.max_vector_deviation, 0.0, tol.eigenvector));
    } else {
      const double floor = 1.0 / cert.C - tol.eigenvalue;
      checks.push_back({"lambda_max_lower_bound", ec.lambda_max, 1.0 / cert.C, tol.eigenvalue,
                        ec.lambda_max >= floor});
    }
  }
  cert.nu = nu.nu;
  cert.objective = obj;
  return cert;
}

Certificate certify(const FormulaTree& tree, double epsilon, const CertifyTolerances& tol,
                    const EnumerationLimits& limits, const PowerIterationOptions& power) {
  Certificate cert = verify_construction(tree, tol, limits, power);
  cert.report = make_bound_report(cert.objective, cert.nu, epsilon);
  return cert;
}

}  // namespace qadv
