#include "qadv/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "qadv/errors.hpp"

namespace qadv {

namespace {

double max_abs(const Operator& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

StateVector basis(int dim, int k) {
  StateVector e = StateVector::Zero(dim);
  e(k) = 1.0;
  return e;
}

// Unitary sending basis vector e_k to images[k] for each listed k; the other
// basis vectors are sent, in increasing order, to an orthonormal basis of the
// complement of the listed images. Images must be orthonormal.
Operator complete_unitary(int dim, const std::map<int, StateVector>& images) {
  const int k = static_cast<int>(images.size());
  Operator b(dim, k);
  int col = 0;
  for (const auto& [src, img] : images) b.col(col++) = img;
  const Operator q = Eigen::HouseholderQR<Operator>(b).householderQ();

  Operator u = Operator::Zero(dim, dim);
  int next = k;
  for (int src = 0; src < dim; ++src) {
    if (auto it = images.find(src); it != images.end()) {
      u.col(src) = it->second;
    } else {
      u.col(src) = q.col(next++);
    }
  }
  return u;
}

// A ⊗ I_aux in the |q, z⟩ ↦ q·aux + z layout.
Operator on_query_register(const Operator& a, int aux_dim) {
  const int qd = static_cast<int>(a.rows());
  Operator out = Operator::Zero(qd * aux_dim, qd * aux_dim);
  for (int q = 0; q < qd; ++q) {
    for (int p = 0; p < qd; ++p) {
      if (a(q, p) == Complex{0.0}) continue;
      for (int z = 0; z < aux_dim; ++z) out(q * aux_dim + z, p * aux_dim + z) = a(q, p);
    }
  }
  return out;
}

// Gamma restricted to tracked indices with α folded in: (k1, k2, Γ_xy α_x α_y)
// over both orientations of the full symmetric matrix.
struct WeightedPair {
  std::size_t a;
  std::size_t b;
  Mask x;
  Mask y;
  double weight;
};

std::vector<WeightedPair> weighted_pairs(std::span<const Mask> inputs, const WeightMatrix& gamma,
                                         const AmplitudeVector& alpha) {
  auto index = [&](Mask m) -> std::size_t {
    const auto it = std::lower_bound(inputs.begin(), inputs.end(), m);
    if (it == inputs.end() || *it != m) {
      throw std::invalid_argument("input " + to_bitstring(m, gamma.n()) +
                                  " carries weight but is not tracked");
    }
    return static_cast<std::size_t>(it - inputs.begin());
  };
  for (const auto& [x, a] : alpha.entries()) {
    if (a != 0.0) index(x);
  }
  std::vector<WeightedPair> out;
  for (const auto& [x, row] : gamma.symmetric_adjacency()) {
    for (const auto& [y, w] : row) {
      out.push_back({index(x), index(y), x, y, w * alpha(x) * alpha(y)});
    }
  }
  return out;
}

double progress_value(const Eigen::MatrixXd& m, const std::vector<WeightedPair>& pairs) {
  double s = 0.0;
  for (const auto& p : pairs) {
    s += p.weight * m(static_cast<Eigen::Index>(p.a), static_cast<Eigen::Index>(p.b));
  }
  return s;
}

double split_sum(std::span<const StateVector> states, int n, int aux_dim,
                 const std::vector<WeightedPair>& pairs) {
  double total = 0.0;
  for (const auto& p : pairs) {
    if (p.weight == 0.0) continue;
    const Mask diff = p.x ^ p.y;
    for (int i = 1; i <= n; ++i) {
      if (!(diff & var_bit(i, n))) continue;
      const Complex overlap =
          states[p.a].segment(i * aux_dim, aux_dim).dot(states[p.b].segment(i * aux_dim, aux_dim));
      total += p.weight * std::abs(overlap);
    }
  }
  return total;
}

}  // namespace

QueryAlgorithm::QueryAlgorithm(std::string name, int n, int aux_dim,
                               std::vector<Operator> unitaries, Operator p0, Operator p1)
    : name_(std::move(name)),
      n_(n),
      aux_dim_(aux_dim),
      unitaries_(std::move(unitaries)),
      p0_(std::move(p0)),
      p1_(std::move(p1)) {
  if (n_ < 1 || n_ > kMaxVariables || aux_dim_ < 1) {
    throw DimensionMismatch("need 1 <= n <= 64 and aux_dim >= 1");
  }
  if (static_cast<long long>(n_ + 1) * aux_dim_ > kMaxWorkspaceDim) {
    throw SizeLimit("workspace dimension exceeds " + std::to_string(kMaxWorkspaceDim));
  }
  const int dim = workspace_dim();
  const Operator eye = Operator::Identity(dim, dim);
  for (std::size_t l = 0; l < unitaries_.size(); ++l) {
    const Operator& u = unitaries_[l];
    if (u.rows() != dim || u.cols() != dim) {
      throw DimensionMismatch("U_" + std::to_string(l + 1) + " is not " + std::to_string(dim) +
                              "x" + std::to_string(dim));
    }
    if (max_abs(u.adjoint() * u - eye) > kUnitaryTolerance) {
      throw NonUnitary("U_" + std::to_string(l + 1) + " is not unitary");
    }
  }
  for (const Operator* p : {&p0_, &p1_}) {
    if (p->rows() != dim || p->cols() != dim) {
      throw DimensionMismatch("projector is not " + std::to_string(dim) + "x" +
                              std::to_string(dim));
    }
    if (max_abs(*p * *p - *p) > kUnitaryTolerance || max_abs(p->adjoint() - *p) > kUnitaryTolerance) {
      throw InvalidProjector("P_b must be a Hermitian idempotent");
    }
  }
  if (max_abs(p0_ + p1_ - eye) > kUnitaryTolerance) {
    throw InvalidProjector("P_0 + P_1 must equal the identity");
  }
}

void apply_oracle(StateVector& psi, Mask x, int n, int aux_dim) {
  for (int i = 1; i <= n; ++i) {
    if (bit_of(x, i, n)) psi.segment(i * aux_dim, aux_dim) *= -1.0;
  }
}

QueryAlgorithm xor2() {
  const double h = 1.0 / std::sqrt(2.0);
  StateVector plus = StateVector::Zero(3);
  plus << 0.0, h, h;
  StateVector minus = StateVector::Zero(3);
  minus << 0.0, h, -h;
  Operator p1 = minus * minus.adjoint();
  Operator p0 = Operator::Identity(3, 3) - p1;
  return QueryAlgorithm("xor2", 2, 1, {complete_unitary(3, {{0, plus}})}, std::move(p0),
                        std::move(p1));
}

int default_grover_iterations(int n) {
  const double k = std::numbers::pi / 4.0 * std::sqrt(static_cast<double>(n)) - 0.5;
  return std::max(0, static_cast<int>(std::lround(k)));
}

QueryAlgorithm grover_or(int n, std::optional<int> iterations) {
  if (n < 1) throw DimensionMismatch("grover-or needs n >= 1");
  const int k = iterations.value_or(default_grover_iterations(n));
  if (k < 0) throw std::invalid_argument("iteration count must be nonnegative");
  const int qd = n + 1;
  const int aux = n + 1;
  const int dim = qd * aux;
  if (dim > kMaxWorkspaceDim) throw SizeLimit("grover-or workspace exceeds the cap");
  auto at = [aux](int q, int z) { return q * aux + z; };

  StateVector uniform = StateVector::Zero(qd);
  for (int i = 1; i <= n; ++i) uniform(i) = 1.0 / std::sqrt(static_cast<double>(n));
  const Operator prep = on_query_register(complete_unitary(qd, {{0, uniform}}), aux);
  const Operator diffusion = on_query_register(
      2.0 * uniform * uniform.adjoint() - Operator::Identity(qd, qd), aux);

  const double h = 1.0 / std::sqrt(2.0);
  std::map<int, StateVector> split;
  for (int i = 1; i <= n; ++i) {
    split[at(i, 0)] = h * (basis(dim, at(i, i)) + basis(dim, at(0, i)));
  }
  const Operator branch = complete_unitary(dim, split);

  std::vector<Operator> us;
  if (k == 0) {
    us.push_back(branch * prep);
  } else {
    us.push_back(prep);
    for (int r = 1; r < k; ++r) us.push_back(diffusion);
    us.push_back(branch * diffusion);
  }

  Operator p1 = Operator::Zero(dim, dim);
  for (int i = 1; i <= n; ++i) {
    const StateVector phi = h * (basis(dim, at(0, i)) - basis(dim, at(i, i)));
    p1 += phi * phi.adjoint();
  }
  Operator p0 = Operator::Identity(dim, dim) - p1;
  return QueryAlgorithm("grover-or", n, aux, std::move(us), std::move(p0), std::move(p1));
}

QueryAlgorithm identity(int n, int steps) {
  if (steps < 0) throw std::invalid_argument("step count must be nonnegative");
  const int dim = n + 1;
  std::vector<Operator> us(static_cast<std::size_t>(steps), Operator::Identity(dim, dim));
  return QueryAlgorithm("identity", n, 1, std::move(us), Operator::Identity(dim, dim),
                        Operator::Zero(dim, dim));
}

QueryAlgorithm builtin(std::string_view name, int n, std::optional<int> iterations) {
  if (name == "xor2") {
    if (n != 2) throw DimensionMismatch("xor2 is defined for n = 2 only");
    return xor2();
  }
  if (name == "grover-or") return grover_or(n, iterations);
  if (name == "identity") return identity(n, iterations.value_or(0));
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "'; choose xor2, grover-or or identity");
}

Trajectory run(const QueryAlgorithm& alg, Mask x) {
  const int dim = alg.workspace_dim();
  if (alg.n() < kMaxVariables && (x >> alg.n()) != 0) {
    throw LengthMismatch("input wider than " + std::to_string(alg.n()) + " bits");
  }
  Trajectory tr;
  tr.states.reserve(static_cast<std::size_t>(alg.queries()) + 1);
  tr.states.push_back(basis(dim, 0));
  for (int l = 1; l <= alg.queries(); ++l) {
    StateVector pre = alg.unitary(l) * tr.states.back();
    StateVector post = pre;
    apply_oracle(post, x, alg.n(), alg.aux_dim());
    tr.pre_query.push_back(std::move(pre));
    tr.states.push_back(std::move(post));
  }
  return tr;
}

double answer_probability(const QueryAlgorithm& alg, const StateVector& psi, bool answer) {
  return (alg.projector(answer ? 1 : 0) * psi).squaredNorm();
}

double error_probability(const QueryAlgorithm& alg, const Evaluator& f,
                         std::span<const Mask> inputs) {
  if (inputs.empty()) throw std::invalid_argument("error_probability needs at least one input");
  double worst = 0.0;
  for (Mask x : inputs) {
    const Trajectory tr = run(alg, x);
    worst = std::max(worst, answer_probability(alg, tr.states.back(), !f(x)));
  }
  return worst;
}

Eigen::MatrixXcd inner_products(std::span<const StateVector> states) {
  const auto m = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXcd g(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a; b < m; ++b) {
      const Complex v = states[static_cast<std::size_t>(a)].dot(states[static_cast<std::size_t>(b)]);
      g(a, b) = v;
      g(b, a) = std::conj(v);
    }
  }
  return g;
}

Eigen::MatrixXd gram(std::span<const StateVector> states) {
  return inner_products(states).cwiseAbs();
}

double min_eigenvalue(const Eigen::MatrixXcd& hermitian) {
  if (hermitian.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Simulation::Simulation(QueryAlgorithm alg, std::vector<Mask> tracked)
    : alg_(std::move(alg)), inputs_(std::move(tracked)) {
  std::sort(inputs_.begin(), inputs_.end());
  inputs_.erase(std::unique(inputs_.begin(), inputs_.end()), inputs_.end());
  runs_.reserve(inputs_.size());
  for (Mask x : inputs_) runs_.push_back(run(alg_, x));
}

std::size_t Simulation::index_of(Mask x) const {
  const auto it = std::lower_bound(inputs_.begin(), inputs_.end(), x);
  if (it == inputs_.end() || *it != x) throw std::out_of_range("input is not tracked");
  return static_cast<std::size_t>(it - inputs_.begin());
}

std::vector<StateVector> Simulation::states_at(int l) const {
  std::vector<StateVector> out;
  out.reserve(runs_.size());
  for (const auto& r : runs_) out.push_back(r.states.at(static_cast<std::size_t>(l)));
  return out;
}

std::vector<StateVector> Simulation::pre_query_at(int l) const {
  std::vector<StateVector> out;
  out.reserve(runs_.size());
  for (const auto& r : runs_) out.push_back(r.pre_query.at(static_cast<std::size_t>(l - 1)));
  return out;
}

std::vector<Mask> default_tracked_inputs(const WeightMatrix& gamma, const AmplitudeVector& alpha) {
  std::vector<Mask> out = gamma.support();
  for (const auto& [x, a] : alpha.entries()) {
    if (a != 0.0) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ProgressTrace progress_trace(const Simulation& sim, const WeightMatrix& gamma,
                             const AmplitudeVector& alpha, const Evaluator& f) {
  const QueryAlgorithm& alg = sim.algorithm();
  if (gamma.n() != alg.n() || alpha.n() != alg.n()) {
    throw DimensionMismatch("weights and algorithm disagree on n");
  }
  const auto pairs = weighted_pairs(sim.inputs(), gamma, alpha);

  ProgressTrace trace;
  trace.tracked = sim.inputs();
  trace.nu = nu_stats(gamma, f).nu;
  trace.min_gram_eigenvalue = std::numeric_limits<double>::infinity();
  for (int l = 0; l <= alg.queries(); ++l) {
    const auto states = sim.states_at(l);
    for (const auto& s : states) {
      trace.max_norm_error = std::max(trace.max_norm_error, std::abs(s.norm() - 1.0));
    }
    const Eigen::MatrixXcd g = inner_products(states);
    trace.min_gram_eigenvalue = std::min(trace.min_gram_eigenvalue, min_eigenvalue(g));
    Eigen::MatrixXd m = g.cwiseAbs();
    trace.S.push_back(progress_value(m, pairs));
    trace.gram.push_back(std::move(m));
    if (l > 0) {
      trace.decrements.push_back(trace.S[static_cast<std::size_t>(l - 1)] - trace.S.back());
      trace.per_query_decomposition.push_back(
          split_sum(sim.pre_query_at(l), alg.n(), alg.aux_dim(), pairs));
    }
  }
  return trace;
}

ProgressTrace progress_trace(const QueryAlgorithm& alg, const WeightMatrix& gamma,
                             const AmplitudeVector& alpha, const Evaluator& f,
                             std::vector<Mask> tracked) {
  return progress_trace(Simulation(alg, std::move(tracked)), gamma, alpha, f);
}

OverlapVerdict overlap_check(std::span<const Mask> inputs, std::span<const StateVector> states,
                             const Evaluator& f, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 0.5)) {
    throw BadEpsilon("overlap check needs 0 <= epsilon <= 1/2");
  }
  if (inputs.size() != states.size()) throw DimensionMismatch("one state per input required");
  OverlapVerdict v;
  v.epsilon = epsilon;
  v.threshold = kappa(epsilon);
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    if (f(inputs[a])) continue;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
      if (!f(inputs[b])) continue;
      const double o = std::abs(states[a].dot(states[b]));
      if (o > v.max_cross_overlap) {
        v.max_cross_overlap = o;
        v.worst_zero = inputs[a];
        v.worst_one = inputs[b];
      }
    }
  }
  v.passed = v.max_cross_overlap <= v.threshold + kOverlapTolerance;
  return v;
}

double decomposition_sum(std::span<const Mask> inputs, std::span<const StateVector> states,
                         int n, int aux_dim, const WeightMatrix& gamma,
                         const AmplitudeVector& alpha) {
  if (inputs.size() != states.size()) throw DimensionMismatch("one state per input required");
  std::vector<Mask> sorted(inputs.begin(), inputs.end());
  if (!std::is_sorted(sorted.begin(), sorted.end())) {
    throw std::invalid_argument("inputs must be sorted");
  }
  return split_sum(states, n, aux_dim, weighted_pairs(sorted, gamma, alpha));
}

DecompositionCheck query_decomposition_check(const Simulation& sim, const WeightMatrix& gamma,
                                             const AmplitudeVector& alpha, const Evaluator& f,
                                             int step) {
  const QueryAlgorithm& alg = sim.algorithm();
  if (step < 1 || step > alg.queries()) {
    throw std::out_of_range("step must lie in 1.." + std::to_string(alg.queries()));
  }
  const auto pairs = weighted_pairs(sim.inputs(), gamma, alpha);
  const auto before = sim.states_at(step - 1);
  const auto after = sim.states_at(step);

  DecompositionCheck c;
  c.step = step;
  c.pre_query_sum = split_sum(sim.pre_query_at(step), alg.n(), alg.aux_dim(), pairs);
  c.post_query_sum = split_sum(after, alg.n(), alg.aux_dim(), pairs);
  c.sqrt_nu = std::sqrt(nu_stats(gamma, f).nu);
  c.decrement = progress_value(gram(before), pairs) - progress_value(gram(after), pairs);
  c.within_bound = c.pre_query_sum <= c.sqrt_nu + kDecompositionTolerance &&
                   c.post_query_sum <= c.sqrt_nu + kDecompositionTolerance;
  c.decrement_traced = c.decrement <= c.pre_query_sum + c.post_query_sum + kDecompositionTolerance;
  return c;
}

DecompositionCheck query_decomposition_check(const QueryAlgorithm& alg,
                                             const WeightMatrix& gamma,
                                             const AmplitudeVector& alpha, const Evaluator& f,
                                             int step) {
  return query_decomposition_check(
      Simulation(alg, default_tracked_inputs(gamma, alpha)), gamma, alpha, f, step);
}

}  // namespace qadv
