#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qadv/adversary.hpp"
#include "qadv/bits.hpp"
#include "qadv/formula.hpp"

namespace qadv {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using Operator = Eigen::MatrixXcd;

inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr int kMaxWorkspaceDim = 1 << 12;

/// A t-query algorithm in the phase-oracle model. The workspace is the query
/// register (values 0..n) tensored with an auxiliary space; basis state
/// |q, z⟩ sits at index q·aux_dim + z. Query value 0 reads the constant bit
/// x_0 = 0 and so never picks up a phase.
class QueryAlgorithm {
 public:
  /// Validates dimensions (DimensionMismatch, SizeLimit), unitarity of each
  /// U_l (NonUnitary) and the projector pair (InvalidProjector).
  QueryAlgorithm(std::string name, int n, int aux_dim, std::vector<Operator> unitaries,
                 Operator p0, Operator p1);

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  int aux_dim() const { return aux_dim_; }
  int workspace_dim() const { return (n_ + 1) * aux_dim_; }
  int queries() const { return static_cast<int>(unitaries_.size()); }
  const Operator& unitary(int step) const { return unitaries_.at(static_cast<std::size_t>(step - 1)); }
  const Operator& projector(int answer) const { return answer ? p1_ : p0_; }

 private:
  std::string name_;
  int n_;
  int aux_dim_;
  std::vector<Operator> unitaries_;
  Operator p0_;
  Operator p1_;
};

/// Multiplies the amplitude of every |i, z⟩ by (−1)^{x_i}.
void apply_oracle(StateVector& psi, Mask x, int n, int aux_dim);

/// Exact one-query algorithm for x1 XOR x2.
QueryAlgorithm xor2();

/// Grover search for OR_n: `iterations` phase-query + diffusion rounds (default
/// round(π/4·√n − 1/2)) followed by one verification query. The auxiliary
/// space is a copy of the query register. Before the last query each |i⟩ is
/// split into a query branch |i, i⟩ and a null branch |0, i⟩; after it, the
/// pair {(|0, i⟩ ± |i, i⟩)/√2} is a two-dimensional answer register per
/// remembered index and P_1 projects onto the "−" members.
QueryAlgorithm grover_or(int n, std::optional<int> iterations = std::nullopt);

int default_grover_iterations(int n);

/// `steps` queries that all stay on the null query value; always answers 0.
QueryAlgorithm identity(int n, int steps = 0);

/// Looks up a zoo algorithm by name: "xor2", "grover-or", "identity".
QueryAlgorithm builtin(std::string_view name, int n, std::optional<int> iterations = std::nullopt);

struct Trajectory {
  /// Ψ(0..t).
  std::vector<StateVector> states;
  /// U_l Ψ(l−1) for l = 1..t, stored at index l−1.
  std::vector<StateVector> pre_query;
};

Trajectory run(const QueryAlgorithm& alg, Mask x);

/// Probability that measuring `psi` with the algorithm's projectors yields `answer`.
double answer_probability(const QueryAlgorithm& alg, const StateVector& psi, bool answer);

/// max over inputs of ‖P_{1−f(x)} Ψ_x(t)‖².
double error_probability(const QueryAlgorithm& alg, const Evaluator& f,
                         std::span<const Mask> inputs);

/// ⟨Ψ_x|Ψ_y⟩ for all pairs.
Eigen::MatrixXcd inner_products(std::span<const StateVector> states);

/// M_xy = |⟨Ψ_x|Ψ_y⟩|.
Eigen::MatrixXd gram(std::span<const StateVector> states);

double min_eigenvalue(const Eigen::MatrixXcd& hermitian);

/// Runs an algorithm on a fixed list of tracked inputs once and keeps every
/// intermediate state.
class Simulation {
 public:
  Simulation(QueryAlgorithm alg, std::vector<Mask> tracked);

  const QueryAlgorithm& algorithm() const { return alg_; }
  const std::vector<Mask>& inputs() const { return inputs_; }
  const Trajectory& trajectory(std::size_t k) const { return runs_[k]; }
  std::size_t index_of(Mask x) const;

  std::vector<StateVector> states_at(int l) const;
  std::vector<StateVector> pre_query_at(int l) const;

 private:
  QueryAlgorithm alg_;
  std::vector<Mask> inputs_;
  std::vector<Trajectory> runs_;
};

struct ProgressTrace {
  std::vector<Mask> tracked;
  /// S_0..S_t over the full symmetric Γ.
  std::vector<double> S;
  std::vector<Eigen::MatrixXd> gram;
  /// S_{l−1} − S_l for l = 1..t.
  std::vector<double> decrements;
  /// Σ_i Σ_{x_i≠y_i} Γ_xy |ρ^i_xy| on the pre-query state of each step.
  std::vector<double> per_query_decomposition;
  /// Smallest eigenvalue over all steps of the complex inner-product matrix.
  double min_gram_eigenvalue = 0.0;
  /// Largest |‖Ψ_x(l)‖ − 1| over all inputs and steps.
  double max_norm_error = 0.0;
  double nu = 0.0;
};

/// Inputs carrying Γ weight or α mass, sorted.
std::vector<Mask> default_tracked_inputs(const WeightMatrix& gamma, const AmplitudeVector& alpha);

ProgressTrace progress_trace(const Simulation& sim, const WeightMatrix& gamma,
                             const AmplitudeVector& alpha, const Evaluator& f);
ProgressTrace progress_trace(const QueryAlgorithm& alg, const WeightMatrix& gamma,
                             const AmplitudeVector& alpha, const Evaluator& f,
                             std::vector<Mask> tracked);

struct OverlapVerdict {
  double epsilon = 0.0;
  double threshold = 0.0;
  double max_cross_overlap = 0.0;
  Mask worst_zero = 0;
  Mask worst_one = 0;
  bool passed = false;
};

inline constexpr double kOverlapTolerance = 1e-9;

/// Checks |⟨Ψ_x|Ψ_y⟩| ≤ 2√(ε(1−ε)) + 1e-9 for every pair with f(x) ≠ f(y).
/// Throws BadEpsilon unless 0 ≤ ε ≤ 1/2.
OverlapVerdict overlap_check(std::span<const Mask> inputs, std::span<const StateVector> states,
                             const Evaluator& f, double epsilon);

struct DecompositionCheck {
  int step = 0;
  double pre_query_sum = 0.0;
  double post_query_sum = 0.0;
  double sqrt_nu = 0.0;
  /// S_{step−1} − S_step.
  double decrement = 0.0;
  bool within_bound = false;    // both sums ≤ √ν + 1e-9
  bool decrement_traced = false;  // decrement ≤ pre + post + 1e-9
};

inline constexpr double kDecompositionTolerance = 1e-9;

/// Splits each state at query step `step` (1..t) by query value and evaluates
/// Σ_i Σ_{x_i≠y_i} Γ_xy |α_x α_y ⟨Ψ^i_x|Ψ^i_y⟩| before and after the oracle.
DecompositionCheck query_decomposition_check(const Simulation& sim, const WeightMatrix& gamma,
                                             const AmplitudeVector& alpha, const Evaluator& f,
                                             int step);
DecompositionCheck query_decomposition_check(const QueryAlgorithm& alg,
                                             const WeightMatrix& gamma,
                                             const AmplitudeVector& alpha, const Evaluator& f,
                                             int step);

/// Query-register split sum for an arbitrary list of workspace states.
double decomposition_sum(std::span<const Mask> inputs, std::span<const StateVector> states,
                         int n, int aux_dim, const WeightMatrix& gamma,
                         const AmplitudeVector& alpha);

}  // namespace qadv
