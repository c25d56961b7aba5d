#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qadv/adversary.hpp"
#include "qadv/critical.hpp"
#include "qadv/formula.hpp"

namespace qadv {

/// Amplitudes on the critical inputs solving
///   α_w = C · Σ_{v neighbor of w} α_v
/// with C = 1/√n, built bottom-up from the children's solutions.
struct AmplitudeAssignment {
  int n = 0;
  std::map<Mask, double> zeros;  // α on X
  std::map<Mask, double> ones;   // α on Y
  double C = 0.0;
  /// Root constants of the product ansatz: the steady-side scale and the
  /// per-child scale of the typed side (C · scale / C_i). Empty for a leaf.
  double root_scale = 1.0;
  std::vector<double> branch_scales;

  double alpha(Mask x) const;
  double mass_zeros() const;
  double mass_ones() const;
  AmplitudeVector vector() const;
};

AmplitudeAssignment construct_alpha(const FormulaTree& tree,
                                    const EnumerationLimits& limits = {});

/// max_w |α_w − C Σ_{neighbors} α| over every input touched by a or R.
double foc_residual(const AmplitudeAssignment& a, const NeighborRelation& rel);

struct PowerIterationOptions {
  int max_iterations = 100000;
  double eigenvalue_tolerance = 1e-12;
  double vector_tolerance = 1e-12;
  std::size_t max_vertices = std::size_t{1} << 12;
};

struct EigenResult {
  double lambda_max = 0.0;
  std::map<Mask, double> vector;  // nonnegative, unit norm
  int iterations = 0;
};

/// Dominant eigenpair of the symmetrized 0/1 adjacency of R by power
/// iteration from the all-ones vector. Iterates with A + I so that the
/// −λ_max partner of a bipartite spectrum does not stall convergence; the
/// reported eigenvalue is the Rayleigh quotient of A itself. Throws SizeLimit
/// above options.max_vertices and NonConvergence at the iteration cap.
EigenResult principal_eigen_oracle(const NeighborRelation& rel,
                                   const PowerIterationOptions& options = {});

/// Everything derived from a read-once tree that the bound and simulator
/// consume.
struct ReadOnceInstance {
  FormulaTree tree;
  int n = 0;
  CriticalInputSet critical;
  NeighborRelation relation;
  AmplitudeAssignment assignment;
  WeightMatrix gamma;
  AmplitudeVector alpha;
};

ReadOnceInstance build_instance(const FormulaTree& tree, const EnumerationLimits& limits = {});

struct CertifyTolerances {
  double construction = 1e-12;
  double foc = 1e-10;
  double objective = 1e-10;
  double eigenvalue = 1e-8;
  double eigenvector = 1e-6;
};

struct CertificateCheck {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct EigenCheck {
  double lambda_max = 0.0;
  double max_vector_deviation = 0.0;
  int iterations = 0;
};

struct Certificate {
  int n = 0;
  std::size_t zeros = 0;
  std::size_t ones = 0;
  std::size_t relation_size = 0;
  double C = 0.0;
  double foc_residual = 0.0;
  double mass_zeros = 0.0;
  double mass_ones = 0.0;
  double nu = 0.0;
  double objective = 0.0;
  bool connected = false;
  /// Present when produced by certify().
  std::optional<BoundReport> report;
  /// Absent when X ∪ Y exceeds the oracle's vertex cap.
  std::optional<EigenCheck> eigen;
  std::vector<CertificateCheck> checks;

  bool passed() const;
};

/// Builds the instance and checks C = 1/√n, the half/half mass split, the
/// FOC residual, ν = 1, objective = √n/2 and the eigen-oracle agreement.
Certificate verify_construction(const FormulaTree& tree, const CertifyTolerances& tol = {},
                         const EnumerationLimits& limits = {},
                         const PowerIterationOptions& power = {});

/// verify_construction() plus the bound report at epsilon.
Certificate certify(const FormulaTree& tree, double epsilon, const CertifyTolerances& tol = {},
                    const EnumerationLimits& limits = {},
                    const PowerIterationOptions& power = {});

}  // namespace qadv
