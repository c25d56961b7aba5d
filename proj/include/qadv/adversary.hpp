#pragma once

#include <istream>
#include <map>
#include <utility>
#include <vector>

#include "qadv/bits.hpp"
#include "qadv/critical.hpp"
#include "qadv/formula.hpp"

namespace qadv {

/// How the stored entries of a WeightMatrix relate to the full matrix Γ.
///   OneSided:  entries hold one orientation of each pair; the full matrix is
///              the stored matrix plus its transpose.
///   Symmetric: entries already hold the full (symmetric) matrix.
enum class Convention { OneSided, Symmetric };

/// Nonnegative weights on input pairs over n variables.
class WeightMatrix {
 public:
  using Entries = std::map<std::pair<Mask, Mask>, double>;

  WeightMatrix(int n, Convention convention);

  /// Throws InvalidWeight on a negative or non-finite weight. Zero weights
  /// are dropped.
  void set(Mask x, Mask y, double weight);

  int n() const { return n_; }
  Convention convention() const { return convention_; }
  const Entries& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Undirected weighted neighbor lists of the full symmetric matrix.
  std::map<Mask, std::vector<std::pair<Mask, double>>> symmetric_adjacency() const;

  /// Every input touched by a stored entry, sorted.
  std::vector<Mask> support() const;

  WeightMatrix scaled(double factor) const;

  static WeightMatrix from_relation(const NeighborRelation& rel);

 private:
  int n_;
  Convention convention_;
  Entries entries_;
};

/// Nonnegative unit vector over inputs. Entries not stored are zero.
class AmplitudeVector {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Throws InvalidWeight unless all entries are finite, nonnegative and the
  /// squared entries sum to 1 within kNormTolerance.
  AmplitudeVector(int n, std::map<Mask, double> entries);

  int n() const { return n_; }
  double operator()(Mask x) const;
  const std::map<Mask, double>& entries() const { return entries_; }

 private:
  int n_;
  std::map<Mask, double> entries_;
};

/// ν_{x,i} for every input touched by Γ, the per-variable maxima over zeros
/// and ones of f, and ν = max_i ν_i^0 ν_i^1. All sums run over the full
/// symmetric matrix.
struct NuStats {
  int n = 0;
  std::map<Mask, std::vector<double>> per_input;  // index i-1 holds ν_{x,i}
  std::vector<double> nu0;                         // index i-1 holds ν_i^0
  std::vector<double> nu1;
  double nu = 0.0;

  double at(Mask x, int var) const;
};

NuStats nu_stats(const WeightMatrix& gamma, const Evaluator& f);
NuStats nu_stats(const NeighborRelation& rel, const Evaluator& f);

/// Throws SupportViolation naming the first stored pair whose endpoints share
/// an f-value, or, for the symmetric convention, the first unmatched entry.
void validate_support(const WeightMatrix& gamma, const Evaluator& f);

/// Σ over stored pairs of Γ_xy α_x α_y for one-sided storage; half the full
/// bilinear form for symmetric storage.
double objective(const WeightMatrix& gamma, const AmplitudeVector& alpha);

struct BoundReport {
  double objective = 0.0;
  double nu = 0.0;
  double epsilon = 0.0;
  double kappa = 0.0;
  double theorem_bound = 0.0;
  double proof_traced_bound = 0.0;
};

/// 2√(ε(1−ε)): the largest overlap between final states of inputs with
/// different values that an ε-error algorithm permits.
double kappa(double epsilon);

/// Arithmetic core of the bound. Throws BadEpsilon unless 0 < ε < 1/2 and
/// DegenerateNu unless ν > 0.
BoundReport make_bound_report(double objective, double nu, double epsilon);

BoundReport bound(const WeightMatrix& gamma, const AmplitudeVector& alpha, double epsilon,
                  const Evaluator& f);

/// Weight file: one `bitstring,bitstring value` per line, `#` comments.
WeightMatrix read_weight_file(std::istream& in, int n, Convention convention);
/// Amplitude file: one `bitstring value` per line, `#` comments.
AmplitudeVector read_amplitude_file(std::istream& in, int n);

}  // namespace qadv
