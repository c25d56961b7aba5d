#include "qadv/adversary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "qadv/errors.hpp"

namespace qadv {

namespace {

std::string pair_name(Mask x, Mask y, int n) {
  return "(" + to_bitstring(x, n) + ", " + to_bitstring(y, n) + ")";
}

}  // namespace

WeightMatrix::WeightMatrix(int n, Convention convention) : n_(n), convention_(convention) {
  if (n < 1 || n > kMaxVariables) throw SizeLimit("weight matrix width out of range");
}

void WeightMatrix::set(Mask x, Mask y, double weight) {
  if (!std::isfinite(weight) || weight < 0.0) {
    throw InvalidWeight("weight on " + pair_name(x, y, n_) + " must be finite and nonnegative");
  }
  const Mask limit = n_ == 64 ? ~Mask{0} : (Mask{1} << n_) - 1;
  if (x > limit || y > limit) throw LengthMismatch("input wider than " + std::to_string(n_));
  if (weight == 0.0) {
    entries_.erase({x, y});
  } else {
    entries_[{x, y}] = weight;
  }
}

std::map<Mask, std::vector<std::pair<Mask, double>>> WeightMatrix::symmetric_adjacency() const {
  std::map<Mask, std::map<Mask, double>> acc;
  for (const auto& [p, w] : entries_) {
    acc[p.first][p.second] += w;
    if (convention_ == Convention::OneSided) acc[p.second][p.first] += w;
  }
  std::map<Mask, std::vector<std::pair<Mask, double>>> adj;
  for (const auto& [x, row] : acc) {
    auto& out = adj[x];
    out.assign(row.begin(), row.end());
  }
  return adj;
}

std::vector<Mask> WeightMatrix::support() const {
  std::set<Mask> s;
  for (const auto& [p, w] : entries_) {
    s.insert(p.first);
    s.insert(p.second);
  }
  return {s.begin(), s.end()};
}

WeightMatrix WeightMatrix::scaled(double factor) const {
  WeightMatrix out(n_, convention_);
  for (const auto& [p, w] : entries_) out.set(p.first, p.second, w * factor);
  return out;
}

WeightMatrix WeightMatrix::from_relation(const NeighborRelation& rel) {
  WeightMatrix out(rel.n, Convention::OneSided);
  for (const auto& [x, y] : rel.pairs) out.set(x, y, 1.0);
  return out;
}

AmplitudeVector::AmplitudeVector(int n, std::map<Mask, double> entries)
    : n_(n), entries_(std::move(entries)) {
  double norm2 = 0.0;
  for (const auto& [x, a] : entries_) {
    if (!std::isfinite(a) || a < 0.0) {
      throw InvalidWeight("amplitude of " + to_bitstring(x, n_) +
                          " must be finite and nonnegative");
    }
    norm2 += a * a;
  }
  if (std::abs(norm2 - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "amplitude vector must have unit norm, squared norm is " << norm2;
    throw InvalidWeight(msg.str());
  }
}

double AmplitudeVector::operator()(Mask x) const {
  const auto it = entries_.find(x);
  return it == entries_.end() ? 0.0 : it->second;
}

double NuStats::at(Mask x, int var) const {
  const auto it = per_input.find(x);
  return it == per_input.end() ? 0.0 : it->second.at(static_cast<std::size_t>(var - 1));
}

NuStats nu_stats(const WeightMatrix& gamma, const Evaluator& f) {
  const int n = gamma.n();
  NuStats s;
  s.n = n;
  s.nu0.assign(static_cast<std::size_t>(n), 0.0);
  s.nu1.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& [x, row] : gamma.symmetric_adjacency()) {
    std::vector<double> per(static_cast<std::size_t>(n), 0.0);
    for (const auto& [y, w] : row) {
      const Mask diff = x ^ y;
      for (int i = 1; i <= n; ++i) {
        if (diff & var_bit(i, n)) per[static_cast<std::size_t>(i - 1)] += w;
      }
    }
    auto& side = f(x) ? s.nu1 : s.nu0;
    for (std::size_t i = 0; i < per.size(); ++i) side[i] = std::max(side[i], per[i]);
    s.per_input.emplace(x, std::move(per));
  }
  for (std::size_t i = 0; i < s.nu0.size(); ++i) s.nu = std::max(s.nu, s.nu0[i] * s.nu1[i]);
  return s;
}

NuStats nu_stats(const NeighborRelation& rel, const Evaluator& f) {
  return nu_stats(WeightMatrix::from_relation(rel), f);
}

void validate_support(const WeightMatrix& gamma, const Evaluator& f) {
  const int n = gamma.n();
  for (const auto& [p, w] : gamma.entries()) {
    if (f(p.first) == f(p.second)) {
      throw SupportViolation("weight on " + pair_name(p.first, p.second, n) +
                             " pairs inputs with equal function value");
    }
    if (gamma.convention() == Convention::Symmetric) {
      const auto it = gamma.entries().find({p.second, p.first});
      if (it == gamma.entries().end() || it->second != w) {
        throw SupportViolation("symmetric weights differ on " +
                               pair_name(p.first, p.second, n) + " and its transpose");
      }
    }
  }
}

double objective(const WeightMatrix& gamma, const AmplitudeVector& alpha) {
  double total = 0.0;
  for (const auto& [p, w] : gamma.entries()) total += w * alpha(p.first) * alpha(p.second);
  return gamma.convention() == Convention::Symmetric ? 0.5 * total : total;
}

double kappa(double epsilon) { return 2.0 * std::sqrt(epsilon * (1.0 - epsilon)); }

BoundReport make_bound_report(double objective_value, double nu, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw BadEpsilon("epsilon must lie in (0, 1/2), got " + std::to_string(epsilon));
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw DegenerateNu("nu must be positive; the weight matrix has no pair differing on a variable");
  }
  BoundReport r;
  r.objective = objective_value;
  r.nu = nu;
  r.epsilon = epsilon;
  r.kappa = kappa(epsilon);
  r.theorem_bound = objective_value * (1.0 - r.kappa) / std::sqrt(nu);
  r.proof_traced_bound = r.theorem_bound / 2.0;
  return r;
}

BoundReport bound(const WeightMatrix& gamma, const AmplitudeVector& alpha, double epsilon,
                  const Evaluator& f) {
  validate_support(gamma, f);
  return make_bound_report(objective(gamma, alpha), nu_stats(gamma, f).nu, epsilon);
}

namespace {

// Yields (key token, value) for each data line, with 1-based line numbers in
// error messages.
template <typename Fn>
void for_each_entry(std::istream& in, Fn&& fn) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string key;
    std::string value_text;
    if (!(fields >> key)) continue;
    std::string extra;
    if (!(fields >> value_text) || (fields >> extra)) {
      throw SyntaxError("line " + std::to_string(lineno) + ": expected '<key> <value>'");
    }
    double value = 0.0;
    const char* first = value_text.data();
    const char* last = first + value_text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
      throw SyntaxError("line " + std::to_string(lineno) + ": bad number '" + value_text + "'");
    }
    fn(lineno, key, value);
  }
}

Mask parse_input(const std::string& token, int n, int lineno) {
  if (static_cast<int>(token.size()) != n) {
    throw LengthMismatch("line " + std::to_string(lineno) + ": '" + token + "' is not " +
                         std::to_string(n) + " bits");
  }
  return parse_bitstring(token);
}

}  // namespace

WeightMatrix read_weight_file(std::istream& in, int n, Convention convention) {
  WeightMatrix gamma(n, convention);
  std::set<std::pair<Mask, Mask>> seen;
  for_each_entry(in, [&](int lineno, const std::string& key, double value) {
    const auto comma = key.find(',');
    if (comma == std::string::npos) {
      throw SyntaxError("line " + std::to_string(lineno) + ": expected 'bits,bits'");
    }
    const Mask x = parse_input(key.substr(0, comma), n, lineno);
    const Mask y = parse_input(key.substr(comma + 1), n, lineno);
    if (!seen.insert({x, y}).second) {
      throw SyntaxError("line " + std::to_string(lineno) + ": duplicate pair " + key);
    }
    gamma.set(x, y, value);
  });
  return gamma;
}

AmplitudeVector read_amplitude_file(std::istream& in, int n) {
  std::map<Mask, double> entries;
  for_each_entry(in, [&](int lineno, const std::string& key, double value) {
    const Mask x = parse_input(key, n, lineno);
    if (!entries.emplace(x, value).second) {
      throw SyntaxError("line " + std::to_string(lineno) + ": duplicate input " + key);
    }
  });
  return AmplitudeVector(n, std::move(entries));
}

}  // namespace qadv
