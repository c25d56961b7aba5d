#include "qadv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qadv/adversary.hpp"
#include "qadv/critical.hpp"
#include "qadv/errors.hpp"
#include "qadv/formula.hpp"
#include "qadv/readonce.hpp"
#include "qadv/simulator.hpp"

namespace qadv::cli {

namespace {

using nlohmann::json;

constexpr int kMaxAllInputsWidth = 8;

struct Common {
  bool table = false;
  std::optional<long long> seed;  // reserved
  std::size_t cap = EnumerationLimits{}.max_critical_inputs;
  CertifyTolerances tol;
  PowerIterationOptions power;
};

struct Options {
  Common common;
  std::string formula;
  bool counts = false;
  double epsilon = 0.0;
  std::string gamma_file;
  std::string alpha_file;
  std::string convention = "one-sided";
  std::string algorithm;
  std::optional<int> n;
  std::optional<int> iters;
  std::optional<double> sim_epsilon;
  std::string sim_formula;
  bool all_inputs = false;
  bool emit_gram = false;
};

// Raised when a computed report fails one of its own assertions.
struct AssertionFailure {
  json report;
  std::string message;
};

json bits_array(std::span<const Mask> xs, int n) {
  json out = json::array();
  for (Mask x : xs) out.push_back(to_bitstring(x, n));
  return out;
}

json formula_fields(const NormalizedFormula& nf, const std::string& text) {
  json j;
  j["input_formula"] = text;
  j["formula"] = serialize(nf.tree);
  j["n"] = nf.n;
  j["negated"] = nf.negated;
  json vm = json::object();
  for (const auto& [orig, norm] : nf.variable_map) vm["x" + std::to_string(orig)] = norm;
  j["variable_map"] = vm;
  return j;
}

json header(const std::string& command, const std::vector<std::string>& args) {
  json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["arguments"] = args;
  return j;
}

void merge(json& into, const json& from) {
  for (const auto& [k, v] : from.items()) into[k] = v;
}

json checks_json(const std::vector<CertificateCheck>& checks) {
  json out = json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name},
                   {"value", c.value},
                   {"target", c.target},
                   {"tolerance", c.tolerance},
                   {"passed", c.passed}});
  }
  return out;
}

json bound_json(const BoundReport& r) {
  return {{"objective", r.objective},
          {"nu", r.nu},
          {"epsilon", r.epsilon},
          {"kappa", r.kappa},
          {"theorem_bound", r.theorem_bound},
          {"proof_traced_bound", r.proof_traced_bound}};
}

json certificate_json(const Certificate& c) {
  json j;
  j["n"] = c.n;
  j["counts"] = {{"zeros", c.zeros}, {"ones", c.ones}, {"relation", c.relation_size}};
  j["C"] = c.C;
  j["C_target"] = 1.0 / std::sqrt(static_cast<double>(c.n));
  j["foc_residual"] = c.foc_residual;
  j["mass_zeros"] = c.mass_zeros;
  j["mass_ones"] = c.mass_ones;
  j["nu"] = c.nu;
  j["objective"] = c.objective;
  j["connected"] = c.connected;
  if (c.eigen) {
    j["eigen"] = {{"lambda_max", c.eigen->lambda_max},
                  {"max_vector_deviation", c.eigen->max_vector_deviation},
                  {"iterations", c.eigen->iterations}};
  } else {
    j["eigen"] = nullptr;
  }
  j["checks"] = checks_json(c.checks);
  j["passed"] = c.passed();
  return j;
}

bool all_finite(const json& j) {
  if (j.is_number_float()) return std::isfinite(j.get<double>());
  if (j.is_structured()) {
    for (const auto& v : j) {
      if (!all_finite(v)) return false;
    }
  }
  return true;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) return "[" + std::to_string(v.size()) + " items]";
  if (v.is_object()) return "{" + std::to_string(v.size()) + " fields}";
  return v.dump();
}

void render_table(const json& report, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& [k, v] : report.items()) width = std::max(width, k.size());
  for (const auto& [k, v] : report.items()) {
    out << k << std::string(width - k.size() + 2, ' ') << scalar_text(v) << '\n';
    if (v.is_object() && !v.empty() && k != "variable_map") {
      for (const auto& [k2, v2] : v.items()) out << "  " << k2 << ": " << scalar_text(v2) << '\n';
    }
  }
}

// ---- subcommands ------------------------------------------------------------

json run_critical(const Options& o, json report) {
  const NormalizedFormula nf = parse_normalized(o.formula);
  merge(report, formula_fields(nf, o.formula));
  const CriticalInputSet cs = critical_inputs(nf.tree, {o.common.cap});
  const NeighborRelation rel = neighbor_relation(nf.tree, cs);
  const int n = nf.n;
  report["counts"] = {{"zeros", cs.zeros.size()},
                      {"ones", cs.ones.size()},
                      {"relation", rel.pairs.size()}};
  report["connected"] = is_connected(cs, rel);
  report["typed_side"] = cs.typed_side == TypedSide::Zeros  ? "zeros"
                         : cs.typed_side == TypedSide::Ones ? "ones"
                                                            : "none";
  if (!o.counts) {
    report["zeros"] = bits_array(cs.zeros, n);
    report["ones"] = bits_array(cs.ones, n);
    json type = json::object();
    for (const auto& [x, t] : cs.type) type[to_bitstring(x, n)] = t;
    report["type"] = type;
    json relation = json::array();
    for (const auto& [x, y] : rel.pairs) {
      relation.push_back({{"zero", to_bitstring(x, n)},
                          {"one", to_bitstring(y, n)},
                          {"flip", rel.flip.at({x, y})}});
    }
    report["relation"] = relation;
  }
  return report;
}

WeightMatrix read_weights(const std::string& path, int n, Convention conv) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open weight file '" + path + "'");
  return read_weight_file(in, n, conv);
}

AmplitudeVector read_amplitudes(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open amplitude file '" + path + "'");
  return read_amplitude_file(in, n);
}

json run_bound(const Options& o, json report) {
  const NormalizedFormula nf = parse_normalized(o.formula);
  merge(report, formula_fields(nf, o.formula));
  if (o.gamma_file.empty() != o.alpha_file.empty()) {
    throw std::invalid_argument("--gamma and --alpha must be given together");
  }
  if (!o.gamma_file.empty()) {
    const Convention conv =
        o.convention == "symmetric" ? Convention::Symmetric : Convention::OneSided;
    const WeightMatrix gamma = read_weights(o.gamma_file, nf.n, conv);
    const AmplitudeVector alpha = read_amplitudes(o.alpha_file, nf.n);
    const Evaluator monotone = make_evaluator(nf.tree, nf.n);
    const Evaluator f = [&](Mask x) { return monotone(nf.apply_negations(x)); };
    const BoundReport r = bound(gamma, alpha, o.epsilon, f);
    report["source"] = "files";
    report["gamma_convention"] = o.convention;
    report["entries"] = gamma.entries().size();
    merge(report, bound_json(r));
    report["passed"] = true;
    return report;
  }
  const Certificate cert = certify(nf.tree, o.epsilon, o.common.tol, {o.common.cap}, o.common.power);
  report["source"] = "read-once";
  report["gamma_convention"] = "one-sided";
  merge(report, certificate_json(cert));
  merge(report, bound_json(*cert.report));
  if (!cert.passed()) throw AssertionFailure{report, "certificate checks failed"};
  return report;
}

json run_verify_foc(const Options& o, json report) {
  const NormalizedFormula nf = parse_normalized(o.formula);
  merge(report, formula_fields(nf, o.formula));
  const Certificate cert = verify_construction(nf.tree, o.common.tol, {o.common.cap}, o.common.power);
  merge(report, certificate_json(cert));
  report["agreement"] = cert.passed();
  if (!cert.passed()) throw AssertionFailure{report, "FOC verification failed"};
  return report;
}

json run_oracle_check(const Options& o, json report) {
  const NormalizedFormula nf = parse_normalized(o.formula);
  merge(report, formula_fields(nf, o.formula));
  const ReadOnceInstance inst = build_instance(nf.tree, {o.common.cap});
  const EigenResult eig = principal_eigen_oracle(inst.relation, o.common.power);
  const bool connected = is_connected(inst.critical, inst.relation);
  const double target = 1.0 / inst.assignment.C;
  double deviation = 0.0;
  for (const auto& [w, v] : eig.vector) {
    deviation = std::max(deviation, std::abs(v - inst.assignment.alpha(w)));
  }
  const auto& tol = o.common.tol;
  const bool eigenvalue_ok = connected
                                 ? std::abs(eig.lambda_max - target) <= tol.eigenvalue
                                 : eig.lambda_max >= target - tol.eigenvalue;
  const bool vector_ok = !connected || deviation <= tol.eigenvector;
  report["lambda_max"] = eig.lambda_max;
  report["lambda_target"] = target;
  report["eigenvalue_error"] = std::abs(eig.lambda_max - target);
  report["eigenvector_deviation"] = deviation;
  report["eigenvector_compared"] = connected;
  report["iterations"] = eig.iterations;
  report["connected"] = connected;
  report["agreement"] = eigenvalue_ok && vector_ok;
  report["passed"] = eigenvalue_ok && vector_ok;
  if (!(eigenvalue_ok && vector_ok)) throw AssertionFailure{report, "eigen-oracle disagreement"};
  return report;
}

// Γ, α and target for the simulate subcommand.
struct Target {
  std::string description;
  int n = 0;
  WeightMatrix gamma{1, Convention::OneSided};
  AmplitudeVector alpha{1, {{0, 1.0}}};
  Evaluator f;
  std::vector<Mask> critical;
};

Target xor_target() {
  Target t;
  t.description = "x1 ^ x2";
  t.n = 2;
  t.gamma = WeightMatrix(2, Convention::OneSided);
  for (Mask x : {Mask{0b00}, Mask{0b11}}) {
    for (Mask y : {Mask{0b01}, Mask{0b10}}) t.gamma.set(x, y, 1.0);
  }
  t.alpha = AmplitudeVector(2, {{0b00, 0.5}, {0b01, 0.5}, {0b10, 0.5}, {0b11, 0.5}});
  t.f = [](Mask x) { return std::popcount(x) == 1; };
  t.critical = {0b00, 0b01, 0b10, 0b11};
  return t;
}

Target formula_target(const std::string& text, const Common& common) {
  const NormalizedFormula nf = parse_normalized(text);
  const ReadOnceInstance inst = build_instance(nf.tree, {common.cap});
  Target t;
  t.description = serialize(nf.tree);
  t.n = nf.n;
  t.gamma = inst.gamma;
  t.alpha = inst.alpha;
  t.f = make_evaluator(nf.tree, nf.n);
  t.critical = inst.critical.zeros;
  t.critical.insert(t.critical.end(), inst.critical.ones.begin(), inst.critical.ones.end());
  std::sort(t.critical.begin(), t.critical.end());
  return t;
}

std::string or_formula(int n) {
  std::string s;
  for (int i = 1; i <= n; ++i) s += (i > 1 ? " | x" : "x") + std::to_string(i);
  return s;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json run_simulate(const Options& o, json report) {
  if (o.algorithm != "xor2" && o.algorithm != "grover-or" && o.algorithm != "identity") {
    throw std::invalid_argument("unknown algorithm '" + o.algorithm +
                                "'; choose xor2, grover-or or identity");
  }
  Target target;
  if (!o.sim_formula.empty()) {
    target = formula_target(o.sim_formula, o.common);
  } else if (o.algorithm == "xor2") {
    target = xor_target();
  } else {
    if (!o.n) throw std::invalid_argument("--n is required without --formula");
    target = formula_target(or_formula(*o.n), o.common);
  }
  const int n = o.n.value_or(target.n);
  if (n != target.n) {
    throw DimensionMismatch("--n " + std::to_string(n) + " does not match the formula's " +
                            std::to_string(target.n) + " variables");
  }

  std::vector<Mask> tracked = target.critical;
  if (o.all_inputs) {
    if (n > kMaxAllInputsWidth) {
      throw SizeLimit("--all-inputs is limited to n <= " + std::to_string(kMaxAllInputsWidth));
    }
    tracked.clear();
    for (Mask x = 0; x < (Mask{1} << n); ++x) tracked.push_back(x);
  }

  const Simulation sim(builtin(o.algorithm, n, o.iters), tracked);
  const QueryAlgorithm& alg = sim.algorithm();
  const int t = alg.queries();
  const ProgressTrace trace = progress_trace(sim, target.gamma, target.alpha, target.f);
  const double sqrt_nu = std::sqrt(trace.nu);
  const double measured = error_probability(alg, target.f, sim.inputs());

  report["algorithm"] = alg.name();
  report["n"] = n;
  report["queries"] = t;
  report["aux_dim"] = alg.aux_dim();
  report["workspace_dim"] = alg.workspace_dim();
  report["target"] = target.description;
  report["tracked_inputs"] = bits_array(sim.inputs(), n);
  report["all_inputs"] = o.all_inputs;
  report["nu"] = trace.nu;
  report["S"] = trace.S;
  report["decrements"] = trace.decrements;
  report["per_query_decomposition"] = trace.per_query_decomposition;
  report["min_gram_eigenvalue"] = trace.min_gram_eigenvalue;
  report["max_norm_error"] = trace.max_norm_error;
  report["measured_error"] = measured;
  if (o.emit_gram) {
    json g = json::array();
    for (const auto& m : trace.gram) g.push_back(matrix_json(m));
    report["gram"] = g;
  }

  std::vector<std::string> failures;
  if (trace.max_norm_error > 1e-10) failures.push_back("norm preservation");
  if (trace.min_gram_eigenvalue < -1e-9) failures.push_back("gram positive semidefinite");

  json table = json::array();
  json decomposition = json::array();
  for (int l = 1; l <= t; ++l) {
    const double d = trace.decrements[static_cast<std::size_t>(l - 1)];
    const bool ok = d <= 2.0 * sqrt_nu + 1e-9;
    if (!ok) failures.push_back("decrement at step " + std::to_string(l));
    table.push_back({{"step", l}, {"decrement", d}, {"bound", 2.0 * sqrt_nu}, {"ok", ok}});
    const DecompositionCheck c =
        query_decomposition_check(sim, target.gamma, target.alpha, target.f, l);
    if (!c.within_bound) failures.push_back("decomposition at step " + std::to_string(l));
    if (!c.decrement_traced) failures.push_back("decrement trace at step " + std::to_string(l));
    decomposition.push_back({{"step", c.step},
                             {"pre_query_sum", c.pre_query_sum},
                             {"post_query_sum", c.post_query_sum},
                             {"sqrt_nu", c.sqrt_nu},
                             {"decrement", c.decrement},
                             {"within_bound", c.within_bound},
                             {"decrement_traced", c.decrement_traced}});
  }
  report["decrement_table"] = table;
  report["decomposition"] = decomposition;

  // Final-state checks that hold whenever the algorithm computes the target.
  const double s0 = trace.S.front();
  const double st = trace.S.back();
  json prop3 = {{"measured_error", measured}, {"S_0", s0}, {"S_t", st}};
  if (measured < 0.5) {
    const double floor = s0 * (1.0 - kappa(measured)) - 1e-8;
    const bool ok = s0 - st >= floor;
    prop3["applicable"] = true;
    prop3["required_drop"] = s0 * (1.0 - kappa(measured));
    prop3["passed"] = ok;
    if (!ok) failures.push_back("final progress");
  } else {
    prop3["applicable"] = false;
  }
  report["progress_drop"] = prop3;

  const double eps = o.sim_epsilon.value_or(measured);
  json overlap = {{"epsilon", eps}};
  if (eps >= 0.0 && eps <= 0.5) {
    const OverlapVerdict v = overlap_check(sim.inputs(), sim.states_at(t), target.f, eps);
    const bool asserted = eps + 1e-12 >= measured;
    overlap["threshold"] = v.threshold;
    overlap["max_cross_overlap"] = v.max_cross_overlap;
    overlap["worst_zero"] = to_bitstring(v.worst_zero, n);
    overlap["worst_one"] = to_bitstring(v.worst_one, n);
    overlap["passed"] = v.passed;
    overlap["asserted"] = asserted;
    if (asserted && !v.passed) failures.push_back("final overlap");
  } else {
    overlap["asserted"] = false;
  }
  report["overlap"] = overlap;

  if (eps > 0.0 && eps < 0.5 && eps + 1e-12 >= measured && trace.nu > 0.0) {
    const BoundReport r = make_bound_report(objective(target.gamma, target.alpha), trace.nu, eps);
    const bool ok = static_cast<double>(t) + 1e-9 >= r.theorem_bound;
    json b = bound_json(r);
    b["queries"] = t;
    b["holds"] = ok;
    report["bound"] = b;
    if (!ok) failures.push_back("query lower bound");
  } else {
    report["bound"] = nullptr;
  }

  report["failures"] = failures;
  report["passed"] = failures.empty();
  if (!failures.empty()) throw AssertionFailure{report, "simulation assertions failed"};
  return report;
}

void add_common(CLI::App* sub, Common& c, bool tolerances) {
  sub->add_flag("--table", c.table, "Print a human-readable summary instead of JSON");
  sub->add_option("--seed", c.seed, "Reserved for randomized extensions; ignored");
  sub->add_option("--cap", c.cap, "Maximum number of critical inputs")
      ->check(CLI::PositiveNumber);
  if (!tolerances) return;
  sub->add_option("--construction-tol", c.tol.construction, "Construction tolerance")
      ->capture_default_str();
  sub->add_option("--foc-tol", c.tol.foc, "FOC residual tolerance")->capture_default_str();
  sub->add_option("--objective-tol", c.tol.objective, "Objective tolerance")
      ->capture_default_str();
  sub->add_option("--eigenvalue-tol", c.tol.eigenvalue, "Eigenvalue agreement tolerance")
      ->capture_default_str();
  sub->add_option("--eigenvector-tol", c.tol.eigenvector, "Eigenvector agreement tolerance")
      ->capture_default_str();
  sub->add_option("--max-iterations", c.power.max_iterations, "Power iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversary lower bounds for read-once formulas", "qadv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto* critical = app.add_subcommand("critical", "Enumerate critical inputs and the relation R");
  critical->add_option("formula", o.formula, "Read-once formula")->required();
  critical->add_flag("--counts", o.counts, "Print sizes only");
  add_common(critical, o.common, false);

  auto* bound_cmd = app.add_subcommand("bound", "Evaluate the adversary bound");
  bound_cmd->add_option("formula", o.formula, "Read-once formula")->required();
  bound_cmd->add_option("--epsilon", o.epsilon, "Error probability in (0, 1/2)")->required();
  bound_cmd->add_option("--gamma", o.gamma_file, "Weight file");
  bound_cmd->add_option("--alpha", o.alpha_file, "Amplitude file");
  bound_cmd->add_option("--gamma-convention", o.convention, "How the weight file is stored")
      ->check(CLI::IsMember({"one-sided", "symmetric"}))
      ->capture_default_str();
  add_common(bound_cmd, o.common, true);

  auto* foc = app.add_subcommand("verify-foc", "Check the constructed amplitudes");
  foc->add_option("formula", o.formula, "Read-once formula")->required();
  add_common(foc, o.common, true);

  auto* oracle = app.add_subcommand("oracle-check", "Compare against power iteration");
  oracle->add_option("formula", o.formula, "Read-once formula")->required();
  add_common(oracle, o.common, true);

  auto* simulate = app.add_subcommand("simulate", "Run a built-in query algorithm");
  simulate->add_option("algorithm", o.algorithm, "xor2, grover-or or identity")->required();
  simulate->add_option("--n", o.n, "Number of variables")->check(CLI::PositiveNumber);
  simulate->add_option("--iters", o.iters, "Iterations (grover-or) or steps (identity)")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--formula", o.sim_formula, "Target read-once formula");
  simulate->add_option("--epsilon", o.sim_epsilon, "Error level for the overlap check");
  simulate->add_flag("--all-inputs", o.all_inputs, "Track all 2^n inputs (n <= 8)");
  simulate->add_flag("--gram", o.emit_gram, "Include the Gram matrices in the report");
  add_common(simulate, o.common, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run 'qadv --help' for usage\n";
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  using Runner = std::function<json(const Options&, json)>;
  const Runner runner = name == "critical"       ? Runner(run_critical)
                        : name == "bound"        ? Runner(run_bound)
                        : name == "verify-foc"   ? Runner(run_verify_foc)
                        : name == "oracle-check" ? Runner(run_oracle_check)
                                                 : Runner(run_simulate);

  auto emit = [&](const json& report) {
    if (!all_finite(report)) {
      err << "internal error: report contains a non-finite value\n";
      return false;
    }
    if (o.common.table) {
      render_table(report, out);
    } else {
      out << report.dump(2) << '\n';
    }
    return true;
  };

  try {
    const json report = runner(o, header(name, args));
    return emit(report) ? kExitOk : kExitAssertion;
  } catch (const AssertionFailure& f) {
    emit(f.report);
    err << "assertion failed: " << f.message << '\n';
    return kExitAssertion;
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace qadv::cli
