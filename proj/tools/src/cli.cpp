#include "bandit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "bandit/constrained.hpp"
#include "bandit/errors.hpp"
#include "bandit/evaluator.hpp"
#include "bandit/io.hpp"
#include "bandit/optimizer.hpp"
#include "bandit/oracle.hpp"
#include "bandit/preference.hpp"
#include "bandit/triangularizer.hpp"
#include "json.hpp"

namespace bandit::cli {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

struct Config {
  std::string command;
  std::string input;
  std::string output;
  std::string constraints;
  std::string labeling = "identity";
  std::string start;
  std::string init;
  std::string mode = "optimize";
  std::string method = "value";
  std::optional<double> tol;
  std::size_t cap = kOracleStateCap;
  std::optional<std::size_t> iter_limit;
  std::uint64_t seed = 0;
  bool counts = false;
  bool parallel = false;
  bool two_phase = false;
};

// Usage problems found after argument parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json vec(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

json mat(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

json counts(const OpCounter& c) {
  return json{{"adds", c.adds},   {"subs", c.subs},
              {"muls", c.muls},   {"divs", c.divs},
              {"comparisons", c.comparisons}, {"arithmetic", c.arithmetic()}};
}

json labels_json(const Labeling& l) { return json(std::vector<std::size_t>(l.labels().begin(), l.labels().end())); }

std::size_t first_played(const Instance& instance, const Labeling& l) {
  return instance.state(l.state_with_label(1)).bandit;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

std::vector<std::size_t> parse_list(const std::string& s, const std::string& flag) {
  std::vector<std::size_t> out;
  for (const auto& part : split(s, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != part.size() || part.front() == '-')
      throw UsageError(flag + ": expected comma-separated nonnegative integers, got '" + s + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

Labeling choose_labeling(const Config& cfg, const Instance& instance, OpCounter& scratch) {
  const std::size_t n = instance.num_states();
  if (cfg.labeling == "identity") return Labeling::identity(n);
  if (cfg.labeling == "optimizer") return optimize(instance, scratch).labeling;
  if (cfg.labeling == "random") {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), rng);
    return Labeling::from_order(order);
  }
  auto labels = parse_list(cfg.labeling, "--labeling");
  if (labels.size() != n)
    throw UsageError("--labeling: expected " + std::to_string(n) + " labels, got " + std::to_string(labels.size()));
  try {
    return Labeling(std::move(labels));
  } catch (const InvalidInput& e) {
    throw UsageError(std::string("--labeling: ") + e.what());
  }
}

MultiState choose_start(const Config& cfg, const InstanceDocument& doc) {
  const Instance& inst = doc.instance;
  if (!cfg.start.empty()) {
    MultiState s = parse_list(cfg.start, "--start");
    if (s.size() != inst.num_bandits())
      throw UsageError("--start: expected " + std::to_string(inst.num_bandits()) + " states");
    for (std::size_t k = 0; k < s.size(); ++k)
      if (s[k] >= inst.chain(k).size()) throw UsageError("--start: state out of range for bandit " + std::to_string(k));
    return s;
  }
  if (doc.start) return *doc.start;
  return MultiState(inst.num_bandits(), 0);
}

json validation_json(const ValidationReport& report, const Instance& instance) {
  json chains = json::array();
  for (std::size_t k = 0; k < report.chains.size(); ++k) {
    const auto& c = report.chains[k];
    chains.push_back({{"bandit", k},
                      {"size", instance.chain(k).size()},
                      {"conditions",
                       {{"nonnegative_rates", c.nonnegative_rates},
                        {"transient", c.transient},
                        {"substochastic", c.substochastic},
                        {"nonpositive_rewards", c.nonpositive_rewards},
                        {"nonnegative_rewards", c.nonnegative_rewards}}}});
  }
  json required = json::array();
  for (auto c : required_conditions(report.declared)) required.push_back(std::string(to_string(c)));
  json out{{"ok", report.ok()},
           {"hypothesis", std::string(to_string(report.declared))},
           {"required", required},
           {"chains", chains},
           {"violation", nullptr}};
  if (report.violation) {
    const auto& v = *report.violation;
    out["violation"] = {{"condition", std::string(to_string(v.condition))},
                        {"bandit", v.bandit},
                        {"state", v.local_state ? json(*v.local_state) : json(nullptr)},
                        {"detail", v.detail}};
  }
  return out;
}

struct Outcome {
  json body;
  int code = kExitOk;
};

Outcome cmd_validate(const Config& cfg, const InstanceDocument& doc) {
  const auto report = validate(doc.instance, cfg.tol.value_or(kTransienceTolerance));
  return {validation_json(report, doc.instance), report.ok() ? kExitOk : kExitFailure};
}

Outcome cmd_triangularize(const Config& cfg, const InstanceDocument& doc) {
  const Instance& inst = doc.instance;
  OpCounter scratch;
  const Labeling labeling = choose_labeling(cfg, inst, scratch);
  json bandits = json::array();
  OpCounter total;
  std::uint64_t expected = 0;
  for (std::size_t k = 0; k < inst.num_bandits(); ++k) {
    const auto order = local_order(inst, labeling, k);
    std::vector<std::size_t> labels(inst.chain(k).size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) labels[order[pos]] = pos + 1;
    OpCounter ops;
    const Tableau t = triangularize(inst.chain(k), labels, ops);
    const FinalizedBandit fb = finalized_data(t);
    total += ops;
    expected += triangularizer_operation_count(inst.chain(k).size());
    json b{{"bandit", k},
           {"r_tilde", vec(fb.rewards(0))},
           {"q_tilde", mat(fb.q_tilde)},
           {"hypothesis_preserved", hypothesis_preserved(inst.chain(k), fb, inst.hypothesis())}};
    if (cfg.counts) b["counts"] = counts(ops);
    bandits.push_back(std::move(b));
  }
  json body{{"labels", labels_json(labeling)}, {"bandits", bandits}};
  body["counts"] = {{"total", counts(total)}, {"formula", expected}};
  return {body, kExitOk};
}

Outcome cmd_rank(const Config&, const InstanceDocument& doc) {
  json states = json::array();
  for (const auto& rs : rank_states(doc.instance))
    states.push_back({{"bandit", rs.state.bandit},
                      {"local", rs.state.local},
                      {"global", rs.state.global},
                      {"r", num(rs.stats.r)},
                      {"a", num(rs.stats.amplification())},
                      {"category", static_cast<int>(rs.stats.category)},
                      {"rho", num(rs.stats.rho)}});
  return {json{{"states", states}}, kExitOk};
}

std::vector<Vector> parse_marginals(const std::string& text, const Instance& inst) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw UsageError("--init: expected a JSON array of per-bandit probability vectors");
  }
  if (!j.is_array() || j.size() != inst.num_bandits()) throw UsageError("--init: expected one vector per bandit");
  std::vector<Vector> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_array()) throw UsageError("--init: entry " + std::to_string(k) + " is not an array");
    Vector v(static_cast<Eigen::Index>(j[k].size()));
    for (std::size_t i = 0; i < j[k].size(); ++i) {
      if (!j[k][i].is_number()) throw UsageError("--init: non-numeric probability");
      v(static_cast<Eigen::Index>(i)) = j[k][i].get<double>();
    }
    out.push_back(std::move(v));
  }
  return out;
}

Outcome cmd_evaluate(const Config& cfg, const InstanceDocument& doc) {
  const Instance& inst = doc.instance;
  require_valid(inst);
  OpCounter scratch;
  const Labeling labeling = choose_labeling(cfg, inst, scratch);
  OpCounter tri;
  const FinalizedModel fm = finalize(inst, labeling, tri, cfg.parallel);
  OpCounter ops;
  json body{{"labels", labels_json(labeling)}};
  EvalResult res;
  if (!cfg.init.empty()) {
    res = evaluate_distribution(inst, labeling, parse_marginals(cfg.init, inst), fm, ops);
    body["init"] = json::parse(cfg.init);
  } else {
    const MultiState start = choose_start(cfg, doc);
    res = evaluate(inst, labeling, start, fm, ops);
    body["start"] = start;
  }
  body["value"] = num(res.value);
  body["z"] = vec(res.z);
  body["counts"] = {{"evaluator", counts(res.ops)},
                    {"extra", counts(res.extra_ops)},
                    {"triangularizer", counts(tri)},
                    {"formula", evaluator_operation_count(inst)}};
  return {body, kExitOk};
}

Outcome cmd_optimize(const Config& cfg, const InstanceDocument& doc) {
  const Instance& inst = doc.instance;
  require_valid(inst);
  OpCounter total;
  const OptimalLabeling best =
      (cfg.two_phase || cfg.parallel) ? optimize_two_phase(inst, total, cfg.parallel) : optimize(inst, total);
  json rho = json::array();
  for (const auto& r : best.rho_final) rho.push_back(r ? num(*r) : json(nullptr));
  const MultiState start = choose_start(cfg, doc);
  OpCounter eval_ops;
  const FinalizedModel fm = finalize(inst, best.labeling, eval_ops);
  const EvalResult res = evaluate(inst, best.labeling, start, fm, eval_ops);
  json body{{"labels", labels_json(best.labeling)},
            {"order", std::vector<std::size_t>(best.labeling.order().begin(), best.labeling.order().end())},
            {"stop_label", best.stop_label},
            {"rho", rho},
            {"start", start},
            {"value", num(res.value)},
            {"algorithm", (cfg.two_phase || cfg.parallel) ? "two_phase" : "interleaved"}};
  body["counts"] = {{"triangularizer", counts(best.counts.triangularizer)},
                    {"selection", counts(best.counts.selection)},
                    {"arithmetic_bound", optimizer_arithmetic_bound(inst)},
                    {"comparison_bound", optimizer_comparison_bound(inst)}};
  return {body, kExitOk};
}

ConstrainedProgram load_program(const Config& cfg, const InstanceDocument& doc) {
  std::optional<ConstraintSpec> spec = doc.constraints;
  if (!cfg.constraints.empty()) spec = read_constraints(cfg.constraints, doc.instance);
  if (!spec) throw UsageError("solve needs constraints: pass --constraints or add a \"constraints\" object");
  MultiState start = choose_start(cfg, doc);
  if (cfg.start.empty() && spec->start) start = *spec->start;
  return ConstrainedProgram{doc.instance, spec->rewards, spec->bounds, start};
}

json log_json(const std::vector<IterationLog>& log) {
  json out = json::array();
  for (const auto& e : log) {
    json y = json::array();
    for (double v : e.multipliers) y.push_back(num(v));
    out.push_back({{"phase", e.phase},
                   {"objective_type", e.objective_type},
                   {"multipliers", y},
                   {"priced_value", num(e.priced_value)},
                   {"entering", e.entering.empty() ? json(nullptr) : json(e.entering)},
                   {"leaving", e.leaving.empty() ? json(nullptr) : json(e.leaving)}});
  }
  return out;
}

Outcome cmd_solve(const Config& cfg, const InstanceDocument& doc) {
  const ConstrainedProgram program = load_program(cfg, doc);
  SolveOptions options;
  options.iteration_limit = cfg.iter_limit;
  if (cfg.tol) options.optimality_tolerance = *cfg.tol;
  const SolveResult result = solve(program, options);
  if (const auto* inf = std::get_if<Infeasible>(&result)) {
    json body{{"status", "infeasible"},
              {"phase", inf->phase},
              {"constraint", inf->constraint},
              {"best_value", num(inf->best_value)},
              {"bound", num(inf->bound)},
              {"iterations", log_json(inf->log)},
              {"counts", counts(inf->ops)}};
    return {body, kExitFailure};
  }
  const auto& sol = std::get<MixedSolution>(result);
  json support = json::array();
  for (const auto& e : sol.support)
    support.push_back({{"labels", labels_json(e.labeling)},
                       {"first_played", first_played(program.instance, e.labeling)},
                       {"weight", num(e.weight)},
                       {"values", vec(e.values)}});
  json body{{"status", "optimal"},
            {"objective", num(sol.objective)},
            {"support", support},
            {"multipliers", vec(sol.multipliers)},
            {"achieved", vec(sol.achieved)},
            {"certificate", num(sol.certificate)},
            {"start", program.start},
            {"iterations", log_json(sol.log)},
            {"counts", counts(sol.ops)}};
  return {body, kExitOk};
}

Outcome cmd_oracle(const Config& cfg, const InstanceDocument& doc) {
  const Instance& inst = doc.instance;
  require_valid(inst);
  json body{{"mode", cfg.mode}};
  if (cfg.mode == "solve") {
    const ConstrainedProgram program = load_program(cfg, doc);
    const auto res = oracle_constrained(program);
    body["status"] = res.feasible ? "optimal" : "infeasible";
    body["columns"] = res.columns;
    if (res.feasible) {
      body["objective"] = num(res.objective);
      json support = json::array();
      for (const auto& [l, w] : res.support)
        support.push_back({{"labels", labels_json(l)}, {"first_played", first_played(inst, l)}, {"weight", num(w)}});
      body["support"] = support;
    }
    return {body, res.feasible ? kExitOk : kExitFailure};
  }
  const ProductModel model(inst, cfg.cap);
  const MultiState start = choose_start(cfg, doc);
  body["start"] = start;
  body["states"] = model.size();
  const auto s = static_cast<Eigen::Index>(model.space().index_of(start));
  if (cfg.mode == "evaluate") {
    OpCounter scratch;
    const Labeling labeling = choose_labeling(cfg, inst, scratch);
    const Vector v = oracle_values(model, model.priority_policy(labeling));
    body["labels"] = labels_json(labeling);
    body["value"] = num(v(s));
    body["values"] = vec(v);
    return {body, kExitOk};
  }
  if (cfg.mode != "optimize") throw UsageError("--mode: expected evaluate, optimize or solve");
  const auto method = cfg.method == "policy" ? OracleMethod::PolicyIteration : OracleMethod::ValueIteration;
  if (cfg.method != "policy" && cfg.method != "value") throw UsageError("--method: expected value or policy");
  const OracleOptimum opt = oracle_optimal(model, method);
  body["value"] = num(opt.values(s));
  body["values"] = vec(opt.values);
  body["policy"] = opt.policy;
  body["iterations"] = opt.iterations;
  body["method"] = cfg.method;
  return {body, kExitOk};
}

void emit(const Config& cfg, const json& doc, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (cfg.output.empty() || cfg.output == "-") {
    out << text;
    return;
  }
  std::ofstream file(cfg.output, std::ios::binary);
  if (!file || !(file << text)) throw InvalidInput("cannot write " + cfg.output);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Priority-rule solver for multi-armed bandits", "bandit-forge"};
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();

  struct Spec {
    const char* name;
    const char* help;
  };
  const Spec specs[] = {
      {"validate", "check the declared hypothesis on every chain"},
      {"triangularize", "finalized data for a labeling"},
      {"rank", "categories and ratios under the original data"},
      {"evaluate", "expected utility of a priority rule"},
      {"optimize", "optimal labeling"},
      {"solve", "constrained problem by column generation"},
      {"oracle", "brute-force product-space reference"},
  };
  for (const auto& spec : specs) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    const std::string name = spec.name;
    sub->add_option("input", cfg.input, "instance JSON file")->required();
    sub->add_option("-o,--output", cfg.output, "write JSON here instead of stdout");
    sub->add_option("--tol", cfg.tol, "tolerance override")->check(CLI::PositiveNumber);
    sub->add_flag("--counts", cfg.counts, "include per-bandit operation counts");
    sub->add_flag("--parallel", cfg.parallel, "process bandits on worker threads");
    if (name == "triangularize" || name == "evaluate" || name == "oracle") {
      sub->add_option("--labeling", cfg.labeling, "identity | optimizer | random | comma-separated labels");
      sub->add_option("--seed", cfg.seed, "seed for --labeling random");
    }
    if (name == "evaluate" || name == "optimize" || name == "solve" || name == "oracle")
      sub->add_option("--start", cfg.start, "comma-separated local states, one per bandit");
    if (name == "evaluate") sub->add_option("--init", cfg.init, "product-form start as a JSON array of marginals");
    if (name == "optimize") sub->add_flag("--two-phase", cfg.two_phase, "optimize bandits separately, then merge");
    if (name == "solve" || name == "oracle") {
      sub->add_option("--constraints", cfg.constraints, "constraints JSON file");
      sub->add_option("--iter-limit", cfg.iter_limit, "simplex iteration limit")->check(CLI::PositiveNumber);
    }
    if (name == "oracle") {
      sub->add_option("--cap", cfg.cap, "largest product space to enumerate")->check(CLI::PositiveNumber);
      sub->add_option("--mode", cfg.mode, "evaluate | optimize | solve");
      sub->add_option("--method", cfg.method, "value | policy");
    }
    sub->callback([&cfg, name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const InstanceDocument doc = read_instance(cfg.input);
    Outcome outcome;
    if (cfg.command == "validate") outcome = cmd_validate(cfg, doc);
    else if (cfg.command == "triangularize") outcome = cmd_triangularize(cfg, doc);
    else if (cfg.command == "rank") outcome = cmd_rank(cfg, doc);
    else if (cfg.command == "evaluate") outcome = cmd_evaluate(cfg, doc);
    else if (cfg.command == "optimize") outcome = cmd_optimize(cfg, doc);
    else if (cfg.command == "solve") outcome = cmd_solve(cfg, doc);
    else outcome = cmd_oracle(cfg, doc);
    outcome.body["schema"] = kSchemaVersion;
    outcome.body["command"] = cfg.command;
    emit(cfg, outcome.body, out);
    return outcome.code;
  } catch (const HypothesisViolation& e) {
    const auto report = validate(read_instance(cfg.input).instance);
    json body = validation_json(report, read_instance(cfg.input).instance);
    body["schema"] = kSchemaVersion;
    body["command"] = cfg.command;
    body["error"] = e.what();
    emit(cfg, body, out);
    return kExitFailure;
  } catch (const IterationLimit& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RoadblockError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace bandit::cli
