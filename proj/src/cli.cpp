#include "qswitch/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qswitch/analytics.hpp"
#include "qswitch/config.hpp"
#include "qswitch/experiments.hpp"
#include "qswitch/optimize.hpp"
#include "qswitch/simulator.hpp"

namespace qswitch {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed, slots, burn_in;
  std::optional<int> reps, memory, from, to;
  std::vector<std::string> policies;
  std::string out_dir;
  bool trace = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON configuration file")->required();
  cmd->add_option("--seed", o.seed, "base seed; replication i uses stream i");
  cmd->add_option("--slots", o.slots, "slots per replication (0 = closed forms only)");
  cmd->add_option("--burn-in", o.burn_in, "slots excluded from averages");
  cmd->add_option("--reps", o.reps, "replications");
  cmd->add_option("--memory", o.memory, "override the memory size M");
  cmd->add_option("--policy", o.policies, "policies (ssr,smw,mma)")->delimiter(',');
  cmd->add_option("--out", o.out_dir, "output directory (default: stdout)");
}

ExperimentSpec resolve(const Options& o) {
  ExperimentSpec spec = load_experiment(o.config);
  if (o.seed) spec.seed = *o.seed;
  if (o.slots) spec.slots = *o.slots;
  if (o.burn_in) spec.burn_in = *o.burn_in;
  if (o.reps) spec.reps = *o.reps;
  if (o.memory) spec.instance.memory = *o.memory;
  if (!o.policies.empty()) spec.policies = o.policies;
  if (o.trace) spec.trace = true;
  // Re-validate the merged result.
  return parse_experiment(to_json(spec));
}

class Output {
 public:
  Output(std::string dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }
  bool to_files() const { return !dir_.empty(); }

  // Writes a file when --out is set; otherwise prints the primary output.
  void emit(const std::string& filename, const std::string& content, bool primary) {
    if (to_files()) {
      std::ofstream f(fs::path(dir_) / filename);
      f << content;
      if (!f) throw std::runtime_error("cannot write " + (fs::path(dir_) / filename).string());
      out_ << "wrote " << (fs::path(dir_) / filename).string() << '\n';
    } else if (primary) {
      out_ << content;
    }
  }

 private:
  std::string dir_;
  std::ostream& out_;
};

json age_json(const Age& a) { return a ? json(*a) : json("infinite"); }
std::string age_csv(const Age& a) { return a ? format_double(*a) : "inf"; }

std::string csv_header(const json& config) { return "# config: " + config.dump() + "\n"; }

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentSpec spec = resolve(o);
  const Instance inst = spec.instance.build();
  const json config = to_json(spec);

  json reports = json::array();
  std::ostringstream csv;
  csv << csv_header(config) << "policy,request_id,users,cardinality,age,source\n";
  bool infinite = false;
  for (const auto& name : spec.policies) {
    if (name == "smw") {
      err << "note: smw has no closed-form age; use simulate\n";
      continue;
    }
    auto setup = make_policy(name, inst,
                             spec.policy_params.contains(name) ? spec.policy_params.at(name) : json());
    const AgeReport& rep = *setup.closed_form;
    json per = json::array();
    for (RequestId r = 0; r < inst.size(); ++r) {
      const Request& req = inst.request(r);
      per.push_back({{"id", r},
                     {"users", users_label(req)},
                     {"cardinality", req.cardinality()},
                     {"age", age_json(rep.per_request[r])}});
      csv << name << ',' << r << ',' << users_label(req) << ',' << req.cardinality() << ','
          << age_csv(rep.per_request[r]) << ',' << to_string(rep.source) << '\n';
    }
    infinite = infinite || !rep.finite();
    reports.push_back({{"policy", name},
                       {"source", to_string(rep.source)},
                       {"overall", age_json(rep.overall)},
                       {"params", setup.params},
                       {"per_request", per}});
  }
  Output sink(o.out_dir, out);
  sink.emit("analyze.json", json{{"config", config}, {"reports", reports}}.dump(2) + "\n", true);
  sink.emit("analyze.csv", csv.str(), false);
  if (infinite) {
    err << "error: at least one request has infinite average age\n";
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_optimize(const Options& o, std::ostream& out, std::ostream&) {
  const ExperimentSpec spec = resolve(o);
  const Instance inst = spec.instance.build();

  const OptimalSsr ssr = optimal_ssr_params(inst);
  json classes = json::object();
  for (Cardinality lambda : inst.cardinalities()) {
    json c;
    c["size"] = inst.cardinality_class(lambda).size();
    c["budget"] = inst.class_budget(lambda);
    c["f"] = ssr.class_costs.at(lambda);
    if (const auto& g = ssr.gammas.at(lambda)) {
      c["gamma"] = g->gamma;
      c["gamma_residual"] = g->residual;
      c["gamma_iterations"] = g->iterations;
    } else {
      c["gamma"] = nullptr;
    }
    json m = json::array();
    for (const auto& item : ssr.params.marginals.at(lambda).items)
      m.push_back({{"id", item.id}, {"users", users_label(inst.request(item.id))}, {"mu", item.prob}});
    c["marginals"] = m;
    classes[std::to_string(lambda)] = c;
  }
  json mu0 = json::object();
  for (const auto& [lambda, w] : ssr.params.mu0) mu0[std::to_string(lambda)] = w;

  const OptimalMma mma = optimal_mma_params(inst);
  json w = json::object(), beta = json::object();
  for (const auto& [lambda, x] : mma.weights.w) w[std::to_string(lambda)] = x;
  for (const auto& [lambda, x] : mma.weights.beta) beta[std::to_string(lambda)] = x;

  json doc{{"config", to_json(spec)},
           {"ssr", {{"mu0", mu0}, {"classes", classes}}},
           {"mma",
            {{"subsets", mma.params.subsets},
             {"w", w},
             {"beta", beta},
             {"phi", mma.params.phi},
             {"objective", mma.objective},
             {"kkt_residual", mma.kkt_residual},
             {"iterations", mma.iterations}}}};
  Output(o.out_dir, out).emit("optimize.json", doc.dump(2) + "\n", true);
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream&) {
  const ExperimentSpec spec = resolve(o);
  if (spec.slots == 0) throw ConfigError("simulate needs --slots > 0");
  if (spec.trace && o.out_dir.empty()) throw ConfigError("--trace requires --out");
  const Instance inst = spec.instance.build();
  const json config = to_json(spec);
  Output sink(o.out_dir, out);

  json results = json::array();
  std::ostringstream csv;
  csv << csv_header(config)
      << "policy,request_id,users,cardinality,sim_mean,sim_std_error,closed_form\n";
  for (const auto& name : spec.policies) {
    auto setup = make_policy(name, inst,
                             spec.policy_params.contains(name) ? spec.policy_params.at(name) : json());
    const SimOptions opts{spec.slots, spec.burn_in, false};
    ReplicationStats st = run_replications(*setup.policy, inst, opts, spec.reps, spec.seed);

    json per = json::array();
    for (RequestId r = 0; r < inst.size(); ++r) {
      const Request& req = inst.request(r);
      json row{{"id", r},
               {"users", users_label(req)},
               {"cardinality", req.cardinality()},
               {"sim_mean", st.per_request_mean[r]},
               {"sim_std_error", st.per_request_std_error[r]}};
      csv << name << ',' << r << ',' << users_label(req) << ',' << req.cardinality() << ','
          << format_double(st.per_request_mean[r]) << ','
          << format_double(st.per_request_std_error[r]) << ',';
      if (setup.closed_form) {
        row["closed_form"] = age_json(setup.closed_form->per_request[r]);
        csv << age_csv(setup.closed_form->per_request[r]);
      }
      csv << '\n';
      per.push_back(row);
    }
    json reps = json::array();
    for (const auto& run : st.runs) reps.push_back({{"stream", run.stream}, {"overall", run.overall}});
    json res{{"policy", name},
             {"mean", st.mean},
             {"std_error", st.std_error},
             {"ci_low", st.ci_low},
             {"ci_high", st.ci_high},
             {"ci_degenerate", st.ci_degenerate},
             {"params", setup.params},
             {"replications", reps},
             {"per_request", per}};
    if (setup.closed_form) res["closed_form"] = age_json(setup.closed_form->overall);
    results.push_back(res);

    if (spec.trace) {
      Rng rng(spec.seed, 0);
      const SimResult traced = simulate(*setup.policy, inst, {spec.slots, spec.burn_in, true}, rng);
      std::ostringstream tr;
      tr << csv_header(config) << "slot,request_id,u,c,d,h\n";
      for (const auto& row : traced.trace)
        tr << row.slot << ',' << row.id << ',' << row.u << ',' << row.c << ',' << row.d << ','
           << row.h << '\n';
      sink.emit("trace_" + name + ".csv", tr.str(), false);
    }
  }
  sink.emit("simulate.json", json{{"config", config}, {"results", results}}.dump(2) + "\n", true);
  sink.emit("simulate.csv", csv.str(), false);
  return kExitOk;
}

int cmd_sweep(const Options& o, SweepAxis axis, std::ostream& out) {
  ExperimentSpec spec = resolve(o);
  SweepRange range;
  if (spec.sweep && spec.sweep->axis == axis) range = *spec.sweep;
  else if (axis == SweepAxis::Memory) range = {axis, spec.instance.memory, spec.instance.memory};
  else range = {axis, 2, spec.instance.network.n_users};
  range.axis = axis;
  if (o.from) range.from = *o.from;
  if (o.to) range.to = *o.to;
  if (range.from > range.to) throw ConfigError("sweep range is empty");
  spec.sweep = range;

  const auto rows = axis == SweepAxis::Memory ? sweep_memory(spec, range.from, range.to)
                                              : sweep_requests(spec, range.from, range.to);
  const char* file = axis == SweepAxis::Memory ? "sweep_memory.csv" : "sweep_requests.csv";
  Output(o.out_dir, out).emit(file, sweep_csv(rows, spec), true);
  return kExitOk;
}

int cmd_enumerate(const Options& o, std::ostream& out) {
  const ExperimentSpec spec = resolve(o);
  const Instance inst = spec.instance.build();
  json doc{{"config", to_json(spec)},
           {"memory", inst.memory()},
           {"cardinalities", inst.cardinalities()},
           {"subsets", enumerate_maximal_subsets(inst.cardinalities(), inst.memory())}};
  Output(o.out_dir, out).emit("enumerate_subsets.json", doc.dump(2) + "\n", true);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Age-based scheduling of entanglement requests at a memory-limited quantum switch"};
  app.require_subcommand(1);

  Options o;
  auto* analyze = app.add_subcommand("analyze", "closed-form average ages");
  auto* optimize = app.add_subcommand("optimize", "optimal policy parameters");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo simulation");
  auto* sweep_mem = app.add_subcommand("sweep-memory", "sweep the memory size M");
  auto* sweep_req = app.add_subcommand("sweep-requests", "sweep the largest request cardinality");
  auto* enumerate = app.add_subcommand("enumerate-subsets", "maximal feasible cardinality subsets");
  for (auto* cmd : {analyze, optimize, simulate_cmd, sweep_mem, sweep_req, enumerate})
    add_common(cmd, o);
  simulate_cmd->add_flag("--trace", o.trace, "write a per-slot trace of replication 0");
  for (auto* cmd : {sweep_mem, sweep_req}) {
    cmd->add_option("--from", o.from, "first sweep value");
    cmd->add_option("--to", o.to, "last sweep value");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(o, out, err);
    if (optimize->parsed()) return cmd_optimize(o, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(o, out, err);
    if (sweep_mem->parsed()) return cmd_sweep(o, SweepAxis::Memory, out);
    if (sweep_req->parsed()) return cmd_sweep(o, SweepAxis::MaxCardinality, out);
    if (enumerate->parsed()) return cmd_enumerate(o, out);
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const LookupError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace qswitch
