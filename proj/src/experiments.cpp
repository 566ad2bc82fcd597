#include "qswitch/experiments.hpp"

#include <algorithm>
#include <sstream>

#include "qswitch/optimize.hpp"

namespace qswitch {

namespace {

std::map<Cardinality, double> parse_mu0(const json& j) {
  if (!j.is_object()) throw ConfigError("\"mu0\" must map cardinalities to probabilities");
  std::map<Cardinality, double> mu0;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("mu0 entries must be numbers");
    mu0[parse_cardinality_key(key)] = value.get<double>();
  }
  return mu0;
}

json mu0_to_json(const std::map<Cardinality, double>& mu0) {
  json j = json::object();
  for (const auto& [lambda, w] : mu0) j[std::to_string(lambda)] = w;
  return j;
}

RequestId find_by_users(const Instance& inst, const json& users) {
  std::vector<UserId> set;
  for (const auto& u : users) set.push_back(u.get<int>() - 1);
  std::sort(set.begin(), set.end());
  for (const Request& r : inst.requests())
    if (r.users == set) return r.id;
  throw ConfigError("parameter block names a request that is not in the instance");
}

}  // namespace

std::string users_label(const Request& r) {
  std::string s;
  for (std::size_t i = 0; i < r.users.size(); ++i)
    s += (i ? "-" : "") + std::to_string(r.users[i] + 1);
  return s;
}

SSRParams parse_ssr_params(const json& j, const Instance& inst) {
  SSRParams p;
  if (!j.contains("mu0") || !j.contains("marginals"))
    throw ConfigError("ssr parameters need \"mu0\" and \"marginals\"");
  p.mu0 = parse_mu0(j.at("mu0"));
  for (const auto& [key, list] : j.at("marginals").items()) {
    const Cardinality lambda = parse_cardinality_key(key);
    const auto& cls = inst.cardinality_class(lambda);
    if (!list.is_array() || list.size() != cls.size())
      throw ConfigError("marginals for cardinality " + key + " need one entry per request");
    MarginalVector m;
    m.k = inst.class_budget(lambda);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const json& e = list[i];
      if (e.is_number())
        m.items.push_back({cls[i], e.get<double>()});
      else if (e.is_object() && e.contains("users") && e.contains("mu"))
        m.items.push_back({find_by_users(inst, e.at("users")), e.at("mu").get<double>()});
      else
        throw ConfigError("marginal entries must be numbers or {\"users\", \"mu\"} objects");
    }
    p.marginals[lambda] = std::move(m);
  }
  validate_ssr_params(p, inst);
  return p;
}

SMWParams parse_smw_params(const json& j, const Instance& inst) {
  SMWParams p = smw_params_from(optimal_ssr_params(inst).params, inst);
  if (j.contains("mu0")) p.mu0 = parse_mu0(j.at("mu0"));
  if (j.contains("denominators")) {
    p.denominators = j.at("denominators").get<std::vector<double>>();
  }
  validate_smw_params(p, inst);
  return p;
}

MMAParams parse_mma_params(const json& j, const Instance& inst) {
  MMAParams p;
  if (j.contains("subsets"))
    p.subsets = j.at("subsets").get<std::vector<std::vector<Cardinality>>>();
  else
    p.subsets = enumerate_maximal_subsets(inst.cardinalities(), inst.memory());
  if (j.contains("phi"))
    p.phi = j.at("phi").get<std::vector<double>>();
  else
    p.phi = optimal_subset_dist(p.subsets, mma_weights(inst).w).phi;
  validate_mma_params(p, inst);
  return p;
}

json ssr_params_to_json(const SSRParams& p, const Instance& inst) {
  json marg = json::object();
  for (const auto& [lambda, m] : p.marginals) {
    json list = json::array();
    for (const auto& item : m.items)
      list.push_back({{"id", item.id},
                      {"users", users_label(inst.request(item.id))},
                      {"mu", item.prob}});
    marg[std::to_string(lambda)] = list;
  }
  return {{"mu0", mu0_to_json(p.mu0)}, {"marginals", marg}};
}

json smw_params_to_json(const SMWParams& p, const Instance&) {
  return {{"mu0", mu0_to_json(p.mu0)}, {"denominators", p.denominators}};
}

json mma_params_to_json(const MMAParams& p) {
  return {{"subsets", p.subsets}, {"phi", p.phi}};
}

PolicySetup make_policy(const std::string& name, const Instance& inst,
                        const json& explicit_params) {
  PolicySetup setup;
  setup.name = name;
  const bool given = !explicit_params.is_null();
  if (name == "ssr") {
    SSRParams p = given ? parse_ssr_params(explicit_params, inst) : optimal_ssr_params(inst).params;
    setup.closed_form = ssr_average_age(p, inst);
    setup.params = ssr_params_to_json(p, inst);
    setup.policy = std::make_unique<SsrPolicy>(std::move(p), inst);
  } else if (name == "smw") {
    SMWParams p = given ? parse_smw_params(explicit_params, inst)
                        : smw_params_from(optimal_ssr_params(inst).params, inst);
    setup.params = smw_params_to_json(p, inst);
    setup.policy = std::make_unique<SmwPolicy>(std::move(p), inst);
  } else if (name == "mma") {
    MMAParams p = parse_mma_params(given ? explicit_params : json::object(), inst);
    setup.closed_form = mma_average_age(p, inst);
    setup.params = mma_params_to_json(p);
    setup.policy = std::make_unique<MmaPolicy>(std::move(p), inst);
  } else {
    throw ConfigError("unknown policy \"" + name + "\"");
  }
  return setup;
}

namespace {

struct SweepPoint {
  int axis_value;
  Instance inst;
  std::vector<PolicySetup> setups;
};

std::vector<SweepRow> run_sweep(const ExperimentSpec& spec, std::vector<SweepPoint> points,
                                unsigned workers) {
  const bool simulate_points = spec.slots > 0;
  const std::size_t n_pol = spec.policies.size();
  const std::size_t reps = static_cast<std::size_t>(spec.reps);
  std::vector<SimResult> runs(simulate_points ? points.size() * n_pol * reps : 0);
  SimOptions opts{spec.slots, spec.burn_in, false};

  parallel_for(
      runs.size(),
      [&](std::size_t task) {
        const std::size_t rep = task % reps;
        const std::size_t pol = (task / reps) % n_pol;
        const SweepPoint& pt = points[task / reps / n_pol];
        Rng rng(spec.seed, rep);
        runs[task] = simulate(*pt.setups[pol].policy, pt.inst, opts, rng);
      },
      workers);

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t pol = 0; pol < n_pol; ++pol) {
      SweepRow row;
      row.axis_value = points[i].axis_value;
      row.policy = spec.policies[pol];
      row.n_requests = points[i].inst.size();
      if (points[i].setups[pol].closed_form) row.closed_form = points[i].setups[pol].closed_form->overall;
      if (simulate_points) {
        const auto first = runs.begin() + static_cast<long>((i * n_pol + pol) * reps);
        row.sim = summarize(std::vector<SimResult>(first, first + static_cast<long>(reps)));
      }
      rows.push_back(std::move(row));
    }
  return rows;
}

std::vector<PolicySetup> setups_for(const ExperimentSpec& spec, const Instance& inst) {
  std::vector<PolicySetup> out;
  for (const auto& name : spec.policies)
    out.push_back(make_policy(name, inst,
                              spec.policy_params.contains(name) ? spec.policy_params.at(name)
                                                                : json()));
  return out;
}

}  // namespace

std::vector<SweepRow> sweep_memory(const ExperimentSpec& spec, int from, int to,
                                   unsigned workers) {
  std::vector<SweepPoint> points;
  for (int m = from; m <= to; ++m) {
    InstanceSpec is = spec.instance;
    is.memory = m;
    Instance inst = is.build();
    auto setups = setups_for(spec, inst);
    points.push_back({m, std::move(inst), std::move(setups)});
  }
  return run_sweep(spec, std::move(points), workers);
}

std::vector<SweepRow> sweep_requests(const ExperimentSpec& spec, int from, int to,
                                     unsigned workers) {
  std::vector<SweepPoint> points;
  for (int k = from; k <= to; ++k) {
    InstanceSpec is = spec.instance;
    is.requests = UpToCardinality{k};
    Instance inst = is.build();
    auto setups = setups_for(spec, inst);
    points.push_back({k, std::move(inst), std::move(setups)});
  }
  return run_sweep(spec, std::move(points), workers);
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const ExperimentSpec& spec) {
  std::ostringstream os;
  const bool by_memory = !spec.sweep || spec.sweep->axis == SweepAxis::Memory;
  os << "# config: " << to_json(spec).dump() << '\n';
  os << (by_memory ? "memory" : "max_cardinality")
     << ",policy,n_requests,closed_form,sim_mean,sim_std_error,ci_low,ci_high,slots,burn_in,"
        "reps,seed\n";
  for (const auto& row : rows) {
    os << row.axis_value << ',' << row.policy << ',' << row.n_requests << ',';
    if (row.policy != "smw") os << (row.closed_form ? format_double(*row.closed_form) : "inf");
    os << ',';
    if (row.sim)
      os << format_double(row.sim->mean) << ',' << format_double(row.sim->std_error) << ','
         << format_double(row.sim->ci_low) << ',' << format_double(row.sim->ci_high);
    else
      os << ",,,";
    os << ',' << spec.slots << ',' << spec.burn_in << ',' << spec.reps << ',' << spec.seed
       << '\n';
  }
  return os.str();
}

}  // namespace qswitch
