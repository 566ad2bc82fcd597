#include "qswitch/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace qswitch {

namespace {

const std::set<std::string> kPolicyNames{"ssr", "smw", "mma"};

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field \"") + key + "\" has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get_field<T>(j, key) : fallback;
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Cardinality parse_cardinality_key(const std::string& key) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), value);
  if (ec != std::errc() || ptr != key.data() + key.size())
    throw ConfigError("cardinality key \"" + key + "\" is not an integer");
  return value;
}

Instance InstanceSpec::build() const {
  Instance inst(network, build_request_set(network.n_users, requests), memory);
  require_valid(inst);
  return inst;
}

InstanceSpec parse_instance_spec(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  InstanceSpec spec;
  spec.network.n_users = get_field<int>(j, "n_users");
  spec.network.p = get_field<std::vector<double>>(j, "p");
  if (static_cast<int>(spec.network.p.size()) != spec.network.n_users)
    throw ConfigError("\"p\" must list n_users = " + std::to_string(spec.network.n_users) +
                      " probabilities");
  const json& q = j.contains("q") ? j.at("q") : throw ConfigError("missing field \"q\"");
  if (!q.is_object()) throw ConfigError("\"q\" must map cardinalities to probabilities");
  for (const auto& [key, value] : q.items()) {
    if (!value.is_number()) throw ConfigError("q[\"" + key + "\"] must be a number");
    spec.network.q[parse_cardinality_key(key)] = value.get<double>();
  }
  spec.memory = get_field<int>(j, "memory");

  if (!j.contains("requests")) {
    spec.requests = AllRequests{};
  } else if (const json& r = j.at("requests"); r.is_array()) {
    ExplicitRequests ex;
    for (const auto& users : r) {
      if (!users.is_array()) throw ConfigError("each explicit request must be a list of users");
      std::vector<UserId> set;
      for (const auto& u : users) {
        if (!u.is_number_integer()) throw ConfigError("user indices must be integers");
        set.push_back(u.get<int>() - 1);
      }
      ex.user_sets.push_back(std::move(set));
    }
    spec.requests = std::move(ex);
  } else if (r.is_object()) {
    const auto mode = get_field<std::string>(r, "mode");
    if (mode == "all")
      spec.requests = AllRequests{};
    else if (mode == "up_to")
      spec.requests = UpToCardinality{get_field<int>(r, "k")};
    else
      throw ConfigError("unknown request mode \"" + mode + "\" (expected all or up_to)");
  } else {
    throw ConfigError("\"requests\" must be a list or a {\"mode\": ...} object");
  }
  return spec;
}

json to_json(const InstanceSpec& spec) {
  json j;
  j["n_users"] = spec.network.n_users;
  j["p"] = spec.network.p;
  json q = json::object();
  for (const auto& [lambda, value] : spec.network.q) q[std::to_string(lambda)] = value;
  j["q"] = q;
  j["memory"] = spec.memory;
  if (std::holds_alternative<AllRequests>(spec.requests)) {
    j["requests"] = {{"mode", "all"}};
  } else if (const auto* up = std::get_if<UpToCardinality>(&spec.requests)) {
    j["requests"] = {{"mode", "up_to"}, {"k", up->k}};
  } else {
    json list = json::array();
    for (const auto& users : std::get<ExplicitRequests>(spec.requests).user_sets) {
      json one = json::array();
      for (UserId u : users) one.push_back(u + 1);
      list.push_back(one);
    }
    j["requests"] = list;
  }
  return j;
}

ExperimentSpec parse_experiment(const json& j) {
  ExperimentSpec spec;
  spec.instance = parse_instance_spec(j);
  if (!j.contains("experiment")) return spec;
  const json& e = j.at("experiment");
  if (!e.is_object()) throw ConfigError("\"experiment\" must be an object");

  spec.policies = get_or(e, "policies", spec.policies);
  for (const auto& name : spec.policies)
    if (!kPolicyNames.contains(name))
      throw ConfigError("unknown policy \"" + name + "\" (expected ssr, smw or mma)");
  spec.slots = get_or(e, "slots", spec.slots);
  spec.burn_in = get_or(e, "burn_in", spec.burn_in);
  spec.reps = get_or(e, "reps", spec.reps);
  spec.seed = get_or(e, "seed", spec.seed);
  spec.trace = get_or(e, "trace", spec.trace);
  if (e.contains("policy_params")) {
    spec.policy_params = e.at("policy_params");
    if (!spec.policy_params.is_object()) throw ConfigError("\"policy_params\" must be an object");
  }
  if (e.contains("sweep")) {
    const json& s = e.at("sweep");
    SweepRange range;
    const auto axis = get_field<std::string>(s, "axis");
    if (axis == "memory")
      range.axis = SweepAxis::Memory;
    else if (axis == "max_cardinality")
      range.axis = SweepAxis::MaxCardinality;
    else
      throw ConfigError("unknown sweep axis \"" + axis + "\"");
    range.from = get_field<int>(s, "from");
    range.to = get_field<int>(s, "to");
    if (range.from > range.to) throw ConfigError("sweep range is empty");
    spec.sweep = range;
  }
  if (spec.reps < 1) throw ConfigError("\"reps\" must be at least 1");
  if (spec.slots != 0 && spec.slots <= spec.burn_in)
    throw ConfigError("\"slots\" must exceed \"burn_in\"");
  return spec;
}

json to_json(const ExperimentSpec& spec) {
  json j = to_json(spec.instance);
  json e;
  e["policies"] = spec.policies;
  e["slots"] = spec.slots;
  e["burn_in"] = spec.burn_in;
  e["reps"] = spec.reps;
  e["seed"] = spec.seed;
  e["trace"] = spec.trace;
  if (spec.sweep)
    e["sweep"] = {{"axis", spec.sweep->axis == SweepAxis::Memory ? "memory" : "max_cardinality"},
                  {"from", spec.sweep->from},
                  {"to", spec.sweep->to}};
  if (!spec.policy_params.empty()) e["policy_params"] = spec.policy_params;
  j["experiment"] = e;
  return j;
}

json parse_config_text(const std::string& text) {
  static const std::string kHeader = "# config: ";
  std::string body = text;
  if (text.rfind(kHeader, 0) == 0) body = text.substr(kHeader.size(), text.find('\n') - kHeader.size());
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON at " + line_column(body, e.byte == 0 ? 0 : e.byte - 1) +
                      ": " + e.what());
  }
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(parse_config_text(buf.str()));
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace qswitch
