#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qswitch/config.hpp"

using namespace qswitch;

namespace {

const char* kFig3 = R"({
  "n_users": 7,
  "p": [0.85, 0.9, 0.93, 0.87, 0.95, 0.83, 0.92],
  "q": {"2": 0.92, "3": 0.87, "4": 0.83, "5": 0.8, "6": 0.78, "7": 0.75},
  "memory": 20,
  "requests": {"mode": "up_to", "k": 2},
  "experiment": {
    "policies": ["ssr", "mma"],
    "slots": 50000, "burn_in": 500, "reps": 3, "seed": 9,
    "sweep": {"axis": "max_cardinality", "from": 2, "to": 4}
  }
})";

std::string error_of(const std::string& text) {
  try {
    parse_experiment(parse_config_text(text));
  } catch (const ConfigError& e) {
    return e.what();
  } catch (const ValidationError& e) {
    return std::string("validation: ") + e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse a request sweep configuration") {
  const ExperimentSpec spec = parse_experiment(parse_config_text(kFig3));
  CHECK(spec.instance.network.n_users == 7);
  CHECK(spec.instance.network.q.at(7) == 0.75);
  CHECK(std::get<UpToCardinality>(spec.instance.requests).k == 2);
  CHECK(spec.policies == std::vector<std::string>{"ssr", "mma"});
  CHECK(spec.slots == 50000);
  CHECK(spec.reps == 3);
  REQUIRE(spec.sweep.has_value());
  CHECK(spec.sweep->axis == SweepAxis::MaxCardinality);
  CHECK(spec.sweep->to == 4);

  const Instance inst = spec.instance.build();
  CHECK(inst.size() == 21);
  CHECK(inst.class_budget(2) == 10);

  // Serializing and parsing again gives the same document.
  CHECK(to_json(parse_experiment(to_json(spec))) == to_json(spec));
}

TEST_CASE("explicit requests use 1-based users") {
  const json j = json::parse(R"({"n_users": 4, "p": [1, 1, 1, 1], "q": {"2": 1, "3": 1},
                                 "memory": 3, "requests": [[4, 1], [1, 2, 3]]})");
  const InstanceSpec spec = parse_instance_spec(j);
  const Instance inst = spec.build();
  REQUIRE(inst.size() == 2);
  CHECK(inst.request(0).users == std::vector<UserId>{0, 3});
  CHECK(inst.request(1).users == std::vector<UserId>{0, 1, 2});
  CHECK(to_json(spec)["requests"] == json::parse("[[4, 1], [1, 2, 3]]"));
}

TEST_CASE("defaults when the experiment block is absent") {
  const ExperimentSpec spec = parse_experiment(
      json::parse(R"({"n_users": 2, "p": [0.5, 0.5], "q": {"2": 1}, "memory": 2})"));
  CHECK(std::holds_alternative<AllRequests>(spec.instance.requests));
  CHECK(spec.slots == 1'000'000);
  CHECK(spec.burn_in == 10'000);
  CHECK_FALSE(spec.sweep.has_value());
}

TEST_CASE("configuration errors") {
  CHECK(error_of("{\n  \"n_users\": 3,\n  \"p\": [1, 1 1]\n}").find("line 3") != std::string::npos);
  CHECK(error_of(R"({"n_users": 3, "p": [1, 1], "q": {}, "memory": 3})").find("\"p\"") != std::string::npos);
  CHECK(error_of(R"({"n_users": 2, "p": [1, 1], "memory": 3})").find("missing field \"q\"") != std::string::npos);
  CHECK(error_of(R"({"n_users": 2, "p": [1, 1], "q": {"two": 1}, "memory": 3})").find("not an integer") != std::string::npos);
  CHECK(error_of(R"({"n_users": 2, "p": [1, 1], "q": {"2": 1}, "memory": "big"})").find("wrong type") != std::string::npos);
  CHECK(error_of(R"({"n_users": 2, "p": [1, 1], "q": {"2": 1}, "memory": 2,
                     "experiment": {"policies": ["fifo"]}})").find("unknown policy") != std::string::npos);
  CHECK(error_of(R"({"n_users": 2, "p": [1, 1], "q": {"2": 1}, "memory": 2,
                     "experiment": {"slots": 10, "burn_in": 10}})").find("burn_in") != std::string::npos);
  CHECK(error_of(R"({"n_users": 2, "p": [1, 1], "q": {"2": 1}, "memory": 2,
                     "requests": {"mode": "some"}})").find("unknown request mode") != std::string::npos);
}

TEST_CASE("a CSV output header is a valid configuration") {
  const ExperimentSpec spec = parse_experiment(parse_config_text(kFig3));
  const std::string csv = "# config: " + to_json(spec).dump() + "\nmax_cardinality,policy\n2,ssr\n";
  CHECK(to_json(parse_experiment(parse_config_text(csv))) == to_json(spec));

  const auto path = std::filesystem::temp_directory_path() / "qswitch_config_header.csv";
  std::ofstream(path) << csv;
  CHECK(to_json(load_experiment(path)) == to_json(spec));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_experiment("/nonexistent/qswitch.json"), ConfigError);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3, 7.342413924753635, 1e-300, 12345678.9}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(2.0) == "2");
}
