#pragma once

// JSON configuration. Schema (users are 1-based):
//
//   {
//     "n_users": 5,
//     "p": [0.85, 0.9, 0.93, 0.87, 0.95],
//     "q": {"2": 0.92, "3": 0.87, "4": 0.83, "5": 0.8},
//     "memory": 5,
//     "requests": {"mode": "all"} | {"mode": "up_to", "k": 3} | [[1, 2], [1, 2, 3]],
//     "experiment": {                       // optional
//       "policies": ["ssr", "smw", "mma"],
//       "slots": 1000000, "burn_in": 10000, "reps": 10, "seed": 1,
//       "sweep": {"axis": "memory" | "max_cardinality", "from": 5, "to": 32},
//       "trace": false,
//       "policy_params": {"ssr": {...}, "smw": {...}, "mma": {...}}
//     }
//   }
//
// See docs/config.md for the policy_params blocks.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qswitch/model.hpp"

namespace qswitch {

using json = nlohmann::json;

/// Malformed or inconsistent configuration. Message carries line/column
/// information for syntax errors.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct InstanceSpec {
  NetworkConfig network;
  RequestSetMode requests = AllRequests{};
  int memory = 0;

  /// Builds and validates the instance; throws ValidationError.
  Instance build() const;
};

enum class SweepAxis { Memory, MaxCardinality };

struct SweepRange {
  SweepAxis axis = SweepAxis::Memory;
  int from = 0;
  int to = 0;
};

struct ExperimentSpec {
  InstanceSpec instance;
  std::vector<std::string> policies{"ssr", "smw", "mma"};
  std::uint64_t slots = 1'000'000;  // 0 disables simulation
  std::uint64_t burn_in = 10'000;
  int reps = 10;
  std::uint64_t seed = 1;
  bool trace = false;
  std::optional<SweepRange> sweep;
  json policy_params = json::object();
};

InstanceSpec parse_instance_spec(const json& j);
json to_json(const InstanceSpec& spec);

ExperimentSpec parse_experiment(const json& j);
json to_json(const ExperimentSpec& spec);

/// Parses JSON text. A leading "# config: " line (as written at the top of
/// every CSV output) is accepted, so outputs can be replayed as configs.
json parse_config_text(const std::string& text);
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// Parses a cardinality map key such as "3"; throws ConfigError.
Cardinality parse_cardinality_key(const std::string& key);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

}  // namespace qswitch
