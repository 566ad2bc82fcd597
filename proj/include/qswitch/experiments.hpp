#pragma once

// Policy construction from names/parameter blocks, and the parameter sweeps
// behind the CLI.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qswitch/analytics.hpp"
#include "qswitch/config.hpp"
#include "qswitch/policies.hpp"
#include "qswitch/simulator.hpp"

namespace qswitch {

/// A ready-to-run policy with its closed-form ages when one exists.
struct PolicySetup {
  std::string name;
  std::unique_ptr<Policy> policy;
  std::optional<AgeReport> closed_form;  // none for smw
  json params;                           // resolved parameters, for output
};

/// Builds policy `name` for `inst`. `explicit_params` is the matching
/// policy_params block or null for the optimal parameters.
PolicySetup make_policy(const std::string& name, const Instance& inst,
                        const json& explicit_params = json());

SSRParams parse_ssr_params(const json& j, const Instance& inst);
SMWParams parse_smw_params(const json& j, const Instance& inst);
MMAParams parse_mma_params(const json& j, const Instance& inst);

json ssr_params_to_json(const SSRParams& p, const Instance& inst);
json smw_params_to_json(const SMWParams& p, const Instance& inst);
json mma_params_to_json(const MMAParams& p);

/// One (sweep point, policy) row.
struct SweepRow {
  int axis_value = 0;
  std::string policy;
  std::size_t n_requests = 0;
  Age closed_form;
  std::optional<ReplicationStats> sim;  // empty when slots == 0
};

/// Rows ordered by (axis value, policy order in spec). Every point uses the
/// same base seed.
std::vector<SweepRow> sweep_memory(const ExperimentSpec& spec, int from, int to,
                                   unsigned workers = 0);
/// Request sets up_to(k) for k in [from, to].
std::vector<SweepRow> sweep_requests(const ExperimentSpec& spec, int from, int to,
                                     unsigned workers = 0);

std::string sweep_csv(const std::vector<SweepRow>& rows, const ExperimentSpec& spec);

std::string users_label(const Request& r);

}  // namespace qswitch
