#pragma once

// Per-slot scheduling rules.
//
//  - SSR: draw a cardinality, then draw M_lambda requests of that class
//    without replacement with prescribed marginals. Ignores ages.
//  - SMW: draw a cardinality, then take the M_lambda requests of that class
//    with the largest age / marginal weight.
//  - MMA: draw one of a list of maximal feasible cardinality subsets, then
//    take the oldest request of every cardinality in it.
//
// Ties are broken by the smallest request id. Policy objects are immutable
// and may be shared by concurrent replications.

#include <map>
#include <memory>
#include <string_view>
#include <vector>

#include "qswitch/age_state.hpp"
#include "qswitch/model.hpp"
#include "qswitch/sampling.hpp"

namespace qswitch {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;

  /// Writes x(t) into `out` (cleared first), sorted by request id.
  virtual void decide_into(const Instance& inst, const AgeState& age, Rng& rng,
                           MemoryConfiguration& out) const = 0;

  MemoryConfiguration decide(const Instance& inst, const AgeState& age, Rng& rng) const {
    MemoryConfiguration x;
    decide_into(inst, age, rng, x);
    return x;
  }
};

struct SSRParams {
  std::map<Cardinality, double> mu0;
  std::map<Cardinality, MarginalVector> marginals;
};

struct SMWParams {
  std::map<Cardinality, double> mu0;
  std::vector<double> denominators;  // indexed by request id
};

struct MMAParams {
  std::vector<std::vector<Cardinality>> subsets;
  std::vector<double> phi;
};

/// Checks SSRParams against the instance; throws ValidationError.
void validate_ssr_params(const SSRParams& params, const Instance& inst);
void validate_smw_params(const SMWParams& params, const Instance& inst);
void validate_mma_params(const MMAParams& params, const Instance& inst);

class SsrPolicy final : public Policy {
 public:
  SsrPolicy(SSRParams params, const Instance& inst);
  std::string_view name() const override { return "ssr"; }
  void decide_into(const Instance& inst, const AgeState& age, Rng& rng,
                   MemoryConfiguration& out) const override;
  const SSRParams& params() const { return params_; }

 private:
  SSRParams params_;
  std::vector<Cardinality> lambdas_;
  CategoricalSampler pick_lambda_;
  std::vector<SystematicSampler> samplers_;  // aligned with lambdas_
};

class SmwPolicy final : public Policy {
 public:
  SmwPolicy(SMWParams params, const Instance& inst);
  std::string_view name() const override { return "smw"; }
  void decide_into(const Instance& inst, const AgeState& age, Rng& rng,
                   MemoryConfiguration& out) const override;
  const SMWParams& params() const { return params_; }

 private:
  SMWParams params_;
  std::vector<Cardinality> lambdas_;
  CategoricalSampler pick_lambda_;
};

class MmaPolicy final : public Policy {
 public:
  MmaPolicy(MMAParams params, const Instance& inst);
  std::string_view name() const override { return "mma"; }
  void decide_into(const Instance& inst, const AgeState& age, Rng& rng,
                   MemoryConfiguration& out) const override;
  const MMAParams& params() const { return params_; }

 private:
  MMAParams params_;
  CategoricalSampler pick_subset_;
};

/// Free-function forms of the decision rules.
MemoryConfiguration ssr_decide(const SsrPolicy& policy, const Instance& inst, Rng& rng);
MemoryConfiguration smw_decide(const SmwPolicy& policy, const Instance& inst,
                               const AgeState& age, Rng& rng);
MemoryConfiguration mma_decide(const MmaPolicy& policy, const Instance& inst,
                               const AgeState& age, Rng& rng);

}  // namespace qswitch
