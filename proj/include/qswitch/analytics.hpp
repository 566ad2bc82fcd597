#pragma once

// Closed-form average ages and independent renewal-reward oracles.
//
// An age that would be infinite (a request that is never scheduled) is
// represented by an empty std::optional and reported as "infinite".

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qswitch/model.hpp"
#include "qswitch/policies.hpp"

namespace qswitch {

enum class AgeSource { SsrClosedForm, MmaClosedForm, RenewalOracle, Simulation };

std::string_view to_string(AgeSource s);

using Age = std::optional<double>;

struct AgeReport {
  std::vector<Age> per_request;  // indexed by request id
  Age overall;                   // arithmetic mean; empty if any entry is infinite
  AgeSource source = AgeSource::SsrClosedForm;

  bool finite() const { return overall.has_value(); }
};

/// Arithmetic mean of the entries, empty if any is infinite.
Age mean_age(std::span<const Age> ages);

/// Delta_r = 1 / (mu0(lambda) q_lambda mu_lambda(r) v(r)) for every request.
AgeReport ssr_average_age(const SSRParams& params, const Instance& inst);

/// Average age of request r under a max-age policy over the given subsets.
/// Identical for every request of the same cardinality.
Age mma_request_age(const Instance& inst, const std::vector<std::vector<Cardinality>>& subsets,
                    std::span<const double> phi, RequestId r);

AgeReport mma_average_age(const MMAParams& params, const Instance& inst);

/// Time-average age of a reset-to-1 age process whose inter-service time I
/// has the given first two moments: (E[I^2] + E[I]) / (2 E[I]).
double renewal_average_age(double mean_interval, double second_moment);

/// Service every slot independently with probability s: I ~ Geometric(s).
Age renewal_oracle_ssr(double s);

/// I is a sum of independent Geometric(s_i), one per request of a class
/// visited in round-robin order.
Age renewal_oracle_mma(std::span<const double> success_probs);

}  // namespace qswitch
