#pragma once

// Slotted Monte-Carlo dynamics of the switch.
//
// Per slot: the policy picks x(t); for every scheduled request (by id) each
// of its users (ascending) attempts an LLE with probability p_i; if all
// succeed the swap is attempted with probability q_lambda. Leftover LLEs are
// dropped at the end of the slot. Served requests restart at age 1.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qswitch/age_state.hpp"
#include "qswitch/analytics.hpp"
#include "qswitch/model.hpp"
#include "qswitch/policies.hpp"
#include "qswitch/sampling.hpp"

namespace qswitch {

/// Raised when a policy breaks its contract (e.g. an inadmissible x(t)).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ScheduledOutcome {
  RequestId id = 0;
  std::uint32_t lle_offset = 0;  // into SlotOutcome::lle, one entry per user
  bool all_lle = false;          // c_r
  bool served = false;           // d_r
  std::uint64_t age_before = 0;  // h_r(t) at the start of the slot
};

/// Outcome of a single slot. Only scheduled requests are stored; every
/// other request has u = b = c = d = 0.
struct SlotOutcome {
  std::uint64_t slot = 0;
  MemoryConfiguration x;
  std::vector<ScheduledOutcome> scheduled;
  std::vector<std::uint8_t> lle;  // b_{r,i}

  const ScheduledOutcome* find(RequestId r) const;
  bool u(RequestId r) const { return find(r) != nullptr; }
  bool c(RequestId r) const;
  bool d(RequestId r) const;
  /// b_{r,i} for the k-th user of r (users in ascending order).
  bool b(RequestId r, std::size_t k) const;
};

/// Runs one slot and advances `age`. Throws ContractViolation when the
/// policy returns an inadmissible configuration.
void slot_step(const Policy& policy, const Instance& inst, AgeState& age, Rng& rng,
               SlotOutcome& out);
SlotOutcome slot_step(const Policy& policy, const Instance& inst, AgeState& age, Rng& rng);

struct TraceRow {
  std::uint64_t slot;
  RequestId id;
  bool u, c, d;
  std::uint64_t h;  // age at the start of the slot

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct SimOptions {
  std::uint64_t slots = 1'000'000;
  std::uint64_t burn_in = 10'000;
  bool trace = false;
};

struct SimResult {
  std::vector<double> per_request;  // time-average age over slots (burn_in, T]
  double overall = 0.0;
  std::uint64_t slots = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// Counts over all T slots.
  std::vector<std::uint64_t> times_scheduled;
  std::vector<std::uint64_t> times_served;
  std::vector<TraceRow> trace;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

SimResult simulate(const Policy& policy, const Instance& inst, const SimOptions& opts, Rng& rng);

struct ReplicationStats {
  std::vector<SimResult> runs;
  double mean = 0.0;       // of the overall averages
  double std_error = 0.0;  // sample std / sqrt(n)
  double ci_low = 0.0;     // 95% Student-t interval
  double ci_high = 0.0;
  bool ci_degenerate = false;  // fewer than two replications
  std::vector<double> per_request_mean;
  std::vector<double> per_request_std_error;
};

/// Replication i uses Rng(base_seed, i). Runs on up to `workers` threads
/// (0 = hardware concurrency); results do not depend on the thread count.
ReplicationStats run_replications(const Policy& policy, const Instance& inst,
                                  const SimOptions& opts, int n_reps, std::uint64_t base_seed,
                                  unsigned workers = 0);

/// Aggregates finished replications.
ReplicationStats summarize(std::vector<SimResult> runs);

/// Runs fn(0..n-1) on a bounded pool of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned workers = 0);

}  // namespace qswitch
