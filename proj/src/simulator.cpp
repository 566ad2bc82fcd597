#include "qswitch/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace qswitch {

const ScheduledOutcome* SlotOutcome::find(RequestId r) const {
  auto it = std::lower_bound(scheduled.begin(), scheduled.end(), r,
                             [](const ScheduledOutcome& s, RequestId id) { return s.id < id; });
  return (it != scheduled.end() && it->id == r) ? &*it : nullptr;
}

bool SlotOutcome::c(RequestId r) const {
  const auto* s = find(r);
  return s && s->all_lle;
}

bool SlotOutcome::d(RequestId r) const {
  const auto* s = find(r);
  return s && s->served;
}

bool SlotOutcome::b(RequestId r, std::size_t k) const {
  const auto* s = find(r);
  return s && lle.at(s->lle_offset + k) != 0;
}

namespace {

void check_admissible(const MemoryConfiguration& x, const Instance& inst) {
  long used = 0;
  for (std::size_t i = 0; i < x.scheduled.size(); ++i) {
    const RequestId r = x.scheduled[i];
    if (r >= inst.size())
      throw ContractViolation("policy scheduled unknown request " + std::to_string(r));
    if (i > 0 && x.scheduled[i - 1] >= r)
      throw ContractViolation("policy output must be strictly increasing request ids");
    used += inst.request(r).cardinality();
  }
  if (used > inst.memory())
    throw ContractViolation("inadmissible configuration: uses " + std::to_string(used) +
                            " registers, memory is " + std::to_string(inst.memory()));
}

// Sum of ages over slots t in (last, end] with t > burn_in; age at t is t - last.
std::uint64_t age_segment_sum(std::uint64_t last, std::uint64_t end, std::uint64_t burn_in) {
  const std::uint64_t lo = std::max(last + 1, burn_in + 1);
  if (lo > end) return 0;
  const std::uint64_t a0 = lo - last, a1 = end - last;
  return (a0 + a1) * (a1 - a0 + 1) / 2;
}

}  // namespace

void slot_step(const Policy& policy, const Instance& inst, AgeState& age, Rng& rng,
               SlotOutcome& out) {
  out.slot = age.t;
  policy.decide_into(inst, age, rng, out.x);
  check_admissible(out.x, inst);

  out.scheduled.clear();
  out.lle.clear();
  const auto& p = inst.network().p;
  for (RequestId r : out.x.scheduled) {
    const Request& req = inst.request(r);
    ScheduledOutcome s;
    s.id = r;
    s.lle_offset = static_cast<std::uint32_t>(out.lle.size());
    s.age_before = age.age(r);
    bool all = true;
    for (UserId u : req.users) {
      const bool ok = rng.bernoulli(p[u]);
      out.lle.push_back(ok);
      all = all && ok;
    }
    s.all_lle = all;
    s.served = all && rng.bernoulli(inst.swap_prob(req.cardinality()));
    out.scheduled.push_back(s);
  }
  for (const auto& s : out.scheduled)
    if (s.served) age.last_service[s.id] = age.t;
  ++age.t;
}

SlotOutcome slot_step(const Policy& policy, const Instance& inst, AgeState& age, Rng& rng) {
  SlotOutcome out;
  slot_step(policy, inst, age, rng, out);
  return out;
}

SimResult simulate(const Policy& policy, const Instance& inst, const SimOptions& opts, Rng& rng) {
  if (opts.slots <= opts.burn_in)
    throw ValidationError("slot count must exceed the burn-in length");

  const std::size_t n = inst.size();
  SimResult res;
  res.slots = opts.slots;
  res.burn_in = opts.burn_in;
  res.seed = rng.seed();
  res.stream = rng.stream();
  res.times_scheduled.assign(n, 0);
  res.times_served.assign(n, 0);
  if (opts.trace) res.trace.reserve(opts.slots * n);

  std::vector<std::uint64_t> age_sum(n, 0);
  AgeState age(n);
  SlotOutcome out;
  for (std::uint64_t t = 1; t <= opts.slots; ++t) {
    slot_step(policy, inst, age, rng, out);
    for (const auto& s : out.scheduled) {
      ++res.times_scheduled[s.id];
      if (s.served) {
        ++res.times_served[s.id];
        age_sum[s.id] += age_segment_sum(t - s.age_before, t, opts.burn_in);
      }
    }
    if (opts.trace) {
      // Ages at the start of slot t; served requests were already reset.
      for (RequestId r = 0; r < n; ++r) {
        const auto* s = out.find(r);
        const std::uint64_t h = s ? s->age_before : age.t - 1 - age.last_service[r];
        res.trace.push_back({t, r, s != nullptr, s && s->all_lle, s && s->served, h});
      }
    }
  }
  for (RequestId r = 0; r < n; ++r)
    age_sum[r] += age_segment_sum(age.last_service[r], opts.slots, opts.burn_in);

  const double window = static_cast<double>(opts.slots - opts.burn_in);
  res.per_request.resize(n);
  double total = 0.0;
  for (RequestId r = 0; r < n; ++r) {
    res.per_request[r] = static_cast<double>(age_sum[r]) / window;
    total += res.per_request[r];
  }
  res.overall = total / static_cast<double>(n);
  return res;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ReplicationStats summarize(std::vector<SimResult> runs) {
  ReplicationStats st;
  const std::size_t n = runs.size();
  if (n == 0) throw ValidationError("no replications to summarize");
  const std::size_t reqs = runs.front().per_request.size();

  auto mean_se = [n](auto value) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += value(i);
    m /= static_cast<double>(n);
    if (n < 2) return std::pair{m, 0.0};
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (value(i) - m) * (value(i) - m);
    return std::pair{m, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
  };

  std::tie(st.mean, st.std_error) = mean_se([&](std::size_t i) { return runs[i].overall; });
  st.per_request_mean.resize(reqs);
  st.per_request_std_error.resize(reqs);
  for (std::size_t r = 0; r < reqs; ++r)
    std::tie(st.per_request_mean[r], st.per_request_std_error[r]) =
        mean_se([&](std::size_t i) { return runs[i].per_request[r]; });

  st.ci_degenerate = n < 2;
  double half = 0.0;
  if (!st.ci_degenerate) {
    boost::math::students_t dist(static_cast<double>(n - 1));
    half = boost::math::quantile(boost::math::complement(dist, 0.025)) * st.std_error;
  }
  st.ci_low = st.mean - half;
  st.ci_high = st.mean + half;
  st.runs = std::move(runs);
  return st;
}

ReplicationStats run_replications(const Policy& policy, const Instance& inst,
                                  const SimOptions& opts, int n_reps, std::uint64_t base_seed,
                                  unsigned workers) {
  if (n_reps < 1) throw ValidationError("need at least one replication");
  std::vector<SimResult> runs(static_cast<std::size_t>(n_reps));
  parallel_for(
      runs.size(),
      [&](std::size_t i) {
        Rng rng(base_seed, i);
        runs[i] = simulate(policy, inst, opts, rng);
      },
      workers);
  return summarize(std::move(runs));
}

}  // namespace qswitch
