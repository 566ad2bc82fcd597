#include <doctest.h>

#include "oracles.hpp"
#include "qswitch/optimize.hpp"
#include "qswitch/simulator.hpp"

using namespace qswitch;

namespace {

/// Schedules a fixed configuration every slot.
class FixedPolicy final : public Policy {
 public:
  explicit FixedPolicy(std::vector<RequestId> ids) : ids_(std::move(ids)) {}
  std::string_view name() const override { return "fixed"; }
  void decide_into(const Instance&, const AgeState&, Rng&, MemoryConfiguration& out) const override {
    out.scheduled = ids_;
  }

 private:
  std::vector<RequestId> ids_;
};

Instance pair_instance(double p1, double q) {
  NetworkConfig net{2, {p1, 1.0}, {{2, q}}};
  return Instance(net, build_request_set(2, AllRequests{}), 2);
}

Instance fig2(int memory) {
  return Instance(oracle::fig2_network(), build_request_set(5, AllRequests{}), memory);
}

}  // namespace

TEST_CASE("slot_step examples") {
  SUBCASE("perfect links always serve") {
    Instance inst = pair_instance(1.0, 1.0);
    FixedPolicy pol({0});
    AgeState age(1);
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
      auto out = slot_step(pol, inst, age, rng);
      CHECK(out.u(0));
      CHECK(out.b(0, 0));
      CHECK(out.b(0, 1));
      CHECK(out.c(0));
      CHECK(out.d(0));
      CHECK(age.age(0) == 1);
    }
  }
  SUBCASE("unscheduled requests age and draw nothing") {
    Instance inst = fig2(5);
    FixedPolicy pol({});
    AgeState age(inst.size());
    Rng rng(1), untouched(1);
    for (int t = 1; t <= 50; ++t) {
      auto out = slot_step(pol, inst, age, rng);
      CHECK_FALSE(out.u(3));
      CHECK_FALSE(out.d(3));
      CHECK(age.age(3) == static_cast<std::uint64_t>(t + 1));
    }
    CHECK(rng.next_u64() == untouched.next_u64());
  }
  SUBCASE("inadmissible configurations are contract violations") {
    Instance inst = fig2(5);
    AgeState age(inst.size());
    Rng rng(1);
    const RequestId pair = inst.cardinality_class(2)[0];
    const RequestId quad = inst.cardinality_class(4)[0];
    CHECK_THROWS_AS(slot_step(FixedPolicy({pair, quad}), inst, age, rng), ContractViolation);
    CHECK_THROWS_AS(slot_step(FixedPolicy({pair, pair}), inst, age, rng), ContractViolation);
    CHECK_THROWS_AS(slot_step(FixedPolicy({999}), inst, age, rng), ContractViolation);
  }
}

TEST_CASE("service frequency matches q * v") {
  Instance inst = pair_instance(0.9, 0.92);
  FixedPolicy pol({0});
  Rng rng(6);
  const auto res = simulate(pol, inst, {1'000'000, 1, false}, rng);
  REQUIRE(res.times_scheduled[0] == 1'000'000);
  const double freq = static_cast<double>(res.times_served[0]) / 1e6;
  CHECK(std::abs(freq - 0.828) <= oracle::binomial_band(0.828, 1e6, 3));
}

TEST_CASE("average age of a single always-scheduled request") {
  {
    Instance inst = pair_instance(1.0, 1.0);
    Rng rng(2);
    CHECK(simulate(FixedPolicy({0}), inst, {10'000, 100, false}, rng).overall == 1.0);
  }
  {
    Instance inst = pair_instance(1.0, 0.5);
    Rng rng(2);
    const double age = simulate(FixedPolicy({0}), inst, {1'000'000, 10'000, false}, rng).overall;
    CHECK(age == doctest::Approx(2.0).epsilon(0.01));
  }
}

TEST_CASE("age dynamics, admissibility and conditional service law") {
  Instance inst = fig2(7);
  const SSRParams ssr = optimal_ssr_params(inst).params;
  std::vector<std::unique_ptr<Policy>> pols;
  pols.push_back(std::make_unique<SsrPolicy>(ssr, inst));
  pols.push_back(std::make_unique<SmwPolicy>(smw_params_from(ssr, inst), inst));
  pols.push_back(std::make_unique<MmaPolicy>(optimal_mma_params(inst).params, inst));

  for (const auto& pol : pols) {
    CAPTURE(pol->name());
    AgeState age(inst.size());
    Rng rng(13);
    SlotOutcome out;
    std::vector<std::uint64_t> sched(inst.size(), 0), served(inst.size(), 0);
    const int slots = 200'000;
    bool dynamics_ok = true;
    for (int t = 0; t < slots; ++t) {
      const auto before = age.h();
      slot_step(*pol, inst, age, rng, out);
      REQUIRE(is_admissible(out.x, inst));
      for (RequestId r = 0; r < inst.size(); ++r) {
        const bool d = out.d(r);
        dynamics_ok = dynamics_ok && (d ? age.age(r) == 1 : age.age(r) == before[r] + 1);
        dynamics_ok = dynamics_ok && (!d || out.u(r));
        if (out.u(r)) {
          bool all = true;
          for (std::size_t k = 0; k < inst.request(r).users.size(); ++k) all = all && out.b(r, k);
          dynamics_ok = dynamics_ok && all == out.c(r) && (!d || all);
          dynamics_ok = dynamics_ok && out.find(r)->age_before == before[r];
        }
        sched[r] += out.u(r);
        served[r] += d;
      }
    }
    CHECK(dynamics_ok);
    for (RequestId r = 0; r < inst.size(); ++r) {
      if (sched[r] < 1000) continue;
      const double expect = inst.swap_prob(inst.request(r).cardinality()) * inst.service_prob(r);
      const double n = static_cast<double>(sched[r]);
      CHECK(std::abs(served[r] / n - expect) <= oracle::binomial_band(expect, n, 4));
    }
  }
}

TEST_CASE("lazy age accumulation equals the per-slot average of the trace") {
  Instance inst = fig2(6);
  SsrPolicy pol(optimal_ssr_params(inst).params, inst);
  Rng rng(4);
  const SimOptions opts{5'000, 700, true};
  const auto res = simulate(pol, inst, opts, rng);
  REQUIRE(res.trace.size() == opts.slots * inst.size());
  std::vector<std::uint64_t> sums(inst.size(), 0);
  std::vector<std::uint64_t> served(inst.size(), 0);
  for (const auto& row : res.trace) {
    if (row.slot > opts.burn_in) sums[row.id] += row.h;
    served[row.id] += row.d;
  }
  for (RequestId r = 0; r < inst.size(); ++r) {
    CHECK(res.per_request[r] == static_cast<double>(sums[r]) / (opts.slots - opts.burn_in));
    CHECK(served[r] == res.times_served[r]);
  }
}

TEST_CASE("simulation is reproducible") {
  Instance inst = fig2(9);
  MmaPolicy pol(optimal_mma_params(inst).params, inst);
  Rng a(77, 2), b(77, 2), c(78, 2);
  const SimOptions opts{50'000, 1'000, true};
  const auto ra = simulate(pol, inst, opts, a);
  CHECK(ra == simulate(pol, inst, opts, b));
  CHECK_FALSE(ra == simulate(pol, inst, opts, c));
  CHECK(ra.seed == 77);
  CHECK(ra.stream == 2);

  const auto one = run_replications(pol, inst, {20'000, 100, false}, 4, 5, 1);
  const auto many = run_replications(pol, inst, {20'000, 100, false}, 4, 5, 4);
  for (int i = 0; i < 4; ++i) CHECK(one.runs[i] == many.runs[i]);
  CHECK(one.mean == many.mean);
}

TEST_CASE("replication statistics") {
  SUBCASE("single replication") {
    Instance inst = fig2(5);
    SsrPolicy pol(optimal_ssr_params(inst).params, inst);
    const auto st = run_replications(pol, inst, {20'000, 100, false}, 1, 3);
    CHECK(st.ci_degenerate);
    CHECK(st.mean == st.runs[0].overall);
    CHECK(st.ci_low == st.mean);
    CHECK(st.ci_high == st.mean);
    CHECK(st.per_request_mean == st.runs[0].per_request);
  }
  SUBCASE("deterministic dynamics have zero variance") {
    Instance inst = pair_instance(1.0, 1.0);
    SsrPolicy pol(optimal_ssr_params(inst).params, inst);
    const auto st = run_replications(pol, inst, {5'000, 10, false}, 5, 3);
    CHECK_FALSE(st.ci_degenerate);
    CHECK(st.mean == 1.0);
    CHECK(st.std_error == 0.0);
    CHECK(st.ci_low == st.ci_high);
  }
  SUBCASE("20 replications of the SSR point at M=5 cover the closed form") {
    Instance inst = fig2(5);
    const SSRParams p = optimal_ssr_params(inst).params;
    SsrPolicy pol(p, inst);
    const double exact = *ssr_average_age(p, inst).overall;
    const auto st = run_replications(pol, inst, {1'000'000, 10'000, false}, 20, 2024);
    CHECK(st.ci_low <= exact);
    CHECK(exact <= st.ci_high);
  }
  CHECK_THROWS_AS(summarize({}), ValidationError);
}

TEST_CASE("slots must exceed burn-in") {
  Instance inst = pair_instance(1.0, 1.0);
  Rng rng(1);
  CHECK_THROWS_AS(simulate(FixedPolicy({0}), inst, {100, 100, false}, rng), ValidationError);
}
