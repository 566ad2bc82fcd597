#include "qswitch/policies.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace qswitch {

namespace {

void validate_mu0(const std::map<Cardinality, double>& mu0, const Instance& inst) {
  double total = 0.0;
  for (const auto& [lambda, w] : mu0) {
    if (!std::binary_search(inst.cardinalities().begin(), inst.cardinalities().end(), lambda))
      throw ValidationError("mu0 has an entry for absent cardinality " + std::to_string(lambda));
    if (!(w >= 0.0 && w <= 1.0))
      throw ValidationError("mu0(" + std::to_string(lambda) + ") outside [0,1]");
    total += w;
  }
  for (Cardinality lambda : inst.cardinalities())
    if (!mu0.contains(lambda))
      throw ValidationError("mu0 is missing cardinality " + std::to_string(lambda));
  if (std::abs(total - 1.0) > kProbabilitySumTolerance)
    throw ValidationError("mu0 sums to " + std::to_string(total) + ", not 1");
}

std::vector<double> mu0_weights(const std::map<Cardinality, double>& mu0, const Instance& inst) {
  validate_mu0(mu0, inst);
  std::vector<double> w;
  for (Cardinality lambda : inst.cardinalities()) w.push_back(mu0.at(lambda));
  return w;
}

std::vector<double> checked_phi(const MMAParams& params, const Instance& inst) {
  validate_mma_params(params, inst);
  return params.phi;
}

}  // namespace

void validate_ssr_params(const SSRParams& params, const Instance& inst) {
  validate_mu0(params.mu0, inst);
  for (Cardinality lambda : inst.cardinalities()) {
    auto it = params.marginals.find(lambda);
    if (it == params.marginals.end())
      throw ValidationError("missing marginals for cardinality " + std::to_string(lambda));
    const MarginalVector& m = it->second;
    if (m.k != inst.class_budget(lambda))
      throw ValidationError("marginals for cardinality " + std::to_string(lambda) +
                            " must target M_lambda = " +
                            std::to_string(inst.class_budget(lambda)));
    std::vector<RequestId> ids;
    for (const auto& item : m.items) ids.push_back(item.id);
    std::sort(ids.begin(), ids.end());
    if (ids != inst.cardinality_class(lambda))
      throw ValidationError("marginals for cardinality " + std::to_string(lambda) +
                            " must cover exactly that class");
    SystematicSampler check(m);  // range and sum checks
  }
  if (params.marginals.size() != inst.cardinalities().size())
    throw ValidationError("marginals given for an absent cardinality");
}

void validate_smw_params(const SMWParams& params, const Instance& inst) {
  validate_mu0(params.mu0, inst);
  if (params.denominators.size() != inst.size())
    throw ValidationError("SMW needs one weight denominator per request");
  for (std::size_t r = 0; r < params.denominators.size(); ++r)
    if (!(params.denominators[r] > 0.0) || !std::isfinite(params.denominators[r]))
      throw ValidationError("SMW weight denominator of request " + std::to_string(r) +
                            " must be positive");
}

void validate_mma_params(const MMAParams& params, const Instance& inst) {
  if (params.subsets.empty()) throw ValidationError("MMA needs at least one cardinality subset");
  if (params.phi.size() != params.subsets.size())
    throw ValidationError("MMA phi must have one entry per subset");
  const auto& lambdas = inst.cardinalities();
  std::set<std::vector<Cardinality>> seen;
  for (auto subset : params.subsets) {
    std::sort(subset.begin(), subset.end());
    if (subset.empty()) throw ValidationError("MMA subset is empty");
    if (std::adjacent_find(subset.begin(), subset.end()) != subset.end())
      throw ValidationError("MMA subset repeats a cardinality");
    long used = 0;
    for (Cardinality lambda : subset) {
      if (!std::binary_search(lambdas.begin(), lambdas.end(), lambda))
        throw ValidationError("MMA subset uses cardinality " + std::to_string(lambda) +
                              " with no requests");
      used += lambda;
    }
    if (used > inst.memory()) throw ValidationError("MMA subset exceeds memory");
    for (Cardinality lambda : lambdas)
      if (!std::binary_search(subset.begin(), subset.end(), lambda) &&
          used + lambda <= inst.memory())
        throw ValidationError("MMA subset is not maximal: cardinality " +
                              std::to_string(lambda) + " still fits");
    if (!seen.insert(subset).second) throw ValidationError("MMA subsets must be distinct");
  }
  CategoricalSampler check(params.phi);
}

SsrPolicy::SsrPolicy(SSRParams params, const Instance& inst)
    : params_(std::move(params)),
      lambdas_(inst.cardinalities()),
      pick_lambda_(mu0_weights(params_.mu0, inst)) {
  validate_ssr_params(params_, inst);
  for (Cardinality lambda : lambdas_) samplers_.emplace_back(params_.marginals.at(lambda));
}

void SsrPolicy::decide_into(const Instance&, const AgeState&, Rng& rng,
                            MemoryConfiguration& out) const {
  out.scheduled.clear();
  const std::size_t j = pick_lambda_(rng);
  samplers_[j].sample_into(rng, out.scheduled);
  std::sort(out.scheduled.begin(), out.scheduled.end());
}

SmwPolicy::SmwPolicy(SMWParams params, const Instance& inst)
    : params_(std::move(params)),
      lambdas_(inst.cardinalities()),
      pick_lambda_(mu0_weights(params_.mu0, inst)) {
  validate_smw_params(params_, inst);
}

void SmwPolicy::decide_into(const Instance& inst, const AgeState& age, Rng& rng,
                            MemoryConfiguration& out) const {
  const Cardinality lambda = lambdas_[pick_lambda_(rng)];
  const auto& cls = inst.cardinality_class(lambda);
  const auto budget = static_cast<std::size_t>(inst.class_budget(lambda));
  out.scheduled.assign(cls.begin(), cls.end());
  if (budget < cls.size()) {
    const auto& den = params_.denominators;
    auto heavier = [&](RequestId a, RequestId b) {
      const double wa = static_cast<double>(age.age(a)) / den[a];
      const double wb = static_cast<double>(age.age(b)) / den[b];
      return wa != wb ? wa > wb : a < b;
    };
    std::nth_element(out.scheduled.begin(), out.scheduled.begin() + budget,
                     out.scheduled.end(), heavier);
    out.scheduled.resize(budget);
    std::sort(out.scheduled.begin(), out.scheduled.end());
  }
}

MmaPolicy::MmaPolicy(MMAParams params, const Instance& inst)
    : params_(std::move(params)), pick_subset_(checked_phi(params_, inst)) {
  for (auto& s : params_.subsets) std::sort(s.begin(), s.end());
}

void MmaPolicy::decide_into(const Instance& inst, const AgeState& age, Rng& rng,
                            MemoryConfiguration& out) const {
  out.scheduled.clear();
  const auto& subset = params_.subsets[pick_subset_(rng)];
  for (Cardinality lambda : subset) {
    const auto& cls = inst.cardinality_class(lambda);
    RequestId best = cls.front();
    std::uint64_t best_age = age.age(best);
    for (RequestId r : cls) {
      const std::uint64_t h = age.age(r);
      if (h > best_age) {
        best = r;
        best_age = h;
      }
    }
    out.scheduled.push_back(best);
  }
  std::sort(out.scheduled.begin(), out.scheduled.end());
}

MemoryConfiguration ssr_decide(const SsrPolicy& policy, const Instance& inst, Rng& rng) {
  return policy.decide(inst, AgeState(inst.size()), rng);
}

MemoryConfiguration smw_decide(const SmwPolicy& policy, const Instance& inst,
                               const AgeState& age, Rng& rng) {
  return policy.decide(inst, age, rng);
}

MemoryConfiguration mma_decide(const MmaPolicy& policy, const Instance& inst,
                               const AgeState& age, Rng& rng) {
  return policy.decide(inst, age, rng);
}

}  // namespace qswitch
