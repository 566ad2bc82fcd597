#include "qswitch/analytics.hpp"

#include <cmath>

#include "qswitch/optimize.hpp"

namespace qswitch {

std::string_view to_string(AgeSource s) {
  switch (s) {
    case AgeSource::SsrClosedForm: return "ssr-closed-form";
    case AgeSource::MmaClosedForm: return "mma-closed-form";
    case AgeSource::RenewalOracle: return "renewal-oracle";
    case AgeSource::Simulation: return "simulation";
  }
  return "unknown";
}

Age mean_age(std::span<const Age> ages) {
  if (ages.empty()) return std::nullopt;
  double sum = 0.0;
  for (const Age& a : ages) {
    if (!a) return std::nullopt;
    sum += *a;
  }
  return sum / static_cast<double>(ages.size());
}

AgeReport ssr_average_age(const SSRParams& params, const Instance& inst) {
  AgeReport rep;
  rep.source = AgeSource::SsrClosedForm;
  rep.per_request.assign(inst.size(), std::nullopt);
  for (Cardinality lambda : inst.cardinalities()) {
    const double mu0 = params.mu0.at(lambda);
    const double q = inst.swap_prob(lambda);
    for (const auto& item : params.marginals.at(lambda).items) {
      const double s = mu0 * q * item.prob * inst.service_prob(item.id);
      if (s > 0.0) rep.per_request.at(item.id) = 1.0 / s;
    }
  }
  rep.overall = mean_age(rep.per_request);
  return rep;
}

Age mma_request_age(const Instance& inst, const std::vector<std::vector<Cardinality>>& subsets,
                    std::span<const double> phi, RequestId r) {
  const Cardinality lambda = inst.request(r).cardinality();
  const auto theta_map = subset_coverage(subsets, phi);
  auto it = theta_map.find(lambda);
  if (it == theta_map.end() || !(it->second > 0.0)) return std::nullopt;
  const double theta = it->second;

  double beta = 0.0, inv2 = 0.0;
  for (RequestId other : inst.cardinality_class(lambda)) {
    const double v = inst.service_prob(other);
    beta += 1.0 / v;
    inv2 += 1.0 / (v * v);
  }
  return (inv2 / beta + beta) / (2.0 * theta * inst.swap_prob(lambda));
}

AgeReport mma_average_age(const MMAParams& params, const Instance& inst) {
  AgeReport rep;
  rep.source = AgeSource::MmaClosedForm;
  rep.per_request.reserve(inst.size());
  for (RequestId r = 0; r < inst.size(); ++r)
    rep.per_request.push_back(mma_request_age(inst, params.subsets, params.phi, r));
  rep.overall = mean_age(rep.per_request);
  return rep;
}

double renewal_average_age(double mean_interval, double second_moment) {
  return (second_moment + mean_interval) / (2.0 * mean_interval);
}

Age renewal_oracle_ssr(double s) {
  if (!(s > 0.0)) return std::nullopt;
  if (s > 1.0) throw ValidationError("service probability above 1");
  const double mean = 1.0 / s;
  const double var = (1.0 - s) / (s * s);
  return renewal_average_age(mean, var + mean * mean);
}

Age renewal_oracle_mma(std::span<const double> success_probs) {
  if (success_probs.empty()) throw ValidationError("empty class");
  double mean = 0.0, var = 0.0;
  for (double s : success_probs) {
    if (s == 0.0) return std::nullopt;
    if (!(s > 0.0 && s <= 1.0)) throw ValidationError("success probability outside (0,1]");
    mean += 1.0 / s;
    var += (1.0 - s) / (s * s);
  }
  return renewal_average_age(mean, var + mean * mean);
}

}  // namespace qswitch
