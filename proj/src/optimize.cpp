#include "qswitch/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace qswitch {

double marginal_sum(std::span<const double> v, double gamma) {
  double g = 0.0;
  for (double vr : v) g += std::min(1.0, 1.0 / std::sqrt(vr * gamma));
  return g;
}

GammaResult gamma_search(std::span<const double> v, int m, double tol) {
  if (m < 1 || m >= static_cast<int>(v.size()))
    throw std::invalid_argument("gamma_search needs 1 <= m < |C(lambda)|; use all-ones marginals "
                                "when M_lambda = |C(lambda)|");
  for (double vr : v)
    if (!(vr > 0.0 && vr <= 1.0)) throw ValidationError("service probability outside (0,1]");

  const double target = m;
  double lo = std::numeric_limits<double>::infinity();
  for (double vr : v) lo = std::min(lo, 1.0 / vr);
  // g(lo) = |C| > m here; find hi with g(hi) < m.
  double hi = lo;
  int iterations = 0;
  while (marginal_sum(v, hi) >= target) {
    hi *= 2.0;
    ++iterations;
  }

  GammaResult best{hi, std::abs(marginal_sum(v, hi) - target), iterations};
  while (iterations < 4000) {
    ++iterations;
    const double mid = 0.5 * (lo + hi);
    const double g = marginal_sum(v, mid);
    const double residual = std::abs(g - target);
    if (residual < best.residual) best = {mid, residual, iterations};
    if (residual == 0.0 || mid <= lo || mid >= hi) break;
    if (g > target)
      lo = mid;
    else
      hi = mid;
  }
  best.iterations = iterations;
  if (best.residual > tol)
    throw SolverError("gamma search residual " + std::to_string(best.residual) +
                      " above tolerance");
  return best;
}

ClassMarginals optimal_marginals(const Instance& inst, Cardinality lambda) {
  const auto& cls = inst.cardinality_class(lambda);
  const int budget = inst.class_budget(lambda);
  ClassMarginals out;
  out.marginals.k = budget;
  if (budget == static_cast<int>(cls.size())) {
    for (RequestId r : cls) out.marginals.items.push_back({r, 1.0});
    return out;
  }
  std::vector<double> v;
  for (RequestId r : cls) v.push_back(inst.service_prob(r));
  out.gamma = gamma_search(v, budget);
  for (std::size_t i = 0; i < cls.size(); ++i)
    out.marginals.items.push_back({cls[i], std::min(1.0, 1.0 / std::sqrt(out.gamma->gamma * v[i]))});
  return out;
}

double class_cost(const Instance& inst, const MarginalVector& m) {
  double f = 0.0;
  for (const auto& item : m.items) f += 1.0 / (item.prob * inst.service_prob(item.id));
  return f;
}

std::map<Cardinality, double> optimal_cardinality_dist(
    const Instance& inst, const std::map<Cardinality, MarginalVector>& marginals) {
  std::map<Cardinality, double> root;
  double total = 0.0;
  for (Cardinality lambda : inst.cardinalities()) {
    const MarginalVector& m = marginals.at(lambda);
    for (const auto& item : m.items)
      if (!(item.prob > 0.0))
        throw ValidationError("zero marginal for request " + std::to_string(item.id) +
                              ": the cardinality law is undefined");
    root[lambda] = std::sqrt(class_cost(inst, m) / inst.swap_prob(lambda));
    total += root[lambda];
  }
  for (auto& [lambda, x] : root) x /= total;
  return root;
}

OptimalSsr optimal_ssr_params(const Instance& inst) {
  OptimalSsr out;
  for (Cardinality lambda : inst.cardinalities()) {
    auto cm = optimal_marginals(inst, lambda);
    out.gammas[lambda] = cm.gamma;
    out.class_costs[lambda] = class_cost(inst, cm.marginals);
    out.params.marginals[lambda] = std::move(cm.marginals);
  }
  out.params.mu0 = optimal_cardinality_dist(inst, out.params.marginals);
  return out;
}

SMWParams smw_params_from(const SSRParams& ssr, const Instance& inst) {
  SMWParams out;
  out.mu0 = ssr.mu0;
  out.denominators.assign(inst.size(), 0.0);
  for (const auto& [lambda, m] : ssr.marginals)
    for (const auto& item : m.items) out.denominators.at(item.id) = item.prob;
  return out;
}

std::vector<std::vector<Cardinality>> enumerate_maximal_subsets(
    std::span<const Cardinality> lambdas_in, int memory) {
  std::vector<Cardinality> lambdas(lambdas_in.begin(), lambdas_in.end());
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  if (static_cast<int>(lambdas.size()) > kMaxEnumeratedCardinalities)
    throw ValidationError("too many distinct cardinalities to enumerate subsets (" +
                          std::to_string(lambdas.size()) + " > " +
                          std::to_string(kMaxEnumeratedCardinalities) + ")");

  const std::size_t n = lambdas.size();
  std::vector<std::vector<Cardinality>> out;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    long used = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) used += lambdas[i];
    if (used > memory) continue;
    bool maximal = true;
    for (std::size_t i = 0; i < n && maximal; ++i)
      if (!(mask & (1u << i)) && used + lambdas[i] <= memory) maximal = false;
    if (!maximal) continue;
    std::vector<Cardinality> subset;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) subset.push_back(lambdas[i]);
    out.push_back(std::move(subset));
  }
  std::sort(out.begin(), out.end());
  return out;
}

MmaWeights mma_weights(const Instance& inst) {
  MmaWeights out;
  for (Cardinality lambda : inst.cardinalities()) {
    const auto& cls = inst.cardinality_class(lambda);
    double beta = 0.0, inv2 = 0.0;
    for (RequestId r : cls) {
      const double v = inst.service_prob(r);
      beta += 1.0 / v;
      inv2 += 1.0 / (v * v);
    }
    out.beta[lambda] = beta;
    out.inv_v2_sum[lambda] = inv2;
    out.w[lambda] = static_cast<double>(cls.size()) / (2.0 * inst.swap_prob(lambda)) *
                    (inv2 / beta + beta);
  }
  return out;
}

std::map<Cardinality, double> subset_coverage(const std::vector<std::vector<Cardinality>>& subsets,
                                              std::span<const double> phi) {
  std::map<Cardinality, double> theta;
  for (std::size_t i = 0; i < subsets.size(); ++i)
    for (Cardinality lambda : subsets[i]) theta[lambda] += phi[i];
  return theta;
}

double subset_objective(const std::vector<std::vector<Cardinality>>& subsets,
                        std::span<const double> phi, const std::map<Cardinality, double>& w) {
  const auto theta = subset_coverage(subsets, phi);
  double f = 0.0;
  for (const auto& [lambda, wl] : w) {
    if (wl == 0.0) continue;
    auto it = theta.find(lambda);
    if (it == theta.end() || !(it->second > 0.0)) return std::numeric_limits<double>::infinity();
    f += wl / it->second;
  }
  return f;
}

std::vector<double> project_to_simplex(std::span<const double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0, tau = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumsum += sorted[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) tau = t;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(0.0, x[i] - tau);
  return out;
}

namespace {

// Gradient of sum_lambda w / theta with respect to phi.
std::vector<double> subset_gradient(const std::vector<std::vector<Cardinality>>& subsets,
                                    std::span<const double> phi,
                                    const std::map<Cardinality, double>& w) {
  const auto theta = subset_coverage(subsets, phi);
  std::vector<double> grad(subsets.size(), 0.0);
  for (std::size_t i = 0; i < subsets.size(); ++i)
    for (Cardinality lambda : subsets[i]) {
      auto it = w.find(lambda);
      if (it == w.end()) continue;
      const double th = theta.at(lambda);
      grad[i] -= it->second / (th * th);
    }
  return grad;
}

double duality_gap(std::span<const double> phi, std::span<const double> grad) {
  // grad . (phi - e_j) with j = argmin grad.
  const double best = *std::min_element(grad.begin(), grad.end());
  double gap = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) gap += phi[i] * (grad[i] - best);
  return gap;
}

}  // namespace

SubsetDistResult optimal_subset_dist(const std::vector<std::vector<Cardinality>>& subsets,
                                     const std::map<Cardinality, double>& w, double tol,
                                     int max_iterations) {
  const std::size_t n = subsets.size();
  if (n == 0) throw ValidationError("no cardinality subsets to weight");
  for (const auto& [lambda, wl] : w) {
    if (!(wl >= 0.0)) throw ValidationError("negative subset weight");
    if (wl == 0.0) continue;
    bool covered = std::any_of(subsets.begin(), subsets.end(), [&](const auto& s) {
      return std::find(s.begin(), s.end(), lambda) != s.end();
    });
    if (!covered)
      throw ValidationError("cardinality " + std::to_string(lambda) + " is in no subset");
  }

  SubsetDistResult res;
  res.phi.assign(n, 1.0 / static_cast<double>(n));
  res.objective = subset_objective(subsets, res.phi, w);
  if (n == 1) return res;

  // Accelerated projected gradient with gradient-based restarts. x = res.phi
  // is the iterate; y the extrapolated point the step is taken from.
  std::vector<double> grad = subset_gradient(subsets, res.phi, w);
  std::vector<double> y = res.phi, grad_y = grad;
  double f_y = res.objective;
  double momentum = 1.0;
  double step = 1.0 / std::max(1e-300, std::abs(*std::min_element(grad.begin(), grad.end())));
  std::vector<double> trial(n), trial_grad(n);

  auto restart = [&] {
    y = res.phi;
    grad_y = grad;
    f_y = res.objective;
    momentum = 1.0;
  };

  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    res.kkt_residual = duality_gap(res.phi, grad) / res.objective;
    if (res.kkt_residual <= tol) return res;

    // Backtracking on the sufficient decrease condition at y. Near the
    // optimum the objective difference drowns in rounding, so the matching
    // bound from the gradient change along the step also counts (valid
    // because the objective is convex).
    bool accepted = false;
    for (int bt = 0; bt < 200; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = y[i] - step * grad_y[i];
      trial = project_to_simplex(trial);
      const double f_trial = subset_objective(subsets, trial, w);
      double lin = 0.0, dist2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = trial[i] - y[i];
        lin += grad_y[i] * d;
        dist2 += d * d;
      }
      if (dist2 == 0.0) break;
      if (std::isfinite(f_trial)) {
        trial_grad = subset_gradient(subsets, trial, w);
        bool ok = f_trial <= f_y + lin + dist2 / (2.0 * step);
        if (!ok) {
          double curvature = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            curvature += (trial_grad[i] - grad_y[i]) * (trial[i] - y[i]);
          ok = curvature <= dist2 / (2.0 * step);
        }
        if (ok) {
          accepted = true;
          res.objective = f_trial;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (momentum == 1.0 && y == res.phi) break;
      restart();
      continue;
    }

    // Restart when the step points against the previous direction.
    double dir = 0.0;
    for (std::size_t i = 0; i < n; ++i) dir += (y[i] - trial[i]) * (trial[i] - res.phi[i]);
    const std::vector<double> prev = res.phi;
    res.phi = trial;
    grad = trial_grad;
    step *= 2.0;
    if (dir > 0.0) {
      restart();
      continue;
    }
    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next;
    momentum = next;
    for (std::size_t i = 0; i < n; ++i) y[i] = res.phi[i] + beta * (res.phi[i] - prev[i]);
    f_y = subset_objective(subsets, y, w);
    const auto theta = subset_coverage(subsets, y);
    const bool interior = std::all_of(theta.begin(), theta.end(), [](const auto& kv) { return kv.second > 0.0; });
    if (!interior || !std::isfinite(f_y)) {
      restart();
      continue;
    }
    grad_y = subset_gradient(subsets, y, w);
  }

  res.kkt_residual = duality_gap(res.phi, grad) / res.objective;
  if (res.kkt_residual <= tol) return res;
  std::ostringstream os;
  os << "subset distribution solver stopped after " << res.iterations
     << " iterations with relative KKT residual " << res.kkt_residual << " (tolerance " << tol
     << ", objective " << res.objective << ")";
  throw SolverError(os.str());
}

OptimalMma optimal_mma_params(const Instance& inst, double tol) {
  OptimalMma out;
  out.params.subsets = enumerate_maximal_subsets(inst.cardinalities(), inst.memory());
  out.weights = mma_weights(inst);
  auto sol = optimal_subset_dist(out.params.subsets, out.weights.w, tol);
  out.params.phi = std::move(sol.phi);
  out.objective = sol.objective;
  out.kkt_residual = sol.kkt_residual;
  out.iterations = sol.iterations;
  return out;
}

}  // namespace qswitch
