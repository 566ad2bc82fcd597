#pragma once

// Optimal parameters for the three policy families.

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qswitch/model.hpp"
#include "qswitch/policies.hpp"

namespace qswitch {

/// Raised when an iterative solver hits its iteration cap.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GammaResult {
  double gamma = 0.0;
  double residual = 0.0;  // |g(gamma) - m|
  int iterations = 0;
};

/// g(gamma) = sum_r min{1, 1 / sqrt(v_r * gamma)}.
double marginal_sum(std::span<const double> v, double gamma);

/// Finds gamma with g(gamma) = m for 1 <= m < |v|, by bracketing from
/// gamma_lo = min_r 1/v_r (where g = |v|) with doubling, then bisection.
GammaResult gamma_search(std::span<const double> v, int m, double tol = 1e-10);

struct ClassMarginals {
  MarginalVector marginals;
  std::optional<GammaResult> gamma;  // empty when M_lambda = |C(lambda)|
};

/// Age-optimal inclusion probabilities for class `lambda`.
ClassMarginals optimal_marginals(const Instance& inst, Cardinality lambda);

/// f_lambda = sum_{r in C(lambda)} 1 / (mu(r) v(r)).
double class_cost(const Instance& inst, const MarginalVector& m);

/// mu0(lambda) proportional to sqrt(f_lambda / q_lambda).
std::map<Cardinality, double> optimal_cardinality_dist(
    const Instance& inst, const std::map<Cardinality, MarginalVector>& marginals);

struct OptimalSsr {
  SSRParams params;
  std::map<Cardinality, std::optional<GammaResult>> gammas;
  std::map<Cardinality, double> class_costs;
};

OptimalSsr optimal_ssr_params(const Instance& inst);

/// SMW uses the optimal SSR cardinality law and marginals as weight denominators.
SMWParams smw_params_from(const SSRParams& ssr, const Instance& inst);

inline constexpr int kMaxEnumeratedCardinalities = 16;

/// All maximal subsets S of `lambdas` with sum(S) <= memory, in lexicographic
/// order of their sorted elements.
std::vector<std::vector<Cardinality>> enumerate_maximal_subsets(
    std::span<const Cardinality> lambdas, int memory);

struct MmaWeights {
  std::map<Cardinality, double> w;
  std::map<Cardinality, double> beta;          // sum 1/v(r)
  std::map<Cardinality, double> inv_v2_sum;    // sum 1/v(r)^2
};

MmaWeights mma_weights(const Instance& inst);

/// theta_lambda = total phi mass of subsets containing lambda.
std::map<Cardinality, double> subset_coverage(const std::vector<std::vector<Cardinality>>& subsets,
                                              std::span<const double> phi);

/// sum_lambda w_lambda / theta_lambda; +inf when a weighted lambda is uncovered.
double subset_objective(const std::vector<std::vector<Cardinality>>& subsets,
                        std::span<const double> phi, const std::map<Cardinality, double>& w);

struct SubsetDistResult {
  std::vector<double> phi;
  double objective = 0.0;
  /// Frank-Wolfe duality gap divided by the objective. Upper-bounds the
  /// relative suboptimality, and is zero exactly at KKT points.
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Accelerated projected gradient on the simplex, with backtracking and restarts.
SubsetDistResult optimal_subset_dist(const std::vector<std::vector<Cardinality>>& subsets,
                                     const std::map<Cardinality, double>& w,
                                     double tol = 1e-8, int max_iterations = 100000);

/// Euclidean projection onto {x >= 0, sum x = 1}.
std::vector<double> project_to_simplex(std::span<const double> x);

struct OptimalMma {
  MMAParams params;
  MmaWeights weights;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Every maximal subset of the instance's cardinalities with phi*.
OptimalMma optimal_mma_params(const Instance& inst, double tol = 1e-8);

}  // namespace qswitch
