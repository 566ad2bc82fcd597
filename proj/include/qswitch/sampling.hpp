#pragma once

// Seeded randomness and samplers.
//
// Rng is xoshiro256** (Blackman & Vigna). The state for (seed, stream) is
// produced by four successive splitmix64 outputs starting from `seed`,
// followed by `stream` applications of the standard xoshiro256 jump
// (2^128 steps). Doubles are (next() >> 11) * 2^-53; bounded integers use
// rejection on the top bits. Nothing depends on <random> distributions, so
// a stream can be replayed exactly by any reimplementation.

#include <cstdint>
#include <span>
#include <vector>

#include "qswitch/model.hpp"

namespace qswitch {

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on {0, ..., n-1}; n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void jump();

  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_;
};

inline constexpr double kProbabilitySumTolerance = 1e-9;

/// Draws index i with probability weights[i]. Weights must be nonnegative
/// and sum to 1 within kProbabilitySumTolerance.
std::size_t sample_categorical(std::span<const double> weights, Rng& rng);

/// Precomputed categorical distribution for repeated draws.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> weights);
  std::size_t operator()(Rng& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

struct MarginalItem {
  RequestId id = 0;
  double prob = 0.0;
};

/// Prescribed inclusion probabilities for a draw of exactly k items.
struct MarginalVector {
  std::vector<MarginalItem> items;
  int k = 0;

  double sum() const;
};

/// Systematic sampling with a random item order: items with marginal 1 are
/// always taken, the fractional items are shuffled and laid end to end on
/// [0, k'), and every point u, u+1, ..., u+k'-1 picks the item covering it.
/// Exactly k distinct ids per draw; inclusion probability of each item equals
/// its marginal.
class SystematicSampler {
 public:
  /// Validates and renormalizes `m` (sum must equal k within tolerance).
  explicit SystematicSampler(const MarginalVector& m);

  /// Appends the selected ids (unsorted) to `out`.
  void sample_into(Rng& rng, std::vector<RequestId>& out) const;
  int k() const { return k_; }

 private:
  int k_ = 0;
  int k_fractional_ = 0;
  std::vector<RequestId> always_;
  std::vector<MarginalItem> fractional_;
};

/// Returns the selected ids sorted ascending.
std::vector<RequestId> sample_without_replacement(const MarginalVector& m, Rng& rng);

}  // namespace qswitch
