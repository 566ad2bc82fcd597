#include "qswitch/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace qswitch {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
  for (std::uint64_t i = 0; i < stream; ++i) jump();
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

void Rng::jump() {
  static constexpr std::uint64_t kJump[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                            0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
  std::uint64_t acc[4] = {0, 0, 0, 0};
  for (std::uint64_t word : kJump) {
    for (int b = 0; b < 64; ++b) {
      if (word & (std::uint64_t{1} << b))
        for (int i = 0; i < 4; ++i) acc[i] ^= s_[i];
      next_u64();
    }
  }
  std::copy(std::begin(acc), std::end(acc), std::begin(s_));
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n <= 1) return 0;
  // Smallest all-ones mask covering n-1, then reject.
  const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(n - 1);
  while (true) {
    std::uint64_t x = next_u64() >> 11;  // top bits
    x &= mask;
    if (x < n) return x;
  }
}

CategoricalSampler::CategoricalSampler(std::span<const double> weights) {
  if (weights.empty()) throw ValidationError("categorical weights are empty");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValidationError("categorical weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw ValidationError("categorical weights are all zero");
  if (std::abs(total - 1.0) > kProbabilitySumTolerance)
    throw ValidationError("categorical weights sum to " + std::to_string(total) + ", not 1");

  cumulative_.resize(weights.size());
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i] / total;
    cumulative_[i] = acc;
    if (weights[i] > 0.0) last_positive = i;
  }
  for (std::size_t i = last_positive; i < cumulative_.size(); ++i) cumulative_[i] = 1.0;
}

std::size_t CategoricalSampler::operator()(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<std::size_t>(it - cumulative_.begin());
}

std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
  return CategoricalSampler(weights)(rng);
}

double MarginalVector::sum() const {
  double s = 0.0;
  for (const auto& it : items) s += it.prob;
  return s;
}

SystematicSampler::SystematicSampler(const MarginalVector& m) : k_(m.k) {
  if (m.k < 0 || m.k > static_cast<int>(m.items.size()))
    throw ValidationError("sample size k = " + std::to_string(m.k) + " out of range");
  for (const auto& it : m.items)
    if (!(it.prob >= 0.0 && it.prob <= 1.0))
      throw ValidationError("marginal of request " + std::to_string(it.id) +
                            " outside [0,1]");
  const double total = m.sum();
  if (std::abs(total - m.k) > kProbabilitySumTolerance)
    throw ValidationError("marginals sum to " + std::to_string(total) + ", expected " +
                          std::to_string(m.k));

  const double scale = (m.k > 0 && total > 0.0) ? m.k / total : 1.0;
  double fractional_sum = 0.0;
  for (const auto& it : m.items) {
    const double pr = std::min(1.0, it.prob * scale);
    if (pr >= 1.0)
      always_.push_back(it.id);
    else if (pr > 0.0) {
      fractional_.push_back({it.id, pr});
      fractional_sum += pr;
    }
  }
  k_fractional_ = m.k - static_cast<int>(always_.size());
  if (k_fractional_ < 0 || std::abs(fractional_sum - k_fractional_) > 1e-6)
    throw ValidationError("marginals are inconsistent with sample size k");
  // Absorb residual rounding so the fractional masses sum to k' exactly.
  if (k_fractional_ > 0) {
    const double s = k_fractional_ / fractional_sum;
    for (auto& it : fractional_) it.prob = std::min(it.prob * s, 1.0);
  }
}

void SystematicSampler::sample_into(Rng& rng, std::vector<RequestId>& out) const {
  out.insert(out.end(), always_.begin(), always_.end());
  if (k_fractional_ == 0) return;

  // Shuffle indices into fractional_ (Fisher-Yates, last to first).
  thread_local std::vector<std::uint32_t> order;
  order.resize(fractional_.size());
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_index(i)]);

  const double offset = rng.uniform();
  // Item covering [lo, hi) owns the points offset + j with lo <= offset + j < hi.
  double lo = 0.0;
  long prev_points = 0;  // ceil(lo - offset)
  int taken = 0;
  for (std::size_t i = 0; i < order.size() && taken < k_fractional_; ++i) {
    const double hi = (i + 1 == order.size()) ? k_fractional_ : lo + fractional_[order[i]].prob;
    const long points = static_cast<long>(std::ceil(hi - offset));
    if (points > prev_points) {
      out.push_back(fractional_[order[i]].id);
      ++taken;
    }
    prev_points = points;
    lo = hi;
  }
}

std::vector<RequestId> sample_without_replacement(const MarginalVector& m, Rng& rng) {
  std::vector<RequestId> out;
  SystematicSampler(m).sample_into(rng, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qswitch
