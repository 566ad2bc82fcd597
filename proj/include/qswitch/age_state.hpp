#pragma once

#include <cstdint>
#include <vector>

#include "qswitch/model.hpp"

namespace qswitch {

/// Per-request age of entanglement establishment at the start of slot t.
///
/// Stored as the last successful service slot (0 = never served), so the
/// age h_r(t) = t - last_service[r] is 1 right after a service and grows by
/// one every slot otherwise. Slots are numbered from 1.
struct AgeState {
  std::uint64_t t = 1;
  std::vector<std::uint64_t> last_service;

  AgeState() = default;
  explicit AgeState(std::size_t n_requests) : last_service(n_requests, 0) {}

  std::uint64_t age(RequestId r) const { return t - last_service[r]; }
  std::vector<std::uint64_t> h() const {
    std::vector<std::uint64_t> out(last_service.size());
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = age(r);
    return out;
  }
  std::size_t size() const { return last_service.size(); }
};

}  // namespace qswitch
