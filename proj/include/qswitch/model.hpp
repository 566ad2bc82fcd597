#pragma once

// Network, request and memory-admissibility model of a quantum switch that
// serves multipartite entanglement requests from a finite pool of memory
// registers.
//
// User indices are 0-based inside the library. External formats (JSON, CSV)
// use 1-based user indices; the conversion lives in config.cpp.

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qswitch {

using RequestId = std::size_t;
using UserId = int;
using Cardinality = int;

/// Raised when inputs violate a documented precondition or invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an id or cardinality is not part of the instance.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct NetworkConfig {
  int n_users = 0;
  std::vector<double> p;                // per-user LLE success probability
  std::map<Cardinality, double> q;      // per-cardinality swap success probability
};

struct Request {
  RequestId id = 0;
  std::vector<UserId> users;  // strictly increasing

  Cardinality cardinality() const { return static_cast<Cardinality>(users.size()); }
  friend bool operator==(const Request&, const Request&) = default;
};

/// Every user subset of size >= 2.
struct AllRequests {};
/// Every user subset with size in [2, k].
struct UpToCardinality {
  int k = 2;
};
/// A caller-supplied list of user sets (0-based users, any order).
struct ExplicitRequests {
  std::vector<std::vector<UserId>> user_sets;
};
using RequestSetMode = std::variant<AllRequests, UpToCardinality, ExplicitRequests>;

/// Builds a request set with ids assigned by (cardinality, lexicographic users).
std::vector<Request> build_request_set(int n_users, const RequestSetMode& mode);

/// v(r): probability that every user of r establishes its LLE in one attempt.
double service_success_prob(const Request& r, const NetworkConfig& net);

/// Scheduled requests of a single slot. Kept sorted by id.
struct MemoryConfiguration {
  std::vector<RequestId> scheduled;
};

/// Requests, network and memory budget together with the derived
/// cardinality classes. Immutable after construction.
class Instance {
 public:
  /// Requests must carry ids 0..R-1 in order (as produced by
  /// build_request_set). No other validation happens here; see
  /// validate_instance().
  Instance(NetworkConfig network, std::vector<Request> requests, int memory);

  const NetworkConfig& network() const { return network_; }
  const std::vector<Request>& requests() const { return requests_; }
  const Request& request(RequestId r) const;
  std::size_t size() const { return requests_.size(); }
  int memory() const { return memory_; }

  /// Sorted distinct cardinalities present in the request set.
  const std::vector<Cardinality>& cardinalities() const { return lambdas_; }
  /// Request ids of cardinality `lambda`, ascending.
  const std::vector<RequestId>& cardinality_class(Cardinality lambda) const;
  /// M_lambda = min{|C(lambda)|, floor(M / lambda)}.
  int class_budget(Cardinality lambda) const;
  /// Swap success probability for `lambda`.
  double swap_prob(Cardinality lambda) const;
  /// Cached v(r).
  double service_prob(RequestId r) const { return service_probs_.at(r); }
  Cardinality max_cardinality() const;

 private:
  NetworkConfig network_;
  std::vector<Request> requests_;
  int memory_;
  std::vector<Cardinality> lambdas_;
  std::map<Cardinality, std::vector<RequestId>> classes_;
  std::map<Cardinality, int> budgets_;
  std::vector<double> service_probs_;
};

int per_class_budget(Cardinality lambda, const Instance& inst);

/// True iff scheduled ids are distinct and their cardinalities fit in M.
/// Throws LookupError on unknown ids.
bool is_admissible(const MemoryConfiguration& x, const Instance& inst);

struct Violation {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string message;
};

/// Reports every violated invariant of the instance. Warnings do not make an
/// instance unusable.
std::vector<Violation> validate_instance(const Instance& inst);

/// Throws ValidationError listing all error-level violations.
void require_valid(const Instance& inst);

/// Convenience: build + validate.
Instance make_instance(NetworkConfig network, const RequestSetMode& mode, int memory);

}  // namespace qswitch
