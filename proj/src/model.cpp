#include "qswitch/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace qswitch {

namespace {

// Every subset of {0..n-1} with size exactly `size`, in lexicographic order.
void append_combinations(int n, int size, std::vector<std::vector<UserId>>& out) {
  std::vector<UserId> combo(size);
  for (int i = 0; i < size; ++i) combo[i] = i;
  while (true) {
    out.push_back(combo);
    int i = size - 1;
    while (i >= 0 && combo[i] == n - size + i) --i;
    if (i < 0) return;
    ++combo[i];
    for (int j = i + 1; j < size; ++j) combo[j] = combo[j - 1] + 1;
  }
}

std::string format_users(const std::vector<UserId>& users) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < users.size(); ++i) os << (i ? "," : "") << users[i] + 1;
  os << '}';
  return os.str();
}

bool in_unit_interval(double x) { return x > 0.0 && x <= 1.0; }

}  // namespace

std::vector<Request> build_request_set(int n_users, const RequestSetMode& mode) {
  if (n_users < 2) throw ValidationError("n_users must be at least 2");

  std::vector<std::vector<UserId>> sets;
  if (std::holds_alternative<AllRequests>(mode)) {
    for (int size = 2; size <= n_users; ++size) append_combinations(n_users, size, sets);
  } else if (const auto* up = std::get_if<UpToCardinality>(&mode)) {
    if (up->k < 2 || up->k > n_users)
      throw ValidationError("max cardinality k must lie in [2, n_users], got " +
                            std::to_string(up->k));
    for (int size = 2; size <= up->k; ++size) append_combinations(n_users, size, sets);
  } else {
    const auto& ex = std::get<ExplicitRequests>(mode);
    if (ex.user_sets.empty()) throw ValidationError("explicit request list is empty");
    for (auto users : ex.user_sets) {
      std::sort(users.begin(), users.end());
      if (users.size() < 2)
        throw ValidationError("request " + format_users(users) + " has fewer than 2 users");
      if (std::adjacent_find(users.begin(), users.end()) != users.end())
        throw ValidationError("request " + format_users(users) + " repeats a user");
      if (users.front() < 0 || users.back() >= n_users)
        throw ValidationError("request " + format_users(users) + " has a user outside [1, " +
                              std::to_string(n_users) + "]");
      sets.push_back(std::move(users));
    }
    std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    auto dup = std::adjacent_find(sets.begin(), sets.end());
    if (dup != sets.end()) throw ValidationError("duplicate request " + format_users(*dup));
  }

  std::vector<Request> out;
  out.reserve(sets.size());
  for (auto& s : sets) out.push_back(Request{out.size(), std::move(s)});
  return out;
}

double service_success_prob(const Request& r, const NetworkConfig& net) {
  double v = 1.0;
  for (UserId u : r.users) {
    if (u < 0 || u >= static_cast<int>(net.p.size()))
      throw LookupError("user index out of range in request " + std::to_string(r.id));
    v *= net.p[u];
  }
  return v;
}

Instance::Instance(NetworkConfig network, std::vector<Request> requests, int memory)
    : network_(std::move(network)), requests_(std::move(requests)), memory_(memory) {
  if (static_cast<int>(network_.p.size()) != network_.n_users)
    throw ValidationError("p must list exactly n_users probabilities");
  service_probs_.reserve(requests_.size());
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    const Request& r = requests_[i];
    if (r.id != i) throw ValidationError("request ids must be 0..R-1 in order");
    if (!std::is_sorted(r.users.begin(), r.users.end()))
      throw ValidationError("request users must be sorted");
    service_probs_.push_back(service_success_prob(r, network_));
    classes_[r.cardinality()].push_back(r.id);
  }
  for (const auto& [lambda, ids] : classes_) {
    lambdas_.push_back(lambda);
    int fit = memory_ > 0 ? memory_ / lambda : 0;
    budgets_[lambda] = std::min(static_cast<int>(ids.size()), fit);
  }
}

const Request& Instance::request(RequestId r) const {
  if (r >= requests_.size()) throw LookupError("unknown request id " + std::to_string(r));
  return requests_[r];
}

const std::vector<RequestId>& Instance::cardinality_class(Cardinality lambda) const {
  auto it = classes_.find(lambda);
  if (it == classes_.end())
    throw LookupError("no request of cardinality " + std::to_string(lambda));
  return it->second;
}

int Instance::class_budget(Cardinality lambda) const {
  auto it = budgets_.find(lambda);
  if (it == budgets_.end())
    throw LookupError("no request of cardinality " + std::to_string(lambda));
  return it->second;
}

double Instance::swap_prob(Cardinality lambda) const {
  auto it = network_.q.find(lambda);
  if (it == network_.q.end())
    throw LookupError("no swap probability for cardinality " + std::to_string(lambda));
  return it->second;
}

Cardinality Instance::max_cardinality() const { return lambdas_.empty() ? 0 : lambdas_.back(); }

int per_class_budget(Cardinality lambda, const Instance& inst) { return inst.class_budget(lambda); }

bool is_admissible(const MemoryConfiguration& x, const Instance& inst) {
  long used = 0;
  for (RequestId r : x.scheduled) used += inst.request(r).cardinality();
  std::vector<RequestId> ids = x.scheduled;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) return false;
  return used <= inst.memory();
}

std::vector<Violation> validate_instance(const Instance& inst) {
  std::vector<Violation> out;
  auto error = [&](std::string msg) { out.push_back({Violation::Severity::Error, std::move(msg)}); };

  const NetworkConfig& net = inst.network();
  if (net.n_users < 2) error("n_users must be at least 2");
  for (std::size_t i = 0; i < net.p.size(); ++i)
    if (!in_unit_interval(net.p[i]))
      error("probability outside (0,1]: p_" + std::to_string(i + 1) + " = " +
            std::to_string(net.p[i]));
  for (const auto& [lambda, q] : net.q)
    if (!in_unit_interval(q))
      error("probability outside (0,1]: q_" + std::to_string(lambda) + " = " +
            std::to_string(q));

  if (inst.size() == 0) error("request set is empty");
  std::set<std::vector<UserId>> seen;
  long total = 0;
  for (const Request& r : inst.requests()) {
    total += r.cardinality();
    if (r.cardinality() < 2)
      error("request " + format_users(r.users) + " has fewer than 2 users");
    if (!seen.insert(r.users).second) error("duplicate request " + format_users(r.users));
  }
  for (Cardinality lambda : inst.cardinalities())
    if (!net.q.contains(lambda))
      error("missing swap probability q_" + std::to_string(lambda));

  if (inst.memory() < 1) error("memory must be positive");
  if (inst.memory() < inst.max_cardinality())
    error("memory below largest request: M = " + std::to_string(inst.memory()) +
          " < " + std::to_string(inst.max_cardinality()));
  else if (inst.size() > 0 && total <= inst.memory())
    out.push_back({Violation::Severity::Warning,
                   "all requests fit in memory simultaneously (M = " +
                       std::to_string(inst.memory()) + ")"});
  return out;
}

void require_valid(const Instance& inst) {
  std::string msg;
  for (const auto& v : validate_instance(inst))
    if (v.severity == Violation::Severity::Error) msg += (msg.empty() ? "" : "; ") + v.message;
  if (!msg.empty()) throw ValidationError(msg);
}

Instance make_instance(NetworkConfig network, const RequestSetMode& mode, int memory) {
  int n = network.n_users;
  Instance inst(std::move(network), build_request_set(n, mode), memory);
  require_valid(inst);
  return inst;
}

}  // namespace qswitch
