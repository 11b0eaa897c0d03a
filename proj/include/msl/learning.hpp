#ifndef MSL_LEARNING_HPP
#define MSL_LEARNING_HPP

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "msl/core.hpp"

namespace msl {

/// Action-value estimates of an epsilon-greedy learner.
struct QTable {
  std::vector<double> q;
  double beta = 0.2;

  QTable() = default;
  QTable(std::size_t k, double step, double init = 0.0) : q(k, init), beta(step) {
    if (!(step > 0.0 && step <= 1.0)) throw ConfigError("step size beta must lie in (0, 1]");
  }

  std::size_t size() const { return q.size(); }

  void update(std::size_t action, double reward) { q[action] += beta * (reward - q[action]); }
};

inline QTable q_update(QTable table, std::size_t action, double reward) {
  table.update(action, reward);
  return table;
}

/// Greedy arm with probability 1-epsilon, otherwise a uniformly random arm (which may be the greedy one).
inline std::size_t epsilon_greedy(const std::vector<double>& q, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && uniform01(rng) < epsilon) return uniform_index(rng, q.size());
  return argmax(q);
}

inline std::size_t epsilon_greedy(const QTable& table, double epsilon, Rng& rng) {
  return epsilon_greedy(table.q, epsilon, rng);
}

struct RewardEntry {
  std::size_t agent_id = 0;
  std::size_t action = 0;
  double reward = 0.0;
};

/// Population-level record of one timestep: action counts and every agent's reward.
struct SocialInfo {
  std::size_t t = 0;
  std::vector<std::size_t> freq;
  std::vector<RewardEntry> rewards;
  // actions of all agents that tied for the maximum reward, in agent-id order
  std::vector<std::size_t> leader_actions;

  static SocialInfo make(std::size_t t, std::size_t k, std::vector<RewardEntry> entries) {
    SocialInfo info;
    info.t = t;
    info.freq.assign(k, 0);
    for (const auto& e : entries) {
      if (e.action >= k) throw ConfigError("social info entry references an invalid arm");
      ++info.freq[e.action];
    }
    auto by_id = [](const RewardEntry& a, const RewardEntry& b) { return a.agent_id < b.agent_id; };
    if (!std::is_sorted(entries.begin(), entries.end(), by_id))
      std::stable_sort(entries.begin(), entries.end(), by_id);
    info.rewards = std::move(entries);
    info.index_leaders();
    return info;
  }

  std::size_t population() const { return rewards.size(); }

  void index_leaders() {
    leader_actions.clear();
    if (rewards.empty()) return;
    double best = rewards.front().reward;
    for (const auto& e : rewards) best = std::max(best, e.reward);
    for (const auto& e : rewards)
      if (e.reward == best) leader_actions.push_back(e.action);
  }
};

/// Ring buffer of recent SocialInfo records, addressed by timestep.
class SocialHistory {
 public:
  explicit SocialHistory(std::size_t capacity = 64) : capacity_(capacity < 1 ? 1 : capacity) {}

  void push(SocialInfo info) {
    buf_.push_back(std::move(info));
    while (buf_.size() > capacity_) buf_.pop_front();
  }

  /// Record for timestep t, or nullptr if t <= 0 or no longer retained.
  const SocialInfo* lookup(long long t) const {
    if (t <= 0 || buf_.empty()) return nullptr;
    long long first = static_cast<long long>(buf_.front().t);
    long long idx = t - first;
    if (idx < 0 || idx >= static_cast<long long>(buf_.size())) return nullptr;
    const auto& rec = buf_[static_cast<std::size_t>(idx)];
    return static_cast<long long>(rec.t) == t ? &rec : nullptr;
  }

  const SocialInfo* latest() const { return buf_.empty() ? nullptr : &buf_.back(); }
  std::size_t capacity() const { return capacity_; }
  void clear() { buf_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<SocialInfo> buf_;
};

/// Action of the best-rewarded agent at t - tau; ties go to the lowest agent id.
/// Empty when t - tau <= 0 or the record is gone (caller falls back to individual learning).
inline std::optional<std::size_t> success_based_copy(const SocialHistory& hist, long long t, long long tau) {
  const SocialInfo* info = hist.lookup(t - tau);
  if (!info || info->leader_actions.empty()) return std::nullopt;
  return info->leader_actions.front();
}

/// As above, but reward ties are broken uniformly at random among the tied agents.
inline std::optional<std::size_t> success_based_copy(const SocialHistory& hist, long long t, long long tau,
                                                     Rng& rng) {
  const SocialInfo* info = hist.lookup(t - tau);
  if (!info || info->leader_actions.empty()) return std::nullopt;
  const auto& leaders = info->leader_actions;
  if (leaders.size() == 1) return leaders.front();
  return leaders[uniform_index(rng, leaders.size())];
}

/// Most frequent action at t - tau; ties go to the lowest arm index.
inline std::optional<std::size_t> conformist_copy(const SocialHistory& hist, long long t, long long tau) {
  const SocialInfo* info = hist.lookup(t - tau);
  if (!info || info->population() == 0) return std::nullopt;
  return argmax(info->freq);
}

enum class ModelKind { Perfect, Correct90, Random };

/// Copy from an idealised model agent instead of the population.
inline std::size_t model_copy(ModelKind kind, std::size_t optimal_arm, std::size_t k, Rng& rng) {
  switch (kind) {
    case ModelKind::Perfect:
      return optimal_arm;
    case ModelKind::Correct90: {
      if (uniform01(rng) < 0.9 || k < 2) return optimal_arm;
      std::size_t other = uniform_index(rng, k - 1);
      return other >= optimal_arm ? other + 1 : other;
    }
    case ModelKind::Random:
      return uniform_index(rng, k);
  }
  return optimal_arm;
}

}  // namespace msl

#endif
