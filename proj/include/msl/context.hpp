#ifndef MSL_CONTEXT_HPP
#define MSL_CONTEXT_HPP

#include <cmath>
#include <deque>
#include <optional>
#include <vector>

#include "msl/learning.hpp"
#include "msl/odpu.hpp"

namespace msl {

struct ContextParams {
  double th_ec = 0.15;
  double th_u = 0.1;
  std::size_t delta = 1;

  void validate() const {
    if (!(th_ec > 0.0)) throw ConfigError("th_ec must be positive");
    if (!(th_u > 0.0 && th_u < 1.0)) throw ConfigError("th_u must lie in (0, 1)");
    if (delta < 1) throw ConfigError("delta must be >= 1");
  }
};

/// Per-arm reward statistics of one timestep (sample std with n-1; 0 for single samples).
struct ArmStats {
  std::vector<double> mu_hat;
  std::vector<double> sigma_hat;
  std::vector<std::size_t> counts;
};

inline ArmStats estimate_arm_stats(const SocialInfo& info) {
  std::size_t k = info.freq.size();
  ArmStats s;
  s.mu_hat.assign(k, 0.0);
  s.sigma_hat.assign(k, 0.0);
  s.counts = info.freq;
  // shifted by the first reward on each arm so constant samples give exact means
  std::vector<double> shift(k, 0.0), sum(k, 0.0);
  std::vector<char> seen(k, 0);
  for (const auto& e : info.rewards) {
    if (!seen[e.action]) {
      seen[e.action] = 1;
      shift[e.action] = e.reward;
    }
    sum[e.action] += e.reward - shift[e.action];
  }
  for (std::size_t j = 0; j < k; ++j)
    if (s.counts[j] > 0) s.mu_hat[j] = shift[j] + sum[j] / static_cast<double>(s.counts[j]);
  std::vector<double> ss(k, 0.0);
  for (const auto& e : info.rewards) {
    double d = e.reward - s.mu_hat[e.action];
    ss[e.action] += d * d;
  }
  for (std::size_t j = 0; j < k; ++j)
    if (s.counts[j] > 1) s.sigma_hat[j] = std::sqrt(ss[j] / static_cast<double>(s.counts[j] - 1));
  return s;
}

/// 1 iff the estimated-optimal arm's mean moved by more than th_ec.
inline int detect_ec(const std::vector<double>& mu_hat_now, const std::vector<double>& mu_hat_past,
                     const ContextParams& params) {
  if (mu_hat_now.empty() || mu_hat_past.size() != mu_hat_now.size()) return 0;
  std::size_t star = argmax(mu_hat_now);
  return std::abs(mu_hat_now[star] - mu_hat_past[star]) > params.th_ec ? 1 : 0;
}

/// 1 iff the best-estimated arm is also the most frequent one and no change was detected.
inline int detect_conformity(const std::vector<double>& mu_hat, const std::vector<std::size_t>& freq, int ec) {
  if (ec) return 0;
  return argmax(mu_hat) == argmax(freq) ? 1 : 0;
}

struct UncertaintyFlag {
  int unc = 0;
  double odpu = 0.0;
};

inline UncertaintyFlag detect_uncertainty(const std::vector<double>& mu_hat, const std::vector<double>& sigma_hat,
                                          const std::vector<std::size_t>& counts, const ContextParams& params) {
  double v = odpu_from_estimates(mu_hat, sigma_hat, counts);
  return {v > params.th_u ? 1 : 0, v};
}

struct ContextFlags {
  int ec = 0;
  int conf = 0;
  int unc = 0;

  /// Row of the rule table: 4*EC + 2*C + U.
  std::size_t state() const { return static_cast<std::size_t>(4 * ec + 2 * conf + unc); }
  friend bool operator==(const ContextFlags&, const ContextFlags&) = default;
};

/// Population context at one timestep. Raw quantities are kept so that controllers with
/// their own thresholds can derive their own flags.
struct Context {
  std::size_t t = 0;
  bool valid = false;          // false before any social information exists
  double ec_delta = 0.0;       // |mu*(t) - mu*(t - delta)|, 0 when the past is unavailable
  bool ec_available = false;
  bool argmax_match = false;
  double odpu_value = 0.0;
  std::vector<double> mu_hat;     // retained per-arm means (stale for arms nobody chose)
  std::vector<double> sigma_hat;  // retained per-arm standard deviations
  std::vector<std::size_t> freq;
  ContextFlags flags;  // derived with the encoder's own params

  ContextFlags flags_for(const ContextParams& p) const {
    ContextFlags f;
    if (!valid) return f;
    f.ec = (ec_available && ec_delta > p.th_ec) ? 1 : 0;
    f.conf = (!f.ec && argmax_match) ? 1 : 0;
    f.unc = odpu_value > p.th_u ? 1 : 0;
    return f;
  }

  int ec() const { return flags.ec; }
  int conf() const { return flags.conf; }
  int unc() const { return flags.unc; }
};

/// Turns the SocialInfo stream into contexts. Arms nobody chose keep their last estimate.
class ContextEncoder {
 public:
  explicit ContextEncoder(std::size_t k, ContextParams params = {}) : k_(k), params_(params) {
    params_.validate();
    known_.assign(k, false);
    mu_.assign(k, 0.0);
    sd_.assign(k, 0.0);
  }

  const ContextParams& params() const { return params_; }

  /// ODPU is skipped (left at 0) when `with_odpu` is false.
  Context observe(const SocialInfo& info, bool with_odpu = true) {
    ArmStats stats = estimate_arm_stats(info);
    for (std::size_t j = 0; j < k_; ++j) {
      if (stats.counts[j] > 0) {
        known_[j] = true;
        mu_[j] = stats.mu_hat[j];
        sd_[j] = stats.sigma_hat[j];
      }
    }
    Context ctx;
    ctx.t = info.t;
    ctx.valid = true;
    ctx.mu_hat = mu_;
    ctx.sigma_hat = sd_;
    ctx.freq = info.freq;

    std::size_t star = best_observed(stats.counts);
    if (past_.size() >= params_.delta) {
      const Snapshot& past = past_[past_.size() - params_.delta];
      if (past.known[star]) {
        ctx.ec_available = true;
        ctx.ec_delta = std::abs(mu_[star] - past.mu[star]);
      }
    }
    ctx.argmax_match = star == argmax(info.freq);
    if (with_odpu) ctx.odpu_value = odpu_from_estimates(stats.mu_hat, stats.sigma_hat, stats.counts);
    ctx.flags = ctx.flags_for(params_);

    past_.push_back({known_, mu_});
    while (past_.size() > params_.delta) past_.pop_front();
    return ctx;
  }

 private:
  struct Snapshot {
    std::vector<bool> known;
    std::vector<double> mu;
  };

  // Estimated-optimal arm among the arms sampled this step; stale estimates never win.
  std::size_t best_observed(const std::vector<std::size_t>& counts) const {
    std::size_t best = k_;
    for (std::size_t j = 0; j < k_; ++j)
      if (counts[j] > 0 && (best == k_ || mu_[j] > mu_[best])) best = j;
    return best == k_ ? 0 : best;
  }

  std::size_t k_;
  ContextParams params_;
  std::vector<bool> known_;
  std::vector<double> mu_, sd_;
  std::deque<Snapshot> past_;
};

}  // namespace msl

#endif
