#ifndef MSL_ENV_HPP
#define MSL_ENV_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "msl/core.hpp"

namespace msl {

enum class RewardKind { Gaussian, Bernoulli };

/// Reward distribution of a single arm.
struct RewardModel {
  RewardKind kind = RewardKind::Gaussian;
  double mu = 0.0;     // Gaussian mean
  double sigma = 0.0;  // Gaussian standard deviation
  double p = 0.0;      // Bernoulli success probability
  double low = 0.0;
  double high = 1.0;

  static RewardModel gaussian(double mu, double sigma) {
    RewardModel m;
    m.kind = RewardKind::Gaussian;
    m.mu = mu;
    m.sigma = sigma;
    m.validate();
    return m;
  }

  static RewardModel bernoulli(double p, double low = 0.0, double high = 1.0) {
    RewardModel m;
    m.kind = RewardKind::Bernoulli;
    m.p = p;
    m.low = low;
    m.high = high;
    m.validate();
    return m;
  }

  void validate() const {
    if (kind == RewardKind::Gaussian) {
      if (!(sigma >= 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
        throw ConfigError("gaussian reward model requires finite mu and sigma >= 0");
    } else {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("bernoulli reward model requires 0 <= p <= 1");
      if (!(low < high)) throw ConfigError("bernoulli reward model requires low < high");
    }
  }

  double mean() const { return kind == RewardKind::Gaussian ? mu : p * high + (1.0 - p) * low; }

  friend bool operator==(const RewardModel&, const RewardModel&) = default;
};

/// Draws rewards; keeps one standard-normal engine so Gaussian draws stay cheap.
class RewardSampler {
 public:
  double operator()(const RewardModel& model, Rng& rng) {
    if (model.kind == RewardKind::Gaussian) {
      if (model.sigma == 0.0) return model.mu;
      return model.mu + model.sigma * normal_(rng);
    }
    return uniform01(rng) < model.p ? model.high : model.low;
  }

 private:
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// One draw from `model`. Gaussian draws are not clipped.
inline double sample_reward(const RewardModel& model, Rng& rng) {
  RewardSampler sampler;
  return sampler(model, rng);
}

/// offset + amplitude * sin(2*pi*t/period + phase)
struct Sinusoid {
  double offset = 0.0;
  double amplitude = 0.0;
  double period = 1.0;
  double phase = 0.0;

  double at(double t) const {
    if (amplitude == 0.0) return offset;
    return offset + amplitude * std::sin(2.0 * std::numbers::pi * t / period + phase);
  }
};

/// Gaussian arms whose mean and standard deviation drift smoothly over time.
struct GradualSpec {
  std::vector<Sinusoid> mean;
  std::vector<Sinusoid> sigma;
  std::size_t horizon = 0;
};

struct Segment {
  std::size_t duration = 0;
  std::vector<RewardModel> arms;
};

/// Ground truth for change detectors: timesteps at which the arm models switch.
struct EnvChangeLog {
  std::vector<std::size_t> change_points;
};

/// Time-varying assignment of reward models to arms over a finite horizon.
class EnvironmentSchedule {
 public:
  EnvironmentSchedule() = default;

  static EnvironmentSchedule from_segments(std::vector<Segment> segments) {
    EnvironmentSchedule s;
    if (segments.empty()) throw ConfigError("schedule needs at least one segment");
    s.k_ = segments.front().arms.size();
    if (s.k_ < 2) throw ConfigError("schedule needs at least two arms");
    std::size_t start = 0;
    for (const auto& seg : segments) {
      if (seg.duration < 1) throw ConfigError("segment durations must be >= 1");
      if (seg.arms.size() != s.k_) throw ConfigError("every segment must define the same number of arms");
      for (const auto& a : seg.arms) a.validate();
      s.starts_.push_back(start);
      start += seg.duration;
    }
    s.horizon_ = start;
    s.segments_ = std::move(segments);
    return s;
  }

  static EnvironmentSchedule from_gradual(GradualSpec spec) {
    EnvironmentSchedule s;
    if (spec.mean.size() < 2 || spec.mean.size() != spec.sigma.size())
      throw ConfigError("gradual schedule needs matching mean/sigma functions for >= 2 arms");
    if (spec.horizon < 1) throw ConfigError("gradual schedule needs horizon >= 1");
    s.k_ = spec.mean.size();
    s.horizon_ = spec.horizon;
    s.gradual_ = std::move(spec);
    return s;
  }

  std::size_t arms() const { return k_; }
  std::size_t horizon() const { return horizon_; }
  bool is_gradual() const { return gradual_.has_value(); }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::optional<GradualSpec>& gradual() const { return gradual_; }

  /// Active arm models at timestep t (0-based, t < horizon).
  std::vector<RewardModel> models_at(std::size_t t) const {
    if (t >= horizon_) throw std::out_of_range("timestep outside the schedule horizon");
    if (gradual_) {
      std::vector<RewardModel> out;
      out.reserve(k_);
      for (std::size_t j = 0; j < k_; ++j) {
        double sd = std::max(0.0, gradual_->sigma[j].at(static_cast<double>(t)));
        out.push_back(RewardModel::gaussian(gradual_->mean[j].at(static_cast<double>(t)), sd));
      }
      return out;
    }
    return segments_[segment_index(t)].arms;
  }

  /// Same as models_at but avoids copying for piecewise schedules.
  const std::vector<RewardModel>& models_ref(std::size_t t, std::vector<RewardModel>& scratch) const {
    if (gradual_) {
      scratch = models_at(t);
      return scratch;
    }
    if (t >= horizon_) throw std::out_of_range("timestep outside the schedule horizon");
    return segments_[segment_index(t)].arms;
  }

  std::size_t segment_index(std::size_t t) const {
    std::size_t lo = 0, hi = starts_.size();
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (starts_[mid] <= t) lo = mid; else hi = mid;
    }
    return lo;
  }

  /// Index of the arm with highest mean at t.
  std::size_t optimal_arm(std::size_t t) const {
    auto models = models_at(t);
    std::vector<double> means;
    for (const auto& m : models) means.push_back(m.mean());
    return argmax(means);
  }

  /// Segment boundaries for piecewise schedules; optimal-arm switches for gradual ones.
  EnvChangeLog change_log() const {
    EnvChangeLog log;
    if (gradual_) {
      std::size_t prev = optimal_arm(0);
      for (std::size_t t = 1; t < horizon_; ++t) {
        std::size_t cur = optimal_arm(t);
        if (cur != prev) log.change_points.push_back(t);
        prev = cur;
      }
      return log;
    }
    for (std::size_t i = 1; i < starts_.size(); ++i) log.change_points.push_back(starts_[i]);
    return log;
  }

 private:
  std::size_t k_ = 0;
  std::size_t horizon_ = 0;
  std::vector<Segment> segments_;
  std::vector<std::size_t> starts_;
  std::optional<GradualSpec> gradual_;
};

/// Two Gaussian arms whose distributions swap at T/2.
inline EnvironmentSchedule make_reversal_schedule(double mu1, double sigma1, double mu2, double sigma2,
                                                  std::size_t horizon) {
  if (horizon < 2 || horizon % 2 != 0) throw ConfigError("reversal schedule needs an even horizon");
  auto a = RewardModel::gaussian(mu1, sigma1);
  auto b = RewardModel::gaussian(mu2, sigma2);
  return EnvironmentSchedule::from_segments({{horizon / 2, {a, b}}, {horizon / 2, {b, a}}});
}

/// Bernoulli counterpart of make_reversal_schedule.
inline EnvironmentSchedule make_bernoulli_reversal(double p1, double p2, std::size_t horizon) {
  if (horizon < 2 || horizon % 2 != 0) throw ConfigError("reversal schedule needs an even horizon");
  auto a = RewardModel::bernoulli(p1);
  auto b = RewardModel::bernoulli(p2);
  return EnvironmentSchedule::from_segments({{horizon / 2, {a, b}}, {horizon / 2, {b, a}}});
}

using ArmModels = std::vector<RewardModel>;

/// Random volatile environment: 10..30 changes, near-equal segments, models drawn from `pool`.
inline EnvironmentSchedule make_random_volatile(const std::vector<ArmModels>& pool, std::size_t horizon, Rng& rng,
                                                std::size_t min_changes = 10, std::size_t max_changes = 30) {
  if (pool.empty()) throw ConfigError("random volatile schedule needs a non-empty distribution pool");
  std::size_t n = std::uniform_int_distribution<std::size_t>(min_changes, max_changes)(rng);
  if (horizon < n + 1) throw ConfigError("horizon too short for the drawn number of environment changes");
  std::size_t segs = n + 1;
  std::size_t base = horizon / segs;
  std::size_t extra = horizon % segs;
  std::vector<Segment> out;
  out.reserve(segs);
  for (std::size_t i = 0; i < segs; ++i) {
    std::size_t d = base + (i < extra ? 1 : 0);
    out.push_back({d, pool[uniform_index(rng, pool.size())]});
  }
  return EnvironmentSchedule::from_segments(std::move(out));
}

/// Default sinusoidal drift: arm means cross at T/2, the second arm's spread oscillates.
inline GradualSpec default_gradual_spec(std::size_t horizon) {
  double T = static_cast<double>(horizon);
  GradualSpec g;
  g.horizon = horizon;
  g.mean = {{0.7, 0.3, T, 0.0}, {0.7, -0.3, T, 0.0}};
  g.sigma = {{0.05, 0.0, T, 0.0}, {0.275, 0.225, T, 0.0}};
  return g;
}

}  // namespace msl

#endif
