#ifndef MSL_REPLICATOR_HPP
#define MSL_REPLICATOR_HPP

// Mean-field replicator-mutator model for two arms: individual learners committed to
// arm 1 (A1) or arm 2 (A2), and social learners (SL).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "msl/env.hpp"

namespace msl {

enum class SocialRule { Success, Conformist };

inline const char* to_string(SocialRule s) { return s == SocialRule::Success ? "success" : "conformist"; }

inline SocialRule social_rule_from_string(const std::string& s) {
  if (s == "success") return SocialRule::Success;
  if (s == "conformist") return SocialRule::Conformist;
  throw ConfigError("unknown social learning strategy '" + s + "'");
}

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

inline Mat3 default_mutation_matrix() {
  return {{{0.995, 0.0, 0.005}, {0.0, 0.995, 0.005}, {0.0025, 0.0025, 0.995}}};
}

inline Mat3 identity_mutation_matrix() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline void validate_mutation_matrix(const Mat3& m) {
  for (const auto& row : m) {
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw ConfigError("mutation matrix entries must be nonnegative");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ConfigError("mutation matrix rows must sum to 1");
  }
}

using PayoffFn = std::function<std::array<double, 2>(double)>;

/// Payoffs r(a_i, t) as the schedule's arm means at integer step floor(t), clamped to the horizon.
inline PayoffFn payoff_from_schedule(const EnvironmentSchedule& env) {
  if (env.arms() != 2) throw ConfigError("the replicator model is defined for two arms");
  return [env](double t) {
    long long idx = static_cast<long long>(std::floor(t));
    idx = std::clamp<long long>(idx, 0, static_cast<long long>(env.horizon()) - 1);
    auto models = env.models_at(static_cast<std::size_t>(idx));
    return std::array<double, 2>{models[0].mean(), models[1].mean()};
  };
}

struct ReplicatorConfig {
  SocialRule sls = SocialRule::Success;
  double epsilon = 0.1;
  double tau = 1.0;
  PayoffFn payoff = [](double) { return std::array<double, 2>{1.0, 0.4}; };
  Mat3 mutation = default_mutation_matrix();
  Vec3 initial = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double horizon = 400.0;
  double dt = 0.1;
  double record_every = 1.0;

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!payoff) throw ConfigError("replicator payoff function is not set");
    validate_mutation_matrix(mutation);
    double s = 0.0;
    for (double v : initial) {
      if (v < 0.0) throw ConfigError("initial frequencies must be nonnegative");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-6) throw ConfigError("initial frequencies must sum to 1");
  }
};

struct ReplicatorState {
  double t = 0.0;
  double a1 = 0.0, a2 = 0.0, sl = 0.0;

  Vec3 vec() const { return {a1, a2, sl}; }
  double total() const { return a1 + a2 + sl; }
};

/// Behaviour frequencies h(a_i, t) sampled on the integration grid, for delayed lookups.
class DelayHistory {
 public:
  void push(double t, double h1, double h2) {
    if (!ts_.empty() && t <= ts_.back()) {
      // a retried step may rewrite the tail
      while (!ts_.empty() && ts_.back() >= t) {
        ts_.pop_back();
        h_.pop_back();
      }
    }
    ts_.push_back(t);
    h_.push_back({h1, h2});
  }

  bool empty() const { return ts_.empty(); }

  /// Linear interpolation; clamps to the recorded range.
  std::array<double, 2> at(double t) const {
    if (ts_.empty()) return {0.0, 0.0};
    if (t <= ts_.front()) return h_.front();
    if (t >= ts_.back()) return h_.back();
    auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - ts_.begin());
    std::size_t lo = hi - 1;
    double w = (t - ts_[lo]) / (ts_[hi] - ts_[lo]);
    return {h_[lo][0] + w * (h_[hi][0] - h_[lo][0]), h_[lo][1] + w * (h_[hi][1] - h_[lo][1])};
  }

 private:
  std::vector<double> ts_;
  std::vector<std::array<double, 2>> h_;
};

/// Social learners' behaviour vector H_SL at time t (zero while t - tau <= 0).
inline std::array<double, 2> social_choice(const ReplicatorConfig& cfg, const DelayHistory& hist, double t) {
  bool observable = cfg.tau == 0.0 ? true : t > cfg.tau;
  if (!observable) return {0.0, 0.0};
  if (cfg.sls == SocialRule::Conformist) {
    auto h = hist.at(t - cfg.tau);
    return h[1] > h[0] ? std::array<double, 2>{0.0, 1.0} : std::array<double, 2>{1.0, 0.0};
  }
  // success-based: the action that was optimal at t - tau
  auto r = cfg.payoff(t - cfg.tau);
  return r[1] > r[0] ? std::array<double, 2>{0.0, 1.0} : std::array<double, 2>{1.0, 0.0};
}

/// (f_A1, f_A2, f_SL)
inline Vec3 fitness_vector(const ReplicatorConfig& cfg, const DelayHistory& hist, double t) {
  auto r = cfg.payoff(t);
  double e = cfg.epsilon;
  Vec3 f{(1.0 - e) * r[0] + e * r[1], (1.0 - e) * r[1] + e * r[0], 0.0};
  auto hs = social_choice(cfg, hist, t);
  f[2] = hs[0] * r[0] + hs[1] * r[1];
  return f;
}

inline double mean_fitness(const Vec3& f, const Vec3& x) { return f[0] * x[0] + f[1] * x[1] + f[2] * x[2]; }

/// dX_j = sum_i f_i X_i M_ij - X_j psi
inline Vec3 replicator_rhs(const Vec3& f, const Vec3& x, const Mat3& m) {
  double psi = mean_fitness(f, x);
  Vec3 d{};
  for (std::size_t j = 0; j < 3; ++j) {
    double in = 0.0;
    for (std::size_t i = 0; i < 3; ++i) in += f[i] * x[i] * m[i][j];
    d[j] = in - x[j] * psi;
  }
  return d;
}

inline Vec3 replicator_rhs(const ReplicatorState& s, const ReplicatorConfig& cfg, const DelayHistory& hist) {
  return replicator_rhs(fitness_vector(cfg, hist, s.t), s.vec(), cfg.mutation);
}

struct TrajectoryPoint {
  double t = 0.0;
  double a1 = 0.0, a2 = 0.0, sl = 0.0;
  double psi = 0.0;
  double h1 = 0.0, h2 = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  double max_simplex_error = 0.0;  // largest |a1+a2+sl-1| seen before renormalization
  std::size_t dt_halvings = 0;

  void write_csv(std::ostream& os) const;
};

inline std::array<double, 2> behaviour_frequencies(const ReplicatorConfig& cfg, const DelayHistory& hist,
                                                   const Vec3& x, double t) {
  auto hs = social_choice(cfg, hist, t);
  return {x[0] + x[2] * hs[0], x[1] + x[2] * hs[1]};
}

/// Fixed-step RK4 with renormalization onto the simplex and dt halving when a component
/// drops below -1e-9. Delayed quantities are read from the history by linear interpolation.
inline Trajectory integrate(const ReplicatorConfig& cfg) {
  cfg.validate();
  Trajectory traj;
  DelayHistory hist;
  Vec3 x = cfg.initial;
  double t = 0.0;

  auto record = [&](double tt, const Vec3& xx) {
    auto f = fitness_vector(cfg, hist, tt);
    auto h = behaviour_frequencies(cfg, hist, xx, tt);
    traj.points.push_back({tt, xx[0], xx[1], xx[2], mean_fitness(f, xx), h[0], h[1]});
  };

  auto h0 = behaviour_frequencies(cfg, hist, x, t);
  hist.push(t, h0[0], h0[1]);
  record(t, x);
  double next_record = cfg.record_every;

  auto rhs = [&](double tt, const Vec3& xx) { return replicator_rhs(fitness_vector(cfg, hist, tt), xx, cfg.mutation); };
  auto axpy = [](const Vec3& a, double s, const Vec3& b) { return Vec3{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]}; };

  const double eps_t = 1e-9 * cfg.dt;
  while (t < cfg.horizon - eps_t) {
    double h = std::min(cfg.dt, cfg.horizon - t);
    // land exactly on record times
    if (next_record - t < h - eps_t) h = next_record - t;
    Vec3 next{};
    for (int attempt = 0;; ++attempt) {
      Vec3 k1 = rhs(t, x);
      Vec3 k2 = rhs(t + 0.5 * h, axpy(x, 0.5 * h, k1));
      Vec3 k3 = rhs(t + 0.5 * h, axpy(x, 0.5 * h, k2));
      Vec3 k4 = rhs(t + h, axpy(x, h, k3));
      for (std::size_t j = 0; j < 3; ++j) next[j] = x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      bool finite = std::isfinite(next[0]) && std::isfinite(next[1]) && std::isfinite(next[2]);
      if (!finite) throw NumericError("replicator integration produced a non-finite state at t=" + std::to_string(t));
      bool negative = next[0] < -1e-9 || next[1] < -1e-9 || next[2] < -1e-9;
      if (!negative) break;
      if (attempt >= 30) throw NumericError("replicator integration could not keep frequencies nonnegative");
      h *= 0.5;
      ++traj.dt_halvings;
    }
    double total = next[0] + next[1] + next[2];
    traj.max_simplex_error = std::max(traj.max_simplex_error, std::abs(total - 1.0));
    for (double& v : next) v = std::max(v, 0.0);
    total = next[0] + next[1] + next[2];
    if (std::abs(total - 1.0) > 1e-9)
      for (double& v : next) v /= total;
    t += h;
    if (std::abs(t - next_record) <= eps_t) t = next_record;
    x = next;
    auto hb = behaviour_frequencies(cfg, hist, x, t);
    hist.push(t, hb[0], hb[1]);
    if (t >= next_record - eps_t) {
      record(t, x);
      next_record = cfg.record_every * static_cast<double>(traj.points.size());
    }
  }
  return traj;
}

inline void Trajectory::write_csv(std::ostream& os) const {
  char buf[256];
  os << "t,a1,a2,sl,psi,h1,h2\n";
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", p.t, p.a1, p.a2, p.sl, p.psi, p.h1, p.h2);
    os << buf;
  }
}

struct BasinResult {
  double initial_sl = 0.0;
  double terminal_sl = 0.0;
  Trajectory trajectory;
};

/// One trajectory per initial SL ratio; individual learners split evenly between the arms.
inline std::vector<BasinResult> basin_sweep(ReplicatorConfig cfg, const std::vector<double>& initial_sl) {
  std::vector<BasinResult> out;
  for (double s0 : initial_sl) {
    if (!(s0 >= 0.0 && s0 <= 1.0)) throw ConfigError("initial SL ratio must lie in [0, 1]");
    cfg.initial = {0.5 * (1.0 - s0), 0.5 * (1.0 - s0), s0};
    BasinResult r;
    r.initial_sl = s0;
    r.trajectory = integrate(cfg);
    r.terminal_sl = r.trajectory.points.back().sl;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace msl

#endif
