#ifndef MSL_HARNESS_HPP
#define MSL_HARNESS_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "msl/evolution.hpp"
#include "msl/odpu.hpp"
#include "msl/optimizers.hpp"
#include "msl/stats.hpp"

namespace msl {

// ---- environments ----------------------------------------------------------------------------

/// An (optimal, sub-optimal) arm pair together with the ODPU it was built to reach.
struct DistributionPair {
  std::string label;
  RewardModel optimal;
  RewardModel suboptimal;
  double target_odpu = 0.0;
};

/// Sub-optimal sigma giving the requested ODPU for a two-group split, by bisection on the quadrature.
inline double solve_suboptimal_sigma(double target, double mu_opt, double sigma_opt, double mu_sub, std::size_t m,
                                     std::size_t n, double lo = 1e-3, double hi = 5.0) {
  auto f = [&](double s) { return odpu_quadrature({{{mu_opt, sigma_opt, m}, {mu_sub, s, n}}}) - target; };
  if (f(lo) > 0.0 || f(hi) < 0.0) throw ConfigError("requested ODPU is not reachable in the sigma bracket");
  for (int i = 0; i < 100 && hi - lo > 1e-10; ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// The six Experiment-1 distributions, reconstructed: means (1, 0.4), optimal sigma 0.05 and the
/// sub-optimal sigma solved for ODPU in {0.97, 0.59, 0.14, 0.10} at a 50/50 split; the last two
/// pairs have negligible ODPU.
inline const std::vector<DistributionPair>& experiment1_distributions() {
  static const std::vector<DistributionPair> pairs = [] {
    std::vector<DistributionPair> out;
    const double targets[4] = {0.97, 0.59, 0.14, 0.10};
    const char* labels[6] = {"d1", "d2", "d3", "d4", "d5", "d6"};
    for (int i = 0; i < 4; ++i) {
      double s = solve_suboptimal_sigma(targets[i], 1.0, 0.05, 0.4, 50, 50);
      out.push_back({labels[i], RewardModel::gaussian(1.0, 0.05), RewardModel::gaussian(0.4, s), targets[i]});
    }
    out.push_back({labels[4], RewardModel::gaussian(1.0, 0.05), RewardModel::gaussian(0.4, 0.1), 0.0});
    out.push_back({labels[5], RewardModel::gaussian(1.0, 0.05), RewardModel::gaussian(0.4, 0.05), 0.0});
    return out;
  }();
  return pairs;
}

/// Segments cycling through `pairs`, the optimal arm alternating between arm 1 and arm 2.
inline EnvironmentSchedule alternating_schedule(const std::vector<DistributionPair>& pairs,
                                                const std::vector<std::size_t>& order, std::size_t segment_length) {
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& p = pairs.at(order[i]);
    if (i % 2 == 0) segs.push_back({segment_length, {p.optimal, p.suboptimal}});
    else segs.push_back({segment_length, {p.suboptimal, p.optimal}});
  }
  return EnvironmentSchedule::from_segments(std::move(segs));
}

inline const std::vector<std::string>& experiment1_names() {
  static const std::vector<std::string> names = {"stable_low", "stable_high", "volatile_low", "volatile_high"};
  return names;
}

/// Experiment 1: stable (2 changes, 3 x 200 steps) or volatile (5 changes, 6 x 100 steps),
/// low uncertainty (d4-d6) or high uncertainty (d1-d3).
inline EnvironmentSchedule make_experiment1(const std::string& name) {
  const auto& d = experiment1_distributions();
  if (name == "stable_low") return alternating_schedule(d, {3, 4, 5}, 200);
  if (name == "stable_high") return alternating_schedule(d, {0, 1, 2}, 200);
  if (name == "volatile_low") return alternating_schedule(d, {3, 4, 5, 3, 4, 5}, 100);
  if (name == "volatile_high") return alternating_schedule(d, {0, 1, 2, 0, 1, 2}, 100);
  throw ConfigError("unknown Experiment-1 environment '" + name + "'");
}

/// Experiment 2: random volatile schedule over both orientations of the six distributions.
inline EnvironmentSchedule make_experiment2(Rng& rng, std::size_t horizon = 600) {
  std::vector<ArmModels> pool;
  for (const auto& p : experiment1_distributions()) {
    pool.push_back({p.optimal, p.suboptimal});
    pool.push_back({p.suboptimal, p.optimal});
  }
  return make_random_volatile(pool, horizon, rng);
}

/// Experiment 3: gradual sinusoidal drift.
inline EnvironmentSchedule make_experiment3(std::size_t horizon = 600) {
  return EnvironmentSchedule::from_gradual(default_gradual_spec(horizon));
}

/// Training environment: 220 steps over six distributions distinct from the test suites.
inline EnvironmentSchedule make_training_env() {
  auto g = [](double mu, double s) { return RewardModel::gaussian(mu, s); };
  return EnvironmentSchedule::from_segments({
      {40, {g(0.9, 0.05), g(0.4, 0.05)}},
      {30, {g(0.4, 0.45), g(0.9, 0.05)}},
      {40, {g(0.8, 0.1), g(0.3, 0.1)}},
      {30, {g(0.3, 0.6), g(0.8, 0.1)}},
      {40, {g(0.9, 0.05), g(0.5, 0.3)}},
      {40, {g(0.5, 0.05), g(0.9, 0.05)}},
  });
}

inline EnvironmentSchedule make_low_uncertainty_reversal(std::size_t T = 400) {
  return make_reversal_schedule(1.0, 0.05, 0.4, 0.05, T);
}
inline EnvironmentSchedule make_high_uncertainty_reversal(std::size_t T = 400) {
  return make_reversal_schedule(1.0, 0.05, 0.4, 0.5, T);
}

/// Named environments accepted by the CLI in place of an env file.
inline EnvironmentSchedule make_preset(const std::string& name, std::uint64_t seed = 1) {
  if (name == "reversal_low") return make_low_uncertainty_reversal();
  if (name == "reversal_high") return make_high_uncertainty_reversal();
  if (name == "training") return make_training_env();
  if (name == "experiment2") {
    Rng rng(derive_seed(seed, 77));
    return make_experiment2(rng);
  }
  if (name == "experiment3") return make_experiment3();
  for (const auto& n : experiment1_names())
    if (name == n || name == "experiment1/" + n) return make_experiment1(n);
  throw ConfigError("unknown environment preset '" + name + "'");
}

// ---- meta-strategy suites --------------------------------------------------------------------

inline std::vector<MetaKind> all_meta_kinds() { return {kAllMetaKinds.begin(), kAllMetaKinds.end()}; }

/// Per-kind replicates of single-kind lifetime populations on one environment.
struct SuiteResult {
  std::vector<MetaKind> kinds;
  std::vector<std::vector<RunResult>> runs;  // [kind][replicate]

  /// runs x kinds matrix of a per-run score.
  template <class Score>
  std::vector<std::vector<double>> matrix(Score&& score) const {
    std::size_t n = runs.empty() ? 0 : runs.front().size();
    std::vector<std::vector<double>> out(n, std::vector<double>(kinds.size()));
    for (std::size_t k = 0; k < kinds.size(); ++k)
      for (std::size_t r = 0; r < n; ++r) out[r][k] = score(runs[k][r]);
    return out;
  }

  std::vector<std::vector<double>> cumulative_matrix() const {
    return matrix([](const RunResult& r) { return r.cumulative_psi(); });
  }

  std::vector<double> mean_cost() const {
    std::vector<double> out;
    for (const auto& reps : runs) {
      double s = 0.0;
      for (const auto& r : reps) s += r.exploration_cost();
      out.push_back(s / static_cast<double>(reps.size()));
    }
    return out;
  }

  std::size_t index(MetaKind k) const {
    for (std::size_t i = 0; i < kinds.size(); ++i)
      if (kinds[i] == k) return i;
    throw ConfigError(std::string("meta kind not part of the suite: ") + to_string(k));
  }
};

/// Every kind is evaluated on the same replicate seeds (paired design for rank statistics).
inline SuiteResult run_meta_suite(const EnvironmentSchedule& env, const std::vector<MetaKind>& kinds,
                                  const EvoParams& params, const ControllerSet& ctl,
                                  const std::vector<std::uint64_t>& seeds, unsigned threads = 1) {
  SuiteResult out;
  out.kinds = kinds;
  for (MetaKind k : kinds) {
    PopulationSpec spec;
    spec.mode = EvoMode::Lifetime;
    spec.meta_set = {k};
    out.runs.push_back(run_replicates(env, params, spec, ctl, seeds, threads));
  }
  return out;
}

/// Competition among `kinds` under selection and kind resampling.
inline std::vector<RunResult> run_competition(const EnvironmentSchedule& env, const std::vector<MetaKind>& kinds,
                                              const EvoParams& params, const ControllerSet& ctl,
                                              const std::vector<std::uint64_t>& seeds, unsigned threads = 1) {
  PopulationSpec spec;
  spec.mode = EvoMode::Competition;
  spec.meta_set = kinds;
  return run_replicates(env, params, spec, ctl, seeds, threads);
}

/// Alg1 replicates: individual learners with one social learning strategy (or IL only when `sl_ratio` = 0 and mr = 0).
inline std::vector<RunResult> run_alg1(const EnvironmentSchedule& env, CopyRule sls, const EvoParams& params,
                                       const std::vector<std::uint64_t>& seeds, double initial_sl = 0.5,
                                       unsigned threads = 1) {
  PopulationSpec spec;
  spec.mode = EvoMode::Alg1;
  spec.sls = sls;
  spec.initial_sl = initial_sl;
  return run_replicates(env, params, spec, ControllerSet{}, seeds, threads);
}

inline std::vector<RunResult> run_il_only(const EnvironmentSchedule& env, EvoParams params,
                                          const std::vector<std::uint64_t>& seeds, unsigned threads = 1) {
  params.mr = 0.0;
  return run_alg1(env, CopyRule::Success, params, seeds, 0.0, threads);
}

inline std::vector<double> window_means(const std::vector<RunResult>& runs, std::size_t from, std::size_t to) {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(r.window_mean(from, to));
  return out;
}

/// Mean over the final `window` generations of each category's ratio, averaged over runs.
inline std::vector<double> terminal_ratios(const RunResult& r, std::size_t window) {
  std::size_t T = r.ratio.size();
  std::size_t from = T > window ? T - window : 0;
  std::vector<double> out(r.labels.size(), 0.0);
  for (std::size_t t = from; t < T; ++t)
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += r.ratio[t][c];
  for (double& v : out) v /= static_cast<double>(T - from);
  return out;
}

/// Indices of the `count` categories with the largest terminal ratio (ties by index).
inline std::vector<std::size_t> top_categories(const std::vector<double>& ratios, std::size_t count) {
  std::vector<std::size_t> idx(ratios.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ratios[a] > ratios[b]; });
  idx.resize(std::min(count, idx.size()));
  return idx;
}

/// Mean age of the category with the largest terminal ratio, averaged over the final window.
inline double dominant_mean_age(const RunResult& r, std::size_t window) {
  auto ratios = terminal_ratios(r, window);
  std::size_t dom = top_categories(ratios, 1).front();
  std::size_t T = r.mean_age.size();
  std::size_t from = T > window ? T - window : 0;
  double s = 0.0;
  for (std::size_t t = from; t < T; ++t) s += r.mean_age[t][dom];
  return s / static_cast<double>(T - from);
}

/// Default controllers: reference SL-GA table, zero FCN and an SL-QL table pre-trained on the
/// training environment.
inline ControllerSet default_controllers(std::size_t ql_episodes = 400, std::uint64_t seed = 7) {
  ControllerSet c;
  EvoParams p;
  p.m = 100;
  c.ql_init = pretrain_ql(make_training_env(), p, ql_episodes, seed);
  return c;
}

}  // namespace msl

#endif
