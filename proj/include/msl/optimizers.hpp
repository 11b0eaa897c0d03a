#ifndef MSL_OPTIMIZERS_HPP
#define MSL_OPTIMIZERS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "msl/evolution.hpp"
#include "msl/stats.hpp"

namespace msl {

/// Population, environment and replicate seeds used to score a controller.
struct TrainSetup {
  EnvironmentSchedule env;
  EvoParams params;
  std::size_t replicates = 24;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Median over replicates of the cumulative average population reward of a population in which
/// every agent runs `kind` with the given controllers. Replicate seeds are shared across calls.
inline double controller_fitness(MetaKind kind, const ControllerSet& ctl, const TrainSetup& setup) {
  PopulationSpec spec;
  spec.mode = EvoMode::Lifetime;
  spec.meta_set = {kind};
  auto runs = run_replicates(setup.env, setup.params, spec, ctl, replicate_seeds(setup.seed, setup.replicates),
                             setup.threads);
  std::vector<double> cum;
  cum.reserve(runs.size());
  for (const auto& r : runs) cum.push_back(r.cumulative_psi());
  return stats::median(cum);
}

// ---- genotypes -------------------------------------------------------------------------------

inline constexpr std::size_t kRuleGenes = kRuleStates + 2;
inline constexpr double kThresholdMin = 1e-3;
inline constexpr double kThresholdMax = 1.0;

/// Layout: 8 strategy genes (0/1/2) then th_ec, th_u.
inline std::vector<double> encode(const RuleTable& t) {
  std::vector<double> g;
  for (auto r : t.rules) g.push_back(static_cast<double>(r));
  g.push_back(t.th_ec);
  g.push_back(t.th_u);
  return g;
}

inline RuleTable decode_rule_table(const std::vector<double>& g) {
  if (g.size() != kRuleGenes) throw ConfigError("rule-table genotype must have 10 genes");
  RuleTable t;
  for (std::size_t i = 0; i < kRuleStates; ++i) t.rules[i] = strategy_from_index(static_cast<std::size_t>(g[i]));
  t.th_ec = g[kRuleStates];
  t.th_u = g[kRuleStates + 1];
  return t;
}

inline FCNWeights decode_fcn(const std::vector<double>& g, std::size_t arms = 2, std::size_t hidden = 12) {
  FCNWeights w = FCNWeights::zeros(arms, hidden);
  if (g.size() != w.size()) throw ConfigError("FCN genotype has the wrong length");
  w.w = g;
  return w;
}

enum class GeneSpace { RuleTable, FCN };

struct GaConfig {
  std::size_t pop = 50;
  std::size_t elites = 4;
  double crossover = 0.8;
  double mutation = -1.0;      // per-gene probability; negative selects the space default
  double sigma = 0.1;          // Gaussian step on continuous genes
  std::size_t stall = 20;
  std::size_t max_generations = 200;
  bool mutate_all_dims = false;  // FCN: perturb every weight instead of gating per gene

  static GaConfig rule_defaults() { return {}; }
  static GaConfig fcn_defaults() {
    GaConfig c;
    c.elites = 5;
    c.stall = 50;
    return c;
  }

  void validate() const {
    if (pop < 2 || elites >= pop) throw ConfigError("GA needs pop >= 2 and elites < pop");
    if (!(crossover >= 0.0 && crossover <= 1.0)) throw ConfigError("GA crossover probability must lie in [0, 1]");
    if (mutation > 1.0) throw ConfigError("GA mutation probability must be <= 1");
    if (!(sigma >= 0.0)) throw ConfigError("GA mutation sigma must be >= 0");
    if (stall < 1 || max_generations < 1) throw ConfigError("GA stall and generation limits must be >= 1");
  }
};

struct DeConfig {
  std::size_t pop = 50;
  double F = 0.5;
  double CR = 0.1;
  double init_low = -1.0;
  double init_high = 1.0;
  std::size_t stall = 50;
  std::size_t max_generations = 200;

  void validate() const {
    if (pop < 4) throw ConfigError("DE needs a population of at least 4");
    if (!(F > 0.0)) throw ConfigError("DE scale factor F must be positive");
    if (!(CR >= 0.0 && CR <= 1.0)) throw ConfigError("DE crossover rate must lie in [0, 1]");
    if (!(init_low < init_high)) throw ConfigError("DE initialization range is empty");
    if (stall < 1 || max_generations < 1) throw ConfigError("DE stall and generation limits must be >= 1");
  }
};

struct TrainResult {
  std::vector<double> best;
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // best-so-far fitness after each generation (generation 0 = initial population)
  std::size_t generations = 0;
  std::size_t evaluations = 0;
};

using FitnessFn = std::function<double(const std::vector<double>&)>;

/// Memoizes a deterministic fitness function.
class FitnessCache {
 public:
  explicit FitnessCache(FitnessFn f) : f_(std::move(f)) {}
  double operator()(const std::vector<double>& g) {
    auto it = cache_.find(g);
    if (it != cache_.end()) return it->second;
    ++evaluations_;
    double v = f_(g);
    if (!std::isfinite(v)) throw NumericError("fitness evaluation returned a non-finite value");
    cache_.emplace(g, v);
    return v;
  }
  std::size_t evaluations() const { return evaluations_; }

 private:
  FitnessFn f_;
  std::map<std::vector<double>, double> cache_;
  std::size_t evaluations_ = 0;
};

namespace detail {

inline bool is_discrete(GeneSpace space, std::size_t i) { return space == GeneSpace::RuleTable && i < kRuleStates; }

inline std::vector<double> random_genotype(GeneSpace space, std::size_t length, Rng& rng) {
  std::vector<double> g(length);
  for (std::size_t i = 0; i < length; ++i) {
    if (is_discrete(space, i)) g[i] = static_cast<double>(uniform_index(rng, kStrategyCount));
    else if (space == GeneSpace::RuleTable) g[i] = kThresholdMin + (kThresholdMax - kThresholdMin) * uniform01(rng);
    else g[i] = -1.0 + 2.0 * uniform01(rng);
  }
  return g;
}

inline void mutate(std::vector<double>& g, GeneSpace space, const GaConfig& cfg, double rate, Rng& rng) {
  std::normal_distribution<double> step(0.0, cfg.sigma);
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool hit = (space == GeneSpace::FCN && cfg.mutate_all_dims) || uniform01(rng) < rate;
    if (!hit) continue;
    if (is_discrete(space, i)) {
      g[i] = static_cast<double>(uniform_index(rng, kStrategyCount));
    } else {
      g[i] += step(rng);
      if (space == GeneSpace::RuleTable) g[i] = std::clamp(g[i], kThresholdMin, kThresholdMax);
    }
  }
}

}  // namespace detail

inline std::size_t genotype_length(GeneSpace space, std::size_t arms = 2, std::size_t hidden = 12) {
  return space == GeneSpace::RuleTable ? kRuleGenes : FCNWeights::parameter_count(3 * arms, hidden);
}

/// Generational GA: elitism, roulette-wheel parent selection, one-point crossover, per-gene mutation.
/// Stops after `stall` generations without improvement of the best fitness.
inline TrainResult ga_train(GeneSpace space, const GaConfig& cfg, const FitnessFn& fitness, Rng& rng,
                            std::size_t length = 0) {
  cfg.validate();
  if (length == 0) length = genotype_length(space);
  double rate = cfg.mutation >= 0.0 ? cfg.mutation
                                    : (space == GeneSpace::RuleTable ? 1.0 / static_cast<double>(length - 2)
                                                                     : 1.0 / static_cast<double>(length));
  FitnessCache eval(fitness);
  std::vector<std::vector<double>> pop(cfg.pop);
  std::vector<double> fit(cfg.pop);
  for (std::size_t i = 0; i < cfg.pop; ++i) {
    pop[i] = detail::random_genotype(space, length, rng);
    fit[i] = eval(pop[i]);
  }
  TrainResult res;
  auto update_best = [&] {
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (fit[i] > res.best_fitness) {
        res.best_fitness = fit[i];
        res.best = pop[i];
      }
  };
  update_best();
  res.trace.push_back(res.best_fitness);
  std::size_t since_improvement = 0;
  for (std::size_t gen = 1; gen <= cfg.max_generations && since_improvement < cfg.stall; ++gen) {
    std::vector<std::size_t> order(cfg.pop);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
    std::vector<std::vector<double>> next;
    std::vector<double> next_fit;
    for (std::size_t e = 0; e < cfg.elites; ++e) {
      next.push_back(pop[order[e]]);
      next_fit.push_back(fit[order[e]]);
    }
    std::vector<double> weights(fit);
    for (double& w : weights) w = std::max(w, 1e-6);
    while (next.size() < cfg.pop) {
      auto parents = roulette_select(weights, 1.0, rng, 2);
      std::vector<double> c1 = pop[parents[0]], c2 = pop[parents[1]];
      if (uniform01(rng) < cfg.crossover) {
        std::size_t cut = 1 + uniform_index(rng, length - 1);
        for (std::size_t i = cut; i < length; ++i) std::swap(c1[i], c2[i]);
      }
      detail::mutate(c1, space, cfg, rate, rng);
      detail::mutate(c2, space, cfg, rate, rng);
      next.push_back(std::move(c1));
      if (next.size() < cfg.pop) next.push_back(std::move(c2));
    }
    for (std::size_t i = next_fit.size(); i < next.size(); ++i) next_fit.push_back(eval(next[i]));
    pop = std::move(next);
    fit = std::move(next_fit);
    double before = res.best_fitness;
    update_best();
    since_improvement = res.best_fitness > before ? 0 : since_improvement + 1;
    res.trace.push_back(res.best_fitness);
    res.generations = gen;
  }
  res.evaluations = eval.evaluations();
  return res;
}

/// DE/rand/1/bin with greedy one-to-one replacement.
inline TrainResult de_train(const DeConfig& cfg, std::size_t length, const FitnessFn& fitness, Rng& rng,
                            std::vector<double>* slot_trace_min = nullptr) {
  cfg.validate();
  FitnessCache eval(fitness);
  std::vector<std::vector<double>> pop(cfg.pop, std::vector<double>(length));
  std::vector<double> fit(cfg.pop);
  std::uniform_real_distribution<double> init(cfg.init_low, cfg.init_high);
  for (std::size_t i = 0; i < cfg.pop; ++i) {
    for (double& v : pop[i]) v = init(rng);
    fit[i] = eval(pop[i]);
  }
  TrainResult res;
  auto update_best = [&] {
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (fit[i] > res.best_fitness) {
        res.best_fitness = fit[i];
        res.best = pop[i];
      }
  };
  update_best();
  res.trace.push_back(res.best_fitness);
  if (slot_trace_min) slot_trace_min->push_back(*std::min_element(fit.begin(), fit.end()));
  std::size_t since_improvement = 0;
  for (std::size_t gen = 1; gen <= cfg.max_generations && since_improvement < cfg.stall; ++gen) {
    for (std::size_t i = 0; i < cfg.pop; ++i) {
      std::size_t r1, r2, r3;
      do r1 = uniform_index(rng, cfg.pop); while (r1 == i);
      do r2 = uniform_index(rng, cfg.pop); while (r2 == i || r2 == r1);
      do r3 = uniform_index(rng, cfg.pop); while (r3 == i || r3 == r1 || r3 == r2);
      std::size_t forced = uniform_index(rng, length);
      std::vector<double> trial = pop[i];
      for (std::size_t d = 0; d < length; ++d)
        if (d == forced || uniform01(rng) < cfg.CR) trial[d] = pop[r1][d] + cfg.F * (pop[r2][d] - pop[r3][d]);
      double f = eval(trial);
      if (f >= fit[i]) {
        pop[i] = std::move(trial);
        fit[i] = f;
      }
    }
    double before = res.best_fitness;
    update_best();
    since_improvement = res.best_fitness > before ? 0 : since_improvement + 1;
    res.trace.push_back(res.best_fitness);
    if (slot_trace_min) slot_trace_min->push_back(*std::min_element(fit.begin(), fit.end()));
    res.generations = gen;
  }
  res.evaluations = eval.evaluations();
  return res;
}

/// Fitness function scoring a genotype as SL-GA or SL-NE controller on the training setup.
inline FitnessFn make_controller_fitness(GeneSpace space, TrainSetup setup, ControllerSet base = {}) {
  return [space, setup = std::move(setup), base = std::move(base)](const std::vector<double>& g) {
    ControllerSet ctl = base;
    if (space == GeneSpace::RuleTable) {
      ctl.rule_table = decode_rule_table(g);
      return controller_fitness(MetaKind::SLGA, ctl, setup);
    }
    ctl.fcn = decode_fcn(g, setup.env.arms());
    return controller_fitness(MetaKind::SLNE, ctl, setup);
  };
}

struct MultiRunResult {
  std::vector<TrainResult> runs;
  std::size_t best_run = 0;
  const TrainResult& best() const { return runs[best_run]; }
};

enum class TrainAlgo { GA, DE };

/// Independent training runs with derived seeds; the best run is chosen by fitness.
inline MultiRunResult train_controller(GeneSpace space, TrainAlgo algo, const FitnessFn& fitness, std::size_t runs,
                                       std::uint64_t seed, const GaConfig& ga, const DeConfig& de,
                                       const std::function<void(std::size_t, const TrainResult&)>& on_run = {}) {
  if (runs < 1) throw ConfigError("training needs at least one run");
  if (space == GeneSpace::RuleTable && algo == TrainAlgo::DE)
    throw ConfigError("DE training is only defined for the FCN space");
  MultiRunResult out;
  for (std::size_t r = 0; r < runs; ++r) {
    Rng rng(derive_seed(seed, 1000 + r));
    TrainResult tr = algo == TrainAlgo::GA ? ga_train(space, ga, fitness, rng)
                                           : de_train(de, genotype_length(space), fitness, rng);
    if (on_run) on_run(r, tr);
    out.runs.push_back(std::move(tr));
    if (out.runs.back().best_fitness > out.runs[out.best_run].best_fitness) out.best_run = r;
  }
  return out;
}

/// Pre-trains the SL-QL table: episodes of an all-SL-QL population on the training environment,
/// each starting from the agent-averaged table of the previous episode.
inline QLTable pretrain_ql(const EnvironmentSchedule& env, EvoParams params, std::size_t episodes,
                           std::uint64_t seed) {
  ControllerSet ctl;
  PopulationSpec spec;
  spec.mode = EvoMode::Lifetime;
  spec.meta_set = {MetaKind::SLQL};
  for (std::size_t e = 0; e < episodes; ++e) {
    Simulation sim(env, params, spec, ctl, derive_seed(seed, e));
    sim.run();
    QLTable avg{};
    for (const auto& a : sim.agents())
      for (std::size_t s = 0; s < kRuleStates; ++s)
        for (std::size_t k = 0; k < kStrategyCount; ++k) avg[s][k] += a.ql.q[s][k];
    double m = static_cast<double>(sim.agents().size());
    for (auto& row : avg)
      for (double& v : row) v /= m;
    ctl.ql_init = avg;
  }
  return ctl.ql_init;
}

}  // namespace msl

#endif
