#ifndef MSL_EVOLUTION_HPP
#define MSL_EVOLUTION_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "msl/context.hpp"
#include "msl/env.hpp"
#include "msl/learning.hpp"
#include "msl/meta.hpp"
#include "msl/replicator.hpp"

namespace msl {

/// Copy rule of the social learners in the IL-vs-SL evolutionary algorithm.
enum class CopyRule { Success, Conformist, PerfectModel, Model90, RandomAgent };

inline const char* to_string(CopyRule c) {
  switch (c) {
    case CopyRule::Success: return "success";
    case CopyRule::Conformist: return "conformist";
    case CopyRule::PerfectModel: return "perfect";
    case CopyRule::Model90: return "model90";
    case CopyRule::RandomAgent: return "random";
  }
  return "?";
}

inline CopyRule copy_rule_from_string(const std::string& s) {
  for (CopyRule c : {CopyRule::Success, CopyRule::Conformist, CopyRule::PerfectModel, CopyRule::Model90,
                     CopyRule::RandomAgent})
    if (s == to_string(c)) return c;
  throw ConfigError("unknown copy rule '" + s + "'");
}

inline CopyRule to_copy_rule(SocialRule s) { return s == SocialRule::Success ? CopyRule::Success : CopyRule::Conformist; }

enum class EvoMode {
  Alg1,         // individual learners vs one social learning strategy, with selection and type flips
  Lifetime,     // fixed meta-strategy populations, no selection
  Competition,  // mixed meta-strategies under selection and kind resampling
};

struct EvoParams {
  std::size_t m = 100;
  double epsilon = 0.1;
  double beta = 0.2;
  long long tau = 1;
  double mr = 0.005;
  double s = 1.0;
  double fitness_floor = 1e-6;
  bool random_success_ties = true;
  bool reset_q_on_mutation = false;
  bool selection_in_lifetime = false;
  bool record_odpu = true;  // when false, ODPU is computed only if some kind reads U
  ContextParams context;
  BanditParams bandit;

  void validate() const {
    if (m < 1) throw ConfigError("population size must be >= 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
    if (tau < 0) throw ConfigError("tau must be >= 0");
    if (!(mr >= 0.0 && mr <= 1.0)) throw ConfigError("mutation rate must lie in [0, 1]");
    if (!(s >= 0.0)) throw ConfigError("selection strength must be >= 0");
    context.validate();
  }
};

struct PopulationSpec {
  EvoMode mode = EvoMode::Alg1;
  CopyRule sls = CopyRule::Success;     // Alg1
  double initial_sl = 0.5;              // Alg1: probability that an initial agent is a social learner
  std::vector<MetaKind> meta_set;       // Lifetime/Competition; initial kinds drawn uniformly from it
};

struct Agent {
  QTable q;
  bool social = false;                  // Alg1 type
  MetaKind kind = MetaKind::ILOnly;     // Lifetime/Competition type
  StrategyBanditState bandit;
  QLearner ql;
  std::size_t age = 0;
  std::size_t last_action = 0;
  double last_reward = 0.0;
  StrategyKind last_strategy = StrategyKind::IndividualLearning;
};

/// Per-generation traces of one replicate.
struct RunResult {
  std::uint64_t seed = 0;
  std::vector<std::string> labels;           // categories of ratio/age columns
  std::vector<double> psi;
  std::vector<std::vector<double>> ratio;    // [t][category]
  std::vector<std::vector<double>> mean_age; // [t][category]; 0 when the category is absent
  std::vector<std::array<double, 3>> strategy_use;  // fraction executing IL / success / conformist
  std::vector<int> ec, conf, unc;
  std::vector<double> odpu;
  std::vector<std::size_t> il_steps;         // agent-steps that executed individual learning
  std::vector<double> a1, a2;                // fraction of the population that are individual learners on arm 1/2
  std::vector<double> optimal_fraction;
  double epsilon = 0.1;

  std::size_t horizon() const { return psi.size(); }

  double cumulative_psi() const { return std::accumulate(psi.begin(), psi.end(), 0.0); }

  /// Mean psi over steps t in (from, to], i.e. 1-based steps from+1..to.
  double window_mean(std::size_t from, std::size_t to) const {
    if (to > psi.size() || from >= to) throw ConfigError("evaluation window outside the run horizon");
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += psi[i];
    return s / static_cast<double>(to - from);
  }

  double exploration_cost() const {
    double total = 0.0;
    for (auto n : il_steps) total += static_cast<double>(n);
    return total * epsilon;
  }

  std::vector<double> cost_ledger() const {
    std::vector<double> out(il_steps.size());
    double run = 0.0;
    for (std::size_t i = 0; i < il_steps.size(); ++i) {
      run += static_cast<double>(il_steps[i]) * epsilon;
      out[i] = run;
    }
    return out;
  }
};

/// Draws m indices i.i.d. with probability proportional to f_i^s (fitness floored beforehand).
inline std::vector<std::size_t> roulette_select(const std::vector<double>& fitness, double s, Rng& rng,
                                                std::size_t count = 0) {
  std::size_t m = fitness.size();
  if (count == 0) count = m;
  std::vector<double> cum(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double w = s == 0.0 ? 1.0 : std::pow(std::max(fitness[i], 0.0), s);
    if (!std::isfinite(w)) throw NumericError("non-finite selection weight");
    total += w;
    cum[i] = total;
  }
  std::vector<std::size_t> out(count);
  if (!(total > 0.0)) {
    for (auto& o : out) o = uniform_index(rng, m);
    return out;
  }
  for (auto& o : out) {
    double u = uniform01(rng) * total;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    o = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), m - 1);
  }
  return out;
}

/// Age bookkeeping after selection: the first copy of each parent ages by one, other copies restart at 0.
inline std::vector<std::size_t> age_update(const std::vector<std::size_t>& selected,
                                           const std::vector<std::size_t>& parent_ages) {
  std::vector<char> seen(parent_ages.size(), 0);
  std::vector<std::size_t> ages(selected.size());
  for (std::size_t j = 0; j < selected.size(); ++j) {
    std::size_t p = selected[j];
    ages[j] = seen[p] ? 0 : parent_ages[p] + 1;
    seen[p] = 1;
  }
  return ages;
}

/// Flips (Alg1) or resamples (meta modes) each agent's type with probability mr; mutated agents restart at age 0.
template <class OnMutate>
void mutate_agents(std::vector<Agent>& agents, double mr, EvoMode mode, const std::vector<MetaKind>& meta_set,
                   Rng& rng, OnMutate&& on_mutate) {
  if (mr <= 0.0) return;
  for (auto& a : agents) {
    if (uniform01(rng) >= mr) continue;
    a.age = 0;
    if (mode == EvoMode::Alg1) a.social = !a.social;
    else a.kind = meta_set[uniform_index(rng, meta_set.size())];
    on_mutate(a);
  }
}

inline void mutate_agents(std::vector<Agent>& agents, double mr, EvoMode mode, const std::vector<MetaKind>& meta_set,
                          Rng& rng) {
  mutate_agents(agents, mr, mode, meta_set, rng, [](Agent&) {});
}

/// Agent-based simulation of one replicate.
class Simulation {
 public:
  Simulation(const EnvironmentSchedule& env, EvoParams params, PopulationSpec spec, ControllerSet controllers,
             std::uint64_t seed)
      : env_(env), p_(std::move(params)), spec_(std::move(spec)), ctl_(std::move(controllers)), rng_(seed),
        seed_(seed), history_(static_cast<std::size_t>(p_.tau) + 2), encoder_(env.arms(), p_.context) {
    p_.validate();
    if (spec_.mode != EvoMode::Alg1 && spec_.meta_set.empty())
      throw ConfigError("meta-strategy populations need a non-empty meta_set");
    if (spec_.mode == EvoMode::Alg1 && !(spec_.initial_sl >= 0.0 && spec_.initial_sl <= 1.0))
      throw ConfigError("initial social learner ratio must lie in [0, 1]");
    if (ctl_.fcn.inputs != 3 * env.arms()) ctl_.fcn = FCNWeights::zeros(env.arms(), ctl_.fcn.hidden);
    init_population();
    needs_odpu_ = p_.record_odpu || uses(MetaKind::SLECSucc) || uses(MetaKind::SLECConfUnc) || uses(MetaKind::SLQL) ||
                  uses(MetaKind::SLGA);
  }

  RunResult run() {
    RunResult res;
    res.seed = seed_;
    res.epsilon = p_.epsilon;
    res.labels = category_labels();
    std::size_t T = env_.horizon();
    reserve(res, T);
    for (std::size_t t = 1; t <= T; ++t) step(t, res);
    return res;
  }

  const std::vector<Agent>& agents() const { return agents_; }

 private:
  std::vector<std::string> category_labels() const {
    if (spec_.mode == EvoMode::Alg1) return {"IL", "SL"};
    std::vector<std::string> l;
    for (MetaKind k : spec_.meta_set) l.push_back(to_string(k));
    return l;
  }

  void reserve(RunResult& r, std::size_t T) const {
    r.psi.reserve(T);
    r.ratio.reserve(T);
    r.mean_age.reserve(T);
  }

  void reset_controller(Agent& a) const {
    a.bandit = StrategyBanditState{};
    a.ql = QLearner{};
    a.ql.q = ctl_.ql_init;
  }

  Agent fresh_agent() const {
    Agent a;
    a.q = QTable(env_.arms(), p_.beta);
    reset_controller(a);
    return a;
  }

  void init_population() {
    agents_.clear();
    agents_.reserve(p_.m);
    for (std::size_t i = 0; i < p_.m; ++i) {
      Agent a = fresh_agent();
      if (spec_.mode == EvoMode::Alg1) a.social = uniform01(rng_) < spec_.initial_sl;
      else a.kind = spec_.meta_set[uniform_index(rng_, spec_.meta_set.size())];
      agents_.push_back(std::move(a));
    }
  }

  std::size_t category_of(const Agent& a) const {
    if (spec_.mode == EvoMode::Alg1) return a.social ? 1 : 0;
    for (std::size_t i = 0; i < spec_.meta_set.size(); ++i)
      if (spec_.meta_set[i] == a.kind) return i;
    return 0;
  }

  StrategyKind choose_strategy(Agent& a, std::size_t t, const Context& ctx, const ContextFlags& ga_flags,
                               StrategyKind fcn_choice) {
    if (spec_.mode == EvoMode::Alg1) {
      if (!a.social || t == 1) return StrategyKind::IndividualLearning;
      return spec_.sls == CopyRule::Conformist ? StrategyKind::Conformist : StrategyKind::SuccessBased;
    }
    switch (a.kind) {
      case MetaKind::ILOnly:
      case MetaKind::SLRand:
      case MetaKind::SLProp:
      case MetaKind::SLConf:
      case MetaKind::SLSucc:
        return msl_fixed(a.kind, rng_);
      case MetaKind::SLECConf: return msl_ec_conf(ctx.flags);
      case MetaKind::SLECSucc: return msl_ec_succ(ctx.flags);
      case MetaKind::SLECConfUnc: return msl_ec_conf_unc(ctx.flags);
      case MetaKind::SLGA: return msl_rule_table(ctl_.rule_table, ga_flags);
      case MetaKind::SLNE: return fcn_choice;
      case MetaKind::SLRL: return strategy_from_index(a.bandit.select_rl(p_.bandit.epsilon, rng_));
      case MetaKind::SLUCB: return strategy_from_index(a.bandit.select_ucb(p_.bandit.ucb_c));
      case MetaKind::SLQL: {
        std::size_t s = ctx.flags.state();
        a.ql.settle(s, p_.bandit.alpha_ql, p_.bandit.gamma_ql);
        return strategy_from_index(a.ql.select(s, p_.bandit.epsilon_ql, rng_));
      }
    }
    return StrategyKind::IndividualLearning;
  }

  // Returns the arm and whether individual learning was executed.
  std::pair<std::size_t, bool> act(Agent& a, StrategyKind strategy, std::size_t t) {
    long long tt = static_cast<long long>(t);
    std::optional<std::size_t> copied;
    if (spec_.mode == EvoMode::Alg1 && strategy != StrategyKind::IndividualLearning) {
      copied = alg1_copy(tt);
    } else if (strategy == StrategyKind::SuccessBased) {
      copied = p_.random_success_ties ? success_based_copy(history_, tt, p_.tau, rng_)
                                      : success_based_copy(history_, tt, p_.tau);
    } else if (strategy == StrategyKind::Conformist) {
      copied = conformist_copy(history_, tt, p_.tau);
    }
    if (copied) return {*copied, false};
    return {epsilon_greedy(a.q, p_.epsilon, rng_), true};
  }

  std::optional<std::size_t> alg1_copy(long long t) {
    switch (spec_.sls) {
      case CopyRule::Success:
        return p_.random_success_ties ? success_based_copy(history_, t, p_.tau, rng_)
                                      : success_based_copy(history_, t, p_.tau);
      case CopyRule::Conformist:
        return conformist_copy(history_, t, p_.tau);
      case CopyRule::PerfectModel:
        return model_copy(ModelKind::Perfect, optimal_now_, env_.arms(), rng_);
      case CopyRule::Model90:
        return model_copy(ModelKind::Correct90, optimal_now_, env_.arms(), rng_);
      case CopyRule::RandomAgent: {
        const SocialInfo* info = history_.lookup(t - p_.tau);
        if (!info || info->rewards.empty()) return std::nullopt;
        return info->rewards[uniform_index(rng_, info->rewards.size())].action;
      }
    }
    return std::nullopt;
  }

  void step(std::size_t t, RunResult& res) {
    const std::size_t k = env_.arms();
    models_ = &env_.models_ref(t - 1, scratch_);
    {
      std::vector<double> means(k);
      for (std::size_t j = 0; j < k; ++j) means[j] = (*models_)[j].mean();
      optimal_now_ = argmax(means);
    }

    Context ctx;
    if (const SocialInfo* prev = history_.latest(); prev) ctx = encoder_.observe(*prev, needs_odpu_);
    ContextFlags ga_flags = ctx.flags_for(ctl_.rule_table.params(p_.context.delta));
    StrategyKind fcn_choice = StrategyKind::IndividualLearning;
    if (uses(MetaKind::SLNE)) {
      if (ctx.valid) fcn_choice = msl_fcn(ctl_.fcn, ctx.mu_hat, ctx.sigma_hat, normalized(ctx.freq));
      else fcn_choice = msl_fcn(ctl_.fcn, std::vector<double>(k, 0.0), std::vector<double>(k, 0.0),
                                std::vector<double>(k, 0.0));
    }

    std::vector<RewardEntry> entries(agents_.size());
    std::size_t il_count = 0;
    std::array<std::size_t, 3> use{};
    std::size_t on_optimal = 0;
    std::size_t il_arm[2] = {0, 0};
    double reward_sum = 0.0;

    for (std::size_t i = 0; i < agents_.size(); ++i) {
      Agent& a = agents_[i];
      StrategyKind strategy = choose_strategy(a, t, ctx, ga_flags, fcn_choice);
      auto [arm, did_il] = act(a, strategy, t);
      double r = sampler_((*models_)[arm], rng_);
      a.q.update(arm, r);
      std::size_t si = static_cast<std::size_t>(strategy);
      if (spec_.mode != EvoMode::Alg1) {
        if (a.kind == MetaKind::SLRL || a.kind == MetaKind::SLUCB) a.bandit.update(si, r, p_.bandit.beta);
        else if (a.kind == MetaKind::SLQL) a.ql.record(ctx.flags.state(), si, r);
      }
      a.last_action = arm;
      a.last_reward = r;
      a.last_strategy = did_il ? StrategyKind::IndividualLearning : strategy;
      entries[i] = {i, arm, r};
      reward_sum += r;
      if (did_il) ++il_count;
      ++use[static_cast<std::size_t>(a.last_strategy)];
      if (arm == optimal_now_) ++on_optimal;
      bool is_il_type = spec_.mode == EvoMode::Alg1 ? !a.social : a.last_strategy == StrategyKind::IndividualLearning;
      if (is_il_type && arm < 2) ++il_arm[arm];
    }

    const double m = static_cast<double>(agents_.size());
    res.psi.push_back(reward_sum / m);
    res.il_steps.push_back(il_count);
    res.strategy_use.push_back({use[0] / m, use[1] / m, use[2] / m});
    res.optimal_fraction.push_back(static_cast<double>(on_optimal) / m);
    res.a1.push_back(static_cast<double>(il_arm[0]) / m);
    res.a2.push_back(static_cast<double>(il_arm[1]) / m);
    res.ec.push_back(ctx.flags.ec);
    res.conf.push_back(ctx.flags.conf);
    res.unc.push_back(ctx.flags.unc);
    res.odpu.push_back(ctx.odpu_value);
    record_ratios(res);

    history_.push(SocialInfo::make(t, k, std::move(entries)));

    bool select = spec_.mode == EvoMode::Alg1 || spec_.mode == EvoMode::Competition ||
                  (spec_.mode == EvoMode::Lifetime && p_.selection_in_lifetime);
    if (select) next_generation();
  }

  bool uses(MetaKind k) const {
    if (spec_.mode == EvoMode::Alg1) return false;
    return std::find(spec_.meta_set.begin(), spec_.meta_set.end(), k) != spec_.meta_set.end();
  }

  void record_ratios(RunResult& res) const {
    std::size_t c = res.labels.size();
    std::vector<double> count(c, 0.0), age(c, 0.0);
    for (const auto& a : agents_) {
      std::size_t i = category_of(a);
      count[i] += 1.0;
      age[i] += static_cast<double>(a.age);
    }
    std::vector<double> ratio(c), mean_age(c);
    for (std::size_t i = 0; i < c; ++i) {
      ratio[i] = count[i] / static_cast<double>(agents_.size());
      mean_age[i] = count[i] > 0.0 ? age[i] / count[i] : 0.0;
    }
    res.ratio.push_back(std::move(ratio));
    res.mean_age.push_back(std::move(mean_age));
  }

  void next_generation() {
    std::vector<double> fitness(agents_.size());
    std::vector<std::size_t> ages(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      fitness[i] = std::max(agents_[i].last_reward, p_.fitness_floor);
      ages[i] = agents_[i].age;
    }
    auto selected = roulette_select(fitness, p_.s, rng_);
    auto new_ages = age_update(selected, ages);
    std::vector<Agent> next;
    next.reserve(agents_.size());
    for (std::size_t j = 0; j < selected.size(); ++j) {
      next.push_back(agents_[selected[j]]);
      next.back().age = new_ages[j];
    }
    agents_ = std::move(next);
    mutate();
  }

  void mutate() {
    mutate_agents(agents_, p_.mr, spec_.mode, spec_.meta_set, rng_, [this](Agent& a) {
      if (spec_.mode != EvoMode::Alg1) reset_controller(a);
      if (p_.reset_q_on_mutation) a.q = QTable(env_.arms(), p_.beta);
    });
  }

  const EnvironmentSchedule& env_;
  EvoParams p_;
  PopulationSpec spec_;
  ControllerSet ctl_;
  Rng rng_;
  std::uint64_t seed_;
  SocialHistory history_;
  ContextEncoder encoder_;
  RewardSampler sampler_;
  std::vector<Agent> agents_;
  std::vector<RewardModel> scratch_;
  const std::vector<RewardModel>* models_ = nullptr;
  std::size_t optimal_now_ = 0;
  bool needs_odpu_ = true;
};

inline RunResult run_once(const EnvironmentSchedule& env, const EvoParams& params, const PopulationSpec& spec,
                          const ControllerSet& controllers, std::uint64_t seed) {
  Simulation sim(env, params, spec, controllers, seed);
  return sim.run();
}

/// Runs one replicate per seed; replicates are independent and may run on several threads.
inline std::vector<RunResult> run_replicates(const EnvironmentSchedule& env, const EvoParams& params,
                                             const PopulationSpec& spec, const ControllerSet& controllers,
                                             const std::vector<std::uint64_t>& seeds, unsigned threads = 0) {
  std::vector<RunResult> out(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, seeds.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = run_once(env, params, spec, controllers, seeds[i]);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < seeds.size(); i += threads)
          out[i] = run_once(env, params, spec, controllers, seeds[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace msl

#endif
