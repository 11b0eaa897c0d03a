#include <gtest/gtest.h>

#include "msl/harness.hpp"
#include "msl/optimizers.hpp"

using namespace msl;

namespace {
TrainSetup small_setup() {
  TrainSetup s;
  s.env = make_training_env();
  s.params.m = 100;
  s.replicates = 24;
  s.seed = 99;
  return s;
}

// Synthetic objective on the rule-table genotype: reward matching a target table, peak at th = 0.3.
double synthetic_rule_fitness(const std::vector<double>& g) {
  const double target[8] = {1, 0, 2, 2, 0, 0, 0, 0};
  double f = 0.0;
  for (std::size_t i = 0; i < kRuleStates; ++i) f += g[i] == target[i] ? 1.0 : 0.0;
  f += 1.0 - std::abs(g[8] - 0.3) - std::abs(g[9] - 0.3);
  return f;
}

double sphere(const std::vector<double>& g) {
  double s = 0.0;
  for (double v : g) s += v * v;
  return 10.0 - s;
}
}  // namespace

TEST(Genotype, LengthsAndRoundTrip) {
  EXPECT_EQ(genotype_length(GeneSpace::RuleTable), 10u);
  EXPECT_EQ(genotype_length(GeneSpace::FCN), 123u);
  auto ref = reference_rule_table();
  EXPECT_EQ(decode_rule_table(encode(ref)), ref);
  EXPECT_THROW(decode_rule_table({0, 1}), ConfigError);
  EXPECT_THROW(decode_fcn(std::vector<double>(122)), ConfigError);
  std::size_t policies = 1;
  for (std::size_t s = 0; s < kRuleStates; ++s) policies *= kStrategyCount;
  EXPECT_EQ(policies, 6561u);
}

TEST(Fitness, AllIlTableEqualsIlOnlyBaseline) {
  auto setup = small_setup();
  ControllerSet ctl;
  ctl.rule_table = RuleTable{};
  ctl.rule_table.th_ec = 0.15;
  double table = controller_fitness(MetaKind::SLGA, ctl, setup);
  double il = controller_fitness(MetaKind::ILOnly, ctl, setup);
  EXPECT_DOUBLE_EQ(table, il);
}

TEST(Fitness, Deterministic) {
  auto f = make_controller_fitness(GeneSpace::RuleTable, small_setup());
  auto g = encode(reference_rule_table());
  EXPECT_EQ(f(g), f(g));
}

TEST(Fitness, ReferenceTableBeatsAllIl) {
  auto setup = small_setup();
  auto seeds = replicate_seeds(setup.seed, setup.replicates);
  auto run = [&](const RuleTable& t) {
    ControllerSet ctl;
    ctl.rule_table = t;
    PopulationSpec spec;
    spec.mode = EvoMode::Lifetime;
    spec.meta_set = {MetaKind::SLGA};
    std::vector<double> out;
    for (const auto& r : run_replicates(setup.env, setup.params, spec, ctl, seeds)) out.push_back(r.cumulative_psi());
    return out;
  };
  auto ref = run(reference_rule_table());
  auto il = run(RuleTable{});
  EXPECT_GT(stats::median(ref), stats::median(il));
  EXPECT_LT(stats::wilcoxon_rank_sum(ref, il).p, 0.05);
}

TEST(Ga, ElitismAndGenotypeValidity) {
  Rng rng(5);
  GaConfig cfg;
  cfg.max_generations = 60;
  bool valid = true;
  FitnessFn f = [&](const std::vector<double>& g) {
    valid = valid && g.size() == 10;
    for (std::size_t i = 0; i < kRuleStates; ++i) valid = valid && (g[i] == 0.0 || g[i] == 1.0 || g[i] == 2.0);
    valid = valid && g[8] >= kThresholdMin && g[8] <= kThresholdMax && g[9] >= kThresholdMin && g[9] <= kThresholdMax;
    return synthetic_rule_fitness(g);
  };
  auto res = ga_train(GeneSpace::RuleTable, cfg, f, rng);
  EXPECT_TRUE(valid);
  for (std::size_t i = 1; i < res.trace.size(); ++i) EXPECT_GE(res.trace[i], res.trace[i - 1]);
  EXPECT_EQ(res.trace.size(), res.generations + 1);
  EXPECT_DOUBLE_EQ(res.best_fitness, synthetic_rule_fitness(res.best));
  EXPECT_GT(res.best_fitness, 8.0);  // all eight rule genes found
}

TEST(Ga, StallStopsEarly) {
  Rng rng(6);
  GaConfig cfg;
  cfg.stall = 3;
  auto res = ga_train(GeneSpace::RuleTable, cfg, [](const std::vector<double>&) { return 1.0; }, rng);
  EXPECT_EQ(res.generations, 3u);
  cfg.elites = cfg.pop;
  EXPECT_THROW(ga_train(GeneSpace::RuleTable, cfg, synthetic_rule_fitness, rng), ConfigError);
}

TEST(Ga, ThresholdClamping) {
  Rng rng(7);
  GaConfig cfg;
  cfg.sigma = 50.0;
  std::vector<double> g = encode(reference_rule_table());
  for (int i = 0; i < 200; ++i) {
    detail::mutate(g, GeneSpace::RuleTable, cfg, 1.0, rng);
    EXPECT_GE(g[8], kThresholdMin);
    EXPECT_LE(g[9], kThresholdMax);
  }
}

TEST(Ga, FcnMutationGating) {
  Rng rng(8);
  GaConfig cfg;
  std::vector<double> g(123, 0.0);
  detail::mutate(g, GeneSpace::FCN, cfg, 0.0, rng);
  EXPECT_EQ(std::count(g.begin(), g.end(), 0.0), 123);
  cfg.mutate_all_dims = true;
  detail::mutate(g, GeneSpace::FCN, cfg, 0.0, rng);
  EXPECT_EQ(std::count(g.begin(), g.end(), 0.0), 0);
}

TEST(De, MonotoneTraces) {
  Rng rng(9);
  DeConfig cfg;
  cfg.max_generations = 40;
  std::vector<double> slot_min;
  auto res = de_train(cfg, 8, sphere, rng, &slot_min);
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    EXPECT_GE(res.trace[i], res.trace[i - 1]);
    EXPECT_GE(slot_min[i], slot_min[i - 1]);
  }
  EXPECT_GT(res.best_fitness, 9.9);
}

// Tiny F with CR = 0: each trial differs from an existing vector in at most one coordinate.
TEST(De, ForcedDimensionOnly) {
  Rng rng(10);
  DeConfig cfg;
  cfg.F = 1e-12;
  cfg.CR = 0.0;
  cfg.pop = 10;
  cfg.max_generations = 5;
  std::vector<std::vector<double>> seen;
  FitnessFn f = [&](const std::vector<double>& g) {
    if (seen.size() >= cfg.pop) {
      std::size_t best = g.size();
      for (const auto& s : seen) {
        std::size_t diff = 0;
        for (std::size_t d = 0; d < g.size(); ++d) diff += std::abs(s[d] - g[d]) > 1e-9;
        best = std::min(best, diff);
      }
      EXPECT_LE(best, 1u);
    }
    seen.push_back(g);
    return sphere(g);
  };
  auto res = de_train(cfg, 6, f, rng);
  EXPECT_EQ(res.generations, 5u);
}

TEST(De, RejectsBadConfig) {
  Rng rng(11);
  DeConfig cfg;
  cfg.pop = 3;
  EXPECT_THROW(de_train(cfg, 4, sphere, rng), ConfigError);
  cfg = DeConfig{};
  cfg.F = 0.0;
  EXPECT_THROW(de_train(cfg, 4, sphere, rng), ConfigError);
  cfg = DeConfig{};
  cfg.CR = 1.5;
  EXPECT_THROW(de_train(cfg, 4, sphere, rng), ConfigError);
  EXPECT_THROW(train_controller(GeneSpace::RuleTable, TrainAlgo::DE, sphere, 1, 1, {}, {}), ConfigError);
  EXPECT_THROW(train_controller(GeneSpace::FCN, TrainAlgo::DE, sphere, 0, 1, {}, {}), ConfigError);
}

TEST(FitnessCacheTest, MemoizesAndRejectsNonFinite) {
  int calls = 0;
  FitnessCache c([&](const std::vector<double>& g) {
    ++calls;
    return g[0] == 2.0 ? std::nan("") : g[0];
  });
  EXPECT_EQ(c({1.0}), 1.0);
  EXPECT_EQ(c({1.0}), 1.0);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(c.evaluations(), 1u);
  EXPECT_THROW(c({2.0}), NumericError);
}

TEST(TrainController, BestRunSelection) {
  GaConfig ga;
  ga.max_generations = 10;
  std::vector<double> bests;
  auto out = train_controller(GeneSpace::RuleTable, TrainAlgo::GA, synthetic_rule_fitness, 3, 42, ga, {},
                              [&](std::size_t, const TrainResult& r) { bests.push_back(r.best_fitness); });
  ASSERT_EQ(out.runs.size(), 3u);
  EXPECT_DOUBLE_EQ(out.best().best_fitness, *std::max_element(bests.begin(), bests.end()));
}
