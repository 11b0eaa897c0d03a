#include <gtest/gtest.h>

#include <set>

#include "msl/meta.hpp"

using namespace msl;

namespace {
ContextFlags flags(std::size_t s) {
  return {static_cast<int>((s >> 2) & 1), static_cast<int>((s >> 1) & 1), static_cast<int>(s & 1)};
}
constexpr auto IL = StrategyKind::IndividualLearning;
constexpr auto SUCC = StrategyKind::SuccessBased;
constexpr auto CONF = StrategyKind::Conformist;
}  // namespace

TEST(MetaNames, RoundTripAndAlias) {
  std::set<std::string> names;
  for (MetaKind m : kAllMetaKinds) {
    EXPECT_EQ(meta_from_string(to_string(m)), m);
    names.insert(to_string(m));
  }
  EXPECT_EQ(names.size(), 13u);
  EXPECT_EQ(meta_from_string("SL-EC-Unc"), MetaKind::SLECSucc);
  EXPECT_THROW(meta_from_string("SL-Nope"), ConfigError);
}

TEST(Dispatch, EcConfUnc) {
  EXPECT_EQ(msl_ec_conf_unc({0, 1, 1}), CONF);
  EXPECT_EQ(msl_ec_conf_unc({0, 0, 0}), SUCC);
  EXPECT_EQ(msl_ec_conf_unc({1, 1, 0}), IL);
  EXPECT_EQ(msl_ec_conf_unc({0, 0, 1}), IL);
}

TEST(Dispatch, EcConfAndEcSucc) {
  EXPECT_EQ(msl_ec_conf({0, 1, 0}), CONF);
  EXPECT_EQ(msl_ec_conf({0, 1, 1}), CONF);
  EXPECT_EQ(msl_ec_conf({0, 0, 0}), IL);
  EXPECT_EQ(msl_ec_succ({0, 0, 1}), IL);
  EXPECT_EQ(msl_ec_succ({0, 1, 1}), IL);
  EXPECT_EQ(msl_ec_succ({0, 0, 0}), SUCC);
  for (int c = 0; c < 2; ++c)
    for (int u = 0; u < 2; ++u) {
      EXPECT_EQ(msl_ec_conf({1, c, u}), IL);
      EXPECT_EQ(msl_ec_succ({1, c, u}), IL);
    }
}

TEST(Dispatch, FixedBaselines) {
  Rng rng(1);
  EXPECT_EQ(msl_fixed(MetaKind::ILOnly, rng), IL);
  std::array<int, 3> rand{}, prop{}, conf{}, succ{};
  const int n = 300000;
  for (int i = 0; i < n; ++i) {
    ++rand[static_cast<std::size_t>(msl_fixed(MetaKind::SLRand, rng))];
    ++prop[static_cast<std::size_t>(msl_fixed(MetaKind::SLProp, rng))];
    if (i < 100000) {
      ++conf[static_cast<std::size_t>(msl_fixed(MetaKind::SLConf, rng))];
      ++succ[static_cast<std::size_t>(msl_fixed(MetaKind::SLSucc, rng))];
    }
  }
  for (int c : rand) EXPECT_NEAR(c / double(n), 1.0 / 3.0, 0.005);
  EXPECT_NEAR(prop[1] / double(n), 0.45, 0.005);
  EXPECT_NEAR(prop[2] / double(n), 0.45, 0.005);
  EXPECT_NEAR(prop[0] / double(n), 0.10, 0.005);
  EXPECT_NEAR(conf[2] / 1e5, 0.95, 0.005);
  EXPECT_EQ(conf[1], 0);
  EXPECT_NEAR(succ[1] / 1e5, 0.95, 0.005);
  EXPECT_EQ(succ[2], 0);
  EXPECT_THROW(msl_fixed(MetaKind::SLGA, rng), ConfigError);
}

TEST(RuleTableTest, ReproducesEcConfUnc) {
  auto t = rule_table_from(msl_ec_conf_unc, 0.15, 0.1);
  for (std::size_t s = 0; s < 8; ++s) EXPECT_EQ(msl_rule_table(t, flags(s)), msl_ec_conf_unc(flags(s)));
  EXPECT_EQ(count_matching_states(t, msl_ec_conf_unc), 8u);
  auto ref = reference_rule_table();
  EXPECT_EQ(ref.rules, t.rules);
  EXPECT_DOUBLE_EQ(ref.th_u, 0.05);
  EXPECT_DOUBLE_EQ(ref.th_ec, 0.15);
}

TEST(RuleTableTest, AllIlAndTotality) {
  RuleTable all{};
  for (std::size_t s = 0; s < 8; ++s) EXPECT_EQ(msl_rule_table(all, flags(s)), IL);
  // all 3^8 tables on all 8 states
  std::size_t policies = 0;
  for (std::size_t code = 0; code < 6561; ++code) {
    RuleTable t;
    std::size_t c = code;
    for (std::size_t s = 0; s < 8; ++s, c /= 3) t.rules[s] = strategy_from_index(c % 3);
    for (std::size_t s = 0; s < 8; ++s) {
      auto k = msl_rule_table(t, flags(s));
      EXPECT_LT(static_cast<std::size_t>(k), 3u);
      EXPECT_EQ(k, t.rules[s]);
    }
    ++policies;
  }
  EXPECT_EQ(policies, 6561u);
}

TEST(Fcn, ParameterCountAndZeroNet) {
  EXPECT_EQ(FCNWeights::parameter_count(6, 12), 123u);
  auto z = FCNWeights::zeros();
  EXPECT_EQ(z.size(), 123u);
  EXPECT_EQ(msl_fcn(z, {1.0, 0.4}, {0.1, 0.2}, {0.5, 0.5}), IL);
  EXPECT_THROW(msl_fcn(z, {1.0, 0.4, 0.1}, {0.1, 0.2, 0.1}, {0.5, 0.5, 0.0}), ConfigError);
}

// hand-built net: hidden unit 0 reads freq(a1); it feeds the conformist output
TEST(Fcn, ConstructedRouting) {
  auto w = FCNWeights::zeros();
  w.in_weight(0, 4) = 5.0;
  w.out_weight(2, 0) = 1.0;
  w.out_weight(0, 12) = 0.1;  // IL bias wins when the unit is silent
  EXPECT_EQ(msl_fcn(w, {0.3, 0.3}, {0.1, 0.1}, {1.0, 0.0}), CONF);
  EXPECT_EQ(msl_fcn(w, {0.3, 0.3}, {0.1, 0.1}, {0.0, 1.0}), IL);
  // independent oracle for the forward pass
  auto out = w.forward({0.3, 0.3, 0.1, 0.1, 1.0, 0.0});
  EXPECT_NEAR(out[2], std::tanh(5.0), 1e-15);
  EXPECT_NEAR(out[0], 0.1, 1e-15);
}

TEST(Fcn, HiddenPermutationInvariance) {
  Rng rng(2);
  auto w = FCNWeights::zeros();
  for (double& v : w.w) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto p = FCNWeights::zeros();
  for (std::size_t h = 0; h < 12; ++h) {
    for (std::size_t i = 0; i <= 6; ++i) p.in_weight(h, i) = w.in_weight(perm[h], i);
    for (std::size_t o = 0; o < 3; ++o) p.out_weight(o, h) = w.out_weight(o, perm[h]);
  }
  for (std::size_t o = 0; o < 3; ++o) p.out_weight(o, 12) = w.out_weight(o, 12);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(6);
    for (double& v : x) v = uniform01(rng);
    auto a = w.forward(x), b = p.forward(x);
    for (std::size_t o = 0; o < 3; ++o) EXPECT_NEAR(a[o], b[o], 1e-12);
  }
}

TEST(Fcn, NormalizedFrequencies) {
  EXPECT_EQ(normalized({30, 70}), (std::vector<double>{0.3, 0.7}));
  EXPECT_EQ(normalized({0, 0}), (std::vector<double>{0.0, 0.0}));
}

TEST(Bandit, UcbForcedExplorationAndBonus) {
  StrategyBanditState s;
  EXPECT_EQ(s.select_ucb(1.0), 0u);
  s.n = {10, 0, 10};
  EXPECT_EQ(s.select_ucb(1.0), 1u);
  s.n = {10, 1, 10};
  s.steps = 21;
  s.q = {0.5, 0.5, 0.5};
  EXPECT_EQ(s.select_ucb(1.0), 1u);
}

TEST(Bandit, RlGreedyAndUpdate) {
  Rng rng(3);
  StrategyBanditState s;
  s.q = {1.0, 0.0, 0.0};
  EXPECT_EQ(s.select_rl(0.0, rng), 0u);
  s.update(1, 1.0, 0.2);
  EXPECT_DOUBLE_EQ(s.q[1], 0.2);
  EXPECT_EQ(s.n[1], 1u);
  EXPECT_EQ(s.steps, 1u);
}

TEST(QLearning, GreedyAndBellman) {
  Rng rng(4);
  QLearner ql;
  ql.q[5] = {0.9, 0.1, 0.1};
  EXPECT_EQ(ql.select(5, 0.0, rng), 0u);
  ql.q[2][1] = 0.5;
  ql.bellman(2, 1, 1.0, 3, 0.01, 0.0);
  EXPECT_DOUBLE_EQ(ql.q[2][1], 0.505);
}

TEST(QLearning, GammaZeroConstantStateMatchesStrategyBandit) {
  Rng rng(5);
  QLearner ql;
  StrategyBanditState b;
  for (int i = 0; i < 500; ++i) {
    std::size_t a = uniform_index(rng, 3);
    double r = uniform01(rng);
    ql.record(4, a, r);
    ql.settle(4, 0.2, 0.0);
    b.update(a, r, 0.2);
  }
  for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(ql.q[4][a], b.q[a], 1e-12);
}

TEST(QLearning, DeferredSettle) {
  QLearner ql;
  ql.q[1] = {0.0, 2.0, 0.0};
  ql.record(0, 0, 1.0);
  ql.settle(1, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(ql.q[0][0], 0.5 * (1.0 + 0.5 * 2.0));
  ql.settle(1, 0.5, 0.5);  // nothing pending
  EXPECT_DOUBLE_EQ(ql.q[0][0], 1.0);
}

TEST(ControllerFiles, RuleTableRoundTrip) {
  RuleTable t = reference_rule_table();
  t.th_ec = 0.123456789;
  auto back = rule_table_from_file(ControllerFile::parse(to_file(t).serialize()));
  EXPECT_EQ(back, t);
}

TEST(ControllerFiles, FcnAndQlRoundTrip) {
  Rng rng(6);
  auto w = FCNWeights::zeros();
  for (double& v : w.w) v = std::normal_distribution<double>(0, 1)(rng);
  auto back = fcn_from_file(ControllerFile::parse(to_file(w).serialize()));
  EXPECT_EQ(back.w, w.w);
  QLTable q{};
  q[3][2] = 0.25;
  q[7][0] = -1.5;
  EXPECT_EQ(ql_table_from_file(ControllerFile::parse(to_file(q).serialize())), q);
}

TEST(ControllerFiles, RejectsBadInput) {
  EXPECT_THROW(ControllerFile::parse("kind SL-GA\nvalues 0\n"), ConfigError);
  EXPECT_THROW(ControllerFile::parse("# msl-controller v9\nkind SL-GA\nvalues 0\n"), ConfigError);
  EXPECT_THROW(ControllerFile::parse("# msl-controller v1\nkind SL-GA\nvalues 3\n1\n2\n"), ConfigError);
  auto f = to_file(reference_rule_table());
  f.values[0] = 7.0;
  EXPECT_THROW(rule_table_from_file(f), ConfigError);
  EXPECT_THROW(fcn_from_file(to_file(reference_rule_table())), ConfigError);
  auto w = to_file(FCNWeights::zeros());
  w.values.pop_back();
  EXPECT_THROW(fcn_from_file(w), ConfigError);
}
