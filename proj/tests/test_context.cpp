#include <gtest/gtest.h>

#include "msl/context.hpp"
#include "msl/env.hpp"

using namespace msl;

namespace {
SocialInfo info_of(std::size_t t, std::size_t k, const std::vector<std::pair<std::size_t, double>>& choices) {
  std::vector<RewardEntry> e;
  for (std::size_t i = 0; i < choices.size(); ++i) e.push_back({i, choices[i].first, choices[i].second});
  return SocialInfo::make(t, k, e);
}
}  // namespace

TEST(ArmStatsTest, ConstantAndTwoPoint) {
  auto s = estimate_arm_stats(info_of(1, 2, {{0, 0.7}, {0, 0.7}, {0, 0.7}}));
  EXPECT_DOUBLE_EQ(s.mu_hat[0], 0.7);
  EXPECT_DOUBLE_EQ(s.sigma_hat[0], 0.0);
  EXPECT_EQ(s.counts[1], 0u);
  auto t = estimate_arm_stats(info_of(1, 2, {{1, 0.4}, {1, 0.6}}));
  EXPECT_DOUBLE_EQ(t.mu_hat[1], 0.5);
  EXPECT_NEAR(t.sigma_hat[1], std::sqrt(0.02), 1e-12);  // n-1 denominator
}

TEST(ArmStatsTest, LargeSampleAccuracy) {
  Rng rng(1);
  RewardSampler s;
  auto m = RewardModel::gaussian(1.0, 0.05);
  std::vector<std::pair<std::size_t, double>> c;
  for (int i = 0; i < 1000; ++i) c.push_back({0, s(m, rng)});
  auto st = estimate_arm_stats(info_of(1, 2, c));
  EXPECT_NEAR(st.mu_hat[0], 1.0, 0.005);
}

TEST(DetectEc, Threshold) {
  ContextParams p;
  EXPECT_EQ(detect_ec({1.0, 0.2}, {0.4, 0.2}, p), 1);
  EXPECT_EQ(detect_ec({1.0, 0.2}, {0.9, 0.2}, p), 0);
  // non-optimal arm changes are ignored
  EXPECT_EQ(detect_ec({1.0, 0.2}, {1.0, 0.9}, p), 0);
  EXPECT_EQ(detect_ec({1.0, 0.2}, {}, p), 0);
}

TEST(DetectConformity, Cases) {
  EXPECT_EQ(detect_conformity({1.0, 0.4}, {80, 20}, 0), 1);
  EXPECT_EQ(detect_conformity({1.0, 0.4}, {80, 20}, 1), 0);
  EXPECT_EQ(detect_conformity({1.0, 0.4}, {20, 80}, 0), 0);
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> mu = {uniform01(rng), uniform01(rng), uniform01(rng)};
    std::vector<std::size_t> f = {uniform_index(rng, 9), uniform_index(rng, 9), uniform_index(rng, 9)};
    EXPECT_EQ(detect_conformity(mu, f, 1), 0);
  }
}

TEST(DetectUncertainty, Cases) {
  ContextParams p;
  auto low = detect_uncertainty({1.0, 0.4}, {0.05, 0.05}, {50, 50}, p);
  EXPECT_EQ(low.unc, 0);
  EXPECT_LT(low.odpu, 1e-6);
  auto sym = detect_uncertainty({0.5, 0.5}, {0.2, 0.2}, {30, 30}, p);
  EXPECT_EQ(sym.unc, 1);
  EXPECT_NEAR(sym.odpu, 0.5, 1e-6);
  auto single = detect_uncertainty({0.5, 0.5}, {0.2, 0.2}, {30, 0}, p);
  EXPECT_EQ(single.unc, 0);
  EXPECT_EQ(single.odpu, 0.0);
}

TEST(ContextFlagsTest, StrictUncertaintyBoundaryAndIndex) {
  Context c;
  c.valid = true;
  c.odpu_value = 0.1;
  ContextParams p;
  EXPECT_EQ(c.flags_for(p).unc, 0);
  c.odpu_value = 0.1000001;
  EXPECT_EQ(c.flags_for(p).unc, 1);
  EXPECT_EQ((ContextFlags{1, 0, 1}).state(), 5u);
  EXPECT_EQ((ContextFlags{0, 1, 1}).state(), 3u);
}

TEST(ContextFlagsTest, InvalidContextIsAllZero) {
  Context c;
  c.odpu_value = 0.9;
  c.ec_available = true;
  c.ec_delta = 5.0;
  EXPECT_EQ(c.flags_for(ContextParams{}), ContextFlags{});
}

TEST(ContextParamsTest, Validation) {
  EXPECT_THROW((ContextParams{0.0, 0.1, 1}).validate(), ConfigError);
  EXPECT_THROW((ContextParams{0.1, 1.0, 1}).validate(), ConfigError);
  EXPECT_THROW((ContextParams{0.1, 0.1, 0}).validate(), ConfigError);
}

TEST(Encoder, DetectsReversalAndResetsConformity) {
  ContextEncoder enc(2);
  auto c1 = enc.observe(info_of(1, 2, {{0, 1.0}, {0, 1.0}, {1, 0.4}}));
  EXPECT_EQ(c1.ec(), 0);  // no past yet
  EXPECT_EQ(c1.conf(), 1);
  auto c2 = enc.observe(info_of(2, 2, {{0, 0.4}, {0, 0.4}, {1, 1.0}}));
  EXPECT_EQ(c2.ec(), 1);  // arm 1 is now best, its mean moved 0.4 -> 1.0
  EXPECT_EQ(c2.conf(), 0);
}

TEST(Encoder, StaleArmDoesNotMaskChange) {
  ContextEncoder enc(2);
  enc.observe(info_of(1, 2, {{0, 1.0}, {0, 1.0}, {1, 0.45}}));
  for (std::size_t t = 2; t <= 5; ++t) enc.observe(info_of(t, 2, {{0, 1.0}, {0, 1.0}, {0, 1.0}}));
  // everybody still on arm 0, which dropped to 0.4; arm 1's retained estimate 0.45 is stale
  auto c = enc.observe(info_of(6, 2, {{0, 0.4}, {0, 0.4}, {0, 0.4}}));
  EXPECT_EQ(c.ec(), 1);
  EXPECT_DOUBLE_EQ(c.mu_hat[1], 0.45);
}

TEST(Encoder, DeltaLag) {
  ContextEncoder enc(2, ContextParams{0.15, 0.1, 3});
  std::vector<Context> cs;
  double r[] = {1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5};
  for (std::size_t t = 0; t < 7; ++t) cs.push_back(enc.observe(info_of(t + 1, 2, {{0, r[t]}, {0, r[t]}})));
  EXPECT_EQ(cs[2].ec(), 0);
  EXPECT_EQ(cs[3].ec(), 1);  // 0.5 vs 1.0 three steps back
  EXPECT_EQ(cs[5].ec(), 1);
  EXPECT_EQ(cs[6].ec(), 0);
}

TEST(Encoder, DeterministicAndOdpuOptional) {
  auto run = [](bool odpu) {
    ContextEncoder enc(2);
    Rng rng(5);
    std::vector<Context> out;
    for (std::size_t t = 1; t <= 20; ++t) {
      std::vector<std::pair<std::size_t, double>> c;
      for (int i = 0; i < 20; ++i) c.push_back({uniform_index(rng, 2), uniform01(rng)});
      out.push_back(enc.observe(info_of(t, 2, c), odpu));
    }
    return out;
  };
  auto a = run(true), b = run(true), c = run(false);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].flags, b[i].flags);
    EXPECT_EQ(a[i].odpu_value, b[i].odpu_value);
    EXPECT_EQ(c[i].odpu_value, 0.0);
    EXPECT_EQ(a[i].flags.ec, c[i].flags.ec);
    EXPECT_EQ(a[i].flags.conf, c[i].flags.conf);
  }
}
