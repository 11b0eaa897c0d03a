#include <gtest/gtest.h>

#include <numeric>

#include "msl/core.hpp"
#include "msl/stats.hpp"

using namespace msl;
using namespace msl::stats;

namespace {
// |W - E| for the first n1 of the pooled sample under an arbitrary labelling.
double rank_sum(const std::vector<double>& ranks, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (auto i : idx) s += ranks[i];
  return s;
}

// Exhaustive permutation oracle (every subset of size n1).
double exhaustive_p(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> all(x);
  all.insert(all.end(), y.begin(), y.end());
  auto r = midranks(all);
  std::size_t n = all.size(), n1 = x.size();
  double e = 0.5 * double(n1) * double(n + 1);
  std::vector<std::size_t> first(n1);
  std::iota(first.begin(), first.end(), 0);
  double obs = std::abs(rank_sum(r, first) - e);
  std::vector<char> mask(n, 0);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n1), 1);
  std::sort(mask.begin(), mask.end());
  double total = 0.0, extreme = 0.0;
  do {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) idx.push_back(i);
    total += 1.0;
    if (std::abs(rank_sum(r, idx) - e) >= obs - 1e-9) extreme += 1.0;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return extreme / total;
}

double sampled_p(const std::vector<double>& x, const std::vector<double>& y, std::size_t perms, Rng& rng) {
  std::vector<double> all(x);
  all.insert(all.end(), y.begin(), y.end());
  auto r = midranks(all);
  std::size_t n = all.size(), n1 = x.size();
  double e = 0.5 * double(n1) * double(n + 1);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  double obs = std::abs(rank_sum(r, {idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n1)}) - e);
  double extreme = 0.0;
  for (std::size_t p = 0; p < perms; ++p) {
    std::shuffle(idx.begin(), idx.end(), rng);
    if (std::abs(rank_sum(r, {idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n1)}) - e) >= obs - 1e-9)
      extreme += 1.0;
  }
  return extreme / double(perms);
}
}  // namespace

TEST(Basics, MeanStdMedianRanks) {
  EXPECT_DOUBLE_EQ(mean({1, 2, 3, 4}), 2.5);
  EXPECT_NEAR(stddev({1, 2, 3, 4}), std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(median({5, 1, 3}), 3.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(midranks({10, 20, 10, 30}), (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Wilcoxon, IdenticalSamples) {
  std::vector<double> x = {1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(wilcoxon_rank_sum(x, x).p, 1.0);
  std::vector<double> c(20, 0.3);
  EXPECT_DOUBLE_EQ(wilcoxon_rank_sum(c, c).p, 1.0);
}

TEST(Wilcoxon, CompleteSeparation) {
  std::vector<double> x(20), y(20);
  std::iota(x.begin(), x.end(), 1.0);
  std::iota(y.begin(), y.end(), 101.0);
  auto r = wilcoxon_rank_sum(x, y);
  EXPECT_FALSE(r.exact);
  EXPECT_LT(r.p, 1e-6);
  EXPECT_LT(r.z, 0.0);
}

TEST(Wilcoxon, ExactSmallSample) {
  auto r = wilcoxon_rank_sum({1, 2, 3, 4, 5}, {6, 7, 8, 9, 10});
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.p, 2.0 / 252.0, 1e-12);
  EXPECT_THROW(wilcoxon_rank_sum({1}, {2, 3}), ConfigError);
}

TEST(Wilcoxon, PermutationOracle) {
  Rng rng(11);
  for (int inst = 0; inst < 50; ++inst) {
    bool small = inst < 30;
    std::size_t n1 = small ? 2 + uniform_index(rng, 7) : 12 + uniform_index(rng, 9);
    std::size_t n2 = small ? 2 + uniform_index(rng, 7) : 12 + uniform_index(rng, 9);
    std::vector<double> x(n1), y(n2);
    double shift = uniform01(rng) * 1.5;
    // quantized values create ties
    for (double& v : x) v = std::round(std::normal_distribution<double>(0, 1)(rng) * 4) / 4;
    for (double& v : y) v = std::round((std::normal_distribution<double>(0, 1)(rng) + shift) * 4) / 4;
    double p = wilcoxon_rank_sum(x, y).p;
    double oracle = small ? exhaustive_p(x, y) : sampled_p(x, y, 40000, rng);
    EXPECT_LT(std::abs(p - oracle), 0.01) << "instance " << inst << " n1=" << n1 << " n2=" << n2;
  }
}

TEST(Correlation, PearsonSpearman) {
  std::vector<double> x = {1, 2, 3, 4, 5, 6}, y = {2, 4, 6, 8, 10, 12};
  EXPECT_NEAR(pearson(x, y).r, 1.0, 1e-12);
  EXPECT_LT(pearson(x, y).p, 1e-6);
  std::vector<double> z = {1, 8, 27, 64, 125, 216};
  EXPECT_NEAR(spearman(x, z).r, 1.0, 1e-12);
  std::vector<double> d = {6, 5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(x, d).r, -1.0, 1e-12);
  // reference value: r = 0.5 with n = 10 has two-sided p = 0.1411
  std::vector<double> a = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> b = {2.0, 1.0, 4.0, 3.0, 7.0, 2.0, 8.0, 5.0, 4.0, 9.0};
  auto c = pearson(a, b);
  double t = c.r * std::sqrt(8.0 / (1 - c.r * c.r));
  EXPECT_GT(c.r, 0.0);
  EXPECT_NEAR(c.p, 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(8), std::abs(t))), 1e-12);
}

TEST(ChiSquare, Uniformity) {
  auto flat = chi_square_uniform({100, 100, 100, 100});
  EXPECT_DOUBLE_EQ(flat.statistic, 0.0);
  EXPECT_DOUBLE_EQ(flat.p, 1.0);
  auto skew = chi_square_uniform({400, 10, 10, 10});
  EXPECT_LT(skew.p, 1e-10);
  EXPECT_DOUBLE_EQ(skew.df, 3.0);
}

// Two-tailed Nemenyi critical values q_0.05 / sqrt(2), as tabulated for k = 2..10.
TEST(Nemenyi, PublishedCriticalValues) {
  const double table[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
  for (std::size_t k = 2; k <= 10; ++k) EXPECT_NEAR(nemenyi_q(0.05, k), table[k - 2], 2e-3) << "k=" << k;
  // studentized range q_{0.05, 13, inf} = 4.68 in standard tables
  EXPECT_NEAR(studentized_range_quantile_inf(0.05, 13), 4.68, 0.01);
  double cd = nemenyi_cd(13, 112);
  EXPECT_NEAR(cd, nemenyi_q(0.05, 13) * std::sqrt(13.0 * 14.0 / (6.0 * 112.0)), 1e-12);
  EXPECT_NEAR(cd, 1.724, 0.01);
}

TEST(Nemenyi, StudentizedRangeCdfIsMonotone) {
  double prev = 0.0;
  for (double q = 0.5; q < 8.0; q += 0.25) {
    double c = studentized_range_cdf_inf(q, 5);
    EXPECT_GE(c, prev);
    prev = c;
  }
  // k = 2: range of two standard normals is |N(0, 2)|
  EXPECT_NEAR(studentized_range_cdf_inf(2.0, 2), std::erf(2.0 / 2.0), 1e-6);
}

TEST(Friedman, TiesAndStrictWinner) {
  std::vector<std::vector<double>> same = {{1, 1}, {2, 2}, {3, 3}};
  auto r = friedman_nemenyi(same);
  EXPECT_DOUBLE_EQ(r.avg_rank[0], 1.5);
  EXPECT_DOUBLE_EQ(r.avg_rank[1], 1.5);
  EXPECT_TRUE(r.in_top_group(0));
  EXPECT_TRUE(r.in_top_group(1));

  std::vector<std::vector<double>> win;
  Rng rng(3);
  for (int i = 0; i < 30; ++i) win.push_back({10 + uniform01(rng), uniform01(rng), uniform01(rng), uniform01(rng)});
  auto w = friedman_nemenyi(win);
  EXPECT_DOUBLE_EQ(w.avg_rank[0], 1.0);
  EXPECT_EQ(w.order.front(), 0u);
  EXPECT_LT(w.friedman_p, 0.001);
  double sum = 0.0;
  for (double v : w.avg_rank) sum += v;
  EXPECT_NEAR(sum, 4.0 * 5.0 / 2.0, 1e-12);
}

TEST(Friedman, LinkageGroups) {
  // algorithm means 0, 0.05, 3 with small noise: {0,1} linked, 2 alone at the bottom
  Rng rng(4);
  std::vector<std::vector<double>> res;
  for (int i = 0; i < 40; ++i) res.push_back({3 + uniform01(rng), 3 + uniform01(rng), uniform01(rng)});
  auto r = friedman_nemenyi(res);
  EXPECT_EQ(r.order.back(), 2u);
  EXPECT_FALSE(r.in_top_group(2));
  EXPECT_TRUE(r.in_top_group(0));
  EXPECT_TRUE(r.in_top_group(1));
  ASSERT_EQ(r.cliques.size(), 1u);
  EXPECT_EQ(r.cliques[0].size(), 2u);
  EXPECT_THROW(friedman_nemenyi({{1, 2}}), ConfigError);
  EXPECT_THROW(friedman_nemenyi({{1}, {2}}), ConfigError);
}
