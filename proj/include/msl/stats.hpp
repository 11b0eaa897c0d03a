#ifndef MSL_STATS_HPP
#define MSL_STATS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "msl/core.hpp"
#include "msl/quadrature.hpp"

namespace msl::stats {

inline double mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample standard deviation (n-1); 0 for fewer than two values.
inline double stddev(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  double mu = mean(x), ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

inline double median(std::vector<double> x) {
  if (x.empty()) throw ConfigError("median of an empty sample");
  std::sort(x.begin(), x.end());
  std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

/// Midranks (1-based) of x in ascending order.
inline std::vector<double> midranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q) r[idx[q]] = rank;
    i = j + 1;
  }
  return r;
}

inline double normal_sf(double z) { return boost::math::cdf(boost::math::complement(boost::math::normal(), z)); }

struct RankSumResult {
  double statistic = 0.0;   // rank sum of x
  double z = 0.0;           // standardized statistic (normal approximation)
  double p = 1.0;           // two-sided
  bool exact = false;
};

/// Two-sided Wilcoxon rank-sum test. Exact null distribution (over doubled midranks) when both
/// samples have at most 10 values; otherwise normal approximation with tie correction.
inline RankSumResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2 || y.size() < 2) throw ConfigError("rank-sum test needs at least two values per sample");
  std::vector<double> all(x);
  all.insert(all.end(), y.begin(), y.end());
  auto r = midranks(all);
  std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;
  RankSumResult res;
  for (std::size_t i = 0; i < n1; ++i) res.statistic += r[i];
  double expected = 0.5 * static_cast<double>(n1) * static_cast<double>(n + 1);

  std::map<double, std::size_t> ties;
  for (double v : all) ++ties[v];
  if (ties.size() == 1) return res;  // all values equal

  double tie_term = 0.0;
  for (const auto& [v, c] : ties) tie_term += static_cast<double>(c * c * c - c);
  double var = static_cast<double>(n1 * n2) / 12.0 *
               (static_cast<double>(n + 1) - tie_term / static_cast<double>(n * (n - 1)));
  res.z = var > 0.0 ? (res.statistic - expected) / std::sqrt(var) : 0.0;

  if (n1 <= 10 && n2 <= 10) {
    // count subsets of size n1 by their doubled rank sum
    std::vector<long long> dr(n);
    long long max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dr[i] = std::llround(2.0 * r[i]);
      max_sum += dr[i];
    }
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = std::min(i + 1, n1); c >= 1; --c)
        for (long long s = max_sum; s >= dr[i]; --s) ways[c][static_cast<std::size_t>(s)] += ways[c - 1][static_cast<std::size_t>(s - dr[i])];
    double total = 0.0, extreme = 0.0;
    long long w2 = std::llround(2.0 * res.statistic);
    long long e2 = static_cast<long long>(n1 * (n + 1));  // 2 * expected
    long long dev = std::llabs(w2 - e2);
    for (long long s = 0; s <= max_sum; ++s) {
      double c = ways[n1][static_cast<std::size_t>(s)];
      if (c == 0.0) continue;
      total += c;
      if (std::llabs(s - e2) >= dev) extreme += c;
    }
    res.p = std::min(1.0, extreme / total);
    res.exact = true;
    return res;
  }
  // continuity-corrected normal approximation
  double zc = var > 0.0 ? std::max(0.0, std::abs(res.statistic - expected) - 0.5) / std::sqrt(var) : 0.0;
  res.p = std::min(1.0, 2.0 * normal_sf(zc));
  return res;
}

struct Correlation {
  double r = 0.0;
  double p = 1.0;  // two-sided, t approximation with n-2 degrees of freedom
};

inline Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw ConfigError("correlation needs paired samples of size >= 3");
  double mx = mean(x), my = mean(y), sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  Correlation c;
  if (sxx == 0.0 || syy == 0.0) return c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  double df = static_cast<double>(x.size()) - 2.0;
  if (std::abs(c.r) >= 1.0) {
    c.p = 0.0;
    return c;
  }
  double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
  c.p = 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::abs(t)));
  return c;
}

inline Correlation spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(midranks(x), midranks(y));
}

struct ChiSquareResult {
  double statistic = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Goodness of fit of observed counts against equal expected counts per bin.
inline ChiSquareResult chi_square_uniform(const std::vector<double>& observed) {
  if (observed.size() < 2) throw ConfigError("chi-square test needs at least two bins");
  double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  double e = total / static_cast<double>(observed.size());
  ChiSquareResult res;
  for (double o : observed) res.statistic += (o - e) * (o - e) / e;
  res.df = static_cast<double>(observed.size() - 1);
  res.p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(res.df), res.statistic));
  return res;
}

/// P(range of k iid standard normals <= q).
inline double studentized_range_cdf_inf(double q, std::size_t k) {
  if (q <= 0.0) return 0.0;
  boost::math::normal nd;
  auto f = [&](double z) {
    double d = boost::math::cdf(nd, z + q) - boost::math::cdf(nd, z);
    return boost::math::pdf(nd, z) * std::pow(std::max(d, 0.0), static_cast<double>(k - 1));
  };
  return static_cast<double>(k) * quad::integrate(f, -9.0, 9.0, 1e-12, 36).value;
}

/// Upper-alpha quantile q_{alpha,k,inf} of the studentized range, by bisection.
inline double studentized_range_quantile_inf(double alpha, std::size_t k) {
  if (k < 2) throw ConfigError("studentized range needs k >= 2");
  double lo = 0.0, hi = 12.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    double mid = 0.5 * (lo + hi);
    if (studentized_range_cdf_inf(mid, k) < 1.0 - alpha) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Nemenyi critical value q_alpha = q_{alpha,k,inf} / sqrt(2).
inline double nemenyi_q(double alpha, std::size_t k) { return studentized_range_quantile_inf(alpha, k) / std::sqrt(2.0); }

inline double nemenyi_cd(std::size_t k, std::size_t n, double alpha = 0.05) {
  return nemenyi_q(alpha, k) * std::sqrt(static_cast<double>(k * (k + 1)) / (6.0 * static_cast<double>(n)));
}

struct RankReport {
  std::vector<double> avg_rank;  // 1 = best (highest value)
  double friedman_chi2 = 0.0;
  double friedman_p = 1.0;
  double cd = 0.0;
  std::vector<std::vector<std::size_t>> cliques;  // maximal groups whose rank span is within cd
  std::vector<std::size_t> order;                 // algorithms sorted by average rank

  /// Algorithms not significantly different from the best-ranked one.
  std::vector<std::size_t> top_group() const {
    std::vector<std::size_t> out;
    double best = avg_rank[order.front()];
    for (std::size_t a : order)
      if (avg_rank[a] - best <= cd) out.push_back(a);
    return out;
  }

  bool in_top_group(std::size_t a) const {
    auto g = top_group();
    return std::find(g.begin(), g.end(), a) != g.end();
  }
};

/// Friedman test and Nemenyi post-hoc over a runs x algorithms matrix (higher values are better).
inline RankReport friedman_nemenyi(const std::vector<std::vector<double>>& results, double alpha = 0.05) {
  std::size_t n = results.size();
  if (n < 2) throw ConfigError("rank analysis needs at least two runs");
  std::size_t k = results.front().size();
  if (k < 2) throw ConfigError("rank analysis needs at least two algorithms");
  RankReport rep;
  rep.avg_rank.assign(k, 0.0);
  double tie_term = 0.0;
  for (const auto& row : results) {
    if (row.size() != k) throw ConfigError("ragged results matrix");
    std::vector<double> neg(k);
    for (std::size_t j = 0; j < k; ++j) neg[j] = -row[j];
    auto r = midranks(neg);
    for (std::size_t j = 0; j < k; ++j) rep.avg_rank[j] += r[j];
    std::map<double, std::size_t> ties;
    for (double v : row) ++ties[v];
    for (const auto& [v, c] : ties) tie_term += static_cast<double>(c * c * c - c);
  }
  for (double& r : rep.avg_rank) r /= static_cast<double>(n);
  double kd = static_cast<double>(k), nd = static_cast<double>(n);
  double ss = 0.0;
  for (double r : rep.avg_rank) ss += (r - (kd + 1.0) / 2.0) * (r - (kd + 1.0) / 2.0);
  double chi2 = 12.0 * nd / (kd * (kd + 1.0)) * ss;
  double correction = 1.0 - tie_term / (nd * (kd * kd * kd - kd));
  rep.friedman_chi2 = correction > 0.0 ? chi2 / correction : 0.0;
  rep.friedman_p = correction > 0.0
                       ? boost::math::cdf(boost::math::complement(boost::math::chi_squared(kd - 1.0), rep.friedman_chi2))
                       : 1.0;
  rep.cd = nemenyi_cd(k, n, alpha);

  rep.order.resize(k);
  std::iota(rep.order.begin(), rep.order.end(), 0);
  std::stable_sort(rep.order.begin(), rep.order.end(),
                   [&](std::size_t a, std::size_t b) { return rep.avg_rank[a] < rep.avg_rank[b]; });
  // maximal runs of consecutive algorithms spanning at most cd
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i;
    while (j + 1 < k && rep.avg_rank[rep.order[j + 1]] - rep.avg_rank[rep.order[i]] <= rep.cd) ++j;
    if (j > i && (rep.cliques.empty() || j > last_end)) {
      rep.cliques.emplace_back(rep.order.begin() + static_cast<std::ptrdiff_t>(i),
                               rep.order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
      last_end = j;
    }
  }
  return rep;
}

}  // namespace msl::stats

#endif
