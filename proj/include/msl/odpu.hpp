#ifndef MSL_ODPU_HPP
#define MSL_ODPU_HPP

// Optimum distribution prediction uncertainty: the probability that the largest
// sample drawn from some sub-optimal Gaussian group beats the largest sample of
// the optimal group.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>


#include "msl/core.hpp"
#include "msl/quadrature.hpp"

namespace msl {

inline constexpr double kSigmaFloor = 1e-9;

struct Group {
  double mu = 0.0;
  double sigma = 1.0;
  std::size_t n = 1;
};

/// Group 0 is the optimal (highest-mean) group.
struct GroupSpec {
  std::vector<Group> groups;

  void validate() const {
    if (groups.size() < 2) throw ConfigError("ODPU needs at least two groups");
    for (const auto& g : groups) {
      if (g.n < 1) throw ConfigError("ODPU group counts must be >= 1");
      if (!std::isfinite(g.mu) || !std::isfinite(g.sigma) || g.sigma < 0.0)
        throw ConfigError("ODPU groups need finite mu and sigma >= 0");
    }
  }
};

namespace detail {

inline double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// log Phi(z), accurate in both tails.
inline double log_norm_cdf(double z) {
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  double c = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return c > 0.0 ? std::log(c) : -std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// ODPU = 1 - P(max of group 0 >= max of every other group), integrated over the standardized
/// value z of group 0's maximum: P = int n0 phi(z) Phi(z)^(n0-1) prod_i Phi((mu0 + sd0 z - mu_i)/sd_i)^n_i dz.
/// Each sub-optimal factor switches on near z_i = (mu_i - mu0)/sd0; those points split the range so
/// narrow groups are resolved. Sigmas below 1e-9 are floored.
inline double odpu_quadrature(const GroupSpec& spec, double tol = 1e-10) {
  spec.validate();
  const auto& gs = spec.groups;
  std::vector<double> mu(gs.size()), sd(gs.size()), n(gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i) {
    mu[i] = gs[i].mu;
    sd[i] = std::max(gs[i].sigma, kSigmaFloor);
    n[i] = static_cast<double>(gs[i].n);
  }
  // range holding all but ~1e-16 of the mass of group 0's standardized maximum
  const boost::math::normal_distribution<double> unit;
  const double lo = boost::math::quantile(unit, std::exp(std::log(1e-16) / n[0]));
  const double hi = boost::math::quantile(boost::math::complement(unit, 1e-16 / n[0]));
  const double log_c = std::log(n[0]) - 0.5 * std::log(2.0 * std::numbers::pi);
  auto integrand = [&](double z) {
    double l = log_c - 0.5 * z * z + (n[0] - 1.0) * detail::log_norm_cdf(z);
    double y = mu[0] + sd[0] * z;
    for (std::size_t i = 1; i < mu.size(); ++i) l += n[i] * detail::log_norm_cdf((y - mu[i]) / sd[i]);
    return std::exp(l);
  };
  std::vector<double> cuts{lo, hi};
  for (std::size_t i = 1; i < mu.size(); ++i) {
    double z = (mu[i] - mu[0]) / sd[0];
    if (z > lo && z < hi) cuts.push_back(z);
  }
  std::sort(cuts.begin(), cuts.end());
  double value = 0.0;
  const double share = tol / static_cast<double>(cuts.size() - 1);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    int panels = std::max(1, static_cast<int>(std::ceil(4.0 * (cuts[c + 1] - cuts[c]) / (hi - lo))));
    value += quad::integrate(integrand, cuts[c], cuts[c + 1], share, panels).value;
  }
  if (!std::isfinite(value)) throw NumericError("ODPU integral is not finite");
  return std::clamp(1.0 - value, 0.0, 1.0);
}

/// Brute-force estimate: fraction of trials where some sub-optimal group's sample maximum
/// strictly exceeds the optimal group's sample maximum.
inline double odpu_monte_carlo(const GroupSpec& spec, std::size_t trials, Rng& rng) {
  spec.validate();
  if (trials < 1) throw ConfigError("ODPU Monte Carlo needs at least one trial");
  std::normal_distribution<double> normal(0.0, 1.0);
  auto sample_max = [&](const Group& g) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g.n; ++j) best = std::max(best, g.mu + g.sigma * normal(rng));
    return best;
  };
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double opt = sample_max(spec.groups[0]);
    bool beaten = false;
    for (std::size_t i = 1; i < spec.groups.size(); ++i)
      if (sample_max(spec.groups[i]) > opt) beaten = true;
    if (beaten) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

/// ODPU from per-arm estimates. Arms with zero count are dropped; with fewer than
/// two observed arms the result is 0. The arm with the highest estimated mean is the optimum.
inline double odpu_from_estimates(const std::vector<double>& mu_hat, const std::vector<double>& sigma_hat,
                                  const std::vector<std::size_t>& counts, double tol = 1e-8) {
  if (mu_hat.size() != sigma_hat.size() || mu_hat.size() != counts.size() || mu_hat.size() < 2)
    throw ConfigError("ODPU estimates must be vectors of equal length >= 2");
  std::vector<std::size_t> observed;
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] > 0) observed.push_back(j);
  if (observed.size() < 2) return 0.0;
  std::size_t best = observed.front();
  for (std::size_t j : observed)
    if (mu_hat[j] > mu_hat[best]) best = j;
  GroupSpec spec;
  spec.groups.push_back({mu_hat[best], std::max(sigma_hat[best], kSigmaFloor), counts[best]});
  for (std::size_t j : observed)
    if (j != best) spec.groups.push_back({mu_hat[j], std::max(sigma_hat[j], kSigmaFloor), counts[j]});
  return odpu_quadrature(spec, tol);
}

}  // namespace msl

#endif
