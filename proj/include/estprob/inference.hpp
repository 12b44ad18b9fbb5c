#pragma once

// Three ways of stating uncertainty about a result:
//   1. p values for an exact baseline hypothesis (t tests, ANOVA, binomial)
//   2. confidence intervals, read off a confidence distribution
//   3. estimated probabilities for hypotheses: the mass a confidence
//      distribution assigns to the region the hypothesis describes
// plus the two-hypothesis Bayes update and the p-value conversions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "estprob/data.hpp"
#include "estprob/errors.hpp"
#include "estprob/numerics.hpp"

namespace estprob {

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;

  double width() const { return upper - lower; }
};

/// A Student t location-scale distribution over a population quantity
/// (a mean or a difference of means). Every confidence interval for the
/// quantity is a pair of its quantiles.
class ConfidenceDistribution {
 public:
  ConfidenceDistribution(double center, double scale, double df)
      : center_(center), scale_(scale), t_(df) {
    if (!std::isfinite(center)) throw DomainError("confidence distribution center must be finite");
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw DomainError("confidence distribution scale must be finite and > 0");
    }
  }

  double center() const { return center_; }
  double scale() const { return scale_; }
  double df() const { return t_.df; }

  double cdf(double x) const { return numerics::t_cdf(standardize(x), t_); }
  /// Upper tail P(X > x), computed without cancellation.
  double sf(double x) const { return numerics::t_sf(standardize(x), t_); }
  double pdf(double x) const { return numerics::t_pdf(standardize(x), t_) / scale_; }
  double quantile(double p) const { return center_ + scale_ * numerics::t_quantile(p, t_); }

 private:
  double standardize(double x) const { return (x - center_) / scale_; }

  double center_;
  double scale_;
  TDistParams t_;
};

// ---------------------------------------------------------------------------
// Hypotheses about a population quantity

struct AtLeast {
  double threshold;
};

struct AtMost {
  double threshold;
};

struct Within {
  double lower;
  double upper;

  Within(double lo, double hi) : lower(lo), upper(hi) {
    if (!(lo <= hi)) throw DomainError("within(a, b) requires a <= b");
  }
};

using HypothesisSpec = std::variant<AtLeast, AtMost, Within>;

// ---------------------------------------------------------------------------
// Test results

enum class TestMethod { pooled, welch, anova, binomial };

inline std::string_view to_string(TestMethod m) {
  switch (m) {
    case TestMethod::pooled: return "pooled";
    case TestMethod::welch: return "welch";
    case TestMethod::anova: return "anova";
    case TestMethod::binomial: return "binomial";
  }
  return "?";
}

enum class DiffVariant { pooled, welch };

/// Outcome of a test against an exact baseline hypothesis.
///
/// For the t methods p_value is two-tailed, estimate is the difference of
/// means and se its standard error. For ANOVA statistic is F, df_num/df are
/// its degrees of freedom, estimate is the spread (max - min) of the group
/// means and se the pooled within-group standard deviation. For the binomial
/// test estimate is k/n, se the null standard deviation sqrt(p0(1-p0)/n),
/// statistic is k and p_value = P(X >= k).
struct TestResult {
  double estimate = 0.0;
  double se = 0.0;
  double df = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::pooled;
  double df_num = 0.0;
  bool p_underflow = false;
};

// ---------------------------------------------------------------------------
// Confidence distributions and intervals

/// Confidence distribution for a population mean: t(n-1) centred on the
/// sample mean with scale sd / sqrt(n).
inline ConfidenceDistribution mean_conf_dist(const SummaryStats& stats) {
  require_inferential(stats);
  if (stats.sd == 0.0) {
    throw DegenerateInputError("group '" + stats.label +
                               "' has sd = 0; its confidence distribution is a point");
  }
  const double n = static_cast<double>(stats.n);
  return {stats.mean, stats.sd / std::sqrt(n), n - 1.0};
}

/// Central interval holding `level` of the distribution's mass.
inline ConfidenceInterval ci(const ConfidenceDistribution& dist, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1), got " + std::to_string(level));
  }
  const double q = numerics::t_quantile(0.5 * (1.0 + level), TDistParams(dist.df()));
  return {dist.center() - q * dist.scale(), dist.center() + q * dist.scale(), level};
}

// ---------------------------------------------------------------------------
// Tests against an exact baseline

namespace detail {

struct DiffParts {
  double estimate;
  double se;
  double df;
};

inline DiffParts diff_parts(const SummaryStats& a, const SummaryStats& b, DiffVariant variant) {
  require_inferential(a);
  require_inferential(b);
  if (a.sd == 0.0 && b.sd == 0.0) {
    throw DegenerateInputError("both groups have sd = 0; the difference has no sampling variance");
  }
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  const double estimate = a.mean - b.mean;
  if (variant == DiffVariant::pooled) {
    const double df = na + nb - 2.0;
    const double pooled_var = ((na - 1.0) * a.sd * a.sd + (nb - 1.0) * b.sd * b.sd) / df;
    return {estimate, std::sqrt(pooled_var * (1.0 / na + 1.0 / nb)), df};
  }
  const double va = a.sd * a.sd / na;
  const double vb = b.sd * b.sd / nb;
  const double df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  return {estimate, std::sqrt(va + vb), df};
}

}  // namespace detail

/// Two-sample t test of equal means; estimate = mean(a) - mean(b).
inline TestResult diff_means_test(const SummaryStats& a, const SummaryStats& b,
                                  DiffVariant variant = DiffVariant::pooled) {
  const auto parts = detail::diff_parts(a, b, variant);
  TestResult r;
  r.estimate = parts.estimate;
  r.se = parts.se;
  r.df = parts.df;
  r.statistic = parts.estimate / parts.se;
  r.p_value = 2.0 * numerics::t_cdf(-std::fabs(r.statistic), TDistParams(parts.df));
  r.method = variant == DiffVariant::pooled ? TestMethod::pooled : TestMethod::welch;
  return r;
}

/// Confidence distribution for mean(a) - mean(b).
inline ConfidenceDistribution diff_conf_dist(const SummaryStats& a, const SummaryStats& b,
                                             DiffVariant variant = DiffVariant::pooled) {
  const auto parts = detail::diff_parts(a, b, variant);
  return {parts.estimate, parts.se, parts.df};
}

/// One-way ANOVA from group summaries.
inline TestResult anova_oneway(std::span<const SummaryStats> groups) {
  if (groups.size() < 2) throw InputError("ANOVA needs at least 2 groups");
  double total_n = 0.0;
  double weighted_sum = 0.0;
  double lowest = groups.front().mean;
  double highest = groups.front().mean;
  for (const auto& g : groups) {
    require_inferential(g);
    total_n += static_cast<double>(g.n);
    weighted_sum += static_cast<double>(g.n) * g.mean;
    lowest = std::min(lowest, g.mean);
    highest = std::max(highest, g.mean);
  }
  const double grand_mean = weighted_sum / total_n;
  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double n = static_cast<double>(g.n);
    ss_between += n * (g.mean - grand_mean) * (g.mean - grand_mean);
    ss_within += (n - 1.0) * g.sd * g.sd;
  }
  const double k = static_cast<double>(groups.size());
  const double df1 = k - 1.0;
  const double df2 = total_n - k;
  if (ss_within == 0.0 && ss_between == 0.0) {
    throw DegenerateInputError("all groups are constant and equal; F is undefined");
  }
  const double ms_within = ss_within / df2;
  TestResult r;
  r.method = TestMethod::anova;
  r.df_num = df1;
  r.df = df2;
  r.estimate = highest - lowest;
  r.se = std::sqrt(ms_within);
  r.statistic = ss_within == 0.0 ? std::numeric_limits<double>::infinity()
                                 : (ss_between / df1) / ms_within;
  r.p_value = numerics::f_sf(r.statistic, FDistParams(df1, df2));
  return r;
}

/// Exact test of the guessing hypothesis: k successes in n trials, each with
/// chance p0 under guessing.
inline TestResult guessing_test(std::uint64_t k, std::uint64_t n, double p0) {
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw DomainError("guessing probability must lie in (0, 1), got " + std::to_string(p0));
  }
  if (n == 0) throw DomainError("guessing test needs at least one trial");
  const auto tail = numerics::binom_tail_checked(k, n, p0);
  const double dn = static_cast<double>(n);
  TestResult r;
  r.method = TestMethod::binomial;
  r.estimate = static_cast<double>(k) / dn;
  r.se = std::sqrt(p0 * (1.0 - p0) / dn);
  r.df = dn;
  r.statistic = static_cast<double>(k);
  r.p_value = tail.value;
  r.p_underflow = tail.underflow;
  return r;
}

enum class Sided { two, lower_one };

/// Clopper-Pearson interval for a binomial proportion. `lower_one` gives
/// [p_low, 1] with P(X >= k | p_low) = 1 - level.
inline ConfidenceInterval binomial_ci(std::uint64_t k, std::uint64_t n, double level,
                                      Sided sided = Sided::two) {
  if (k > n) throw DomainError("binomial_ci requires k <= n");
  if (n == 0) throw DomainError("binomial_ci needs at least one trial");
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1), got " + std::to_string(level));
  }
  const double dk = static_cast<double>(k);
  const double dn = static_cast<double>(n);
  if (sided == Sided::lower_one) {
    const double lower = k == 0 ? 0.0 : numerics::inv_reg_inc_beta(1.0 - level, dk, dn - dk + 1.0);
    return {lower, 1.0, level};
  }
  const double alpha = 1.0 - level;
  const double lower = k == 0 ? 0.0 : numerics::inv_reg_inc_beta(0.5 * alpha, dk, dn - dk + 1.0);
  const double upper =
      k == n ? 1.0 : numerics::inv_reg_inc_beta(1.0 - 0.5 * alpha, dk + 1.0, dn - dk);
  return {lower, upper, level};
}

// ---------------------------------------------------------------------------
// Estimated probabilities for hypotheses

/// Mass the confidence distribution assigns to the hypothesis. Bounds are
/// immaterial: any single point has probability zero.
inline double hypothesis_probability(const ConfidenceDistribution& dist, const HypothesisSpec& hyp) {
  struct Visitor {
    const ConfidenceDistribution& d;
    double operator()(const AtLeast& h) const { return d.sf(h.threshold); }
    double operator()(const AtMost& h) const { return d.cdf(h.threshold); }
    double operator()(const Within& h) const {
      // Difference of the smaller tails keeps precision far from the centre.
      if (h.lower >= d.center()) return d.sf(h.lower) - d.sf(h.upper);
      return d.cdf(h.upper) - d.cdf(h.lower);
    }
  };
  return std::visit(Visitor{dist}, hyp);
}

struct ThresholdInversion {
  double level = 0.0;      // confidence level whose symmetric interval ends at the threshold
  double tail_prob = 0.5;  // estimated probability beyond the threshold
  bool degenerate = false; // threshold == centre
};

/// The confidence level whose central interval has an endpoint exactly at
/// `threshold`, and the tail mass beyond that endpoint. Closed form; no
/// search over levels.
inline ThresholdInversion invert_ci_for_threshold(const ConfidenceDistribution& dist,
                                                  double threshold) {
  if (threshold == dist.center()) return {0.0, 0.5, true};
  const double tail = threshold > dist.center()
                          ? hypothesis_probability(dist, AtLeast{threshold})
                          : hypothesis_probability(dist, AtMost{threshold});
  return {1.0 - 2.0 * tail, tail, false};
}

// ---------------------------------------------------------------------------
// p values as estimated probabilities

enum class Relation { equals, less_than };
enum class Sign { positive, negative };

struct PStatement {
  Relation relation = Relation::equals;
  double p = 1.0;
  Sign sign_of_estimate = Sign::positive;

  PStatement(Relation rel, double p_value, Sign sign)
      : relation(rel), p(p_value), sign_of_estimate(sign) {
    if (!(p_value > 0.0 && p_value <= 1.0)) {
      throw DomainError("p must lie in (0, 1], got " + std::to_string(p_value));
    }
  }
};

enum class Bound { exact, greater_than, less_than };

struct BoundedProbability {
  double value = 0.0;
  Bound bound = Bound::exact;
};

struct EstimatedProbabilities {
  BoundedProbability positive;  // population value of the statistic > 0
  BoundedProbability negative;  // population value of the statistic < 0
};

/// 1 - p/2 for the side the sample estimate falls on and p/2 for the other.
/// A "p < x" statement yields strict bounds rather than point values.
inline EstimatedProbabilities p_to_estimated_prob(const PStatement& stmt) {
  const double half = 0.5 * stmt.p;
  const bool bounded = stmt.relation == Relation::less_than;
  const BoundedProbability same_side{1.0 - half, bounded ? Bound::greater_than : Bound::exact};
  const BoundedProbability other_side{half, bounded ? Bound::less_than : Bound::exact};
  if (stmt.sign_of_estimate == Sign::positive) return {same_side, other_side};
  return {other_side, same_side};
}

/// Parses "p = 0.044", "P<.001", "p < 0.01" and similar.
inline PStatement parse_p_statement(std::string_view text, Sign sign) {
  static const std::regex kPattern(
      R"(^\s*[pP]\s*(=|<)\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(%?)\s*$)");
  const std::string s(text);
  std::smatch m;
  if (!std::regex_match(s, m, kPattern)) {
    throw InputError("cannot parse p statement '" + s + "'; expected e.g. 'p = 0.044' or 'p < 0.001'");
  }
  if (m[3].length() != 0) {
    throw InputError("'" + m[2].str() + "%' is a percentage; write p values as fractions, e.g. 0.05");
  }
  const double p = std::stod(m[2].str());
  if (!(p > 0.0 && p <= 1.0)) {
    throw InputError("p value '" + m[2].str() + "' must lie in (0, 1]");
  }
  return PStatement(m[1].str() == "=" ? Relation::equals : Relation::less_than, p, sign);
}

// ---------------------------------------------------------------------------
// Bayes

struct BayesTwoHypothesis {
  double prior = 0.0;  // prior probability of H1
  double lik_h1 = 0.0;
  double lik_h0 = 0.0;
  double posterior = 0.0;
};

/// Posterior probability of H1 against a single alternative H0.
inline BayesTwoHypothesis bayes_two_hypothesis(double prior, double lik_h1, double lik_h0) {
  if (!(prior >= 0.0 && prior <= 1.0)) throw DomainError("prior must lie in [0, 1]");
  if (!(lik_h1 >= 0.0) || !(lik_h0 >= 0.0) || !std::isfinite(lik_h1) || !std::isfinite(lik_h0)) {
    throw DomainError("likelihoods must be finite and >= 0");
  }
  BayesTwoHypothesis out{prior, lik_h1, lik_h0, prior};
  if (prior == 0.0 || prior == 1.0) return out;
  const double joint_h1 = prior * lik_h1;
  const double denom = joint_h1 + (1.0 - prior) * lik_h0;
  if (denom == 0.0) {
    throw DomainError("both likelihoods are zero; the posterior is undefined");
  }
  out.posterior = joint_h1 / denom;
  return out;
}

}  // namespace estprob
