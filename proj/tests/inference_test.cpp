#include "estprob/inference.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace estprob {
namespace {

// Summaries reproducing the three published 95% intervals (1-dp rounding).
const SummaryStats kHappy{"Happyland", 10, 6.3, 1.1595018087};
const SummaryStats kSad{"Sadland", 10, 6.0, 1.8856180832};
const SummaryStats kOther{"Otherland", 10, 4.0, 2.9059326290};

double round1(double x) { return std::round(x * 10.0) / 10.0; }

TEST(MeanConfDist, CenterScaleDf) {
  const auto d = mean_conf_dist({"Happyland", 10, 6.3, 1.1183});
  EXPECT_EQ(d.center(), 6.3);
  EXPECT_NEAR(d.scale(), 0.3536, 5e-5);
  EXPECT_EQ(d.df(), 9.0);
  EXPECT_EQ(d.cdf(d.center()), 0.5);
  EXPECT_NEAR(mean_conf_dist({"Otherland", 10, 4.0, 2.9356}).scale(), 0.9283, 1e-4);
}

TEST(MeanConfDist, DegenerateInput) {
  EXPECT_THROW(mean_conf_dist({"A", 10, 1.0, 0.0}), DegenerateInputError);
  EXPECT_THROW(mean_conf_dist({"A", 1, 1.0, 1.0}), InputError);
}

TEST(Ci, PublishedIntervals) {
  const auto h = mean_conf_dist(kHappy);
  auto check = [&](double level, double lo, double hi) {
    const auto c = ci(h, level);
    EXPECT_EQ(round1(c.lower), lo) << level;
    EXPECT_EQ(round1(c.upper), hi) << level;
    EXPECT_EQ(c.level, level);
  };
  check(0.95, 5.5, 7.1);
  check(0.90, 5.6, 7.0);
  check(0.80, 5.8, 6.8);
  const auto big = ci(mean_conf_dist(replicate(kHappy, 40)), 0.95);
  EXPECT_EQ(round1(big.lower), 6.2);
  EXPECT_EQ(round1(big.upper), 6.4);
  EXPECT_THROW(ci(h, 0.0), DomainError);
  EXPECT_THROW(ci(h, 1.0), DomainError);
}

TEST(Ci, EndpointsAreQuantilesAndWidthIsMonotone) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const auto s = oracle::random_stats(rng, "A");
    const auto d = mean_conf_dist(s);
    double prev = 0.0;
    for (double level = 0.05; level < 0.999; level += 0.05) {
      const auto c = ci(d, level);
      EXPECT_NEAR(c.lower, d.quantile(0.5 * (1.0 - level)), 1e-9);
      EXPECT_NEAR(c.upper, d.quantile(0.5 * (1.0 + level)), 1e-9);
      EXPECT_GT(c.width(), prev);
      prev = c.width();
    }
    const auto bigger = replicate(s, 2);
    EXPECT_LT(ci(mean_conf_dist(bigger), 0.95).width(), ci(d, 0.95).width());
  }
}

TEST(Ci, QuantilesMatchOracle) {
  const auto d = mean_conf_dist(kHappy);
  const double q = oracle::t_quantile(0.975, 9);
  EXPECT_NEAR(ci(d, 0.95).upper, 6.3 + q * d.scale(), 1e-9);
}

TEST(DiffMeansTest, PublishedPValues) {
  const auto r = diff_means_test(kHappy, kSad, DiffVariant::pooled);
  EXPECT_EQ(r.method, TestMethod::pooled);
  EXPECT_NEAR(r.estimate, 0.3, 1e-12);
  EXPECT_EQ(r.df, 18.0);
  EXPECT_NEAR(r.p_value, 0.673, 0.01);
  const auto big =
      diff_means_test(replicate(kHappy, 40), replicate(kSad, 40), DiffVariant::pooled);
  EXPECT_NEAR(big.p_value, 0.004, 0.002);
}

TEST(DiffMeansTest, PValueDefinition) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 500; ++i) {
    const auto a = oracle::random_stats(rng, "A");
    const auto b = oracle::random_stats(rng, "B");
    for (auto v : {DiffVariant::pooled, DiffVariant::welch}) {
      const auto r = diff_means_test(a, b, v);
      const double p =
          2.0 * (1.0 - numerics::t_cdf(std::fabs(r.statistic), TDistParams(r.df)));
      EXPECT_NEAR(r.p_value, p, 1e-12);
      EXPECT_GE(r.p_value, 0.0);
      EXPECT_LE(r.p_value, 1.0);
    }
  }
}

TEST(DiffMeansTest, PooledAndWelchFormulas) {
  const SummaryStats a{"A", 8, 3.0, 2.0};
  const SummaryStats b{"B", 15, 1.0, 0.5};
  const auto pooled = diff_means_test(a, b, DiffVariant::pooled);
  const double sp2 = (7 * 4.0 + 14 * 0.25) / 21.0;
  EXPECT_NEAR(pooled.se, std::sqrt(sp2 * (1.0 / 8 + 1.0 / 15)), 1e-14);
  EXPECT_EQ(pooled.df, 21.0);
  const auto welch = diff_means_test(a, b, DiffVariant::welch);
  const double va = 4.0 / 8;
  const double vb = 0.25 / 15;
  EXPECT_NEAR(welch.se, std::sqrt(va + vb), 1e-14);
  EXPECT_NEAR(welch.df, (va + vb) * (va + vb) / (va * va / 7 + vb * vb / 14), 1e-10);
  EXPECT_EQ(welch.method, TestMethod::welch);
}

TEST(DiffMeansTest, IdenticalGroupsAndDegenerate) {
  const auto r = diff_means_test(kHappy, kHappy, DiffVariant::pooled);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  const SummaryStats flat{"F", 5, 2.0, 0.0};
  EXPECT_THROW(diff_means_test(flat, flat, DiffVariant::pooled), DegenerateInputError);
  EXPECT_THROW(diff_means_test(flat, {"G", 5, 3.0, 0.0}, DiffVariant::welch), DegenerateInputError);
}

TEST(DiffMeansTest, SwapAntisymmetry) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 500; ++i) {
    const auto a = oracle::random_stats(rng, "A");
    const auto b = oracle::random_stats(rng, "B");
    for (auto v : {DiffVariant::pooled, DiffVariant::welch}) {
      const auto ab = diff_means_test(a, b, v);
      const auto ba = diff_means_test(b, a, v);
      EXPECT_EQ(ab.estimate, -ba.estimate);
      EXPECT_EQ(ab.statistic, -ba.statistic);
      EXPECT_EQ(ab.p_value, ba.p_value);
      const auto dab = diff_conf_dist(a, b, v);
      const auto dba = diff_conf_dist(b, a, v);
      EXPECT_EQ(dab.center(), -dba.center());
      EXPECT_EQ(dab.scale(), dba.scale());
    }
  }
}

TEST(DiffConfDist, PublishedIntervals) {
  const auto small = ci(diff_conf_dist(kHappy, kSad, DiffVariant::pooled), 0.95);
  EXPECT_EQ(round1(small.lower), -1.2);
  EXPECT_EQ(round1(small.upper), 1.8);
  const auto big =
      ci(diff_conf_dist(replicate(kHappy, 40), replicate(kSad, 40), DiffVariant::pooled), 0.95);
  EXPECT_NEAR(big.lower, 0.09, 0.02);
  EXPECT_NEAR(big.upper, 0.51, 0.02);
}

TEST(HypothesisProbability, TableFourRows) {
  const auto d = diff_conf_dist(kHappy, kSad, DiffVariant::pooled);
  EXPECT_NEAR(hypothesis_probability(d, AtLeast{0}), 0.66, 0.01);
  EXPECT_NEAR(hypothesis_probability(d, AtMost{0}), 0.34, 0.01);
  EXPECT_NEAR(hypothesis_probability(d, AtLeast{1}), 0.17, 0.015);
  EXPECT_NEAR(hypothesis_probability(d, Within(-1, 1)), 0.79, 0.01);
  EXPECT_NEAR(hypothesis_probability(d, AtMost{-1}), 0.04, 0.01);
  EXPECT_NEAR(hypothesis_probability(d, Within(0, 0.6)), 0.327, 0.01);
}

TEST(HypothesisProbability, ReplicatedRows) {
  const auto d = diff_conf_dist(replicate(kHappy, 40), replicate(kSad, 40), DiffVariant::pooled);
  EXPECT_NEAR(hypothesis_probability(d, AtLeast{0}), 0.998, 0.002);
  EXPECT_GE(hypothesis_probability(d, Within(-1, 1)), 0.9999);
  EXPECT_NEAR(hypothesis_probability(d, Within(-0.1, 0.1)), 0.03, 0.01);
}

TEST(HypothesisProbability, ThresholdFive) {
  EXPECT_NEAR(hypothesis_probability(mean_conf_dist(kHappy), AtLeast{5}), 0.999, 0.003);
  EXPECT_NEAR(hypothesis_probability(mean_conf_dist(kOther), AtLeast{5}), 0.152, 0.01);
}

TEST(HypothesisProbability, MedianAndWithinValidation) {
  const auto d = mean_conf_dist(kOther);
  EXPECT_EQ(hypothesis_probability(d, AtLeast{d.center()}), 0.5);
  EXPECT_THROW(Within(1.0, -1.0), DomainError);
}

TEST(HypothesisProbability, ComplementarityAndPartition) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ts(-30.0, 30.0);
  std::uniform_real_distribution<double> deltas(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const auto d = diff_conf_dist(oracle::random_stats(rng, "A"), oracle::random_stats(rng, "B"),
                                  i % 2 ? DiffVariant::welch : DiffVariant::pooled);
    const double t = ts(rng);
    EXPECT_NEAR(hypothesis_probability(d, AtLeast{t}) + hypothesis_probability(d, AtMost{t}), 1.0,
                1e-12);
    const double delta = deltas(rng);
    EXPECT_NEAR(hypothesis_probability(d, AtMost{-delta}) +
                    hypothesis_probability(d, Within(-delta, delta)) +
                    hypothesis_probability(d, AtLeast{delta}),
                1.0, 1e-12);
  }
}

TEST(HypothesisProbability, ConversionIdentity) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    auto a = oracle::random_stats(rng, "A");
    auto b = oracle::random_stats(rng, "B");
    if (a.mean < b.mean) std::swap(a.mean, b.mean);
    const auto v = i % 2 ? DiffVariant::welch : DiffVariant::pooled;
    const auto r = diff_means_test(a, b, v);
    const double prob = hypothesis_probability(diff_conf_dist(a, b, v), AtLeast{0});
    EXPECT_NEAR(prob, 1.0 - r.p_value / 2.0, 1e-12);
    EXPECT_EQ(p_to_estimated_prob({Relation::equals, r.p_value, Sign::positive}).positive.value,
              1.0 - r.p_value / 2.0);
  }
}

TEST(Anova, PublishedPValues) {
  const std::vector<SummaryStats> three{kHappy, kSad, kOther};
  const auto r = anova_oneway(three);
  EXPECT_EQ(r.method, TestMethod::anova);
  EXPECT_EQ(r.df_num, 2.0);
  EXPECT_EQ(r.df, 27.0);
  EXPECT_NEAR(r.p_value, 0.044, 0.005);
  std::vector<SummaryStats> big;
  for (const auto& g : three) big.push_back(replicate(g, 40));
  EXPECT_LT(anova_oneway(big).p_value, 0.0005);
}

TEST(Anova, SummaryFormulaMatchesRawComputation) {
  const std::vector<std::vector<double>> raw{{1, 2, 3, 4}, {2, 6, 7}, {0, 0, 1, 9, 3}};
  std::vector<SummaryStats> stats;
  double grand = 0.0;
  double count = 0.0;
  for (const auto& g : raw) {
    stats.push_back(summarize(g));
    for (double v : g) grand += v, count += 1.0;
  }
  grand /= count;
  double ssb = 0.0;
  double ssw = 0.0;
  for (const auto& g : raw) {
    const double m = summarize(g).mean;
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  const double f = (ssb / 2.0) / (ssw / (count - 3.0));
  EXPECT_NEAR(anova_oneway(stats).statistic, f, 1e-12);
  EXPECT_NEAR(anova_oneway(stats).p_value, oracle::f_sf(f, 2, count - 3.0), 1e-10);
}

TEST(Anova, TwoGroupsEqualsPooledT) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 500; ++i) {
    const std::vector<SummaryStats> two{oracle::random_stats(rng, "A"),
                                        oracle::random_stats(rng, "B")};
    const auto f = anova_oneway(two);
    const auto t = diff_means_test(two[0], two[1], DiffVariant::pooled);
    EXPECT_NEAR(f.statistic, t.statistic * t.statistic,
                1e-10 * std::max(1.0, t.statistic * t.statistic));
    EXPECT_NEAR(f.p_value, t.p_value, 1e-10);
  }
}

TEST(Anova, Errors) {
  const std::vector<SummaryStats> one{kHappy};
  EXPECT_THROW(anova_oneway(one), InputError);
  const std::vector<SummaryStats> flat{{"A", 3, 2.0, 0.0}, {"B", 4, 2.0, 0.0}};
  EXPECT_THROW(anova_oneway(flat), DegenerateInputError);
  const std::vector<SummaryStats> separated{{"A", 3, 1.0, 0.0}, {"B", 4, 2.0, 0.0}};
  EXPECT_EQ(anova_oneway(separated).p_value, 0.0);
}

TEST(InvertCi, OtherlandThresholdFive) {
  const auto d = mean_conf_dist(kOther);
  const auto inv = invert_ci_for_threshold(d, 5.0);
  EXPECT_FALSE(inv.degenerate);
  EXPECT_NEAR(inv.level, 0.695, 0.02);
  EXPECT_NEAR(inv.tail_prob, 0.152, 0.01);
  // Searching levels by hand lands on the same interval.
  const auto c = ci(d, inv.level);
  EXPECT_NEAR(c.upper, 5.0, 1e-9);
  EXPECT_NEAR(round1(c.lower), 3.0, 1e-12);
}

TEST(InvertCi, IdentitiesAndDegenerate) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> offset(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const auto d = mean_conf_dist(oracle::random_stats(rng, "A"));
    const double t = d.center() + offset(rng) * d.scale();
    const auto inv = invert_ci_for_threshold(d, t);
    const double tail = t > d.center() ? d.sf(t) : d.cdf(t);
    EXPECT_NEAR(inv.tail_prob, tail, 1e-12);
    if (t > d.center()) {
      EXPECT_NEAR(inv.tail_prob, hypothesis_probability(d, AtLeast{t}), 1e-12);
    }
  }
  const auto d = mean_conf_dist(kHappy);
  EXPECT_NEAR(invert_ci_for_threshold(d, d.quantile(0.975)).level, 0.95, 1e-9);
  const auto deg = invert_ci_for_threshold(d, d.center());
  EXPECT_TRUE(deg.degenerate);
  EXPECT_EQ(deg.level, 0.0);
}

TEST(PConversion, Examples) {
  const auto e = p_to_estimated_prob({Relation::equals, 0.673, Sign::positive});
  EXPECT_EQ(e.positive.value, 1.0 - 0.673 / 2.0);
  EXPECT_NEAR(e.positive.value, 0.6635, 1e-15);
  EXPECT_EQ(e.positive.bound, Bound::exact);
  const auto lt = p_to_estimated_prob({Relation::less_than, 0.001, Sign::positive});
  EXPECT_EQ(lt.positive.bound, Bound::greater_than);
  EXPECT_NEAR(lt.positive.value, 0.9995, 1e-15);
  EXPECT_EQ(lt.negative.bound, Bound::less_than);
  EXPECT_NEAR(p_to_estimated_prob({Relation::less_than, 0.01, Sign::positive}).positive.value,
              0.995, 1e-15);
  for (auto s : {Sign::positive, Sign::negative}) {
    const auto one = p_to_estimated_prob({Relation::equals, 1.0, s});
    EXPECT_EQ(one.positive.value, 0.5);
    EXPECT_EQ(one.negative.value, 0.5);
  }
  const auto neg = p_to_estimated_prob({Relation::equals, 0.2, Sign::negative});
  EXPECT_EQ(neg.negative.value, 0.9);
  EXPECT_EQ(neg.positive.value, 0.1);
}

TEST(PConversion, OutputsSumToOne) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> ps(1e-12, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const auto e = p_to_estimated_prob({Relation::equals, ps(rng), Sign::positive});
    EXPECT_EQ(e.positive.value + e.negative.value, 1.0);
  }
}

TEST(PConversion, DomainErrors) {
  EXPECT_THROW(PStatement(Relation::equals, 0.0, Sign::positive), DomainError);
  EXPECT_THROW(PStatement(Relation::equals, 1.5, Sign::positive), DomainError);
}

TEST(ParsePStatement, Forms) {
  const auto a = parse_p_statement("p < 0.001", Sign::positive);
  EXPECT_EQ(a.relation, Relation::less_than);
  EXPECT_EQ(a.p, 0.001);
  const auto b = parse_p_statement("P = .044", Sign::negative);
  EXPECT_EQ(b.relation, Relation::equals);
  EXPECT_EQ(b.p, 0.044);
  EXPECT_EQ(b.sign_of_estimate, Sign::negative);
  EXPECT_EQ(parse_p_statement("  p<1e-3 ", Sign::positive).p, 0.001);
}

TEST(ParsePStatement, Rejections) {
  EXPECT_THROW(parse_p_statement("p < 5%", Sign::positive), InputError);
  EXPECT_THROW(parse_p_statement("p = 1.5", Sign::positive), InputError);
  EXPECT_THROW(parse_p_statement("p = 0", Sign::positive), InputError);
  EXPECT_THROW(parse_p_statement("q = 0.1", Sign::positive), InputError);
  EXPECT_THROW(parse_p_statement("p > 0.1", Sign::positive), InputError);
  try {
    parse_p_statement("p < 5%", Sign::positive);
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("5%"), std::string::npos);
  }
}

TEST(Bayes, PublishedValues) {
  EXPECT_EQ(bayes_two_hypothesis(0.5, 1.0, 0.02).posterior, 50.0 / 51.0);
  EXPECT_NEAR(bayes_two_hypothesis(0.01, 1.0, 0.02).posterior, 0.33557, 1e-5);
  EXPECT_NEAR(bayes_two_hypothesis(0.01, 1.0, 0.02).posterior, 0.01 / (0.01 + 0.99 * 0.02), 1e-15);
  EXPECT_EQ(bayes_two_hypothesis(0.0, 1.0, 0.02).posterior, 0.0);
  EXPECT_EQ(bayes_two_hypothesis(1.0, 0.0, 0.02).posterior, 1.0);
}

TEST(Bayes, OddsFormAndMonotonicity) {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> unit(0.001, 0.999);
  std::uniform_real_distribution<double> lik(0.001, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double prior = unit(rng);
    const double l1 = lik(rng);
    const double l0 = lik(rng);
    const double post = bayes_two_hypothesis(prior, l1, l0).posterior;
    const double prior_odds = prior / (1.0 - prior);
    EXPECT_NEAR(post / (1.0 - post), prior_odds * l1 / l0, 1e-9 * prior_odds * l1 / l0);
    const double higher = std::min(prior + 0.05, 1.0);
    EXPECT_GE(bayes_two_hypothesis(higher, l1, l0).posterior, post);
  }
}

TEST(Bayes, Errors) {
  EXPECT_THROW(bayes_two_hypothesis(0.5, 0.0, 0.0), DomainError);
  EXPECT_THROW(bayes_two_hypothesis(1.5, 1.0, 1.0), DomainError);
  EXPECT_THROW(bayes_two_hypothesis(0.5, -1.0, 1.0), DomainError);
}

TEST(GuessingTest, PublishedValues) {
  const auto one = guessing_test(1, 1, 0.02);
  EXPECT_EQ(one.p_value, 0.02);
  EXPECT_EQ(one.estimate, 1.0);
  EXPECT_EQ(one.method, TestMethod::binomial);
  const auto ten = guessing_test(10, 10, 0.02);
  EXPECT_NEAR(ten.p_value, 1.02e-17, 0.01 * 1.02e-17);
  EXPECT_EQ(guessing_test(0, 10, 0.02).p_value, 1.0);
  EXPECT_THROW(guessing_test(1, 1, 0.0), DomainError);
  EXPECT_THROW(guessing_test(2, 1, 0.5), DomainError);
}

TEST(BinomialCi, Examples) {
  const auto one = binomial_ci(1, 1, 0.95, Sided::lower_one);
  EXPECT_NEAR(one.lower, 0.05, 1e-9);
  EXPECT_EQ(one.upper, 1.0);
  EXPECT_EQ(binomial_ci(7, 7, 0.95).upper, 1.0);
  EXPECT_EQ(binomial_ci(0, 7, 0.95).lower, 0.0);
}

TEST(BinomialCi, EndpointsSatisfyTailEquations) {
  for (std::uint64_t n : {5u, 20u, 137u}) {
    for (std::uint64_t k = 1; k < n; k += 3) {
      const auto c = binomial_ci(k, n, 0.9);
      EXPECT_NEAR(static_cast<double>(oracle::binom_tail(k, n, c.lower)), 0.05, 1e-9);
      EXPECT_NEAR(1.0 - static_cast<double>(oracle::binom_tail(k + 1, n, c.upper)), 0.05, 1e-9);
      const auto low = binomial_ci(k, n, 0.9, Sided::lower_one);
      EXPECT_NEAR(static_cast<double>(oracle::binom_tail(k, n, low.lower)), 0.1, 1e-9);
    }
  }
}

}  // namespace
}  // namespace estprob
