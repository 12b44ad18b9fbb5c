#pragma once

// Monte Carlo checks that confidence statements behave like probabilities.
//
// run_ci_coverage repeatedly samples Gaussian data with a known mean and
// records how often the t interval covers it, and the value u = cdf(true
// mean) of each replication's confidence distribution. For a calibrated
// procedure coverage matches the nominal level and u is Uniform(0, 1).
//
// Replication i draws from its own Philox4x32-10 substream (key = seed,
// counter = (block, 0, i)), so reports are bit-identical for a given seed
// whatever the worker count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "estprob/errors.hpp"
#include "estprob/inference.hpp"
#include "estprob/numerics.hpp"

namespace estprob {

// ---------------------------------------------------------------------------
// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3")

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

/// Standard normal variates from one Philox substream.
class PhiloxNormalStream {
 public:
  static constexpr const char* kGenerator = "philox4x32-10/box-muller v1";

  PhiloxNormalStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  /// Uniform in the open interval (0, 1) with 53 random bits.
  double uniform() {
    if (next_word_ == 4) refill();
    const std::uint64_t hi = block_[next_word_++];
    const std::uint64_t lo = block_[next_word_++];
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  void refill() {
    block_ = philox4x32_10({static_cast<std::uint32_t>(counter_),
                            static_cast<std::uint32_t>(counter_ >> 32),
                            static_cast<std::uint32_t>(stream_),
                            static_cast<std::uint32_t>(stream_ >> 32)},
                           key_);
    ++counter_;
    next_word_ = 0;
  }

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  PhiloxCounter block_{};
  int next_word_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Coverage

struct CalibrationConfig {
  double true_mean = 0.0;
  double true_sd = 1.0;
  std::uint64_t n = 10;
  double level = 0.95;
  std::uint64_t trials = 200000;
  std::uint64_t seed = 1;
};

struct CalibrationReport {
  double coverage = 0.0;
  double coverage_se = 0.0;       // binomial Monte Carlo standard error at the nominal level
  double ks_statistic = 0.0;      // sup |F_u - uniform| over the u values
  double ks_critical_1pct = 0.0;  // Kolmogorov 1% critical value for `trials`
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::string generator;
  CalibrationConfig config;
};

inline void validate(const CalibrationConfig& c) {
  if (c.trials < 1) throw InputError("calibration needs trials >= 1");
  if (c.n < 2) throw InputError("calibration needs n >= 2 per replication");
  if (!(c.level > 0.0 && c.level < 1.0)) throw DomainError("level must lie in (0, 1)");
  if (!(c.true_sd > 0.0) || !std::isfinite(c.true_sd)) throw DomainError("true_sd must be > 0");
  if (!std::isfinite(c.true_mean)) throw DomainError("true_mean must be finite");
}

/// Kolmogorov-Smirnov distance between the sample and Uniform(0, 1).
/// Sorts `u` in place.
inline double ks_uniform_statistic(std::vector<double>& u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double below = static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n;
    d = std::max({d, above - u[i], u[i] - below});
  }
  return d;
}

/// Stephens' approximation to the one-sample KS critical value at 1%.
inline double ks_critical_value_1pct(std::uint64_t trials) {
  const double rn = std::sqrt(static_cast<double>(trials));
  return 1.628 / (rn + 0.12 + 0.11 / rn);
}

/// Runs `config.trials` independent replications on `workers` threads
/// (0 = hardware concurrency).
inline CalibrationReport run_ci_coverage(const CalibrationConfig& config, unsigned workers = 0) {
  validate(config);
  const TDistParams t(static_cast<double>(config.n - 1));
  const double q = numerics::t_quantile(0.5 * (1.0 + config.level), t);
  const double root_n = std::sqrt(static_cast<double>(config.n));

  std::vector<double> u(config.trials);
  std::vector<unsigned char> covered(config.trials);

  auto replicate_range = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<double> sample(config.n);
    for (std::uint64_t i = begin; i < end; ++i) {
      PhiloxNormalStream rng(config.seed, i);
      for (auto& x : sample) x = config.true_mean + config.true_sd * rng.normal();
      const auto stats = summarize(sample);
      const double se = stats.sd / root_n;
      covered[i] = std::fabs(stats.mean - config.true_mean) <= q * se;
      u[i] = se > 0.0 ? numerics::t_cdf((config.true_mean - stats.mean) / se, t) : 0.5;
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, config.trials));
  if (workers <= 1) {
    replicate_range(0, config.trials);
  } else {
    std::vector<std::jthread> pool;
    const std::uint64_t chunk = (config.trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = std::min(config.trials, begin + chunk);
      if (begin < end) pool.emplace_back(replicate_range, begin, end);
    }
  }

  std::uint64_t hits = 0;
  for (auto c : covered) hits += c;

  CalibrationReport report;
  report.trials = config.trials;
  report.seed = config.seed;
  report.generator = PhiloxNormalStream::kGenerator;
  report.config = config;
  report.coverage = static_cast<double>(hits) / static_cast<double>(config.trials);
  report.coverage_se =
      std::sqrt(config.level * (1.0 - config.level) / static_cast<double>(config.trials));
  report.ks_statistic = ks_uniform_statistic(u);
  report.ks_critical_1pct = ks_critical_value_1pct(config.trials);
  return report;
}

inline nlohmann::ordered_json to_json(const CalibrationReport& r) {
  nlohmann::ordered_json j;
  j["coverage"] = r.coverage;
  j["ks_statistic"] = r.ks_statistic;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["generator"] = r.generator;
  j["coverage_se"] = r.coverage_se;
  j["ks_critical_1pct"] = r.ks_critical_1pct;
  j["level"] = r.config.level;
  j["n"] = r.config.n;
  j["true_mean"] = r.config.true_mean;
  j["true_sd"] = r.config.true_sd;
  return j;
}

// ---------------------------------------------------------------------------
// Flat-prior equivalence (known variance)

struct FlatPriorReport {
  double level = 0.0;
  double credible_lower = 0.0;
  double credible_upper = 0.0;
  double confidence_lower = 0.0;
  double confidence_upper = 0.0;
  double max_discrepancy = 0.0;           // in measurement units
  double relative_discrepancy = 0.0;      // max_discrepancy / scale
  bool coarse_grid = false;               // step wider than scale / 100
};

/// Compares the z confidence interval center +/- z * scale with the central
/// credible interval of the flat-prior posterior for a Gaussian mean with
/// known standard error `scale`. The posterior is normalised and inverted
/// by composite Simpson quadrature on a grid of step step_fraction * scale
/// spanning +/- 12 scales.
inline FlatPriorReport run_flat_prior_equivalence(double center, double scale, double level = 0.95,
                                                  double step_fraction = 1e-3) {
  if (!std::isfinite(center)) throw DomainError("center must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be > 0");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
  if (!(step_fraction > 0.0 && step_fraction <= 1.0)) {
    throw DomainError("step_fraction must lie in (0, 1]");
  }

  constexpr double kHalfRange = 12.0;
  const auto panels = static_cast<std::size_t>(std::ceil(kHalfRange / step_fraction));
  const std::size_t intervals = 2 * panels;  // per side; Simpson needs an even count
  const std::size_t total_intervals = 2 * intervals;
  const double h = kHalfRange * scale / static_cast<double>(intervals);
  const double start = center - kHalfRange * scale;

  // Unnormalised posterior: likelihood of the observed mean under a flat prior.
  auto density = [&](double mu) {
    const double z = (mu - center) / scale;
    return std::exp(-0.5 * z * z);
  };
  auto node = [&](std::size_t i) { return start + static_cast<double>(i) * h; };

  // cumulative[j] = integral from start to node(2j).
  std::vector<double> cumulative(total_intervals / 2 + 1, 0.0);
  for (std::size_t j = 0; j + 1 < cumulative.size(); ++j) {
    const double a = node(2 * j);
    cumulative[j + 1] = cumulative[j] + h / 3.0 *
                                            (density(a) + 4.0 * density(node(2 * j + 1)) +
                                             density(node(2 * j + 2)));
  }
  const double total = cumulative.back();

  auto posterior_quantile = [&](double prob) {
    const double target = prob * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const std::size_t j = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(it - cumulative.begin() - 1, 0,
                                   static_cast<std::ptrdiff_t>(cumulative.size()) - 2));
    const double left = node(2 * j);
    const double base = cumulative[j];
    auto partial = [&](double x) {
      const double mid = 0.5 * (left + x);
      return base + (x - left) / 6.0 * (density(left) + 4.0 * density(mid) + density(x));
    };
    double lo = left;
    double hi = node(2 * j + 2);
    double x = 0.5 * (lo + hi);
    for (int it2 = 0; it2 < numerics::kMaxIterations; ++it2) {
      const double f = partial(x) - target;
      if (f < 0.0) lo = x; else hi = x;
      double next = x - f / density(x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::fabs(next - x) <= 1e-15 * (std::fabs(x) + scale)) return next;
      x = next;
    }
    throw NumericFailure("posterior quantile search did not converge");
  };

  FlatPriorReport r;
  r.level = level;
  r.coarse_grid = step_fraction > 1e-2;
  const double z = numerics::normal_quantile(0.5 * (1.0 + level));
  r.confidence_lower = center - z * scale;
  r.confidence_upper = center + z * scale;
  r.credible_lower = posterior_quantile(0.5 * (1.0 - level));
  r.credible_upper = posterior_quantile(0.5 * (1.0 + level));
  r.max_discrepancy = std::max(std::fabs(r.credible_lower - r.confidence_lower),
                               std::fabs(r.credible_upper - r.confidence_upper));
  r.relative_discrepancy = r.max_discrepancy / scale;
  return r;
}

}  // namespace estprob
