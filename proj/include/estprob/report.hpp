#pragma once

// Plain-language, locale-independent rendering of results.
//
// Conventions: p values are fractions, estimated probabilities are
// percentages, and the baseline hypothesis is always spelled out. Under
// Rounding::paper intervals and means get 1 decimal, p values 3 decimals and
// probabilities whole percents (with just enough extra decimals that a value
// which is not exactly 0 or 1 never prints as 0% or 100%).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>

#include "estprob/inference.hpp"

namespace estprob {

enum class Rounding { paper, full };

namespace fmt_detail {

inline std::string to_chars_fixed(double x, int decimals) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) return "nan";
  std::string s(buf, ptr);
  // "-0.0" and friends print without the sign.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace fmt_detail

/// Shortest decimal string that round-trips to x.
inline std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return {buf, ptr};
}

inline std::string format_fixed(double x, int decimals) {
  return fmt_detail::to_chars_fixed(x, decimals);
}

/// Like format_fixed but with an explicit '+' on positive values.
inline std::string format_signed(double x, int decimals) {
  std::string s = fmt_detail::to_chars_fixed(x, decimals);
  if (s.front() != '-' && s.find_first_not_of("0.") != std::string::npos) s.insert(0, "+");
  return s;
}

/// A value in measurement units (means, interval ends).
inline std::string format_value(double x, Rounding r, bool with_sign = false) {
  if (r == Rounding::full) {
    std::string s = format_number(x);
    if (with_sign && x > 0.0) s.insert(0, "+");
    return s;
  }
  return with_sign ? format_signed(x, 1) : format_fixed(x, 1);
}

/// A p value as a fraction: 3 decimals under paper rounding, so anything
/// below 0.0005 prints as "0.000".
inline std::string format_p(double p, Rounding r) {
  if (r == Rounding::full) return format_number(p);
  return format_fixed(p, 3);
}

/// A probability as a percentage.
inline std::string format_percent(double prob, Rounding r, int min_decimals = 0) {
  if (r == Rounding::full) return format_number(prob * 100.0) + "%";
  if (prob <= 0.0) return "0%";
  if (prob >= 1.0) return "100%";
  const double pct = prob * 100.0;
  for (int d = min_decimals; d <= std::max(min_decimals, 2); ++d) {
    const double scale = std::pow(10.0, d);
    const double rounded = std::round(pct * scale) / scale;
    if (rounded > 0.0 && rounded < 100.0) return format_fixed(pct, d) + "%";
  }
  if (prob > 0.5) return "> 99.99%";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, pct, std::chars_format::scientific, 1);
  (void)ec;
  return std::string(buf, ptr) + "%";
}

/// "5.5 to 7.1", or "-1.2 to +1.8" for a signed quantity such as a difference.
inline std::string format_interval(const ConfidenceInterval& interval, Rounding r,
                                   bool signed_quantity = false) {
  return format_value(interval.lower, r, signed_quantity) + " to " +
         format_value(interval.upper, r, signed_quantity);
}

/// Level as a percentage, trimmed: 0.95 -> "95%", 0.695 -> "69.5%".
inline std::string format_level(double level) {
  return format_number(std::round(level * 1e6) / 1e4) + "%";
}

/// A converted p value as a percentage, keeping "> x" / "< x" bounds.
inline std::string format_bound(const BoundedProbability& p, Rounding r) {
  const double pct = p.value * 100.0;
  const std::string v =
      (r == Rounding::full ? format_number(pct) : format_number(std::round(pct * 1e6) / 1e6)) + "%";
  switch (p.bound) {
    case Bound::exact: return v;
    case Bound::greater_than: return "> " + v;
    case Bound::less_than: return "< " + v;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Sentences

namespace fmt_detail {

inline std::string join_groups(std::span<const std::string> groups) {
  std::string out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i > 0) out += i + 1 == groups.size() ? " and " : ", ";
    out += groups[i];
  }
  return out;
}

}  // namespace fmt_detail

/// Test result in words. `groups` names the compared groups in order (unused
/// for the binomial guessing test).
inline std::string format_report(const TestResult& result, std::span<const std::string> groups,
                                 Rounding r = Rounding::paper) {
  switch (result.method) {
    case TestMethod::binomial:
      return "Probability of getting this result by guesswork = " +
             format_percent(result.p_value, r);
    case TestMethod::pooled:
    case TestMethod::welch: {
      const std::string a = groups.size() > 0 ? groups[0] : "group A";
      const std::string b = groups.size() > 1 ? groups[1] : "group B";
      return "On the assumption that the overall means in " + a + " and " + b +
             " are equal, the probability of getting a difference between the means in " + a +
             " and " + b + " as big or bigger than the observed " +
             format_number(std::round(std::fabs(result.estimate) * 1e6) / 1e6) + " is " +
             format_percent(result.p_value, r, 1) + " (p = " + format_p(result.p_value, r) + ")";
    }
    case TestMethod::anova:
      return "On the assumption that the overall means in " + fmt_detail::join_groups(groups) +
             " are all equal, the probability of getting group means at least as far apart as"
             " those observed is " +
             format_percent(result.p_value, r, 1) + " (p = " + format_p(result.p_value, r) + ")";
  }
  return {};
}

/// Interval in words. With `b` empty the interval is for the mean of `a`,
/// otherwise for the difference a - b.
inline std::string format_report(const ConfidenceInterval& interval, std::string_view a,
                                 std::string_view b = {}, Rounding r = Rounding::paper) {
  const bool diff = !b.empty();
  const std::string subject = diff ? "the difference " + std::string(a) + " - " + std::string(b)
                                   : "the mean of " + std::string(a);
  return format_level(interval.level) + " confidence interval for " + subject + ": " +
         format_interval(interval, r, diff);
}

struct HypothesisProbability {
  HypothesisSpec hypothesis;
  double probability = 0.0;
};

/// Estimated probability in words. With `b` empty the hypothesis concerns
/// the mean of `a`, otherwise the difference a - b.
inline std::string format_report(const HypothesisProbability& hp, std::string_view a_view,
                                 std::string_view b_view = {}, Rounding r = Rounding::paper) {
  const std::string a(a_view);
  const std::string b(b_view);
  const std::string tail = ": " + format_percent(hp.probability, r);
  const std::string head = "Estimated probability that ";
  if (b.empty()) {
    const std::string subject = "the mean of " + a;
    return std::visit(
        [&](const auto& h) -> std::string {
          using H = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<H, AtLeast>) {
            return head + subject + " is at least " + format_number(h.threshold) + tail;
          } else if constexpr (std::is_same_v<H, AtMost>) {
            return head + subject + " is at most " + format_number(h.threshold) + tail;
          } else {
            return head + subject + " is between " + format_number(h.lower) + " and " +
                   format_number(h.upper) + tail;
          }
        },
        hp.hypothesis);
  }
  return std::visit(
      [&](const auto& h) -> std::string {
        using H = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<H, AtLeast>) {
          if (h.threshold == 0.0) return head + a + " exceeds " + b + tail;
          if (h.threshold > 0.0) {
            return head + a + " exceeds " + b + " by at least " + format_number(h.threshold) + tail;
          }
          return head + a + " - " + b + " is at least " + format_number(h.threshold) + tail;
        } else if constexpr (std::is_same_v<H, AtMost>) {
          if (h.threshold == 0.0) return head + b + " exceeds " + a + tail;
          if (h.threshold < 0.0) {
            return head + b + " exceeds " + a + " by at least " + format_number(-h.threshold) + tail;
          }
          return head + a + " - " + b + " is at most " + format_number(h.threshold) + tail;
        } else {
          if (h.lower == -h.upper) {
            return head + a + " and " + b + " are within " + format_number(h.upper) +
                   " of each other" + tail;
          }
          return head + a + " - " + b + " is between " + format_number(h.lower) + " and " +
                 format_number(h.upper) + tail;
        }
      },
      hp.hypothesis);
}

}  // namespace estprob
