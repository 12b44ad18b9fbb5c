#pragma once

// Special functions and the Student t, F, binomial and standard normal
// distributions used by every inference routine.
//
// Accuracy targets (double precision):
//   ln_gamma          relative error <= 1e-12 on [0.5, 1e6]
//   reg_inc_beta      absolute error <= 1e-12
//   inv_reg_inc_beta  absolute error <= 1e-10 in x
// Every iterative method is capped at kMaxIterations; hitting the cap throws
// NumericFailure instead of returning a partially converged value.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "estprob/errors.hpp"

namespace estprob {

/// Degrees of freedom of a Student t distribution.
struct TDistParams {
  double df;

  explicit TDistParams(double degrees_of_freedom) : df(degrees_of_freedom) {
    if (!(df > 0.0)) {
      throw DomainError("t distribution requires df > 0, got " + std::to_string(df));
    }
  }
};

/// Numerator and denominator degrees of freedom of an F distribution.
struct FDistParams {
  double df1;
  double df2;

  FDistParams(double numerator_df, double denominator_df)
      : df1(numerator_df), df2(denominator_df) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) {
      throw DomainError("F distribution requires df1 > 0 and df2 > 0");
    }
  }
};

/// A tail probability together with a flag that is set when the true value
/// is positive but below kUnderflowThreshold and has been reported as 0.
struct TailProbability {
  double value = 0.0;
  bool underflow = false;
};

namespace numerics {

inline constexpr int kMaxIterations = 500;
inline constexpr double kUnderflowThreshold = 1e-300;

// Relative stopping criterion for the continued fraction; well inside the
// 1e-12 absolute budget for the CDFs built on it.
inline constexpr double kContinuedFractionEps = 1e-15;

namespace detail {

// Godfrey's Lanczos coefficients (g = 671/128, 14 terms).
inline constexpr std::array<double, 14> kLanczos = {
    57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
    -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
    .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};

}  // namespace detail

/// Natural log of the gamma function for x > 0.
inline double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("ln_gamma requires a finite x > 0");
  }
  // Exact for the points the rest of the library leans on.
  if (x == 1.0 || x == 2.0) return 0.0;

  double y = x;
  double tmp = x + 5.24218750000000000;
  tmp = (x + 0.5) * std::log(tmp) - tmp;
  double series = 0.999999999999997092;
  for (double c : detail::kLanczos) series += c / ++y;
  return tmp + std::log(2.5066282746310005 * series / x);
}

inline double ln_beta(double a, double b) {
  return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
}

namespace detail {

// Continued fraction for I_x(a, b) (modified Lentz). Converges quickly for
// x < (a + 1) / (a + b + 2).
inline double beta_continued_fraction(double x, double a, double b) {
  constexpr double kTiny = std::numeric_limits<double>::min() / kContinuedFractionEps;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kContinuedFractionEps) return h;
  }
  throw NumericFailure("incomplete beta continued fraction did not converge (a=" +
                       std::to_string(a) + ", b=" + std::to_string(b) +
                       ", x=" + std::to_string(x) + ")");
}

// I_x(a, b) where the caller supplies y = 1 - x separately, so values of x
// close to 1 keep full precision in y.
inline double reg_inc_beta_xy(double x, double y, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log(y) - ln_beta(a, b);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::clamp(front * beta_continued_fraction(x, a, b) / a, 0.0, 1.0);
  }
  return std::clamp(1.0 - front * beta_continued_fraction(y, b, a) / b, 0.0, 1.0);
}

inline void check_beta_shape(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("incomplete beta requires finite a > 0 and b > 0");
  }
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double reg_inc_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("reg_inc_beta requires 0 <= x <= 1, got " + std::to_string(x));
  }
  detail::check_beta_shape(a, b);
  return detail::reg_inc_beta_xy(x, 1.0 - x, a, b);
}

namespace detail {

// Starting point for the inverse (Abramowitz & Stegun 26.5.22 for a, b >= 1,
// a power-law tail approximation otherwise).
inline double inv_beta_initial_guess(double p, double a, double b) {
  double x;
  if (a >= 1.0 && b >= 1.0) {
    const double pp = p < 0.5 ? p : 1.0 - p;
    const double t = std::sqrt(-2.0 * std::log(pp));
    double z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
    if (p < 0.5) z = -z;
    const double al = (z * z - 3.0) / 6.0;
    const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
    const double w = z * std::sqrt(al + h) / h -
                     (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) *
                         (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
    x = a / (a + b * std::exp(2.0 * w));
  } else {
    const double lna = std::log(a / (a + b));
    const double lnb = std::log(b / (a + b));
    const double t = std::exp(a * lna) / a;
    const double u = std::exp(b * lnb) / b;
    const double w = t + u;
    if (p < t / w) {
      x = std::pow(a * w * p, 1.0 / a);
    } else {
      x = 1.0 - std::pow(b * w * (1.0 - p), 1.0 / b);
    }
  }
  if (!(x > 0.0 && x < 1.0)) x = 0.5;
  return x;
}

}  // namespace detail

/// Inverse of reg_inc_beta in x: safeguarded Newton iteration that falls
/// back to bisection whenever a step would leave the current bracket.
inline double inv_reg_inc_beta(double p, double a, double b) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("inv_reg_inc_beta requires 0 <= p <= 1, got " + std::to_string(p));
  }
  detail::check_beta_shape(a, b);
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  const double neg_ln_beta = -ln_beta(a, b);
  double lo = 0.0;
  double hi = 1.0;
  double x = detail::inv_beta_initial_guess(p, a, b);
  for (int it = 0; it < kMaxIterations; ++it) {
    const double f = reg_inc_beta(x, a, b) - p;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double ln_pdf =
        (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) + neg_ln_beta;
    const double pdf = std::exp(ln_pdf);
    double next = x - f / pdf;
    if (!(pdf > 0.0) || !std::isfinite(next) || next <= lo || next >= hi) {
      // Bisect geometrically while the bracket spans orders of magnitude, so
      // roots as small as 1e-300 are reached in a few hundred steps.
      if (lo == 0.0) {
        next = hi * 1e-3;
      } else if (hi > 4.0 * lo) {
        next = std::sqrt(lo * hi);
      } else {
        next = 0.5 * (lo + hi);
      }
    }
    if (std::fabs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * next ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      return next;
    }
    x = next;
  }
  throw NumericFailure("inv_reg_inc_beta did not converge (p=" + std::to_string(p) + ")");
}

// ---------------------------------------------------------------------------
// Student t

inline double t_pdf(double t, TDistParams params) {
  const double df = params.df;
  return std::exp(ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) -
                  0.5 * std::log(df * std::numbers::pi) -
                  0.5 * (df + 1.0) * std::log1p(t * t / df));
}

namespace detail {

// P(T > |t|).
inline double t_upper_tail_abs(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return 0.5 * reg_inc_beta_xy(x, y, 0.5 * df, 0.5);
}

}  // namespace detail

/// P(T <= t) for Student t with params.df degrees of freedom.
inline double t_cdf(double t, TDistParams params) {
  if (std::isnan(t)) throw DomainError("t_cdf: t is NaN");
  const double tail = detail::t_upper_tail_abs(t, params.df);
  return t > 0.0 ? 1.0 - tail : tail;
}

/// P(T > t); the exact complement of t_cdf without cancellation.
inline double t_sf(double t, TDistParams params) { return t_cdf(-t, params); }

namespace detail {

// t >= 0 with P(T > t) = tail, for 0 < tail <= 0.5.
inline double t_from_upper_tail(double tail, double df) {
  const double two_sided = 2.0 * tail;
  if (two_sided >= 1.0) return 0.0;
  if (two_sided < 0.5) {
    const double x = inv_reg_inc_beta(two_sided, 0.5 * df, 0.5);
    return std::sqrt(df * (1.0 - x) / x);
  }
  // Solve in y = t^2 / (df + t^2) so that small t keeps its precision.
  const double y = inv_reg_inc_beta(1.0 - two_sided, 0.5, 0.5 * df);
  return std::sqrt(df * y / (1.0 - y));
}

}  // namespace detail

/// Inverse of t_cdf.
inline double t_quantile(double p, TDistParams params) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("t_quantile requires 0 < p < 1, got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -detail::t_from_upper_tail(p, params.df);
  return detail::t_from_upper_tail(1.0 - p, params.df);
}

/// Inverse of t_sf: the t with P(T > t) = q. Keeps full precision for tiny q.
inline double t_isf(double q, TDistParams params) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("t_isf requires 0 < q < 1, got " + std::to_string(q));
  }
  if (q == 0.5) return 0.0;
  if (q < 0.5) return detail::t_from_upper_tail(q, params.df);
  return -detail::t_from_upper_tail(1.0 - q, params.df);
}

// ---------------------------------------------------------------------------
// F

/// P(X > f) for the F distribution.
inline double f_sf(double f, FDistParams params) {
  if (!(f >= 0.0)) throw DomainError("f_sf requires F >= 0, got " + std::to_string(f));
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double scaled = params.df1 * f;
  const double x = params.df2 / (params.df2 + scaled);
  const double y = scaled / (params.df2 + scaled);
  return detail::reg_inc_beta_xy(x, y, 0.5 * params.df2, 0.5 * params.df1);
}

// ---------------------------------------------------------------------------
// Standard normal

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Inverse standard normal CDF: Acklam's rational approximation polished by
/// two Halley steps against erfc.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile requires 0 < p < 1, got " + std::to_string(p));
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  double z;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - kLow) {
    const double q = p - 0.5;
    const double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    // Work on the smaller tail so the residual does not cancel.
    const double e = z < 0.0 ? normal_cdf(z) - p : (1.0 - p) - normal_cdf(-z);
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * z * z);
    z -= u / (1.0 + 0.5 * z * u);
  }
  return z;
}

// ---------------------------------------------------------------------------
// Binomial

/// P(X >= k) for X ~ Binomial(n, p0), with an underflow flag.
///
/// Small problems are summed directly in linear space (so e.g. one trial with
/// p0 = 0.02 yields exactly 0.02); otherwise terms are scaled by the modal
/// term in log space. Both routes accumulate from j = n downwards, which makes
/// the result exactly monotone in k for fixed (n, p0).
inline TailProbability binom_tail_checked(std::uint64_t k, std::uint64_t n, double p0) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) {
    throw DomainError("binom_tail requires 0 <= p0 <= 1, got " + std::to_string(p0));
  }
  if (k > n) {
    throw DomainError("binom_tail requires k <= n (k=" + std::to_string(k) +
                      ", n=" + std::to_string(n) + ")");
  }
  if (k == 0) return {1.0, false};
  if (p0 == 0.0) return {0.0, false};
  if (p0 == 1.0) return {1.0, false};

  const double q0 = 1.0 - p0;
  const double lp = std::log(p0);
  const double lq = std::log1p(-p0);
  const double dn = static_cast<double>(n);

  double value = 0.0;
  if (n <= 1000 && std::min(dn * lp, dn * lq) > -700.0) {
    double coef = 1.0;  // C(n, j), starting at j = n
    for (std::uint64_t j = n;; --j) {
      value += coef * std::pow(p0, static_cast<double>(j)) *
               std::pow(q0, static_cast<double>(n - j));
      if (j == k) break;
      coef = coef * static_cast<double>(j) / static_cast<double>(n - j + 1);
    }
  } else {
    const double ln_n_fact = ln_gamma(dn + 1.0);
    auto log_term = [&](std::uint64_t j) {
      const double dj = static_cast<double>(j);
      return ln_n_fact - ln_gamma(dj + 1.0) - ln_gamma(dn - dj + 1.0) + dj * lp +
             (dn - dj) * lq;
    };
    const double mode = std::clamp(std::floor((dn + 1.0) * p0), 0.0, dn);
    const double scale = log_term(static_cast<std::uint64_t>(mode));
    double sum = 0.0;
    for (std::uint64_t j = n;; --j) {
      sum += std::exp(log_term(j) - scale);
      if (j == k) break;
    }
    value = std::exp(scale) * sum;
  }
  value = std::min(value, 1.0);
  if (value < kUnderflowThreshold) return {0.0, true};
  return {value, false};
}

/// P(X >= k) for X ~ Binomial(n, p0).
inline double binom_tail(std::uint64_t k, std::uint64_t n, double p0) {
  return binom_tail_checked(k, n, p0).value;
}

}  // namespace numerics
}  // namespace estprob
