#pragma once

// Special functions used throughout the samplers: digamma/trigamma with
// their inverses, regularized incomplete gamma, and gamma quantiles.
// std::lgamma is used for log-Gamma; everything else is implemented here
// so the library stays header-only.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qlbart {

inline double log_gamma(double x) { return std::lgamma(x); }

// Asymptotic expansion after shifting the argument above 6.
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be > 0");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

inline double trigamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("trigamma: x must be > 0");
  double result = 0.0;
  while (x < 6.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv +
                   inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
  return result;
}

inline double tetragamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("tetragamma: x must be > 0");
  double result = 0.0;
  while (x < 6.0) {
    result -= 2.0 / (x * x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += -inv2 * (1.0 + inv * (1.0 + inv * (0.5 - inv2 * (1.0 / 6.0 - inv2 / 6.0))));
  return result;
}

// Solves trigamma(a) = v by safeguarded Newton. trigamma is strictly
// decreasing on (0, inf) so a bisection bracket keeps every step sane.
// Initialized at a0 = 1/v + 0.5 from the large-a asymptotics.
inline double trigamma_inverse(double v) {
  if (!(v > 0.0)) throw std::domain_error("trigamma_inverse: value must be > 0");
  double a = 1.0 / v + 0.5;
  double lo = 1e-300, hi = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100; ++iter) {
    const double f = trigamma(a) - v;
    if (std::abs(f) <= 1e-13 * v) return a;
    if (f > 0.0) lo = a; else hi = a;  // trigamma(a) too big -> a too small
    double next = a - f / tetragamma(a);
    if (!(next > lo) || !(next < hi)) {
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * a;
    }
    a = next;
  }
  if (std::abs(trigamma(a) - v) < 1e-8 * v) return a;
  throw std::runtime_error("trigamma_inverse: Newton failed to converge");
}

// Regularized lower incomplete gamma P(a, x) via the series (x < a + 1) or
// the Lentz continued fraction for Q(a, x) otherwise.
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 10000; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return std::exp(log_prefix) * sum;
  }
  // continued fraction for Q(a,x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(log_prefix) * h;
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

// Inverse of P(a, .): smallest x with P(a, x) = p. Bisection bracketing plus
// Newton polish; adequate for the quantile accuracy the samplers need.
inline double gamma_p_inverse(double a, double p) {
  if (!(a > 0.0) || !(p >= 0.0) || !(p <= 1.0))
    throw std::domain_error("gamma_p_inverse: bad arguments");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = a + 10.0 * std::sqrt(a) + 10.0;
  while (gamma_p(a, hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("gamma_p_inverse: bracket overflow");
  }
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = gamma_p(a, x) - p;
    if (f > 0.0) hi = x; else lo = x;
    const double log_pdf = (a - 1.0) * std::log(x) - x - std::lgamma(a);
    const double pdf = std::exp(log_pdf);
    double next = (pdf > 0.0) ? x - f / pdf : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-14 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

// Survival function of the chi-squared distribution, used by test harnesses
// and diagnostics.
inline double chi_squared_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace qlbart
