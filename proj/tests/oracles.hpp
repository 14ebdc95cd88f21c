#pragma once

// Test-only oracles, kept independent of the library code paths they check:
// adaptive Simpson quadrature, log-domain integration for leaf marginals,
// one-sample Kolmogorov-Smirnov and chi-squared goodness-of-fit p-values,
// and small sample-statistics helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "qlbart/special.hpp"

namespace oracle {

// Adaptive Simpson on [a, b] with absolute tolerance.
inline double adaptive_simpson_impl(const std::function<double(double)>& f, double a, double b,
                                    double fa, double fm, double fb, double whole, double tol,
                                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_impl(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_impl(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_impl(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Quasi-deviance by quadrature: 2 int_mu^y (y - t) / V(t) dt.
inline double deviance_by_quadrature(const std::function<double(double)>& v_of_t, double y,
                                     double mu) {
  const auto integrand = [&](double t) { return (y - t) / v_of_t(t); };
  return 2.0 * integrate(integrand, mu, y, 1e-13 * (1.0 + std::abs(y - mu)));
}

// log of int exp(g(lambda)) dlambda over [lo, hi] with max subtraction,
// evaluated by adaptive Simpson on the shifted integrand.
inline double log_integral(const std::function<double(double)>& log_g, double lo, double hi,
                           int scan_points = 2001) {
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < scan_points; ++i) {
    const double x = lo + (hi - lo) * i / (scan_points - 1.0);
    peak = std::max(peak, log_g(x));
  }
  const auto shifted = [&](double x) { return std::exp(log_g(x) - peak); };
  const double integral = integrate(shifted, lo, hi, 1e-13);
  return peak + std::log(integral);
}

// Inverse-CDF sampler for a 1-d density known up to a constant on [lo, hi],
// built from a dense grid and trapezoid cumulative sums.
class GridInverseCdf {
 public:
  GridInverseCdf(const std::function<double(double)>& log_density, double lo, double hi,
                 int n = 20001)
      : x_(n), cdf_(n) {
    std::vector<double> pdf(n);
    double peak = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      x_[i] = lo + (hi - lo) * i / (n - 1.0);
      pdf[i] = log_density(x_[i]);
      peak = std::max(peak, pdf[i]);
    }
    for (int i = 0; i < n; ++i) pdf[i] = std::exp(pdf[i] - peak);
    cdf_[0] = 0.0;
    for (int i = 1; i < n; ++i)
      cdf_[i] = cdf_[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (x_[i] - x_[i - 1]);
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
  }

  double quantile(double u) const {
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return x_.front();
    if (it == cdf_.end()) return x_.back();
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    const double c0 = cdf_[i - 1], c1 = cdf_[i];
    const double w = (u - c0) / (c1 - c0);
    return x_[i - 1] + w * (x_[i] - x_[i - 1]);
  }

  double cdf(double v) const {
    const auto it = std::lower_bound(x_.begin(), x_.end(), v);
    if (it == x_.begin()) return 0.0;
    if (it == x_.end()) return 1.0;
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double w = (v - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return cdf_[i - 1] + w * (cdf_[i] - cdf_[i - 1]);
  }

 private:
  std::vector<double> x_;
  std::vector<double> cdf_;
};

// Asymptotic Kolmogorov distribution tail: Q(t) = 2 sum (-1)^{j-1} exp(-2 j^2 t^2).
inline double kolmogorov_q(double t) {
  if (t < 1e-8) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = 2.0 * std::exp(-2.0 * j * j * t * t);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-14) break;
  }
  return std::min(1.0, std::max(0.0, sum));
}

// One-sample KS test p-value against a CDF.
inline double ks_test_pvalue(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double c = cdf(sample[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
  }
  return kolmogorov_q(std::sqrt(n) * d);
}

// Chi-squared goodness-of-fit p-value for observed counts vs expected probabilities.
inline double chi2_gof_pvalue(const std::vector<long>& observed,
                              const std::vector<double>& expected_prob, long total) {
  double stat = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expect = expected_prob[i] * static_cast<double>(total);
    if (expect < 1e-12) continue;
    const double d = static_cast<double>(observed[i]) - expect;
    stat += d * d / expect;
    ++dof;
  }
  if (dof <= 0) return 1.0;
  return qlbart::chi_squared_sf(stat, static_cast<double>(dof));
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
