#pragma once

// Seeded RNG with explicit distribution implementations. Draw sequences are
// reproducible across platforms and can be checkpointed as text, which is
// why we do not rely on std::*_distribution.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlbart {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform on (0, 1); never returns 0 or 1 so logs are safe.
  double uniform() {
    const double u = (engine_() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do { x = engine_(); } while (x >= limit);
    return x % n;
  }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  // Marsaglia-Tsang; shapes below 1 are boosted via G(a) = G(a+1) U^{1/a}.
  double gamma(double shape, double rate = 1.0) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::invalid_argument("gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double log_gamma_draw(double shape, double rate) { return std::log(gamma(shape, rate)); }

  double chi_squared(double dof) { return gamma(0.5 * dof, 0.5); }

  double half_cauchy(double scale) { return scale * std::tan(0.5 * M_PI * uniform()); }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  // Exact for any mean: Knuth below 60, else split via Pois(m) = Pois(m/2) + Pois(m/2).
  std::int64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean > 60.0) return poisson(0.5 * mean) + poisson(0.5 * mean);
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      out[i] = gamma(alpha[i], 1.0);
      total += out[i];
    }
    if (total <= 0.0) {
      // all gammas underflowed; fall back to the largest-shape vertex
      std::size_t arg = 0;
      for (std::size_t i = 1; i < alpha.size(); ++i)
        if (alpha[i] > alpha[arg]) arg = i;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = (i == arg) ? 1.0 : 0.0;
      return out;
    }
    for (double& v : out) v /= total;
    return out;
  }

  // Index draw with probabilities proportional to weights.
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u <= 0.0) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void deserialize(const std::string& text) {
    std::istringstream is(text);
    is >> engine_;
    if (!is) throw std::runtime_error("Rng::deserialize: malformed state");
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qlbart
