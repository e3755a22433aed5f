#pragma once

// Closed-form and independent reference values used by the tests. Nothing
// here calls into the library.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>

namespace oracle {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// E[1/R_1] for the 3-d Bessel process R started at 1, i.e. the mean of
/// dS = S^2 dB at T = 1 from S_0 = 1.
inline double inverse_bessel_mean() { return 2.0 * normal_cdf(1.0) - 1.0; }

/// Its dual: the explosion probability of dS = S^2 dB + S^3 dt by T = 1.
inline double inverse_bessel_explosion() { return 2.0 * (1.0 - normal_cdf(1.0)); }

/// E[1 / |x0 + W_T|] with x0 = (1, 0, 0), by plain sampling of the 3-d
/// Gaussian endpoint with the standard library generator.
struct SampledMean {
  double mean;
  double std_error;
};

inline SampledMean inverse_bessel_mean_by_sampling(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 1.0 + z(gen), b = z(gen), c = z(gen);
    const double v = 1.0 / std::sqrt(a * a + b * b + c * c);
    sum += v;
    sum2 += v * v;
  }
  const double m = sum / static_cast<double>(n);
  const double var = sum2 / static_cast<double>(n) - m * m;
  return {m, std::sqrt(var / static_cast<double>(n))};
}

enum class Tail { Divergent, Convergent };

/// Integral test for A(u) = u^p, B(u) = q/u. With C(rho) ~ rho^q the inner
/// integral grows like rho^(q+1-p) (or log, or tends to a constant), so the
/// outer integrand behaves as rho^(1-p) when p < q+1 and rho^(-q) when
/// p > q+1. Throws on the borderline exponents, which a tail fit cannot
/// separate.
inline Tail integral_tail(double p, double q) {
  if (std::fabs(p - (q + 1.0)) < 0.25) throw std::invalid_argument("p too close to q+1");
  const double exponent = p < q + 1.0 ? 1.0 - p : -q;
  if (std::fabs(exponent + 1.0) < 0.25) throw std::invalid_argument("exponent too close to -1");
  return exponent < -1.0 ? Tail::Convergent : Tail::Divergent;
}

}  // namespace oracle
