#include "evcharge/normal.hpp"

#include <cmath>
#include <numbers>

namespace evcharge::normal {

double pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double pdf(double x, double mean, double sd) noexcept { return pdf((x - mean) / sd) / sd; }

double inverse_mills(double a) noexcept {
  // Asymptotic series once sf(a) approaches underflow.
  if (a > 30.0) return a + 1.0 / a - 2.0 / (a * a * a);
  return pdf(a) / sf(a);
}

double truncated_mean_below(double mean, double sd, double b) noexcept {
  return mean - sd * inverse_mills(-(b - mean) / sd);
}

double truncated_mean_above(double mean, double sd, double b) noexcept {
  return mean + sd * inverse_mills((b - mean) / sd);
}

}  // namespace evcharge::normal
