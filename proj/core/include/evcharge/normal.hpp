#pragma once

namespace evcharge::normal {

double pdf(double x) noexcept;
/// Standard normal CDF via erfc, accurate in both tails.
double cdf(double x) noexcept;
/// Upper tail 1 - cdf(x) without cancellation.
double sf(double x) noexcept;

/// Density of N(mean, sd^2) at x.
double pdf(double x, double mean, double sd) noexcept;

/// Inverse Mills ratio pdf(a) / sf(a), stable for large a.
double inverse_mills(double a) noexcept;

/// Mean of N(mean, sd^2) conditioned on X <= b.
double truncated_mean_below(double mean, double sd, double b) noexcept;
/// Mean of N(mean, sd^2) conditioned on X > b.
double truncated_mean_above(double mean, double sd, double b) noexcept;

}  // namespace evcharge::normal
