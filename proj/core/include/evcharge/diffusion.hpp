#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "evcharge/params.hpp"

namespace evcharge {

using Matrix2 = std::array<std::array<double, 2>, 2>;
using Point2 = std::array<double, 2>;

/// One linear piece slope * x + intercept, active for x <= upper.
struct DriftPiece {
  double upper;
  double slope;
  double intercept;
};

/// Piecewise-linear scalar drift; pieces sorted by `upper`, the last one
/// unbounded.
struct PiecewiseLinearDrift {
  std::vector<DriftPiece> pieces;

  static PiecewiseLinearDrift linear(double slope, double intercept = 0.0);
  double operator()(double x) const;
};

enum class BarrierSide { upper, lower };

/// Instantaneous reflection keeping x[coordinate] on one side of `level`.
/// The regulator increment dY >= 0 is added to the state as direction * dY.
struct Reflection {
  int coordinate = 0;
  double level = 0.0;
  BarrierSide side = BarrierSide::upper;
  Point2 direction{0.0, 0.0};
};

/// dX_i = b_i(X_i) dt + s_i dW_i (+ regulator), corr(dW_1, dW_2) = correlation.
struct OUSpec {
  int dim = 1;
  std::array<PiecewiseLinearDrift, 2> drift;
  Point2 diffusion{0.0, 0.0};  ///< per-coordinate coefficients s_i
  double correlation = 0.0;
  std::optional<Reflection> reflection;

  /// Instantaneous covariance of the driving noise.
  Matrix2 covariance() const;
  /// Throws DomainError when the invariants are violated.
  void validate() const;
};

/// Two-dimensional limit of (Z, Q) in the Halfin-Whitt regime:
/// b1(x) = -mu (x ^ beta) - nu x, b2(x) = -nu x, coefficients sqrt(2(nu+mu)),
/// correlation (2nu+mu)/(2(nu+mu)), and an upper barrier kappa on Q that
/// pushes both coordinates down. kappa = +inf drops the barrier.
OUSpec hw_spec(double nu, double mu, double beta, double kappa);

/// One-dimensional limit of the always-full lot: drift -(nu+mu)x for x <= beta
/// and -nu x - mu beta above, coefficient sqrt(2 nu mu K/(nu+mu)).
OUSpec overloaded_spec(double nu, double mu, double K, double beta);

/// Heavy-traffic pair: drift -(c mu M + x) on both coordinates, coefficient
/// sqrt(2 mu M), correlation 1/2, coordinate 0 reflected upward at 0.
OUSpec heavy_traffic_spec(double mu, double M, double c);

/// Small parking-rate limit on the slow time scale: drift -x on both
/// coordinates, coefficient sqrt(2 lambda), correlation (2 lambda - mu M)/(2 lambda).
OUSpec smallnu_spec(double lambda, double mu, double M);

struct SimulateOptions {
  double dt = 1e-3;
  double horizon = 100.0;
  double burn_in = 0.0;     ///< samples before this time are discarded
  int n_paths = 1;
  std::uint64_t seed = 1;
  int record_stride = 1;    ///< keep every k-th post-burn-in step
  unsigned threads = 0;     ///< 0 = hardware concurrency
};

/// A regulator push: state before projection and the increment dY.
struct RegulatorEvent {
  Point2 pre;
  double increment;
};

struct SdeEnsemble {
  int dim = 1;
  double dt = 0.0;
  double sample_dt = 0.0;   ///< time between stored samples
  double observed_time = 0.0;  ///< horizon - burn_in
  std::uint64_t seed = 0;
  Point2 reflection_direction{0.0, 0.0};
  /// paths[p] holds dim values per stored sample, sample-major.
  std::vector<std::vector<double>> paths;
  /// Cumulative regulator Y at every stored sample; empty without reflection.
  std::vector<std::vector<double>> regulator;
  /// Post-burn-in regulator pushes per path.
  std::vector<std::vector<RegulatorEvent>> events;

  std::size_t n_paths() const noexcept { return paths.size(); }
  std::size_t samples_per_path() const noexcept;
  double value(std::size_t path, std::size_t sample, int coord) const;
  /// All stored values of one coordinate, pooled over paths.
  std::vector<double> pooled(int coord) const;
};

/// Euler-Maruyama with correlated increments from a Cholesky factor of
/// covariance(); reflection by projection with the overshoot booked into Y.
/// Path p uses the RNG stream (seed, p), so results do not depend on the
/// thread count. Throws DomainError for dt <= 0, burn_in >= horizon,
/// n_paths < 1 or x0 on the wrong side of the barrier.
SdeEnsemble simulate_ou(const OUSpec& spec, Point2 x0, const SimulateOptions& options);

/// f(x1, x2) with its gradient and Hessian.
struct TestFunction {
  std::function<double(Point2)> value;
  std::function<Point2(Point2)> gradient;
  std::function<Matrix2(Point2)> hessian;

  static TestFunction constant(double c);
  /// x1^i x2^j.
  static TestFunction monomial(int i, int j);
};

struct BarResult {
  double residual = 0.0;
  double std_error = 0.0;
  double stationary_term = 0.0;  ///< time average of L f
  double boundary_term = 0.0;    ///< regulator average of (f_2 - f_1)
};

/// Monte Carlo residual of the basic adjoint relation for the reflected
/// Halfin-Whitt pair, written in X = (Z, kappa - Q):
///   L f = b1 f_1 + nu (kappa - x2) f_2 + (nu+mu)(f_11 + f_22) - (2nu+mu) f_12
///   E[L f] + E[int (f_2 - f_1) dY] / T = 0.
/// The regulator term uses the gradient at the midpoint of each projection.
/// The standard error is taken across paths. `spec` must be an hw_spec with a
/// finite barrier. Throws DomainError when the ensemble holds no stationary
/// samples or fewer than two paths.
BarResult bar_residual(const SdeEnsemble& ensemble, const OUSpec& spec, const TestFunction& f);

/// Mixture c1 N(0, S-) 1{x1 <= beta} + c2 N((-mu beta/nu, 0), S+) 1{x1 > beta}
/// with S- = [[1, 1], [1, (nu+mu)/nu]] and
/// S+ = [[(nu+mu)/nu, (2nu+mu)/(2nu)], [(2nu+mu)/(2nu), (nu+mu)/nu]].
class PiInfinity {
 public:
  PiInfinity(double nu, double mu, double beta);

  double operator()(Point2 x) const;
  /// Density of the x2-marginal, in closed form.
  double marginal_x2(double x2) const;
  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }

 private:
  double nu_, mu_, beta_;
  Matrix2 s_minus_, s_plus_;
  Point2 m_plus_;
  double c1_, c2_;
};

struct MarginalReport {
  std::vector<double> grid;
  std::vector<double> mixture;  ///< x2-marginal of the mixture
  std::vector<double> normal;   ///< N(0, (nu+mu)/nu) density
  double max_gap = 0.0;
};

PiInfinity pi_infinity_density(double nu, double mu, double beta);

/// Compares the x2-marginal with N(0, (nu+mu)/nu) on `points` grid values
/// spanning +-span standard deviations.
MarginalReport pi_infinity_marginal_report(double nu, double mu, double beta, int points = 401,
                                           double span = 6.0);

/// How the two truncated pieces of the overloaded density are weighted.
enum class WeightRule {
  continuous,      ///< d1 pi-(beta) = d2 pi+(beta): stationary law of the SDE
  variance_ratio,  ///< d2/d1 = (s1^2/s2^2) pi-(beta)/pi+(beta)
};

struct TruncatedPiece {
  double mean = 0.0;
  double sd = 1.0;
  double weight = 0.0;
};

/// d1 N(m1, s1^2 | x <= b) + d2 N(m2, s2^2 | x > b).
struct PiecewiseNormalDensity {
  double breakpoint = 0.0;
  TruncatedPiece left;
  TruncatedPiece right;

  double pdf(double x) const;
  double cdf(double x) const;
  double mean() const;
};

/// Stationary density of the overloaded_spec process: left N(0, nu mu K/(nu+mu)^2)
/// on x <= beta, right N(-mu beta/nu, mu K/(nu+mu)) on x > beta.
PiecewiseNormalDensity overloaded_density(double nu, double mu, double K, double beta,
                                          WeightRule rule = WeightRule::continuous);

enum class OverloadedVariant {
  plain,     ///< scale by K
  modified,  ///< scale by the expected occupancy (lambda/nu)(1 - B)
};

/// E[Z] ~ sqrt(n) E[Zhat] + nu n/(nu+mu) with n = K or the expected occupancy,
/// beta = (M - nu n/(nu+mu))/sqrt(n) and E[Zhat] the mean of
/// overloaded_density(nu, mu, 1, beta, rule). Requires finite K.
double overloaded_mean_approx(const ModelParams& params,
                              OverloadedVariant variant = OverloadedVariant::modified,
                              WeightRule rule = WeightRule::variance_ratio);

struct SmallNuApprox {
  double e_z = 0.0;
  double e_q = 0.0;
  Matrix2 covariance{};
};

/// E[Z] ~ (lambda - mu M)/nu, E[Q] ~ lambda/nu and the covariance
/// [[lambda/nu, (2lambda - mu M)/(2nu)], [., lambda/nu]].
/// Throws DomainError when lambda <= mu M or K <= lambda/nu.
SmallNuApprox smallnu_approx(const ModelParams& params);

/// True when a symmetric 2x2 matrix is positive definite.
bool positive_definite(const Matrix2& m) noexcept;

}  // namespace evcharge
