#pragma once

#include <cstddef>
#include <vector>

#include "evcharge/params.hpp"

namespace evcharge {

/// One off-diagonal rate of the (Q, Z) generator.
struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  double rate = 0.0;
};

/// Sparse generator of the (Q, Z) chain in the lexicographic state order.
/// Diagonal entries are stored separately as minus the total outflow.
struct Generator {
  int K = 0;
  std::size_t dimension = 0;
  std::vector<Transition> transitions;  ///< sorted by (from, to)
  std::vector<double> outflow;          ///< total outflow rate per state

  /// Off-diagonal rate from -> to (0 when absent); the diagonal for from == to.
  double rate(std::size_t from, std::size_t to) const;
  /// Sum of a generator row including the diagonal.
  double row_sum(std::size_t row) const;
  /// max_i |(pi G)_i|.
  double residual(const std::vector<double>& pi) const;
};

/// Generator with rates
///   (q,z) -> (q+1,z+1)  lambda            if q < K
///   (q,z) -> (q-1,z-1)  nu z              if z > 0
///   (q,z) -> (q-1,z)    nu (q-z)          if q > z
///   (q,z) -> (q,z-1)    mu min(z, M)      if z > 0
Generator build_generator(const ModelParams& params);

enum class SolverKind {
  automatic,        ///< direct for K <= 200, power iteration above
  direct,           ///< sparse LU with one balance row replaced by normalization
  power_iteration,  ///< uniformized chain, constant = max outflow + 1
};

struct SolveOptions {
  SolverKind solver = SolverKind::automatic;
  double residual_tolerance = 1e-10;
  double iteration_tolerance = 1e-12;
  std::size_t max_iterations = 50'000'000;
};

/// Stationary distribution pi with pi G = 0, sum(pi) = 1. Throws
/// NumericalError (carrying the residual) when max|pi G| exceeds the tolerance.
JointDist stationary_distribution(const Generator& gen, const SolveOptions& options = {});

/// Convenience: validate, build the generator, solve. lambda == 0 returns the
/// point mass at (0, 0) without a solve.
JointDist solve_stationary(const ModelParams& params, const SolveOptions& options = {});

/// E[Q], E[Z], P_s = 1 - E[Z]/E[Q], and the blocking probability P(Q = K).
Metrics metrics(const JointDist& dist, const ModelParams& params);

/// |exact - approx| / exact * 100. Throws DomainError when exact == 0.
double relative_error(double exact, double approx);

}  // namespace evcharge
