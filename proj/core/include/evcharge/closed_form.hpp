#pragma once

#include <vector>

#include "evcharge/params.hpp"

namespace evcharge {

/// A distribution over z = 0..limit() (a truncation point or K).
struct MarginalDist {
  std::vector<double> probs;
  /// Upper bound on the probability mass discarded by truncation (0 if none).
  double tail_bound = 0.0;

  int limit() const noexcept { return static_cast<int>(probs.size()) - 1; }
  double mean() const;
  double at(int z) const { return z < 0 || z > limit() ? 0.0 : probs[static_cast<std::size_t>(z)]; }
};

/// Erlang-B blocking probability B(a, K) for offered load a and K servers,
/// via B(a,k) = a B(a,k-1) / (k + a B(a,k-1)), B(a,0) = 1.
double erlang_b(double offered_load, int servers);

/// Truncated Poisson (Erlang loss) law of Q: p(q) ~ a^q / q!, q = 0..K.
std::vector<double> erlang_loss_distribution(double offered_load, int servers);

/// Expected number of cars (lambda/nu)(1 - B(lambda/nu, K)).
double expected_occupancy(const ModelParams& params);

/// Joint law for M = K: Erlang loss in q, Binomial(q, nu/(nu+mu)) in z given q.
/// Throws DomainError when M != K.
JointDist dist_enough_power(const ModelParams& params);

/// Law of Z for K = infinity (modified Erlang-A with M servers where charging
/// cars also leave): birth lambda, death nu z + mu min(z, M). Truncated at the
/// first z_max whose geometric tail bound falls below tail_eps, then
/// renormalized. Requires the infinite-spaces marker.
MarginalDist dist_infinite_spaces(const ModelParams& params, double tail_eps = 1e-12);

/// Law of Z for the always-full lot: birth nu (K - z), death mu min(z, M),
/// z = 0..K, computed from detailed balance.
MarginalDist dist_full_lot(const ModelParams& params);

/// Full-lot mean with the lot size in the birth rates replaced by a real
/// capacity, on the integer support z = 0..K:
///   w(z+1) / w(z) = nu (capacity - z) / (mu min(z+1, M)).
/// Beyond z > capacity the weights are signed; the result is the signed first
/// moment of the normalized weights. With capacity = expected_occupancy() this
/// is the "modified" full-lot approximation of E[Z].
double full_lot_mean_with_capacity(const ModelParams& params, double capacity);

/// E[Z_f] with the lot size replaced by expected_occupancy(params).
double modified_full_lot_mean(const ModelParams& params);

struct SuccessBounds {
  double upper = 0.0;           ///< mu / (nu + mu)
  double lower_erlang_a = 0.0;  ///< 1 - E[Z^inf_M] / (lambda / nu)
  double lower_full_lot = 0.0;  ///< (E_Q - E[Z_f]) / E_Q
  double modified_lower = 0.0;  ///< same with the lot size replaced by E_Q; not a bound
};

/// Bounds on the success probability for finite K. Throws DomainError for
/// lambda == 0 (the success probability is undefined).
SuccessBounds success_bounds(const ModelParams& params);

}  // namespace evcharge
