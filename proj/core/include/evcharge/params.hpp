#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "evcharge/errors.hpp"

namespace evcharge {

/// Number of parking spaces: a positive count or the symbolic "infinitely
/// many" marker. Never encoded as a sentinel integer.
class Spaces {
 public:
  static constexpr Spaces finite(int count) noexcept { return Spaces(count); }
  static constexpr Spaces infinite() noexcept { return Spaces(); }

  constexpr bool is_finite() const noexcept { return finite_; }
  /// Throws UnsupportedError for the infinite marker.
  int count() const;
  /// Count as a real number, +inf for the infinite marker.
  double as_real() const noexcept;

  friend constexpr bool operator==(const Spaces&, const Spaces&) = default;

 private:
  constexpr Spaces() noexcept = default;
  constexpr explicit Spaces(int count) noexcept : finite_(true), count_(count) {}

  bool finite_ = false;
  int count_ = 0;
};

/// Arrival, charging and parking rates plus the two capacities.
///
/// `power` (M) is real valued: it is the number of cars that can charge at
/// full rate simultaneously, and the diffusion scalings make it fractional.
struct ModelParams {
  double lambda = 1.0;  ///< arrival rate
  double mu = 1.0;      ///< charging rate (1 / mean charging requirement)
  double nu = 1.0;      ///< parking rate (1 / mean parking time)
  Spaces spaces = Spaces::finite(1);
  double power = 1.0;

  int K() const { return spaces.count(); }
  std::string describe() const;
};

/// Returns `params` unchanged if every invariant holds, otherwise throws a
/// ValidationError whose code names the first violated invariant.
/// lambda == 0 is accepted (degenerate empty system); mu and nu must be > 0.
ModelParams validate(const ModelParams& params);

/// One state of the (Q, Z) chain: q cars in total, z of them not yet charged.
struct State {
  int q = 0;
  int z = 0;

  int charged() const noexcept { return q - z; }
  friend constexpr bool operator==(const State&, const State&) = default;
};

/// Power allocation L(z) = min(z, M). Throws DomainError for z < 0 or m <= 0.
double allocation(double z, double m);

/// All states (q, z) with 0 <= z <= q <= K, ordered lexicographically by
/// (q, z). Throws UnsupportedError for infinite K.
std::vector<State> enumerate_states(Spaces spaces);

/// Bijection between states and dense vector positions for the
/// lexicographic (q, z) order of enumerate_states().
class StateIndex {
 public:
  explicit StateIndex(int K);

  int K() const noexcept { return K_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>((K_ + 1) * (K_ + 2) / 2); }
  std::size_t index(State s) const noexcept {
    return static_cast<std::size_t>(s.q * (s.q + 1) / 2 + s.z);
  }
  State state(std::size_t i) const;
  bool contains(State s) const noexcept { return 0 <= s.z && s.z <= s.q && s.q <= K_; }

 private:
  int K_;
};

/// Stationary probabilities over the states of StateIndex(K).
struct JointDist {
  int K = 0;
  std::vector<double> probs;

  double at(State s) const;
  /// P(Q = q), q = 0..K.
  std::vector<double> q_marginal() const;
  /// P(Z = z), z = 0..K.
  std::vector<double> z_marginal() const;
};

/// Steady-state performance measures. `p_success` is empty when E[Q] = 0
/// (the fraction of fully charged departures is undefined).
struct Metrics {
  double e_q = 0.0;
  double e_z = 0.0;
  double e_c = 0.0;
  std::optional<double> p_success;
  double p_block = 0.0;
};

/// Builds Metrics from the two expectations, enforcing e_c = e_q - e_z and
/// P_s = 1 - e_z / e_q.
Metrics make_metrics(double e_q, double e_z, double p_block);

}  // namespace evcharge
