#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evcharge/params.hpp"

namespace evcharge {

enum class SimMode { full_model, full_lot };

struct SimConfig {
  double horizon = 1e4;
  double burn_in = 100.0;
  int n_reps = 20;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::full_model;
  unsigned threads = 0;  ///< 0 = hardware concurrency

  /// Throws ValidationError(bad_config) unless 0 <= burn_in < horizon and n_reps >= 1.
  void validate() const;
};

/// 95% normal-approximation half-widths over replication means.
struct HalfWidths {
  double e_q = 0.0;
  double e_z = 0.0;
  double p_success = 0.0;
  double p_block = 0.0;
};

struct SimEstimate {
  double e_q = 0.0;
  double e_z = 0.0;
  /// Charged departures over all departures; empty when some replication saw
  /// no departure (e.g. lambda = 0).
  std::optional<double> p_success;
  double p_block = 0.0;
  HalfWidths half_widths;
  int reps_used = 0;
};

/// Per-replication time averages over [burn_in, horizon].
struct ReplicationStats {
  double mean_q = 0.0;
  double mean_z = 0.0;
  double mean_q2 = 0.0;
  double mean_z2 = 0.0;
  double p_block = 0.0;
  long charged_departures = 0;
  long departures = 0;
  long events = 0;
};

/// Gillespie simulation of the (Q, Z) chain from the empty lot: arrivals at
/// rate lambda while q < K, departures at rate nu q (uncharged with
/// probability z/q), charging completions at rate mu min(z, M). Replication r
/// uses the RNG stream (seed, r). Requires finite K; config.mode is ignored.
SimEstimate simulate_model(const ModelParams& params, const SimConfig& config);

/// Birth-death simulation of the always-full lot: z -> z+1 at rate nu (K - z),
/// z -> z-1 at rate mu min(z, M). Reports e_q = K and p_block = 1; p_success
/// is the charged fraction of the nu K departures.
SimEstimate simulate_full_lot(const ModelParams& params, const SimConfig& config);

/// Dispatches on config.mode.
SimEstimate simulate(const ModelParams& params, const SimConfig& config);

/// Raw statistics of one replication of the full model started at (q0, z0).
ReplicationStats simulate_replication(const ModelParams& params, const SimConfig& config,
                                      int replication, int q0 = 0, int z0 = 0);

/// Z(t) of one full-model path started at (q0, z0), sampled at increasing `times`.
std::vector<double> sample_z_path(const ModelParams& params, int q0, int z0,
                                  std::span<const double> times, std::uint64_t seed,
                                  std::uint64_t stream);

struct TraceEvent {
  double time;
  int q;
  int z;
};

/// Every state visited by one full-model path on [0, horizon], for audits.
std::vector<TraceEvent> trace_model(const ModelParams& params, double horizon, std::uint64_t seed);

enum class Scaling { fluid, hw, overloaded, smallnu };

const char* to_string(Scaling s) noexcept;
/// Throws ValidationError(bad_config) for an unknown tag.
Scaling parse_scaling(std::string_view tag);

struct ConvergenceConfig {
  SimConfig sim;
  /// fluid: initial uncharged level z0 in [0, K] (default K); Q(0) = nK.
  std::optional<double> fluid_z0;
  /// fluid: the statistic is taken at `grid_points` equispaced times in
  /// (0, t_end]; default t_end = 5 / min(nu, mu).
  std::optional<double> fluid_t_end;
  int grid_points = 10;
  /// hw and overloaded: second-order offset of M^n.
  double beta = 0.0;
  /// hw: second-order offset of K^n.
  double kappa = 1.0;
};

struct ConvergenceRow {
  int n = 0;
  double statistic = 0.0;
  double limit = 0.0;
  double error = 0.0;
};

/// Simulates the n-th scaled system for each n and compares a scaled
/// statistic with its analytic limit:
///  - fluid: (n lambda, n K, n M); sup over the grid of |mean Z^n(t)/n - z(t)|.
///  - hw: lambda^n = n(nu+mu), M^n = n + beta sqrt(n), K^n = n(nu+mu)/nu + kappa sqrt(n);
///    mean of (Q^n - lambda^n/nu)/sqrt(n) vs the N(0, (nu+mu)/nu) law truncated at kappa.
///  - overloaded: (n lambda, n K), M^n = nu K^n/(nu+mu) + beta sqrt(n); mean of
///    (Z^n - nu K^n/(nu+mu))/sqrt(n) vs the overloaded_density mean.
///  - smallnu: nu^n = nu/n, K^n well above lambda n; Var(Z^n) nu^n / lambda vs 1.
///    Horizon and burn-in are multiplied by n to follow the slow time scale.
/// The error is |statistic - limit|. Throws ValidationError for an empty or
/// non-increasing n_list.
std::vector<ConvergenceRow> convergence_experiment(const ModelParams& base, Scaling scaling,
                                                   std::span<const int> n_list,
                                                   const ConvergenceConfig& config);

}  // namespace evcharge
