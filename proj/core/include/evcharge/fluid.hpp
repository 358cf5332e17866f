#pragma once

#include <span>
#include <vector>

#include "evcharge/params.hpp"

namespace evcharge {

enum class FluidRegime { below_M, boundary, above_M };

const char* to_string(FluidRegime regime) noexcept;

/// Invariant point of the fluid model z' = a - nu z - mu min(z, M).
struct FluidResult {
  double z_star = 0.0;
  FluidRegime regime = FluidRegime::below_M;
  double effective_arrival = 0.0;  ///< the inflow a used for this point
  std::vector<double> trajectory;  ///< optional samples z(t); empty unless requested
};

/// Inflow of the unmodified fluid model, lambda ^ (nu K).
double fluid_inflow(const ModelParams& params);
/// Inflow of the modified model, lambda (1 - B(lambda/nu, K)).
double modified_fluid_inflow(const ModelParams& params);

/// Exact solution of z' = a - nu z - mu min(z, M) with a = lambda ^ nu K,
/// sampled at `times`. The solution is piecewise exponential: it relaxes
/// towards the equilibrium of the region it starts in and switches branches
/// at most once, at the analytic crossing time of z = M.
/// Throws DomainError for z0 outside [0, K].
std::vector<double> fluid_trajectory(const ModelParams& params, double z0,
                                     std::span<const double> times);

/// Same ODE with an explicit inflow `inflow`.
std::vector<double> fluid_trajectory(const ModelParams& params, double inflow, double z0,
                                     std::span<const double> times);

/// Classical RK4 integration of the same ODE, used to cross-check the exact
/// branches. The default step is 1e-3 / min(nu, mu).
std::vector<double> fluid_trajectory_rk4(const ModelParams& params, double z0,
                                         std::span<const double> times, double step = 0.0);

/// z* = a/(nu+mu) if that is <= M, else (a - mu M)/nu, with a = lambda ^ nu K.
FluidResult fluid_fixed_point(const ModelParams& params);

/// Same two-branch point with a = lambda (1 - B(lambda/nu, K)).
FluidResult modified_fluid_fixed_point(const ModelParams& params);

/// Fixed point for an arbitrary inflow.
FluidResult fluid_fixed_point_for_inflow(const ModelParams& params, double inflow);

/// z* - a E[min(D, B max(1, z*/M))] evaluated in closed form,
/// a / (nu + mu max(1, z*/M)).
double fixed_point_residual(const FluidResult& result, const ModelParams& params);

/// Fluid success probability: mu/(nu+mu) when z* <= M, mu M / a otherwise.
double fluid_success_prob(const FluidResult& result, const ModelParams& params);

/// Invariant point of the full-lot fluid model:
/// nu K/(nu+mu) if that is <= M, else (nu K - mu M)/nu.
double full_lot_fluid(const ModelParams& params);

}  // namespace evcharge
