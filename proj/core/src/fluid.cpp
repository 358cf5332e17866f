#include "evcharge/fluid.hpp"

#include <algorithm>
#include <cmath>

#include "evcharge/closed_form.hpp"

namespace evcharge {

const char* to_string(FluidRegime regime) noexcept {
  switch (regime) {
    case FluidRegime::below_M: return "below_M";
    case FluidRegime::boundary: return "boundary";
    case FluidRegime::above_M: return "above_M";
  }
  return "unknown";
}

double fluid_inflow(const ModelParams& raw) {
  const ModelParams p = validate(raw);
  return std::min(p.lambda, p.nu * p.spaces.as_real());
}

double modified_fluid_inflow(const ModelParams& raw) {
  const ModelParams p = validate(raw);
  if (!p.spaces.is_finite()) return p.lambda;
  return p.lambda * (1.0 - erlang_b(p.lambda / p.nu, p.K()));
}

namespace {

// One linear branch: z' = rate (target - z).
struct Branch {
  double target;
  double rate;
  double at(double z0, double t) const { return target + (z0 - target) * std::exp(-rate * t); }
};

Branch lower_branch(const ModelParams& p, double a) {
  return {a / (p.nu + p.mu), p.nu + p.mu};
}

Branch upper_branch(const ModelParams& p, double a) {
  return {(a - p.mu * p.power) / p.nu, p.nu};
}

double rhs(const ModelParams& p, double a, double z) {
  return a - p.nu * z - p.mu * std::min(z, p.power);
}

void check_start(const ModelParams& p, double z0) {
  if (!(z0 >= 0.0) || z0 > p.spaces.as_real()) {
    throw DomainError("fluid_trajectory: z0 must lie in [0, K]");
  }
}

}  // namespace

std::vector<double> fluid_trajectory(const ModelParams& raw, double a, double z0,
                                     std::span<const double> times) {
  const ModelParams p = validate(raw);
  check_start(p, z0);
  const double M = p.power;

  const bool start_low = z0 <= M;
  const Branch first = start_low ? lower_branch(p, a) : upper_branch(p, a);
  const Branch second = start_low ? upper_branch(p, a) : lower_branch(p, a);

  // The first branch exits its region only if its target lies strictly on
  // the other side of M; the crossing time then solves first.at(z0, t) = M.
  double switch_time = INFINITY;
  if (start_low ? first.target > M : first.target <= M) {
    if (z0 == M) {
      switch_time = 0.0;
    } else {
      switch_time = std::log((z0 - first.target) / (M - first.target)) / first.rate;
    }
  }

  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    double z = t <= switch_time ? first.at(z0, t) : second.at(M, t - switch_time);
    // Guard the last ulp so that z(t) stays in [0, K].
    z = std::clamp(z, 0.0, p.spaces.as_real());
    out.push_back(z);
  }
  return out;
}

std::vector<double> fluid_trajectory(const ModelParams& params, double z0,
                                     std::span<const double> times) {
  return fluid_trajectory(params, fluid_inflow(params), z0, times);
}

std::vector<double> fluid_trajectory_rk4(const ModelParams& raw, double z0,
                                         std::span<const double> times, double step) {
  const ModelParams p = validate(raw);
  check_start(p, z0);
  const double a = fluid_inflow(p);
  if (step <= 0.0) step = 1e-3 / std::min(p.nu, p.mu);

  std::vector<double> out;
  out.reserve(times.size());
  double t = 0.0;
  double z = z0;
  for (double target : times) {
    while (t < target) {
      const double h = std::min(step, target - t);
      const double k1 = rhs(p, a, z);
      const double k2 = rhs(p, a, z + 0.5 * h * k1);
      const double k3 = rhs(p, a, z + 0.5 * h * k2);
      const double k4 = rhs(p, a, z + h * k3);
      z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
    }
    out.push_back(z);
  }
  return out;
}

FluidResult fluid_fixed_point_for_inflow(const ModelParams& raw, double a) {
  const ModelParams p = validate(raw);
  FluidResult r;
  r.effective_arrival = a;
  const double M = p.power;
  const double z1 = a / (p.nu + p.mu);
  if (std::abs(z1 - M) <= 1e-12 * std::max(1.0, M)) {
    r.z_star = z1;
    r.regime = FluidRegime::boundary;
  } else if (z1 < M) {
    r.z_star = z1;
    r.regime = FluidRegime::below_M;
  } else {
    r.z_star = (a - p.mu * M) / p.nu;
    r.regime = FluidRegime::above_M;
  }
  return r;
}

FluidResult fluid_fixed_point(const ModelParams& params) {
  return fluid_fixed_point_for_inflow(params, fluid_inflow(params));
}

FluidResult modified_fluid_fixed_point(const ModelParams& params) {
  return fluid_fixed_point_for_inflow(params, modified_fluid_inflow(params));
}

double fixed_point_residual(const FluidResult& r, const ModelParams& raw) {
  const ModelParams p = validate(raw);
  // E[min(D, B s)] = 1 / (nu + mu / s) for D ~ Exp(nu), B ~ Exp(mu).
  const double stretch = std::max(1.0, r.z_star / p.power);
  return r.z_star - r.effective_arrival / (p.nu + p.mu / stretch);
}

double fluid_success_prob(const FluidResult& r, const ModelParams& raw) {
  const ModelParams p = validate(raw);
  if (r.regime != FluidRegime::above_M) return p.mu / (p.nu + p.mu);
  if (r.effective_arrival <= 0.0) {
    throw DomainError("fluid_success_prob: zero effective arrival rate above M");
  }
  return p.mu * p.power / r.effective_arrival;
}

double full_lot_fluid(const ModelParams& raw) {
  const ModelParams p = validate(raw);
  const double K = p.spaces.as_real();
  const double below = p.nu * K / (p.nu + p.mu);
  if (below <= p.power) return below;
  return (p.nu * K - p.mu * p.power) / p.nu;
}

}  // namespace evcharge
