#include "evcharge/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evcharge/diffusion.hpp"
#include "evcharge/fluid.hpp"
#include "evcharge/normal.hpp"
#include "evcharge/parallel.hpp"
#include "evcharge/random.hpp"

namespace evcharge {

void SimConfig::validate() const {
  if (!(burn_in >= 0.0) || !(horizon > burn_in) || !std::isfinite(horizon)) {
    throw ValidationError(ValidationCode::bad_config, "SimConfig: need 0 <= burn_in < horizon");
  }
  if (n_reps < 1) throw ValidationError(ValidationCode::bad_config, "SimConfig: n_reps must be >= 1");
}

namespace {

double exponential(Engine& rng, double rate) {
  return std::exponential_distribution<double>(rate)(rng);
}

double uniform(Engine& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Accumulates time averages of a path restricted to [from, to].
struct Window {
  double from, to;
  ReplicationStats stats;
  double covered = 0.0;

  void hold(double t0, double t1, int q, int z, bool blocked) {
    const double a = std::max(t0, from);
    const double b = std::min(t1, to);
    if (b <= a) return;
    const double w = b - a;
    stats.mean_q += w * q;
    stats.mean_z += w * z;
    stats.mean_q2 += w * q * static_cast<double>(q);
    stats.mean_z2 += w * z * static_cast<double>(z);
    if (blocked) stats.p_block += w;
    covered += w;
  }

  void depart(double t, bool charged) {
    if (t < from || t > to) return;
    ++stats.departures;
    if (charged) ++stats.charged_departures;
  }

  ReplicationStats finish() {
    if (covered > 0.0) {
      stats.mean_q /= covered;
      stats.mean_z /= covered;
      stats.mean_q2 /= covered;
      stats.mean_z2 /= covered;
      stats.p_block /= covered;
    }
    return stats;
  }
};

// Competing-clocks event loop of the (Q, Z) chain up to time t_end.
// `hold(t0, t1, q, z)` sees every holding interval, `depart(t, charged)` every
// departure and `visit(t, q, z)` every state after a jump.
template <class Hold, class Depart, class Visit>
long run_model(const ModelParams& p, int& q, int& z, double t_end, Engine& rng, Hold&& hold,
               Depart&& depart, Visit&& visit) {
  const int K = p.K();
  double t = 0.0;
  long events = 0;
  while (true) {
    const double arrive = q < K ? p.lambda : 0.0;
    const double leave = p.nu * q;
    const double charge = p.mu * std::min(static_cast<double>(z), p.power);
    const double total = arrive + leave + charge;
    const double next = total > 0.0 ? t + exponential(rng, total) : t_end;
    if (next >= t_end) {
      hold(t, t_end, q, z);
      return events;
    }
    hold(t, next, q, z);
    t = next;
    ++events;
    const double u = uniform(rng) * total;
    if (u < arrive) {
      ++q;
      ++z;
    } else if (u < arrive + leave) {
      // The departing car is uncharged with probability z / q.
      const bool uncharged = uniform(rng) * q < z;
      --q;
      if (uncharged) --z;
      depart(t, !uncharged);
    } else {
      --z;
    }
    visit(t, q, z);
  }
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double half_width(const std::vector<double>& xs) {
  if (xs.size() < 2) return std::numeric_limits<double>::infinity();
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
}

SimEstimate aggregate(const std::vector<ReplicationStats>& reps) {
  std::vector<double> q, z, b, s;
  bool success_defined = true;
  for (const auto& r : reps) {
    q.push_back(r.mean_q);
    z.push_back(r.mean_z);
    b.push_back(r.p_block);
    if (r.departures > 0) {
      s.push_back(static_cast<double>(r.charged_departures) / static_cast<double>(r.departures));
    } else {
      success_defined = false;
    }
  }
  SimEstimate e;
  e.reps_used = static_cast<int>(reps.size());
  e.e_q = mean_of(q);
  e.e_z = mean_of(z);
  e.p_block = mean_of(b);
  e.half_widths.e_q = half_width(q);
  e.half_widths.e_z = half_width(z);
  e.half_widths.p_block = half_width(b);
  if (success_defined) {
    e.p_success = mean_of(s);
    e.half_widths.p_success = half_width(s);
  }
  return e;
}

ModelParams require_finite(const ModelParams& raw, const char* who) {
  const ModelParams p = validate(raw);
  if (!p.spaces.is_finite()) throw UnsupportedError(std::string(who) + ": requires finite K");
  return p;
}

ReplicationStats full_lot_replication(const ModelParams& p, const SimConfig& c, int rep) {
  Engine rng = make_stream(c.seed, static_cast<std::uint64_t>(rep));
  const int K = p.K();
  Window w{c.burn_in, c.horizon, {}};
  int z = 0;
  double t = 0.0;
  long events = 0;
  while (true) {
    const double leave = p.nu * K;
    const double charge = p.mu * std::min(static_cast<double>(z), p.power);
    const double total = leave + charge;
    const double next = t + exponential(rng, total);
    if (next >= c.horizon) {
      w.hold(t, c.horizon, K, z, true);
      break;
    }
    w.hold(t, next, K, z, true);
    t = next;
    ++events;
    if (uniform(rng) * total < leave) {
      // A charged car leaving is replaced by an uncharged one.
      const bool charged = uniform(rng) * K >= z;
      if (charged) ++z;
      w.depart(t, charged);
    } else {
      --z;
    }
  }
  ReplicationStats s = w.finish();
  s.events = events;
  return s;
}

}  // namespace

ReplicationStats simulate_replication(const ModelParams& raw, const SimConfig& c, int rep, int q0,
                                      int z0) {
  const ModelParams p = require_finite(raw, "simulate_replication");
  c.validate();
  if (!StateIndex(p.K()).contains({q0, z0})) {
    throw DomainError("simulate_replication: initial state outside 0 <= z <= q <= K");
  }
  Engine rng = make_stream(c.seed, static_cast<std::uint64_t>(rep));
  Window w{c.burn_in, c.horizon, {}};
  const int K = p.K();
  int q = q0;
  int z = z0;
  const long events = run_model(
      p, q, z, c.horizon, rng,
      [&](double t0, double t1, int qq, int zz) { w.hold(t0, t1, qq, zz, qq == K); },
      [&](double t, bool charged) { w.depart(t, charged); }, [](double, int, int) {});
  ReplicationStats s = w.finish();
  s.events = events;
  return s;
}

SimEstimate simulate_model(const ModelParams& raw, const SimConfig& c) {
  const ModelParams p = require_finite(raw, "simulate_model");
  c.validate();
  std::vector<ReplicationStats> reps(static_cast<std::size_t>(c.n_reps));
  parallel_for(
      reps.size(),
      [&](std::size_t r) { reps[r] = simulate_replication(p, c, static_cast<int>(r)); },
      c.threads);
  return aggregate(reps);
}

SimEstimate simulate_full_lot(const ModelParams& raw, const SimConfig& c) {
  const ModelParams p = require_finite(raw, "simulate_full_lot");
  c.validate();
  std::vector<ReplicationStats> reps(static_cast<std::size_t>(c.n_reps));
  parallel_for(
      reps.size(),
      [&](std::size_t r) { reps[r] = full_lot_replication(p, c, static_cast<int>(r)); },
      c.threads);
  SimEstimate e = aggregate(reps);
  e.half_widths.e_q = 0.0;
  e.half_widths.p_block = 0.0;
  return e;
}

SimEstimate simulate(const ModelParams& params, const SimConfig& config) {
  return config.mode == SimMode::full_model ? simulate_model(params, config)
                                            : simulate_full_lot(params, config);
}

std::vector<double> sample_z_path(const ModelParams& raw, int q0, int z0,
                                  std::span<const double> times, std::uint64_t seed,
                                  std::uint64_t stream) {
  const ModelParams p = require_finite(raw, "sample_z_path");
  if (!StateIndex(p.K()).contains({q0, z0})) {
    throw DomainError("sample_z_path: initial state outside 0 <= z <= q <= K");
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw DomainError("sample_z_path: times must be increasing");
  }
  std::vector<double> out;
  out.reserve(times.size());
  if (times.empty()) return out;
  Engine rng = make_stream(seed, stream);
  int q = q0;
  int z = z0;
  std::size_t next = 0;
  run_model(
      p, q, z, times.back() + 1e-12, rng,
      [&](double t0, double t1, int, int zz) {
        while (next < times.size() && times[next] >= t0 && times[next] < t1) {
          out.push_back(zz);
          ++next;
        }
      },
      [](double, bool) {}, [](double, int, int) {});
  while (out.size() < times.size()) out.push_back(z);
  return out;
}

std::vector<TraceEvent> trace_model(const ModelParams& raw, double horizon, std::uint64_t seed) {
  const ModelParams p = require_finite(raw, "trace_model");
  Engine rng = make_stream(seed, 0);
  std::vector<TraceEvent> out{{0.0, 0, 0}};
  int q = 0;
  int z = 0;
  run_model(
      p, q, z, horizon, rng, [](double, double, int, int) {}, [](double, bool) {},
      [&](double t, int qq, int zz) { out.push_back({t, qq, zz}); });
  return out;
}

const char* to_string(Scaling s) noexcept {
  switch (s) {
    case Scaling::fluid: return "fluid";
    case Scaling::hw: return "hw";
    case Scaling::overloaded: return "overloaded";
    case Scaling::smallnu: return "smallnu";
  }
  return "unknown";
}

Scaling parse_scaling(std::string_view tag) {
  for (Scaling s : {Scaling::fluid, Scaling::hw, Scaling::overloaded, Scaling::smallnu}) {
    if (tag == to_string(s)) return s;
  }
  throw ValidationError(ValidationCode::bad_config,
                        "unknown scaling '" + std::string(tag) + "' (fluid|hw|overloaded|smallnu)");
}

namespace {

// Pooled stationary moments over replications started at (q0, z0).
std::vector<ReplicationStats> stationary_reps(const ModelParams& p, const SimConfig& c, int q0,
                                              int z0) {
  std::vector<ReplicationStats> reps(static_cast<std::size_t>(c.n_reps));
  parallel_for(
      reps.size(),
      [&](std::size_t r) { reps[r] = simulate_replication(p, c, static_cast<int>(r), q0, z0); },
      c.threads);
  return reps;
}

ConvergenceRow fluid_row(const ModelParams& base, int n, const ConvergenceConfig& cfg) {
  const int K = base.K();
  const double t_end = cfg.fluid_t_end.value_or(5.0 / std::min(base.nu, base.mu));
  const double z0 = cfg.fluid_z0.value_or(static_cast<double>(K));
  if (!(z0 >= 0.0 && z0 <= K)) throw DomainError("convergence_experiment: fluid_z0 outside [0, K]");
  if (cfg.grid_points < 1 || !(t_end > 0.0)) {
    throw ValidationError(ValidationCode::bad_config, "convergence_experiment: bad fluid grid");
  }

  ModelParams scaled = base;
  scaled.lambda = base.lambda * n;
  scaled.spaces = Spaces::finite(K * n);
  scaled.power = base.power * n;
  const int q0 = K * n;
  const int z0_n = static_cast<int>(std::lround(z0 * n));

  std::vector<double> times;
  for (int i = 1; i <= cfg.grid_points; ++i) times.push_back(t_end * i / cfg.grid_points);

  const auto reps = static_cast<std::size_t>(cfg.sim.n_reps);
  std::vector<std::vector<double>> paths(reps);
  const std::uint64_t master = stream_seed(cfg.sim.seed, static_cast<std::uint64_t>(n));
  parallel_for(
      reps, [&](std::size_t r) { paths[r] = sample_z_path(scaled, q0, z0_n, times, master, r); },
      cfg.sim.threads);

  const auto limit = fluid_trajectory(base, static_cast<double>(z0_n) / n, times);
  ConvergenceRow row{n, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < times.size(); ++i) {
    double m = 0.0;
    for (const auto& path : paths) m += path[i];
    m /= static_cast<double>(reps) * n;
    const double err = std::abs(m - limit[i]);
    if (err >= row.error) row = {n, m, limit[i], err};
  }
  return row;
}

ConvergenceRow hw_row(const ModelParams& base, int n, const ConvergenceConfig& cfg) {
  const double rn = std::sqrt(static_cast<double>(n));
  ModelParams scaled = base;
  scaled.lambda = n * (base.nu + base.mu);
  scaled.power = n + cfg.beta * rn;
  const double centre = scaled.lambda / base.nu;
  const int K = static_cast<int>(std::lround(centre + cfg.kappa * rn));
  if (K < 1 || !(scaled.power > 0.0) || scaled.power > K) {
    throw DomainError("convergence_experiment: hw scaling gives an infeasible (K, M) at n = " +
                      std::to_string(n));
  }
  scaled.spaces = Spaces::finite(K);
  const int q0 = std::min(K, static_cast<int>(std::lround(centre)));
  const auto reps = stationary_reps(scaled, cfg.sim, q0, std::min(q0, n));
  double m = 0.0;
  for (const auto& r : reps) m += r.mean_q;
  m /= static_cast<double>(reps.size());
  const double stat = (m - centre) / rn;
  // The Q marginal is a truncated Poisson; its limit is N(0, (nu+mu)/nu) cut at kappa.
  const double kappa_n = (K - centre) / rn;
  const double limit = normal::truncated_mean_below(0.0, std::sqrt(centre / n), kappa_n);
  return {n, stat, limit, std::abs(stat - limit)};
}

ConvergenceRow overloaded_row(const ModelParams& base, int n, const ConvergenceConfig& cfg) {
  const int K0 = base.K();
  if (!(base.lambda > base.nu * K0)) {
    throw DomainError("convergence_experiment: overloaded scaling requires lambda > nu K");
  }
  const double rn = std::sqrt(static_cast<double>(n));
  ModelParams scaled = base;
  scaled.lambda = base.lambda * n;
  const int K = K0 * n;
  scaled.spaces = Spaces::finite(K);
  const double centre = base.nu * K / (base.nu + base.mu);
  scaled.power = centre + cfg.beta * rn;
  if (!(scaled.power > 0.0) || scaled.power > K) {
    throw DomainError("convergence_experiment: overloaded scaling gives M outside (0, K]");
  }
  const auto reps = stationary_reps(scaled, cfg.sim, K, static_cast<int>(std::lround(centre)));
  double m = 0.0;
  for (const auto& r : reps) m += r.mean_z;
  m /= static_cast<double>(reps.size());
  const double stat = (m - centre) / rn;
  const double limit = overloaded_density(base.nu, base.mu, K0, cfg.beta).mean();
  return {n, stat, limit, std::abs(stat - limit)};
}

ConvergenceRow smallnu_row(const ModelParams& base, int n, const ConvergenceConfig& cfg) {
  if (!(base.lambda > base.mu * base.power)) {
    throw DomainError("convergence_experiment: smallnu scaling requires lambda > mu M");
  }
  ModelParams scaled = base;
  scaled.nu = base.nu / n;
  const double load = base.lambda / scaled.nu;
  const int K = static_cast<int>(std::ceil(load + 8.0 * std::sqrt(load))) + 10;
  scaled.spaces = Spaces::finite(K);
  SimConfig sim = cfg.sim;
  sim.horizon *= n;
  sim.burn_in *= n;
  const int q0 = static_cast<int>(std::lround(load));
  const int z0 = static_cast<int>(std::lround((base.lambda - base.mu * base.power) / scaled.nu));
  const auto reps = stationary_reps(scaled, sim, q0, std::min(z0, q0));
  double m1 = 0.0;
  double m2 = 0.0;
  for (const auto& r : reps) {
    m1 += r.mean_z;
    m2 += r.mean_z2;
  }
  m1 /= static_cast<double>(reps.size());
  m2 /= static_cast<double>(reps.size());
  const double stat = (m2 - m1 * m1) / load;
  return {n, stat, 1.0, std::abs(stat - 1.0)};
}

}  // namespace

std::vector<ConvergenceRow> convergence_experiment(const ModelParams& raw, Scaling scaling,
                                                   std::span<const int> n_list,
                                                   const ConvergenceConfig& cfg) {
  const ModelParams base = validate(raw);
  cfg.sim.validate();
  if (n_list.empty()) {
    throw ValidationError(ValidationCode::bad_config, "convergence_experiment: empty n_list");
  }
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw ValidationError(ValidationCode::bad_config,
                            "convergence_experiment: n_list must be increasing positive integers");
    }
  }
  if (scaling != Scaling::hw && scaling != Scaling::smallnu && !base.spaces.is_finite()) {
    throw UnsupportedError("convergence_experiment: this scaling requires finite K");
  }
  std::vector<ConvergenceRow> rows;
  for (int n : n_list) {
    switch (scaling) {
      case Scaling::fluid: rows.push_back(fluid_row(base, n, cfg)); break;
      case Scaling::hw: rows.push_back(hw_row(base, n, cfg)); break;
      case Scaling::overloaded: rows.push_back(overloaded_row(base, n, cfg)); break;
      case Scaling::smallnu: rows.push_back(smallnu_row(base, n, cfg)); break;
    }
  }
  return rows;
}

}  // namespace evcharge
