#include "evcharge/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "evcharge/closed_form.hpp"
#include "evcharge/diffusion.hpp"
#include "evcharge/exact.hpp"
#include "evcharge/fluid.hpp"
#include "evcharge/parallel.hpp"

namespace evcharge::cli {

namespace {

constexpr Method kMethods[] = {Method::exact,          Method::bounds,
                               Method::fluid,          Method::fluid_modified,
                               Method::diffusion_overloaded, Method::diffusion_smallnu,
                               Method::simulate};

Cell opt(const std::optional<double>& v) {
  if (v) return *v;
  return std::monostate{};
}

}  // namespace

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::exact: return "exact";
    case Method::bounds: return "bounds";
    case Method::fluid: return "fluid";
    case Method::fluid_modified: return "fluid_modified";
    case Method::diffusion_overloaded: return "diffusion_overloaded";
    case Method::diffusion_smallnu: return "diffusion_smallnu";
    case Method::simulate: return "simulate";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : kMethods) {
    if (name == to_string(m)) return m;
  }
  throw ValidationError(ValidationCode::bad_config, "unknown method '" + name + "'");
}

void Scenario::validate() const {
  if (methods.empty()) {
    throw ValidationError(ValidationCode::bad_config, "scenario: select at least one method");
  }
  evcharge::validate(params);
  sim.validate();
}

Scenario merge_scenario(const Scenario& base, const std::string& json_text) {
  Scenario s = base;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(ValidationCode::bad_config, std::string("config: ") + e.what());
  }
  try {
    if (doc.contains("params")) {
      const auto& p = doc.at("params");
      if (p.contains("lambda")) s.params.lambda = p.at("lambda").get<double>();
      if (p.contains("mu")) s.params.mu = p.at("mu").get<double>();
      if (p.contains("nu")) s.params.nu = p.at("nu").get<double>();
      if (p.contains("M")) s.params.power = p.at("M").get<double>();
      if (p.contains("K")) {
        const auto& k = p.at("K");
        if (k.is_string()) {
          if (k.get<std::string>() != "inf") {
            throw ValidationError(ValidationCode::bad_config, "config: K must be an integer or \"inf\"");
          }
          s.params.spaces = Spaces::infinite();
        } else {
          s.params.spaces = Spaces::finite(k.get<int>());
        }
      }
    }
    if (doc.contains("methods")) {
      s.methods.clear();
      for (const auto& m : doc.at("methods")) s.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (doc.contains("sim")) {
      const auto& c = doc.at("sim");
      if (c.contains("horizon")) s.sim.horizon = c.at("horizon").get<double>();
      if (c.contains("burn_in")) s.sim.burn_in = c.at("burn_in").get<double>();
      if (c.contains("n_reps")) s.sim.n_reps = c.at("n_reps").get<int>();
      if (c.contains("seed")) s.sim.seed = c.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("output")) {
      const auto& o = doc.at("output");
      if (o.contains("path")) s.output_path = o.at("path").get<std::string>();
      if (o.contains("format")) s.format = parse_format(o.at("format").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(ValidationCode::bad_config, std::string("config: ") + e.what());
  }
  return s;
}

namespace {

struct Estimate {
  std::string name;
  std::optional<double> e_z, e_q, p_s;
  std::string error{};
  bool numerical = false;
};

std::optional<double> ratio_success(double e_z, double e_q) {
  if (e_q <= 0.0) return std::nullopt;
  return 1.0 - e_z / e_q;
}

std::vector<Estimate> evaluate(Method m, const Scenario& sc) {
  const ModelParams& p = sc.params;
  switch (m) {
    case Method::exact: {
      const Metrics x = metrics(solve_stationary(p), p);
      return {{"exact", x.e_z, x.e_q, x.p_success}};
    }
    case Method::bounds: {
      const SuccessBounds b = success_bounds(p);
      return {{"bounds_upper", {}, {}, b.upper},
              {"bounds_lower_erlang_a", {}, {}, b.lower_erlang_a},
              {"bounds_lower_full_lot", {}, {}, b.lower_full_lot},
              {"bounds_modified_lower", {}, {}, b.modified_lower}};
    }
    case Method::fluid:
    case Method::fluid_modified: {
      const FluidResult r = m == Method::fluid ? fluid_fixed_point(p) : modified_fluid_fixed_point(p);
      std::optional<double> ps;
      if (r.effective_arrival > 0.0) ps = fluid_success_prob(r, p);
      return {{to_string(m), r.z_star, r.effective_arrival / p.nu, ps}};
    }
    case Method::diffusion_overloaded: {
      const double e_z = overloaded_mean_approx(p);
      const double e_q = expected_occupancy(p);
      return {{to_string(m), e_z, e_q, ratio_success(e_z, e_q)}};
    }
    case Method::diffusion_smallnu: {
      const SmallNuApprox a = smallnu_approx(p);
      return {{to_string(m), a.e_z, a.e_q, ratio_success(a.e_z, a.e_q)}};
    }
    case Method::simulate: {
      const SimEstimate e = simulate_model(p, sc.sim);
      return {{to_string(m), e.e_z, e.e_q, e.p_success}};
    }
  }
  return {};
}

}  // namespace

EvalReport cmd_eval(const Scenario& sc) {
  sc.validate();
  std::vector<Estimate> rows;
  for (Method m : sc.methods) {
    try {
      auto out = evaluate(m, sc);
      rows.insert(rows.end(), out.begin(), out.end());
    } catch (const NumericalError& e) {
      rows.push_back({to_string(m), {}, {}, {}, e.what(), true});
    } catch (const std::exception& e) {
      rows.push_back({to_string(m), {}, {}, {}, e.what(), false});
    }
  }

  const Estimate* exact = nullptr;
  for (const auto& r : rows) {
    if (r.name == "exact" && r.error.empty()) exact = &r;
  }
  auto rel = [](const std::optional<double>& ref, const std::optional<double>& v) -> Cell {
    if (!ref || !v || *ref == 0.0) return std::monostate{};
    return relative_error(*ref, *v);
  };

  EvalReport report;
  report.table.header = {"method", "E_Z", "E_Q", "P_s", "RE_E_Z_pct", "RE_P_s_pct", "error"};
  for (const auto& r : rows) {
    const bool compare = exact && &r != exact && r.error.empty();
    report.table.rows.push_back({r.name, opt(r.e_z), opt(r.e_q), opt(r.p_s),
                                 compare ? rel(exact->e_z, r.e_z) : Cell{},
                                 compare ? rel(exact->p_s, r.p_s) : Cell{},
                                 r.error.empty() ? Cell{} : Cell{r.error}});
    if (!r.error.empty()) {
      ++report.failed_rows;
      report.numerical_failure = report.numerical_failure || r.numerical;
    }
  }
  return report;
}

std::vector<double> MGrid::values(int K) const {
  std::vector<double> out;
  if (kind == Kind::integers) {
    for (int m = 1; m <= K; ++m) out.push_back(m);
    return out;
  }
  if (first_decile < 1 || first_decile > 10) {
    throw ValidationError(ValidationCode::bad_config, "M grid: first decile must lie in 1..10");
  }
  for (int i = first_decile; i <= 10; ++i) out.push_back(static_cast<double>(i) * K / 10.0);
  return out;
}

namespace {

double table_approx(int id, const ModelParams& p) {
  switch (id) {
    case 1: return fluid_fixed_point(p).z_star;
    case 2: return modified_fluid_fixed_point(p).z_star;
    case 3: return modified_full_lot_mean(p);
    case 4: return overloaded_mean_approx(p, OverloadedVariant::modified, WeightRule::variance_ratio);
  }
  throw ValidationError(ValidationCode::bad_config, "unknown table id " + std::to_string(id));
}

}  // namespace

Table cmd_tables(int id, const MGrid& grid, unsigned threads) {
  if (id < 1 || id > 4) {
    throw ValidationError(ValidationCode::bad_config,
                          "unknown table id " + std::to_string(id) + " (expected 1..4)");
  }
  const std::vector<double> mults =
      id == 1 ? std::vector<double>{1.0, 1.2} : std::vector<double>{0.8, 1.0, 1.2};
  const std::vector<int> sizes{10, 20, 30, 40, 50};

  struct CellJob {
    double mult;
    int K;
    double worst = 0.0;
    double argmax = 0.0;
  };
  std::vector<CellJob> jobs;
  for (double m : mults) {
    for (int K : sizes) jobs.push_back({m, K});
  }
  parallel_for(
      jobs.size(),
      [&](std::size_t j) {
        CellJob& job = jobs[j];
        for (double M : grid.values(job.K)) {
          ModelParams p{job.mult * job.K, 1.0, 1.0, Spaces::finite(job.K), M};
          const double e_z = metrics(solve_stationary(p), p).e_z;
          const double err = relative_error(e_z, table_approx(id, p));
          if (err > job.worst) {
            job.worst = err;
            job.argmax = M;
          }
        }
      },
      threads);

  Table t;
  t.header = {"table", "lambda_mult", "K", "max_rel_error_pct", "argmax_M"};
  for (const auto& job : jobs) {
    t.rows.push_back({std::int64_t{id}, job.mult, std::int64_t{job.K}, job.worst, job.argmax});
  }
  return t;
}

namespace {

double unit_interval(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Table cmd_sweep(const SweepOptions& o) {
  if (o.K < 1) throw ValidationError(ValidationCode::spaces_not_positive, "sweep: K must be >= 1");
  const double lambda = o.lambda_mult * o.K;
  std::vector<std::vector<Cell>> rows(static_cast<std::size_t>(o.K));
  parallel_for(
      rows.size(),
      [&](std::size_t i) {
        const int M = static_cast<int>(i) + 1;
        const ModelParams p{lambda, o.mu, o.nu, Spaces::finite(o.K), static_cast<double>(M)};
        const Metrics x = metrics(solve_stationary(p), p);
        const SuccessBounds b = success_bounds(p);
        const FluidResult f = modified_fluid_fixed_point(p);
        const double e_q = expected_occupancy(p);
        rows[i] = {std::int64_t{M},
                   static_cast<double>(M) / o.K,
                   opt(x.p_success),
                   b.upper,
                   b.lower_erlang_a,
                   unit_interval(b.lower_full_lot),
                   unit_interval(b.modified_lower),
                   unit_interval(fluid_success_prob(f, p)),
                   unit_interval(1.0 - overloaded_mean_approx(p) / e_q)};
      },
      o.threads);
  Table t;
  t.header = {"M",          "M_over_K",       "exact",          "upper",
              "lower_erlang_a", "lower_full_lot", "modified_lower", "fluid_modified",
              "diffusion_modified"};
  t.rows = std::move(rows);
  return t;
}

Table cmd_simulate(const ModelParams& params, const SimConfig& config) {
  const SimEstimate e = simulate(params, config);
  Table t;
  t.header = {"mode", "E_Z",    "E_Q",     "P_s",        "P_block",
              "hw_E_Z", "hw_E_Q", "hw_P_s", "hw_P_block", "reps"};
  t.rows.push_back({std::string(config.mode == SimMode::full_model ? "full_model" : "full_lot"),
                    e.e_z, e.e_q, opt(e.p_success), e.p_block, e.half_widths.e_z,
                    e.half_widths.e_q,
                    e.p_success ? Cell{e.half_widths.p_success} : Cell{}, e.half_widths.p_block,
                    std::int64_t{e.reps_used}});
  return t;
}

Table cmd_converge(const ModelParams& base, Scaling scaling, std::span<const int> n_list,
                   const ConvergenceConfig& config) {
  Table t;
  t.header = {"scaling", "n", "statistic", "limit", "error"};
  for (const auto& r : convergence_experiment(base, scaling, n_list, config)) {
    t.rows.push_back({std::string(to_string(scaling)), std::int64_t{r.n}, r.statistic, r.limit, r.error});
  }
  return t;
}

}  // namespace evcharge::cli
