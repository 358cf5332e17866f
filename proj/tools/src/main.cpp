#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "evcharge/cli/commands.hpp"
#include "evcharge/errors.hpp"

namespace fs = std::filesystem;
using namespace evcharge;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

Spaces parse_spaces(const std::string& text) {
  if (text == "inf") return Spaces::infinite();
  try {
    std::size_t used = 0;
    const int k = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return Spaces::finite(k);
  } catch (const std::exception&) {
    throw ValidationError(ValidationCode::bad_config, "K must be an integer or 'inf', got '" + text + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(ValidationCode::bad_config, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Explicit --out wins; otherwise $EVCHARGE_OUT_DIR/<stem>.<ext>; otherwise stdout.
void emit(const cli::Table& table, cli::Format format, const std::optional<std::string>& out,
          const std::string& stem) {
  std::optional<fs::path> path;
  if (out) {
    path = *out;
  } else if (const char* dir = std::getenv("EVCHARGE_OUT_DIR"); dir && *dir) {
    path = fs::path(dir) / (stem + (format == cli::Format::csv ? ".csv" : ".json"));
  }
  if (!path) {
    cli::write(std::cout, table, format);
    return;
  }
  if (path->has_parent_path()) fs::create_directories(path->parent_path());
  std::ofstream file(*path);
  if (!file) throw ValidationError(ValidationCode::bad_config, "cannot write " + path->string());
  cli::write(file, table, format);
  std::cerr << "wrote " << path->string() << '\n';
}

struct ParamFlags {
  double lambda = 1.0, mu = 1.0, nu = 1.0, M = 1.0;
  std::string K = "1";
  CLI::Option *o_lambda = nullptr, *o_mu = nullptr, *o_nu = nullptr, *o_M = nullptr, *o_K = nullptr;

  void attach(CLI::App* app) {
    o_lambda = app->add_option("--lambda", lambda, "arrival rate")->capture_default_str();
    o_mu = app->add_option("--mu", mu, "charging rate")->capture_default_str();
    o_nu = app->add_option("--nu", nu, "parking rate")->capture_default_str();
    o_K = app->add_option("--K", K, "parking spaces (integer or 'inf')")->capture_default_str();
    o_M = app->add_option("--M", M, "charging power (cars charged at full rate)")->capture_default_str();
  }

  void apply(ModelParams& p) const {
    if (o_lambda->count()) p.lambda = lambda;
    if (o_mu->count()) p.mu = mu;
    if (o_nu->count()) p.nu = nu;
    if (o_M->count()) p.power = M;
    if (o_K->count()) p.spaces = parse_spaces(K);
  }

  ModelParams params() const { return {lambda, mu, nu, parse_spaces(K), M}; }
};

struct SimFlags {
  SimConfig config;
  CLI::Option *o_h = nullptr, *o_b = nullptr, *o_r = nullptr, *o_s = nullptr;

  void attach(CLI::App* app) {
    o_h = app->add_option("--horizon", config.horizon, "simulated time per replication")
              ->capture_default_str();
    o_b = app->add_option("--burn-in", config.burn_in, "discarded initial time")->capture_default_str();
    o_r = app->add_option("--reps", config.n_reps, "replications")->capture_default_str();
    o_s = app->add_option("--seed", config.seed, "master seed")->capture_default_str();
  }

  void apply(SimConfig& c) const {
    if (o_h->count()) c.horizon = config.horizon;
    if (o_b->count()) c.burn_in = config.burn_in;
    if (o_r->count()) c.n_reps = config.n_reps;
    if (o_s->count()) c.seed = config.seed;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Performance evaluation of EV charging stations with finite parking and power"};
  app.require_subcommand(1);

  std::string format_name = "csv";
  std::optional<std::string> out;
  unsigned threads = 0;
  auto* o_format = app.add_option("--format", format_name, "csv or json")->capture_default_str();
  app.add_option("--out", out, "output file (default: $EVCHARGE_OUT_DIR or stdout)");
  app.add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a scenario with one or more methods");
  std::string config_path;
  std::vector<std::string> methods;
  ParamFlags eval_params;
  SimFlags eval_sim;
  eval->add_option("--config", config_path, "JSON scenario file; flags override it");
  auto* o_methods = eval->add_option("--methods", methods,
                                     "exact, bounds, fluid, fluid_modified, diffusion_overloaded, "
                                     "diffusion_smallnu, simulate")
                        ->delimiter(',');
  eval_params.attach(eval);
  eval_sim.attach(eval);

  // tables
  auto* tables = app.add_subcommand("tables", "maximum relative errors of the E[Z] approximations");
  int table_id = 1;
  std::string grid_kind = "deciles";
  int first_decile = 2;
  tables->add_option("--id", table_id, "table number 1..4")->required();
  tables->add_option("--m-grid", grid_kind, "deciles (M = iK/10) or integers (M = 1..K)")
      ->capture_default_str();
  tables->add_option("--first-decile", first_decile, "smallest i of the decile grid")
      ->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "success probability against M/K");
  cli::SweepOptions sweep_opts;
  sweep->add_option("--K", sweep_opts.K, "parking spaces")->capture_default_str();
  sweep->add_option("--lambda-mult", sweep_opts.lambda_mult, "lambda = mult * K")->capture_default_str();
  sweep->add_option("--nu", sweep_opts.nu, "parking rate")->capture_default_str();
  sweep->add_option("--mu", sweep_opts.mu, "charging rate")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates with 95% half-widths");
  ParamFlags sim_params;
  SimFlags sim_flags;
  std::string mode = "full_model";
  sim_params.attach(simulate);
  sim_flags.attach(simulate);
  simulate->add_option("--mode", mode, "full_model or full_lot")->capture_default_str();

  // converge
  auto* converge = app.add_subcommand("converge", "scaled simulation against analytic limits");
  ParamFlags conv_params;
  SimFlags conv_sim;
  std::string scaling = "fluid";
  std::vector<int> n_list{10, 100};
  ConvergenceConfig conv_cfg;
  conv_params.attach(converge);
  conv_sim.attach(converge);
  converge->add_option("--scaling", scaling, "fluid, hw, overloaded or smallnu")->capture_default_str();
  converge->add_option("--n", n_list, "scale factors, increasing")->delimiter(',');
  converge->add_option("--beta", conv_cfg.beta, "second-order offset of M")->capture_default_str();
  converge->add_option("--kappa", conv_cfg.kappa, "second-order offset of K (hw)")->capture_default_str();
  auto* o_z0 = converge->add_option("--z0", "fluid: initial uncharged level in [0, K]");
  auto* o_tend = converge->add_option("--t-end", "fluid: end of the comparison grid");
  converge->add_option("--grid-points", conv_cfg.grid_points, "fluid: grid size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    cli::Format format = cli::parse_format(format_name);
    if (*eval) {
      cli::Scenario sc;
      if (!config_path.empty()) sc = cli::merge_scenario(sc, read_file(config_path));
      eval_params.apply(sc.params);
      eval_sim.apply(sc.sim);
      sc.sim.threads = threads;
      if (o_methods->count()) {
        sc.methods.clear();
        for (const auto& m : methods) sc.methods.push_back(cli::parse_method(m));
      }
      if (out) sc.output_path = out;
      if (o_format->count()) sc.format = format;
      const auto report = cli::cmd_eval(sc);
      emit(report.table, sc.format, sc.output_path, "eval");
      if (report.failed_rows > 0 &&
          report.failed_rows == static_cast<int>(report.table.rows.size())) {
        return report.numerical_failure ? kExitNumerical : kExitValidation;
      }
    } else if (*tables) {
      cli::MGrid grid;
      if (grid_kind == "integers") {
        grid.kind = cli::MGrid::Kind::integers;
      } else if (grid_kind != "deciles") {
        throw ValidationError(ValidationCode::bad_config, "unknown M grid '" + grid_kind + "'");
      }
      grid.first_decile = first_decile;
      emit(cli::cmd_tables(table_id, grid, threads), format, out, "table" + std::to_string(table_id));
    } else if (*sweep) {
      sweep_opts.threads = threads;
      emit(cli::cmd_sweep(sweep_opts), format, out, "sweep");
    } else if (*simulate) {
      SimConfig config = sim_flags.config;
      config.threads = threads;
      if (mode == "full_lot") {
        config.mode = SimMode::full_lot;
      } else if (mode != "full_model") {
        throw ValidationError(ValidationCode::bad_config, "unknown mode '" + mode + "'");
      }
      emit(cli::cmd_simulate(sim_params.params(), config), format, out, "simulate");
    } else if (*converge) {
      conv_cfg.sim = conv_sim.config;
      conv_cfg.sim.threads = threads;
      if (o_z0->count()) conv_cfg.fluid_z0 = o_z0->as<double>();
      if (o_tend->count()) conv_cfg.fluid_t_end = o_tend->as<double>();
      emit(cli::cmd_converge(conv_params.params(), parse_scaling(scaling), n_list, conv_cfg), format,
           out, "converge_" + scaling);
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::logic_error& e) {
    // DomainError and UnsupportedError.
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
