#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evcharge/cli/table.hpp"
#include "evcharge/params.hpp"
#include "evcharge/simulation.hpp"

namespace evcharge::cli {

enum class Method {
  exact,
  bounds,
  fluid,
  fluid_modified,
  diffusion_overloaded,
  diffusion_smallnu,
  simulate,
};

const char* to_string(Method m) noexcept;
/// Throws ValidationError(bad_config) for unknown names.
Method parse_method(const std::string& name);

struct Scenario {
  ModelParams params;
  std::vector<Method> methods;
  SimConfig sim;
  std::optional<std::string> output_path;
  Format format = Format::csv;

  /// Throws ValidationError when no method is selected or params are invalid.
  void validate() const;
};

/// Applies a JSON document of the form
///   {"params": {"lambda": 10, "mu": 1, "nu": 1, "K": 10 | "inf", "M": 2},
///    "methods": ["exact", "fluid_modified"],
///    "sim": {"horizon": 1e4, "burn_in": 100, "n_reps": 20, "seed": 1},
///    "output": {"path": "out.csv", "format": "csv"}}
/// on top of `base`. Absent keys keep their value.
Scenario merge_scenario(const Scenario& base, const std::string& json_text);

struct EvalReport {
  Table table;
  int failed_rows = 0;
  bool numerical_failure = false;
};

/// Header: method,E_Z,E_Q,P_s,RE_E_Z_pct,RE_P_s_pct,error
/// One row per method (four for bounds). Relative errors are filled when
/// exact is selected and succeeds. A failing method yields a row with the
/// error column set.
EvalReport cmd_eval(const Scenario& scenario);

/// Which M values enter the maximum of a table cell.
struct MGrid {
  enum class Kind { deciles, integers } kind = Kind::deciles;
  int first_decile = 2;  ///< deciles: M = i K / 10 for i = first_decile..10

  std::vector<double> values(int K) const;
};

/// Header: table,lambda_mult,K,max_rel_error_pct,argmax_M
/// Tables (nu = mu = 1, K in {10, ..., 50}):
///  1 fluid point with inflow lambda ^ nu K       (lambda = K, 1.2K)
///  2 fluid point with inflow lambda (1 - B)      (lambda = 0.8K, K, 1.2K)
///  3 full-lot mean with K -> lambda (1 - B)      (same rows)
///  4 overloaded diffusion with K -> lambda (1 - B)
/// Each cell is the largest |E[Z] - approx| / E[Z] in percent over the grid.
Table cmd_tables(int table_id, const MGrid& grid = {}, unsigned threads = 0);

struct SweepOptions {
  int K = 10;
  double lambda_mult = 1.0;
  double nu = 1.0;
  double mu = 1.0;
  unsigned threads = 0;
};

/// Header: M,M_over_K,exact,upper,lower_erlang_a,lower_full_lot,modified_lower,
///         fluid_modified,diffusion_modified
/// Success probabilities for integer M = 1..K with lambda = lambda_mult K.
/// Bounds and approximations are clipped to [0, 1].
Table cmd_sweep(const SweepOptions& options);

/// Header: mode,E_Z,E_Q,P_s,P_block,hw_E_Z,hw_E_Q,hw_P_s,hw_P_block,reps
Table cmd_simulate(const ModelParams& params, const SimConfig& config);

/// Header: scaling,n,statistic,limit,error
Table cmd_converge(const ModelParams& base, Scaling scaling, std::span<const int> n_list,
                   const ConvergenceConfig& config);

}  // namespace evcharge::cli
