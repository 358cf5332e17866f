#include <doctest.h>

#include <cmath>
#include <vector>

#include "evcharge/closed_form.hpp"
#include "evcharge/errors.hpp"
#include "evcharge/exact.hpp"
#include "evcharge/simulation.hpp"

using namespace evcharge;

namespace {

SimConfig config(double horizon, int reps, std::uint64_t seed = 1) {
  SimConfig c;
  c.horizon = horizon;
  c.burn_in = 50.0;
  c.n_reps = reps;
  c.seed = seed;
  return c;
}

// |a - b| within k half-widths, with a small floor for degenerate widths.
bool within(double estimate, double truth, double half_width, double k = 4.0) {
  return std::abs(estimate - truth) <= k * half_width + 1e-9;
}

}  // namespace

TEST_SUITE("simulation") {
  TEST_CASE("configuration is validated") {
    SimConfig c;
    c.burn_in = c.horizon;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = SimConfig{};
    c.n_reps = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = SimConfig{};
    c.burn_in = -1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK_NOTHROW(SimConfig{}.validate());
    CHECK_THROWS_AS(simulate_model({1.0, 1.0, 1.0, Spaces::infinite(), 1.0}, config(100, 2)),
                    UnsupportedError);
  }

  TEST_CASE("no arrivals leaves the lot empty") {
    const SimEstimate e = simulate_model({0.0, 1.0, 1.0, Spaces::finite(5), 2.0}, config(100, 3));
    CHECK(e.e_q == 0.0);
    CHECK(e.e_z == 0.0);
    CHECK_FALSE(e.p_success.has_value());
    CHECK(e.reps_used == 3);
  }

  TEST_CASE("single-space chain agrees with the exact solution") {
    const ModelParams p{1.0, 1.0, 1.0, Spaces::finite(1), 1.0};
    const Metrics m = metrics(solve_stationary(p), p);
    const SimEstimate e = simulate_model(p, config(2000, 20));
    CHECK(within(e.e_q, m.e_q, e.half_widths.e_q));
    CHECK(within(e.e_z, m.e_z, e.half_widths.e_z));
    CHECK(within(e.p_block, m.p_block, e.half_widths.p_block));
    REQUIRE(e.p_success.has_value());
    CHECK(within(*e.p_success, *m.p_success, e.half_widths.p_success));
  }

  TEST_CASE("enough power gives success probability mu/(nu+mu)") {
    const ModelParams p{8.0, 1.0, 1.0, Spaces::finite(10), 10.0};
    const SimEstimate e = simulate_model(p, config(1000, 20));
    REQUIRE(e.p_success.has_value());
    CHECK(within(*e.p_success, 0.5, e.half_widths.p_success));
    CHECK(within(e.p_block, erlang_b(8.0, 10), e.half_widths.p_block));
  }

  TEST_CASE("moderate chain agrees with the exact solution") {
    const ModelParams p{12.0, 1.0, 1.0, Spaces::finite(10), 3.0};
    const Metrics m = metrics(solve_stationary(p), p);
    const SimEstimate e = simulate_model(p, config(1000, 20, 17));
    CHECK(within(e.e_q, m.e_q, e.half_widths.e_q));
    CHECK(within(e.e_z, m.e_z, e.half_widths.e_z));
    CHECK(e.half_widths.e_z > 0.0);
    CHECK(e.half_widths.e_z < 0.2);
  }

  TEST_CASE("full-lot simulation") {
    SimConfig c = config(1000, 20);
    c.mode = SimMode::full_lot;
    const ModelParams enough{1.0, 1.0, 1.0, Spaces::finite(10), 10.0};
    const SimEstimate a = simulate(enough, c);
    CHECK(a.e_q == doctest::Approx(10.0));
    CHECK(a.p_block == 1.0);
    CHECK(within(a.e_z, 5.0, a.half_widths.e_z));

    const ModelParams tight{1.0, 1.0, 1.0, Spaces::finite(10), 2.0};
    const SimEstimate b = simulate(tight, c);
    CHECK(within(b.e_z, dist_full_lot(tight).mean(), b.half_widths.e_z));
    REQUIRE(b.p_success.has_value());
    CHECK(within(*b.p_success, 1.0 - dist_full_lot(tight).mean() / 10.0, b.half_widths.p_success));
  }

  TEST_CASE("one replication gives infinite half-widths") {
    const SimEstimate e = simulate_model({2.0, 1.0, 1.0, Spaces::finite(3), 1.0}, config(200, 1));
    CHECK(std::isinf(e.half_widths.e_z));
  }

  TEST_CASE("runs are reproducible and thread-count independent") {
    const ModelParams p{6.0, 1.0, 1.0, Spaces::finite(8), 2.0};
    SimConfig c = config(300, 6, 123);
    c.threads = 1;
    const SimEstimate a = simulate_model(p, c);
    c.threads = 3;
    const SimEstimate b = simulate_model(p, c);
    CHECK(a.e_z == b.e_z);
    CHECK(a.e_q == b.e_q);
    CHECK(a.half_widths.e_z == b.half_widths.e_z);
    c.seed = 124;
    CHECK(simulate_model(p, c).e_z != a.e_z);

    const ReplicationStats r1 = simulate_replication(p, c, 2);
    const ReplicationStats r2 = simulate_replication(p, c, 2);
    CHECK(r1.events == r2.events);
    CHECK(r1.mean_z == r2.mean_z);
    CHECK(r1.mean_z2 >= r1.mean_z * r1.mean_z);
  }

  TEST_CASE("trace visits only valid states through valid moves") {
    const ModelParams p{6.0, 1.0, 1.0, Spaces::finite(5), 2.0};
    const auto trace = trace_model(p, 100.0, 5);
    REQUIRE(trace.size() > 100);
    CHECK(trace.front().q == 0);
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const auto& s = trace[i];
      CHECK(0 <= s.z);
      CHECK(s.z <= s.q);
      CHECK(s.q <= 5);
      if (i == 0) continue;
      const auto& prev = trace[i - 1];
      CHECK(s.time >= prev.time);
      const int dq = s.q - prev.q, dz = s.z - prev.z;
      const bool arrival = dq == 1 && dz == 1;
      const bool uncharged_departure = dq == -1 && dz == -1;
      const bool charged_departure = dq == -1 && dz == 0;
      const bool completion = dq == 0 && dz == -1;
      CHECK((arrival || uncharged_departure || charged_departure || completion));
    }
  }

  TEST_CASE("sampled paths") {
    const ModelParams p{6.0, 1.0, 1.0, Spaces::finite(5), 2.0};
    const std::vector<double> t{0.0, 1.0, 2.0, 5.0};
    const auto z = sample_z_path(p, 5, 5, t, 3, 0);
    REQUIRE(z.size() == 4);
    CHECK(z[0] == 5.0);
    for (double v : z) CHECK((v >= 0.0 && v <= 5.0));
    CHECK(sample_z_path(p, 5, 5, t, 3, 0) == z);
  }

  TEST_CASE("scaling tags and convergence arguments") {
    CHECK(parse_scaling("fluid") == Scaling::fluid);
    CHECK(parse_scaling("hw") == Scaling::hw);
    CHECK(parse_scaling("overloaded") == Scaling::overloaded);
    CHECK(parse_scaling("smallnu") == Scaling::smallnu);
    CHECK(std::string(to_string(Scaling::hw)) == "hw");
    CHECK_THROWS_AS(parse_scaling("diffusion"), ValidationError);

    const ModelParams p{8.0, 1.0, 1.0, Spaces::finite(10), 5.0};
    ConvergenceConfig cfg;
    const std::vector<int> empty, decreasing{10, 5};
    CHECK_THROWS_AS(convergence_experiment(p, Scaling::fluid, empty, cfg), ValidationError);
    CHECK_THROWS_AS(convergence_experiment(p, Scaling::fluid, decreasing, cfg), ValidationError);
  }

  TEST_CASE("fluid convergence error shrinks with n") {
    const ModelParams p{8.0, 1.0, 1.0, Spaces::finite(10), 5.0};
    ConvergenceConfig cfg;
    cfg.sim.n_reps = 40;
    cfg.fluid_z0 = 2.0;
    const std::vector<int> ns{1, 20};
    const auto rows = convergence_experiment(p, Scaling::fluid, ns, cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 1);
    CHECK(rows[1].error < rows[0].error);
    CHECK(rows[1].error < 0.1);
  }
}
