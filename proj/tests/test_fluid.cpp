#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "evcharge/closed_form.hpp"
#include "evcharge/fluid.hpp"

using namespace evcharge;

namespace {

ModelParams make(double lambda, int K, double M, double mu = 1.0, double nu = 1.0) {
  return {lambda, mu, nu, Spaces::finite(K), M};
}

std::vector<double> grid(double end, int n) {
  std::vector<double> t;
  for (int i = 0; i <= n; ++i) t.push_back(end * i / n);
  return t;
}

}  // namespace

TEST_SUITE("fluid") {
  TEST_CASE("fixed points of the two regimes") {
    const FluidResult below = fluid_fixed_point(make(8, 10, 5));
    CHECK(below.z_star == doctest::Approx(4.0));
    CHECK(below.regime == FluidRegime::below_M);

    const FluidResult above = fluid_fixed_point(make(12, 10, 2));
    CHECK(above.effective_arrival == doctest::Approx(10.0));
    CHECK(above.z_star == doctest::Approx(8.0));
    CHECK(above.regime == FluidRegime::above_M);

    const FluidResult edge = fluid_fixed_point(make(10, 10, 5));
    CHECK(edge.regime == FluidRegime::boundary);
    CHECK(edge.z_star == doctest::Approx(5.0));

    for (double lambda : {1.0, 5.0, 10.0, 30.0}) {
      CHECK(fluid_fixed_point(make(lambda, 10, 10)).regime == FluidRegime::below_M);
    }
  }

  TEST_CASE("fixed-point residual and uniqueness over a parameter grid") {
    for (double lambda : {0.5, 4.0, 9.0, 12.0, 25.0}) {
      for (double mu : {0.3, 1.0, 2.5}) {
        for (double nu : {0.2, 1.0, 3.0}) {
          for (double M : {0.5, 2.0, 5.0, 10.0}) {
            const ModelParams p = make(lambda, 10, M, mu, nu);
            for (const FluidResult& r : {fluid_fixed_point(p), modified_fluid_fixed_point(p)}) {
              CHECK(std::abs(fixed_point_residual(r, p)) <= 1e-12 * std::max(1.0, r.z_star));
              CHECK(r.z_star >= 0.0);
              CHECK(r.z_star <= 10.0);
              const double z1 = r.effective_arrival / (nu + mu);
              const double z2 = (r.effective_arrival - mu * M) / nu;
              // Exactly one branch is self-consistent unless both meet at M.
              const bool first = z1 <= M, second = z2 > M;
              CHECK(first != second);
            }
          }
        }
      }
    }
  }

  TEST_CASE("modified inflow") {
    const ModelParams p = make(10, 10, 10);
    CHECK(modified_fluid_fixed_point(p).effective_arrival ==
          doctest::Approx(10.0 * (1.0 - erlang_b(10.0, 10))));
    // Large K: the Erlang-B correction vanishes and the plain point returns.
    const ModelParams big = make(50, 400, 20);
    CHECK(modified_fluid_fixed_point(big).z_star ==
          doctest::Approx(fluid_fixed_point(big).z_star).epsilon(1e-12));
  }

  TEST_CASE("success probability branches") {
    CHECK(fluid_success_prob(fluid_fixed_point(make(8, 10, 5)), make(8, 10, 5)) == doctest::Approx(0.5));
    CHECK(fluid_success_prob(fluid_fixed_point(make(12, 10, 2)), make(12, 10, 2)) ==
          doctest::Approx(0.2));
    // Continuity where z1 = M.
    const ModelParams p = make(10, 10, 5);
    FluidResult r = fluid_fixed_point(p);
    const double at_boundary = fluid_success_prob(r, p);
    r.regime = FluidRegime::above_M;
    CHECK(fluid_success_prob(r, p) == doctest::Approx(at_boundary));
    r.effective_arrival = 0.0;
    CHECK_THROWS_AS(fluid_success_prob(r, p), DomainError);
  }

  TEST_CASE("full-lot fluid point") {
    CHECK(full_lot_fluid(make(1, 10, 5)) == doctest::Approx(5.0));
    CHECK(full_lot_fluid(make(1, 10, 2)) == doctest::Approx(8.0));
    for (double M : {1.0, 3.0, 6.0, 10.0}) {
      const ModelParams p = make(1, 10, M, 1.3, 0.7);
      const double zf = full_lot_fluid(p);
      CHECK(1.3 * std::min(zf, M) == doctest::Approx(0.7 * (10 - zf)).epsilon(1e-12));
    }
  }

  TEST_CASE("trajectory: closed form, invariance and crossing") {
    const ModelParams p = make(8, 10, 5);
    const auto t = grid(3.0, 30);
    const auto z = fluid_trajectory(p, 0.0, t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(z[i] == doctest::Approx(4.0 * (1.0 - std::exp(-2.0 * t[i]))).epsilon(1e-12));
    }
    for (double zs : fluid_trajectory(p, 4.0, t)) CHECK(zs == doctest::Approx(4.0));

    // Starting above M with the target below: one crossing, then the fast branch.
    const ModelParams q = make(6, 10, 2, 1.0, 1.0);
    const auto tt = grid(10.0, 200);
    const auto exact = fluid_trajectory(q, 10.0, tt);
    const auto rk4 = fluid_trajectory_rk4(q, 10.0, tt);
    for (std::size_t i = 0; i < tt.size(); ++i) CHECK(exact[i] == doctest::Approx(rk4[i]).epsilon(1e-8));

    CHECK_THROWS_AS(fluid_trajectory(p, -0.1, t), DomainError);
    CHECK_THROWS_AS(fluid_trajectory(p, 10.5, t), DomainError);
  }

  TEST_CASE("trajectory converges to z* from random starts and stays in [0, K]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const double lambda = 1.0 + 20.0 * u(rng);
      const double nu = 0.2 + 2.0 * u(rng);
      const double mu = 0.2 + 2.0 * u(rng);
      const double M = 0.5 + 9.5 * u(rng);
      const ModelParams p = make(lambda, 10, M, mu, nu);
      const double z0 = 10.0 * u(rng);
      const double horizon = 50.0 / std::min(nu, mu);
      const std::vector<double> t{0.0, 0.25 * horizon, horizon};
      const auto z = fluid_trajectory(p, z0, t);
      CHECK(std::abs(z.back() - fluid_fixed_point(p).z_star) <= 1e-8);
      const auto path = fluid_trajectory(p, z0, grid(horizon, 400));
      double prev_gap = INFINITY;
      const double zs = fluid_fixed_point(p).z_star;
      for (double v : path) {
        CHECK(v >= 0.0);
        CHECK(v <= 10.0);
        // Monotone approach: the gap never grows.
        CHECK(std::abs(v - zs) <= prev_gap + 1e-12);
        prev_gap = std::abs(v - zs);
      }
    }
  }
}
