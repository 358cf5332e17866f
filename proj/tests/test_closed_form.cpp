#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "evcharge/closed_form.hpp"
#include "evcharge/exact.hpp"
#include "oracles.hpp"

using namespace evcharge;

namespace {

ModelParams make(double lambda, int K, double M, double mu = 1.0, double nu = 1.0) {
  return {lambda, mu, nu, Spaces::finite(K), M};
}

ModelParams unlimited(double lambda, double M, double mu = 1.0, double nu = 1.0) {
  return {lambda, mu, nu, Spaces::infinite(), M};
}

}  // namespace

TEST_SUITE("closed_form") {
  TEST_CASE("Erlang-B") {
    CHECK(erlang_b(3.0, 0) == 1.0);
    CHECK(erlang_b(1.0, 1) == doctest::Approx(0.5));
    CHECK(erlang_b(2.0, 2) == doctest::Approx(0.4));
    CHECK(erlang_b(10.0, 10) == doctest::Approx(oracle::erlang_loss(10.0, 10).back()).epsilon(1e-12));
    // Large loads stay finite where a^K / K! would overflow.
    CHECK(erlang_b(900.0, 1000) > 0.0);
    CHECK(erlang_b(900.0, 1000) < 1.0);
    CHECK_THROWS_AS(erlang_b(-1.0, 3), DomainError);
  }

  TEST_CASE("Erlang loss distribution") {
    const auto d = erlang_loss_distribution(4.0, 7);
    const auto ref = oracle::erlang_loss(4.0, 7);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    CHECK(erlang_loss_distribution(0.0, 3)[0] == 1.0);
  }

  TEST_CASE("enough power: three-state chain and Binomial conditional law") {
    const JointDist d = dist_enough_power(make(1, 1, 1));
    CHECK(d.at({0, 0}) == doctest::Approx(0.5));
    CHECK(d.at({1, 0}) == doctest::Approx(0.25));
    CHECK(d.at({1, 1}) == doctest::Approx(0.25));

    const ModelParams p = make(7, 8, 8, 1.5, 0.5);
    const JointDist j = dist_enough_power(p);
    const auto pq = j.q_marginal();
    const auto erl = oracle::erlang_loss(7 / 0.5, 8);
    for (int q = 0; q <= 8; ++q) {
      CHECK(pq[q] == doctest::Approx(erl[q]).epsilon(1e-12));
      for (int z = 0; z <= q; ++z) {
        CHECK(j.at({q, z}) / pq[q] ==
              doctest::Approx(oracle::binomial_pmf(q, z, 0.5 / 2.0)).epsilon(1e-10));
      }
    }
    CHECK_THROWS_AS(dist_enough_power(make(4, 5, 4)), DomainError);
  }

  TEST_CASE("enough power matches the linear solve") {
    for (int K : {1, 5, 10, 20}) {
      for (double mult : {0.8, 1.0, 1.2}) {
        const ModelParams p = make(mult * K, K, K);
        const auto a = dist_enough_power(p).probs;
        const auto b = solve_stationary(p).probs;
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        CHECK(worst <= 1e-10);
      }
    }
  }

  TEST_CASE("infinite spaces: ratios, Poisson limit and tail bound") {
    const MarginalDist d = dist_infinite_spaces(unlimited(1, 1));
    CHECK(d.at(1) / d.at(0) == doctest::Approx(0.5));
    CHECK(d.at(2) / d.at(1) == doctest::Approx(1.0 / 3.0));
    CHECK(d.tail_bound < 1e-12);

    // With M above the support only the first branch acts: Poisson(lambda/(nu+mu)).
    const MarginalDist pois = dist_infinite_spaces(unlimited(3, 1000));
    const double a = 3.0 / 2.0;
    for (int z = 0; z <= 10; ++z) {
      CHECK(pois.at(z) ==
            doctest::Approx(std::exp(-a + z * std::log(a) - std::lgamma(z + 1.0))).epsilon(1e-10));
    }
    CHECK(pois.mean() == doctest::Approx(a).epsilon(1e-10));

    double total = 0.0;
    for (double p : d.probs) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const MarginalDist none = dist_infinite_spaces(unlimited(0, 2));
    CHECK(none.mean() == 0.0);
    CHECK_THROWS_AS(dist_infinite_spaces(make(1, 3, 1)), DomainError);
  }

  TEST_CASE("infinite spaces agrees with a long finite birth-death chain") {
    // lambda > mu M keeps the chain stable only through the nu z term.
    const double lambda = 6.0, M = 2.0, mu = 1.0, nu = 0.5;
    const auto ref = oracle::birth_death(
        80, [&](int) { return lambda; },
        [&](int z) { return nu * z + mu * std::min<double>(z, M); });
    const MarginalDist d = dist_infinite_spaces(unlimited(lambda, M, mu, nu));
    for (int z = 0; z <= 30; ++z) CHECK(d.at(z) == doctest::Approx(ref[z]).epsilon(1e-9));
  }

  TEST_CASE("full lot") {
    // M = K: Ehrenfest chain, Binomial(K, nu/(nu+mu)).
    const MarginalDist e = dist_full_lot(make(1, 12, 12, 2.0, 1.0));
    for (int z = 0; z <= 12; ++z) {
      CHECK(e.at(z) == doctest::Approx(oracle::binomial_pmf(12, z, 1.0 / 3.0)).epsilon(1e-10));
    }
    const MarginalDist half = dist_full_lot(make(1, 10, 10));
    CHECK(half.mean() == doctest::Approx(5.0));

    const MarginalDist small = dist_full_lot(make(1, 2, 1));
    CHECK(small.at(0) == doctest::Approx(1.0 / 5.0));
    CHECK(small.at(1) == doctest::Approx(2.0 / 5.0));
    CHECK(small.at(2) == doctest::Approx(2.0 / 5.0));

    // Detailed balance against a brute-force solve at K = 5, M = 2.
    const ModelParams p = make(1, 5, 2, 1.7, 0.6);
    const MarginalDist f = dist_full_lot(p);
    const auto ref = oracle::birth_death(
        5, [&](int z) { return 0.6 * (5 - z); }, [&](int z) { return 1.7 * std::min(z, 2); });
    for (int z = 0; z <= 5; ++z) {
      CHECK(f.at(z) == doctest::Approx(ref[z]).epsilon(1e-10));
      if (z < 5) CHECK(std::abs(0.6 * (5 - z) * f.at(z) - 1.7 * std::min(z + 1, 2) * f.at(z + 1)) < 1e-12);
    }
  }

  TEST_CASE("full lot with a large lot uses log-space products") {
    const MarginalDist f = dist_full_lot(make(1, 400, 30, 1.0, 1.0));
    double total = 0.0;
    for (double p : f.probs) {
      CHECK(std::isfinite(p));
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("modified full lot reduces to the plain mean when the capacity is K") {
    const ModelParams p = make(9, 10, 4);
    CHECK(full_lot_mean_with_capacity(p, 10.0) == doctest::Approx(dist_full_lot(p).mean()).epsilon(1e-12));
    // The expected occupancy replaces K.
    const double keff = expected_occupancy(p);
    CHECK(keff == doctest::Approx(9.0 * (1.0 - erlang_b(9.0, 10))));
    CHECK(modified_full_lot_mean(p) == doctest::Approx(full_lot_mean_with_capacity(p, keff)));
  }

  TEST_CASE("bounds sandwich the exact success probability") {
    for (int K : {5, 10}) {
      for (double mult : {0.8, 1.0, 1.2}) {
        for (double M : {1.0, 0.5 * K, static_cast<double>(K)}) {
          const ModelParams p = make(mult * K, K, M);
          const SuccessBounds b = success_bounds(p);
          const double ps = *metrics(solve_stationary(p), p).p_success;
          CHECK(b.upper == doctest::Approx(0.5));
          CHECK(b.lower_erlang_a <= ps + 1e-12);
          CHECK(ps <= b.upper + 1e-12);
          CHECK(b.lower_full_lot <= ps + 1e-12);
        }
      }
    }
    CHECK_THROWS_AS(success_bounds(make(0, 5, 2)), DomainError);
  }
}
