#include <doctest.h>

#include <cmath>
#include <set>

#include "evcharge/params.hpp"

using namespace evcharge;

namespace {

ModelParams make(double lambda, double mu, double nu, int K, double M) {
  return {lambda, mu, nu, Spaces::finite(K), M};
}

ValidationCode code_of(const ModelParams& p) {
  try {
    validate(p);
  } catch (const ValidationError& e) {
    return e.code();
  }
  FAIL("expected a validation error");
  return ValidationCode::bad_config;
}

}  // namespace

TEST_SUITE("params") {
  TEST_CASE("allocation caps the uncharged count at M") {
    CHECK(allocation(0, 5) == 0);
    CHECK(allocation(3, 5) == 3);
    CHECK(allocation(8, 5) == 5);
    CHECK(allocation(2, 1.5) == doctest::Approx(1.5));
    CHECK_THROWS_AS(allocation(-1, 5), DomainError);
    for (int z = 0; z < 20; ++z) {
      CHECK(allocation(z + 1, 7.5) >= allocation(z, 7.5));
      if (z <= 7) CHECK(allocation(z, 7.5) == z);
    }
  }

  TEST_CASE("enumerate_states is lexicographic and complete") {
    const auto k0 = enumerate_states(Spaces::finite(0));
    REQUIRE(k0.size() == 1);
    CHECK(k0[0] == State{0, 0});

    const auto k1 = enumerate_states(Spaces::finite(1));
    REQUIRE(k1.size() == 3);
    CHECK(k1[0] == State{0, 0});
    CHECK(k1[1] == State{1, 0});
    CHECK(k1[2] == State{1, 1});

    for (int K : {2, 7, 10, 33}) {
      const auto states = enumerate_states(Spaces::finite(K));
      CHECK(states.size() == static_cast<std::size_t>((K + 1) * (K + 2) / 2));
      std::set<std::pair<int, int>> seen;
      const StateIndex idx(K);
      for (std::size_t i = 0; i < states.size(); ++i) {
        const State s = states[i];
        CHECK(idx.contains(s));
        CHECK(idx.index(s) == i);
        CHECK(idx.state(i) == s);
        seen.insert({s.q, s.z});
      }
      CHECK(seen.size() == states.size());
    }
    CHECK(enumerate_states(Spaces::finite(10)).size() == 66);
    CHECK_THROWS_AS(enumerate_states(Spaces::infinite()), UnsupportedError);
  }

  TEST_CASE("validate accepts the model domain and names the violated invariant") {
    CHECK_NOTHROW(validate(make(1, 1, 1, 10, 5)));
    CHECK_NOTHROW(validate(make(0, 1, 1, 10, 5)));
    CHECK_NOTHROW(validate(make(1, 1, 1, 10, 2.5)));
    CHECK_NOTHROW(validate({1, 1, 1, Spaces::infinite(), 3}));
    CHECK(code_of(make(1, 1, 1, 10, 11)) == ValidationCode::power_exceeds_spaces);
    CHECK(code_of(make(1, 1, -1, 10, 5)) == ValidationCode::negative_rate);
    CHECK(code_of(make(-1, 1, 1, 10, 5)) == ValidationCode::negative_rate);
    CHECK(code_of(make(1, 0, 1, 10, 5)) == ValidationCode::zero_rate);
    CHECK(code_of(make(1, 1, 0, 10, 5)) == ValidationCode::zero_rate);
    CHECK(code_of(make(NAN, 1, 1, 10, 5)) == ValidationCode::non_finite_rate);
    CHECK(code_of(make(1, INFINITY, 1, 10, 5)) == ValidationCode::non_finite_rate);
    CHECK(code_of(make(1, 1, 1, 10, 0)) == ValidationCode::power_not_positive);
    CHECK(code_of(make(1, 1, 1, 0, 1)) == ValidationCode::spaces_not_positive);
    CHECK(code_of({1, 1, 1, Spaces::infinite(), INFINITY}) == ValidationCode::power_not_positive);
  }

  TEST_CASE("Spaces distinguishes the infinite marker") {
    CHECK(Spaces::finite(4).count() == 4);
    CHECK(Spaces::finite(4).as_real() == 4.0);
    CHECK_FALSE(Spaces::infinite().is_finite());
    CHECK(std::isinf(Spaces::infinite().as_real()));
    CHECK_THROWS_AS(Spaces::infinite().count(), UnsupportedError);
    CHECK(Spaces::finite(3) != Spaces::infinite());
  }

  TEST_CASE("make_metrics derives charged cars and success probability") {
    const Metrics m = make_metrics(0.5, 0.25, 0.5);
    CHECK(m.e_c == doctest::Approx(0.25));
    REQUIRE(m.p_success);
    CHECK(*m.p_success == doctest::Approx(0.5));
    CHECK_FALSE(make_metrics(0.0, 0.0, 0.0).p_success.has_value());
  }

  TEST_CASE("JointDist marginals") {
    JointDist d{1, {0.5, 0.25, 0.25}};
    CHECK(d.at({1, 1}) == 0.25);
    const auto q = d.q_marginal();
    const auto z = d.z_marginal();
    CHECK(q[0] == 0.5);
    CHECK(q[1] == 0.5);
    CHECK(z[0] == 0.75);
    CHECK(z[1] == 0.25);
  }
}
