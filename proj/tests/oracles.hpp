#pragma once

// Independent reference computations shared by the tests.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "evcharge/params.hpp"

namespace oracle {

// Rate of the jump (q, z) -> (q2, z2), written out case by case.
inline double rate(const evcharge::ModelParams& p, int q, int z, int q2, int z2) {
  const int K = p.K();
  if (q2 == q + 1 && z2 == z + 1 && q < K) return p.lambda;
  if (q2 == q - 1 && z2 == z - 1) return p.nu * z;
  if (q2 == q - 1 && z2 == z) return p.nu * (q - z);
  if (q2 == q && z2 == z - 1) return p.mu * std::min<double>(z, p.power);
  return 0.0;
}

// Stationary law as the normalized kernel of the dense transposed generator.
inline std::vector<double> dense_stationary(const evcharge::ModelParams& p) {
  const auto states = evcharge::enumerate_states(p.spaces);
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto a = states[static_cast<std::size_t>(i)];
      const auto b = states[static_cast<std::size_t>(j)];
      G(i, j) = rate(p, a.q, a.z, b.q, b.z);
      G(i, i) -= G(i, j);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G.transpose());
  Eigen::VectorXd v = lu.kernel().col(0);
  v /= v.sum();
  return {v.data(), v.data() + n};
}

// Stationary law of a birth-death chain on 0..n from its rates by dense solve.
template <class Birth, class Death>
std::vector<double> birth_death(int n, Birth birth, Death death) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    if (i < n) G(i, i + 1) = birth(i);
    if (i > 0) G(i, i - 1) = death(i);
    G(i, i) = -(G.row(i).sum());
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G.transpose());
  Eigen::VectorXd v = lu.kernel().col(0);
  v /= v.sum();
  return {v.data(), v.data() + n + 1};
}

inline double binomial_pmf(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                  k * std::log(p) + (n - k) * std::log1p(-p));
}

// Erlang loss law by direct summation of a^q / q!.
inline std::vector<double> erlang_loss(double a, int K) {
  std::vector<double> w(static_cast<std::size_t>(K + 1));
  double term = 1.0, total = 0.0;
  for (int q = 0; q <= K; ++q) {
    if (q > 0) term *= a / q;
    w[static_cast<std::size_t>(q)] = term;
    total += term;
  }
  for (double& x : w) x /= total;
  return w;
}

}  // namespace oracle
