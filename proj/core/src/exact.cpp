#include "evcharge/exact.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace evcharge {

double Generator::rate(std::size_t from, std::size_t to) const {
  if (from == to) return -outflow.at(from);
  auto it = std::lower_bound(transitions.begin(), transitions.end(), Transition{from, to, 0.0},
                             [](const Transition& a, const Transition& b) {
                               return a.from != b.from ? a.from < b.from : a.to < b.to;
                             });
  if (it != transitions.end() && it->from == from && it->to == to) return it->rate;
  return 0.0;
}

double Generator::row_sum(std::size_t row) const {
  double s = -outflow.at(row);
  for (const auto& t : transitions) {
    if (t.from == row) s += t.rate;
  }
  return s;
}

double Generator::residual(const std::vector<double>& pi) const {
  std::vector<double> flow(dimension, 0.0);
  for (std::size_t i = 0; i < dimension; ++i) flow[i] = -pi[i] * outflow[i];
  for (const auto& t : transitions) flow[t.to] += pi[t.from] * t.rate;
  double worst = 0.0;
  for (double f : flow) worst = std::max(worst, std::abs(f));
  return worst;
}

Generator build_generator(const ModelParams& raw) {
  const ModelParams params = validate(raw);
  if (!params.spaces.is_finite()) {
    throw UnsupportedError("build_generator: the (Q, Z) generator requires finite K");
  }
  const int K = params.K();
  const StateIndex idx(K);

  Generator gen;
  gen.K = K;
  gen.dimension = idx.size();
  gen.outflow.assign(gen.dimension, 0.0);
  gen.transitions.reserve(4 * gen.dimension);

  for (int q = 0; q <= K; ++q) {
    for (int z = 0; z <= q; ++z) {
      const std::size_t from = idx.index({q, z});
      auto add = [&](State to, double r) {
        if (r <= 0.0) return;
        gen.transitions.push_back({from, idx.index(to), r});
        gen.outflow[from] += r;
      };
      // Targets in increasing index order keeps transitions sorted.
      if (z > 0) add({q - 1, z - 1}, params.nu * z);
      if (q > z) add({q - 1, z}, params.nu * (q - z));
      if (z > 0) add({q, z - 1}, params.mu * allocation(z, params.power));
      if (q < K) add({q + 1, z + 1}, params.lambda);
    }
  }
  return gen;
}

namespace {

std::vector<double> solve_direct(const Generator& gen) {
  const auto n = static_cast<Eigen::Index>(gen.dimension);
  const Eigen::Index last = n - 1;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(gen.transitions.size() + 2 * gen.dimension);
  // A = G^T with the last balance equation replaced by sum(pi) = 1.
  for (const auto& t : gen.transitions) {
    const auto row = static_cast<Eigen::Index>(t.to);
    if (row != last) trips.emplace_back(row, static_cast<Eigen::Index>(t.from), t.rate);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != last) trips.emplace_back(i, i, -gen.outflow[static_cast<std::size_t>(i)]);
    trips.emplace_back(last, i, 1.0);
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("stationary_distribution: sparse LU factorization failed", INFINITY);
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(last) = 1.0;
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("stationary_distribution: sparse LU solve failed", INFINITY);
  }
  return {x.data(), x.data() + n};
}

std::vector<double> solve_power(const Generator& gen, const SolveOptions& opt) {
  const std::size_t n = gen.dimension;
  const double unif = *std::max_element(gen.outflow.begin(), gen.outflow.end()) + 1.0;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) next[i] = pi[i] * (1.0 - gen.outflow[i] / unif);
    for (const auto& t : gen.transitions) next[t.to] += pi[t.from] * t.rate / unif;
    double diff = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff += std::abs(next[i] - pi[i]);
      total += next[i];
    }
    for (double& v : next) v /= total;
    pi.swap(next);
    if (diff < opt.iteration_tolerance) return pi;
  }
  return pi;
}

}  // namespace

JointDist stationary_distribution(const Generator& gen, const SolveOptions& options) {
  JointDist dist;
  dist.K = gen.K;
  if (gen.dimension == 1) {
    dist.probs = {1.0};
    return dist;
  }
  SolverKind kind = options.solver;
  if (kind == SolverKind::automatic) {
    kind = gen.K <= 200 ? SolverKind::direct : SolverKind::power_iteration;
  }
  dist.probs = kind == SolverKind::direct ? solve_direct(gen) : solve_power(gen, options);

  // Round-off can leave entries of order -1e-17; the support is every state.
  for (double& p : dist.probs) p = std::max(p, 0.0);
  const double total = std::accumulate(dist.probs.begin(), dist.probs.end(), 0.0);
  for (double& p : dist.probs) p /= total;

  const double res = gen.residual(dist.probs);
  if (!(res <= options.residual_tolerance)) {
    throw NumericalError("stationary_distribution: residual " + std::to_string(res) +
                             " exceeds tolerance",
                         res);
  }
  return dist;
}

JointDist solve_stationary(const ModelParams& raw, const SolveOptions& options) {
  const ModelParams params = validate(raw);
  if (!params.spaces.is_finite()) {
    throw UnsupportedError("solve_stationary: exact solution requires finite K");
  }
  if (params.lambda == 0.0) {
    JointDist dist;
    dist.K = params.K();
    dist.probs.assign(StateIndex(dist.K).size(), 0.0);
    dist.probs[0] = 1.0;
    return dist;
  }
  return stationary_distribution(build_generator(params), options);
}

Metrics metrics(const JointDist& dist, const ModelParams& params) {
  if (params.spaces.is_finite() && params.K() != dist.K) {
    throw DomainError("metrics: distribution and parameters disagree on K");
  }
  double e_q = 0.0;
  double e_z = 0.0;
  double p_block = 0.0;
  std::size_t i = 0;
  for (int q = 0; q <= dist.K; ++q) {
    for (int z = 0; z <= q; ++z, ++i) {
      const double p = dist.probs[i];
      e_q += q * p;
      e_z += z * p;
      if (q == dist.K) p_block += p;
    }
  }
  return make_metrics(e_q, e_z, p_block);
}

double relative_error(double exact, double approx) {
  if (exact == 0.0) throw DomainError("relative_error: exact value is zero");
  return std::abs(exact - approx) / std::abs(exact) * 100.0;
}

}  // namespace evcharge
