#include "evcharge/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace evcharge {

double MarginalDist::mean() const {
  double m = 0.0;
  for (std::size_t z = 0; z < probs.size(); ++z) m += static_cast<double>(z) * probs[z];
  return m;
}

namespace {

// Normalizes log-weights into probabilities (log-sum-exp).
std::vector<double> normalize_log(const std::vector<double>& logw) {
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<double> out(logw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    out[i] = std::exp(logw[i] - top);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

// Product-form weights of a birth-death chain on 0..n from the one-step ratios
// w(z+1)/w(z) = ratio(z), kept as log|w| plus sign so that signed ratios
// (capacity below the support) survive without overflow.
std::vector<double> signed_product_form(int n, const std::function<double(int)>& ratio) {
  std::vector<double> logw(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> sign(static_cast<std::size_t>(n + 1), 1);
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  for (int z = 0; z < n; ++z) {
    const auto i = static_cast<std::size_t>(z);
    const double r = ratio(z);
    if (r == 0.0 || logw[i] == neg_inf) {
      logw[i + 1] = neg_inf;
      sign[i + 1] = 1;
      continue;
    }
    logw[i + 1] = logw[i] + std::log(std::abs(r));
    sign[i + 1] = sign[i] * (r < 0.0 ? -1 : 1);
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = logw[i] == neg_inf ? 0.0 : sign[i] * std::exp(logw[i] - top);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

}  // namespace

double erlang_b(double a, int servers) {
  if (a < 0.0) throw DomainError("erlang_b: negative offered load");
  if (servers < 0) throw DomainError("erlang_b: negative number of servers");
  double b = 1.0;
  for (int k = 1; k <= servers; ++k) b = a * b / (k + a * b);
  return b;
}

std::vector<double> erlang_loss_distribution(double a, int servers) {
  if (a < 0.0) throw DomainError("erlang_loss_distribution: negative offered load");
  if (servers < 0) throw DomainError("erlang_loss_distribution: negative number of servers");
  std::vector<double> out(static_cast<std::size_t>(servers + 1), 0.0);
  if (a == 0.0) {
    out[0] = 1.0;
    return out;
  }
  std::vector<double> logw(out.size());
  for (int q = 0; q <= servers; ++q) {
    logw[static_cast<std::size_t>(q)] = q * std::log(a) - std::lgamma(q + 1.0);
  }
  return normalize_log(logw);
}

double expected_occupancy(const ModelParams& raw) {
  const ModelParams params = validate(raw);
  const double a = params.lambda / params.nu;
  if (!params.spaces.is_finite()) return a;
  return a * (1.0 - erlang_b(a, params.K()));
}

JointDist dist_enough_power(const ModelParams& raw) {
  const ModelParams params = validate(raw);
  const int K = params.K();
  if (params.power != static_cast<double>(K)) {
    throw DomainError("dist_enough_power: requires M == K");
  }
  const auto pq = erlang_loss_distribution(params.lambda / params.nu, K);
  const double p_unc = params.nu / (params.nu + params.mu);
  const double log_unc = std::log(p_unc);
  const double log_chg = std::log1p(-p_unc);

  JointDist dist;
  dist.K = K;
  dist.probs.reserve(StateIndex(K).size());
  for (int q = 0; q <= K; ++q) {
    for (int z = 0; z <= q; ++z) {
      const double log_binom =
          std::lgamma(q + 1.0) - std::lgamma(z + 1.0) - std::lgamma(q - z + 1.0);
      dist.probs.push_back(pq[static_cast<std::size_t>(q)] *
                           std::exp(log_binom + z * log_unc + (q - z) * log_chg));
    }
  }
  return dist;
}

MarginalDist dist_infinite_spaces(const ModelParams& raw, double tail_eps) {
  const ModelParams params = validate(raw);
  if (params.spaces.is_finite()) {
    throw DomainError("dist_infinite_spaces: requires K = infinity");
  }
  if (!(tail_eps > 0.0)) throw DomainError("dist_infinite_spaces: tail_eps must be positive");

  MarginalDist out;
  if (params.lambda == 0.0) {
    out.probs = {1.0};
    return out;
  }
  const double M = params.power;
  auto ratio = [&](int z) {  // w(z) / w(z-1)
    return params.lambda / (params.nu * z + params.mu * std::min(static_cast<double>(z), M));
  };

  // Grow the support in log space until the geometric tail bound of the
  // discarded mass, relative to the kept mass, drops below tail_eps.
  std::vector<double> logw{0.0};
  double log_total = 0.0;
  for (int z = 1;; ++z) {
    logw.push_back(logw.back() + std::log(ratio(z)));
    const double hi = std::max(log_total, logw.back());
    log_total = hi + std::log1p(std::exp(std::min(log_total, logw.back()) - hi));
    // ratio() is decreasing in z, so the tail is dominated by a geometric series.
    const double r = ratio(z + 1);
    if (r < 1.0) {
      const double bound = std::exp(logw.back() - log_total) * r / (1.0 - r);
      if (bound < tail_eps) {
        out.tail_bound = bound;
        break;
      }
    }
  }
  out.probs = normalize_log(logw);
  return out;
}

MarginalDist dist_full_lot(const ModelParams& raw) {
  const ModelParams params = validate(raw);
  const int K = params.K();
  const double K_real = K;
  MarginalDist out;
  out.probs = signed_product_form(K, [&](int z) {
    return params.nu * (K_real - z) / (params.mu * std::min(z + 1.0, params.power));
  });
  return out;
}

double full_lot_mean_with_capacity(const ModelParams& raw, double capacity) {
  const ModelParams params = validate(raw);
  const int K = params.K();
  const auto w = signed_product_form(K, [&](int z) {
    return params.nu * (capacity - z) / (params.mu * std::min(z + 1.0, params.power));
  });
  double m = 0.0;
  for (int z = 0; z <= K; ++z) m += z * w[static_cast<std::size_t>(z)];
  return m;
}

double modified_full_lot_mean(const ModelParams& params) {
  return full_lot_mean_with_capacity(params, expected_occupancy(params));
}

SuccessBounds success_bounds(const ModelParams& raw) {
  const ModelParams params = validate(raw);
  if (params.lambda == 0.0) {
    throw DomainError("success_bounds: lambda = 0 leaves the success probability undefined");
  }
  const int K = params.K();
  SuccessBounds b;
  b.upper = params.mu / (params.nu + params.mu);

  ModelParams unlimited = params;
  unlimited.spaces = Spaces::infinite();
  b.lower_erlang_a =
      1.0 - dist_infinite_spaces(unlimited).mean() / (params.lambda / params.nu);

  const double e_q = expected_occupancy(params);
  ModelParams full = params;
  full.spaces = Spaces::finite(K);
  b.lower_full_lot = (e_q - dist_full_lot(full).mean()) / e_q;
  b.modified_lower = (e_q - modified_full_lot_mean(params)) / e_q;
  return b;
}

}  // namespace evcharge
