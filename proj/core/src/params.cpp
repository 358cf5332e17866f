#include "evcharge/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace evcharge {

const char* to_string(ValidationCode code) noexcept {
  switch (code) {
    case ValidationCode::negative_rate: return "negative_rate";
    case ValidationCode::non_finite_rate: return "non_finite_rate";
    case ValidationCode::zero_rate: return "zero_rate";
    case ValidationCode::power_not_positive: return "power_not_positive";
    case ValidationCode::power_exceeds_spaces: return "power_exceeds_spaces";
    case ValidationCode::spaces_not_positive: return "spaces_not_positive";
    case ValidationCode::bad_config: return "bad_config";
  }
  return "unknown";
}

int Spaces::count() const {
  if (!finite_) throw UnsupportedError("infinitely many parking spaces have no finite count");
  return count_;
}

double Spaces::as_real() const noexcept {
  return finite_ ? static_cast<double>(count_) : std::numeric_limits<double>::infinity();
}

std::string ModelParams::describe() const {
  std::ostringstream os;
  os << "lambda=" << lambda << " mu=" << mu << " nu=" << nu << " K=";
  if (spaces.is_finite()) {
    os << spaces.count();
  } else {
    os << "inf";
  }
  os << " M=" << power;
  return os.str();
}

namespace {

void check_rate(const char* name, double value, bool zero_allowed) {
  if (!std::isfinite(value)) {
    throw ValidationError(ValidationCode::non_finite_rate, std::string(name) + " must be finite");
  }
  if (value < 0.0) {
    throw ValidationError(ValidationCode::negative_rate, std::string(name) + " must be nonnegative");
  }
  if (value == 0.0 && !zero_allowed) {
    throw ValidationError(ValidationCode::zero_rate, std::string(name) + " must be positive");
  }
}

}  // namespace

ModelParams validate(const ModelParams& params) {
  check_rate("lambda", params.lambda, true);
  check_rate("mu", params.mu, false);
  check_rate("nu", params.nu, false);
  if (params.spaces.is_finite() && params.spaces.count() <= 0) {
    throw ValidationError(ValidationCode::spaces_not_positive, "K must be a positive integer");
  }
  if (!std::isfinite(params.power) || params.power <= 0.0) {
    throw ValidationError(ValidationCode::power_not_positive, "M must be positive and finite");
  }
  if (params.power > params.spaces.as_real()) {
    throw ValidationError(ValidationCode::power_exceeds_spaces, "M must not exceed K");
  }
  return params;
}

double allocation(double z, double m) {
  if (z < 0.0) throw DomainError("allocation: negative number of uncharged cars");
  if (!(m > 0.0)) throw DomainError("allocation: power capacity must be positive");
  return std::min(z, m);
}

std::vector<State> enumerate_states(Spaces spaces) {
  const int K = spaces.count();
  if (K < 0) throw DomainError("enumerate_states: negative K");
  std::vector<State> out;
  out.reserve(static_cast<std::size_t>((K + 1) * (K + 2) / 2));
  for (int q = 0; q <= K; ++q) {
    for (int z = 0; z <= q; ++z) out.push_back({q, z});
  }
  return out;
}

StateIndex::StateIndex(int K) : K_(K) {
  if (K < 0) throw DomainError("StateIndex: negative K");
}

State StateIndex::state(std::size_t i) const {
  // Invert i = q(q+1)/2 + z.
  int q = static_cast<int>((std::sqrt(8.0 * static_cast<double>(i) + 1.0) - 1.0) / 2.0);
  while (static_cast<std::size_t>((q + 1) * (q + 2) / 2) <= i) ++q;
  while (static_cast<std::size_t>(q * (q + 1) / 2) > i) --q;
  return {q, static_cast<int>(i - static_cast<std::size_t>(q * (q + 1) / 2))};
}

double JointDist::at(State s) const {
  StateIndex idx(K);
  if (!idx.contains(s)) return 0.0;
  return probs.at(idx.index(s));
}

std::vector<double> JointDist::q_marginal() const {
  std::vector<double> out(static_cast<std::size_t>(K + 1), 0.0);
  std::size_t i = 0;
  for (int q = 0; q <= K; ++q) {
    for (int z = 0; z <= q; ++z) out[static_cast<std::size_t>(q)] += probs[i++];
  }
  return out;
}

std::vector<double> JointDist::z_marginal() const {
  std::vector<double> out(static_cast<std::size_t>(K + 1), 0.0);
  std::size_t i = 0;
  for (int q = 0; q <= K; ++q) {
    for (int z = 0; z <= q; ++z) out[static_cast<std::size_t>(z)] += probs[i++];
  }
  return out;
}

Metrics make_metrics(double e_q, double e_z, double p_block) {
  Metrics m;
  m.e_q = e_q;
  m.e_z = e_z;
  m.e_c = e_q - e_z;
  m.p_block = p_block;
  if (e_q > 0.0) m.p_success = 1.0 - e_z / e_q;
  return m;
}

}  // namespace evcharge
