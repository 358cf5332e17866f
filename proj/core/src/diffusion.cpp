#include "evcharge/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "evcharge/closed_form.hpp"
#include "evcharge/normal.hpp"
#include "evcharge/parallel.hpp"
#include "evcharge/random.hpp"

namespace evcharge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

PiecewiseLinearDrift PiecewiseLinearDrift::linear(double slope, double intercept) {
  return {{{kInf, slope, intercept}}};
}

double PiecewiseLinearDrift::operator()(double x) const {
  for (const auto& p : pieces) {
    if (x <= p.upper) return p.slope * x + p.intercept;
  }
  return pieces.back().slope * x + pieces.back().intercept;
}

Matrix2 OUSpec::covariance() const {
  const double c = correlation * diffusion[0] * diffusion[1];
  return {{{diffusion[0] * diffusion[0], c}, {c, diffusion[1] * diffusion[1]}}};
}

void OUSpec::validate() const {
  if (dim != 1 && dim != 2) throw DomainError("OUSpec: dim must be 1 or 2");
  if (!(correlation >= -1.0 && correlation <= 1.0)) {
    throw DomainError("OUSpec: correlation outside [-1, 1]");
  }
  for (int i = 0; i < dim; ++i) {
    const auto& pieces = drift[static_cast<std::size_t>(i)].pieces;
    if (pieces.empty()) throw DomainError("OUSpec: empty drift");
    for (std::size_t k = 1; k < pieces.size(); ++k) {
      if (!(pieces[k - 1].upper < pieces[k].upper)) {
        throw DomainError("OUSpec: drift pieces must be sorted by threshold");
      }
    }
    if (pieces.back().upper != kInf) throw DomainError("OUSpec: last drift piece must be unbounded");
    const double s = diffusion[static_cast<std::size_t>(i)];
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("OUSpec: bad diffusion coefficient");
  }
  if (reflection) {
    const auto& r = *reflection;
    if (r.coordinate < 0 || r.coordinate >= dim) throw DomainError("OUSpec: bad barrier coordinate");
    const double d = r.direction[static_cast<std::size_t>(r.coordinate)];
    if (r.side == BarrierSide::upper ? !(d < 0.0) : !(d > 0.0)) {
      throw DomainError("OUSpec: regulator direction does not point into the domain");
    }
  }
}

OUSpec hw_spec(double nu, double mu, double beta, double kappa) {
  require_positive(nu, "hw_spec: nu");
  require_positive(mu, "hw_spec: mu");
  OUSpec s;
  s.dim = 2;
  if (beta == kInf) {
    s.drift[0] = PiecewiseLinearDrift::linear(-(nu + mu));
  } else {
    s.drift[0] = {{{beta, -(nu + mu), 0.0}, {kInf, -nu, -mu * beta}}};
  }
  s.drift[1] = PiecewiseLinearDrift::linear(-nu);
  const double coef = std::sqrt(2.0 * (nu + mu));
  s.diffusion = {coef, coef};
  s.correlation = (2.0 * nu + mu) / (2.0 * (nu + mu));
  if (std::isfinite(kappa)) s.reflection = Reflection{1, kappa, BarrierSide::upper, {-1.0, -1.0}};
  return s;
}

OUSpec overloaded_spec(double nu, double mu, double K, double beta) {
  require_positive(nu, "overloaded_spec: nu");
  require_positive(mu, "overloaded_spec: mu");
  require_positive(K, "overloaded_spec: K");
  OUSpec s;
  s.dim = 1;
  if (beta == kInf) {
    s.drift[0] = PiecewiseLinearDrift::linear(-(nu + mu));
  } else {
    s.drift[0] = {{{beta, -(nu + mu), 0.0}, {kInf, -nu, -mu * beta}}};
  }
  s.diffusion = {std::sqrt(2.0 * nu * mu * K / (nu + mu)), 0.0};
  return s;
}

OUSpec heavy_traffic_spec(double mu, double M, double c) {
  require_positive(mu, "heavy_traffic_spec: mu");
  require_positive(M, "heavy_traffic_spec: M");
  OUSpec s;
  s.dim = 2;
  s.drift[0] = s.drift[1] = PiecewiseLinearDrift::linear(-1.0, -c * mu * M);
  const double coef = std::sqrt(2.0 * mu * M);
  s.diffusion = {coef, coef};
  s.correlation = 0.5;
  s.reflection = Reflection{0, 0.0, BarrierSide::lower, {1.0, 0.0}};
  return s;
}

OUSpec smallnu_spec(double lambda, double mu, double M) {
  require_positive(lambda, "smallnu_spec: lambda");
  require_positive(mu, "smallnu_spec: mu");
  require_positive(M, "smallnu_spec: M");
  OUSpec s;
  s.dim = 2;
  s.drift[0] = s.drift[1] = PiecewiseLinearDrift::linear(-1.0);
  const double coef = std::sqrt(2.0 * lambda);
  s.diffusion = {coef, coef};
  s.correlation = (2.0 * lambda - mu * M) / (2.0 * lambda);
  return s;
}

std::size_t SdeEnsemble::samples_per_path() const noexcept {
  return paths.empty() ? 0 : paths.front().size() / static_cast<std::size_t>(dim);
}

double SdeEnsemble::value(std::size_t path, std::size_t sample, int coord) const {
  return paths.at(path).at(sample * static_cast<std::size_t>(dim) + static_cast<std::size_t>(coord));
}

std::vector<double> SdeEnsemble::pooled(int coord) const {
  std::vector<double> out;
  out.reserve(n_paths() * samples_per_path());
  for (std::size_t p = 0; p < n_paths(); ++p) {
    for (std::size_t k = 0; k < samples_per_path(); ++k) out.push_back(value(p, k, coord));
  }
  return out;
}

SdeEnsemble simulate_ou(const OUSpec& spec, Point2 x0, const SimulateOptions& opt) {
  spec.validate();
  if (!(opt.dt > 0.0)) throw DomainError("simulate_ou: dt must be positive");
  if (!(opt.horizon > opt.burn_in) || opt.burn_in < 0.0) {
    throw DomainError("simulate_ou: need 0 <= burn_in < horizon");
  }
  if (opt.n_paths < 1) throw DomainError("simulate_ou: n_paths must be at least 1");
  if (opt.record_stride < 1) throw DomainError("simulate_ou: record_stride must be at least 1");
  if (spec.reflection) {
    const auto& r = *spec.reflection;
    const double v = x0[static_cast<std::size_t>(r.coordinate)];
    if (r.side == BarrierSide::upper ? v > r.level : v < r.level) {
      throw DomainError("simulate_ou: x0 violates the reflection barrier");
    }
  }

  const auto total = static_cast<std::size_t>(std::llround(opt.horizon / opt.dt));
  const auto burn = static_cast<std::size_t>(std::llround(opt.burn_in / opt.dt));
  const auto stride = static_cast<std::size_t>(opt.record_stride);
  const std::size_t n_samples = total > burn ? (total - burn + stride - 1) / stride : 0;
  const int dim = spec.dim;

  // Lower Cholesky factor of the noise covariance.
  const Matrix2 cov = spec.covariance();
  const double l11 = std::sqrt(cov[0][0]);
  const double l21 = l11 > 0.0 ? cov[1][0] / l11 : 0.0;
  const double l22 = std::sqrt(std::max(0.0, cov[1][1] - l21 * l21));
  const double sqdt = std::sqrt(opt.dt);

  SdeEnsemble ens;
  ens.dim = dim;
  ens.dt = opt.dt;
  ens.sample_dt = opt.dt * static_cast<double>(stride);
  ens.observed_time = static_cast<double>(total - std::min(burn, total)) * opt.dt;
  ens.seed = opt.seed;
  if (spec.reflection) ens.reflection_direction = spec.reflection->direction;
  const auto n_paths = static_cast<std::size_t>(opt.n_paths);
  ens.paths.resize(n_paths);
  ens.events.resize(n_paths);
  if (spec.reflection) ens.regulator.resize(n_paths);

  parallel_for(
      n_paths,
      [&](std::size_t p) {
        Engine rng = make_stream(opt.seed, p);
        std::normal_distribution<double> gauss;
        auto& out = ens.paths[p];
        out.reserve(n_samples * static_cast<std::size_t>(dim));
        std::vector<double>* reg = spec.reflection ? &ens.regulator[p] : nullptr;
        if (reg) reg->reserve(n_samples);
        auto& events = ens.events[p];

        Point2 x = x0;
        if (dim == 1) x[1] = 0.0;
        double y = 0.0;
        for (std::size_t n = 0; n < total; ++n) {
          if (n >= burn && (n - burn) % stride == 0) {
            out.insert(out.end(), x.begin(), x.begin() + dim);
            if (reg) reg->push_back(y);
          }
          const double g1 = gauss(rng);
          const double b0 = spec.drift[0](x[0]);
          if (dim == 1) {
            x[0] += b0 * opt.dt + l11 * sqdt * g1;
          } else {
            const double g2 = gauss(rng);
            const double b1 = spec.drift[1](x[1]);
            x[0] += b0 * opt.dt + l11 * sqdt * g1;
            x[1] += b1 * opt.dt + (l21 * g1 + l22 * g2) * sqdt;
          }
          if (spec.reflection) {
            const auto& r = *spec.reflection;
            const auto c = static_cast<std::size_t>(r.coordinate);
            const double gap = r.side == BarrierSide::upper ? x[c] - r.level : r.level - x[c];
            if (gap > 0.0) {
              const double dy = gap / std::abs(r.direction[c]);
              if (n >= burn) events.push_back({x, dy});
              x[0] += r.direction[0] * dy;
              x[1] += r.direction[1] * dy;
              x[c] = r.level;
              y += dy;
            }
          }
        }
      },
      opt.threads);
  return ens;
}

TestFunction TestFunction::constant(double c) {
  return {[c](Point2) { return c; }, [](Point2) { return Point2{0.0, 0.0}; },
          [](Point2) { return Matrix2{}; }};
}

TestFunction TestFunction::monomial(int i, int j) {
  if (i < 0 || j < 0) throw DomainError("TestFunction::monomial: negative exponent");
  // d^k/dx^k x^n as a coefficient times a power.
  auto deriv = [](int n, int k, double x) {
    if (k > n) return 0.0;
    double coef = 1.0;
    for (int m = 0; m < k; ++m) coef *= n - m;
    return coef * std::pow(x, n - k);
  };
  TestFunction f;
  f.value = [=](Point2 x) { return deriv(i, 0, x[0]) * deriv(j, 0, x[1]); };
  f.gradient = [=](Point2 x) {
    return Point2{deriv(i, 1, x[0]) * deriv(j, 0, x[1]), deriv(i, 0, x[0]) * deriv(j, 1, x[1])};
  };
  f.hessian = [=](Point2 x) {
    const double h12 = deriv(i, 1, x[0]) * deriv(j, 1, x[1]);
    return Matrix2{{{deriv(i, 2, x[0]) * deriv(j, 0, x[1]), h12},
                    {h12, deriv(i, 0, x[0]) * deriv(j, 2, x[1])}}};
  };
  return f;
}

BarResult bar_residual(const SdeEnsemble& ens, const OUSpec& spec, const TestFunction& f) {
  if (spec.dim != 2 || !spec.reflection || spec.reflection->coordinate != 1 ||
      spec.reflection->side != BarrierSide::upper) {
    throw UnsupportedError("bar_residual: requires a two-dimensional spec with an upper barrier "
                           "on coordinate 2");
  }
  if (ens.samples_per_path() == 0) {
    throw DomainError("bar_residual: ensemble holds no stationary samples (burn-in too long)");
  }
  if (ens.n_paths() < 2) throw DomainError("bar_residual: need at least two paths");

  const double kappa = spec.reflection->level;
  const Matrix2 c = spec.covariance();
  // Coordinates X = (x1, kappa - x2): drift, covariance and push direction.
  auto to_x = [kappa](Point2 x) { return Point2{x[0], kappa - x[1]}; };
  const Point2 push{spec.reflection->direction[0], -spec.reflection->direction[1]};

  auto generator = [&](Point2 x) {
    const Point2 X = to_x(x);
    const Point2 g = f.gradient(X);
    const Matrix2 h = f.hessian(X);
    const double d1 = spec.drift[0](x[0]);
    const double d2 = -spec.drift[1](x[1]);
    return d1 * g[0] + d2 * g[1] + 0.5 * (c[0][0] * h[0][0] + c[1][1] * h[1][1]) -
           c[0][1] * h[0][1];
  };

  const std::size_t P = ens.n_paths();
  std::vector<double> stationary(P), boundary(P);
  for (std::size_t p = 0; p < P; ++p) {
    double s = 0.0;
    const std::size_t n = ens.samples_per_path();
    for (std::size_t k = 0; k < n; ++k) s += generator({ens.value(p, k, 0), ens.value(p, k, 1)});
    stationary[p] = s / static_cast<double>(n);

    double b = 0.0;
    for (const auto& e : ens.events[p]) {
      const Point2 pre = to_x(e.pre);
      const Point2 mid{pre[0] + 0.5 * push[0] * e.increment, pre[1] + 0.5 * push[1] * e.increment};
      const Point2 g = f.gradient(mid);
      b += (g[0] * push[0] + g[1] * push[1]) * e.increment;
    }
    boundary[p] = b / ens.observed_time;
  }

  BarResult out;
  std::vector<double> total(P);
  for (std::size_t p = 0; p < P; ++p) {
    total[p] = stationary[p] + boundary[p];
    out.stationary_term += stationary[p] / static_cast<double>(P);
    out.boundary_term += boundary[p] / static_cast<double>(P);
  }
  out.residual = out.stationary_term + out.boundary_term;
  double ss = 0.0;
  for (double t : total) ss += (t - out.residual) * (t - out.residual);
  out.std_error = std::sqrt(ss / static_cast<double>(P - 1) / static_cast<double>(P));
  return out;
}

namespace {

double bvn_pdf(Point2 x, Point2 m, const Matrix2& s) {
  const double det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
  const double u = x[0] - m[0];
  const double v = x[1] - m[1];
  const double q = (s[1][1] * u * u - 2.0 * s[0][1] * u * v + s[0][0] * v * v) / det;
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
}

}  // namespace

PiInfinity::PiInfinity(double nu, double mu, double beta) : nu_(nu), mu_(mu), beta_(beta) {
  require_positive(nu, "pi_infinity_density: nu");
  require_positive(mu, "pi_infinity_density: mu");
  const double v = (nu + mu) / nu;
  const double cross = (2.0 * nu + mu) / (2.0 * nu);
  s_minus_ = {{{1.0, 1.0}, {1.0, v}}};
  s_plus_ = {{{v, cross}, {cross, v}}};
  m_plus_ = {-mu * beta / nu, 0.0};
  const double tail = std::sqrt(v) * std::exp(mu * beta * beta / (2.0 * nu));
  c1_ = 1.0 / (normal::cdf(beta) + tail * normal::sf(std::sqrt(v) * beta));
  c2_ = c1_ * tail;
}

double PiInfinity::operator()(Point2 x) const {
  if (x[0] <= beta_) return c1_ * bvn_pdf(x, {0.0, 0.0}, s_minus_);
  return c2_ * bvn_pdf(x, m_plus_, s_plus_);
}

double PiInfinity::marginal_x2(double x2) const {
  // Integrate x1 out of each piece through the conditional normal of x1 | x2.
  auto piece = [x2, this](Point2 m, const Matrix2& s, bool below) {
    const double cond_mean = m[0] + s[0][1] / s[1][1] * (x2 - m[1]);
    const double cond_sd = std::sqrt(s[0][0] - s[0][1] * s[0][1] / s[1][1]);
    const double a = (beta_ - cond_mean) / cond_sd;
    const double mass = below ? normal::cdf(a) : normal::sf(a);
    return normal::pdf(x2, m[1], std::sqrt(s[1][1])) * mass;
  };
  return c1_ * piece({0.0, 0.0}, s_minus_, true) + c2_ * piece(m_plus_, s_plus_, false);
}

PiInfinity pi_infinity_density(double nu, double mu, double beta) { return {nu, mu, beta}; }

MarginalReport pi_infinity_marginal_report(double nu, double mu, double beta, int points,
                                           double span) {
  if (points < 2) throw DomainError("pi_infinity_marginal_report: need at least two points");
  const PiInfinity pi(nu, mu, beta);
  const double sd = std::sqrt((nu + mu) / nu);
  MarginalReport r;
  for (int i = 0; i < points; ++i) {
    const double x = -span * sd + 2.0 * span * sd * i / (points - 1);
    r.grid.push_back(x);
    r.mixture.push_back(pi.marginal_x2(x));
    r.normal.push_back(normal::pdf(x, 0.0, sd));
    r.max_gap = std::max(r.max_gap, std::abs(r.mixture.back() - r.normal.back()));
  }
  return r;
}

double PiecewiseNormalDensity::pdf(double x) const {
  if (x <= breakpoint) {
    if (left.weight == 0.0) return 0.0;
    return left.weight * normal::pdf(x, left.mean, left.sd) /
           normal::cdf((breakpoint - left.mean) / left.sd);
  }
  if (right.weight == 0.0) return 0.0;
  return right.weight * normal::pdf(x, right.mean, right.sd) /
         normal::sf((breakpoint - right.mean) / right.sd);
}

double PiecewiseNormalDensity::cdf(double x) const {
  if (x <= breakpoint) {
    if (left.weight == 0.0) return 0.0;
    return left.weight * normal::cdf((x - left.mean) / left.sd) /
           normal::cdf((breakpoint - left.mean) / left.sd);
  }
  if (right.weight == 0.0) return left.weight;
  return left.weight + right.weight * (1.0 - normal::sf((x - right.mean) / right.sd) /
                                                 normal::sf((breakpoint - right.mean) / right.sd));
}

double PiecewiseNormalDensity::mean() const {
  double m = 0.0;
  if (left.weight > 0.0) {
    m += left.weight * normal::truncated_mean_below(left.mean, left.sd, breakpoint);
  }
  if (right.weight > 0.0) {
    m += right.weight * normal::truncated_mean_above(right.mean, right.sd, breakpoint);
  }
  return m;
}

PiecewiseNormalDensity overloaded_density(double nu, double mu, double K, double beta,
                                          WeightRule rule) {
  require_positive(nu, "overloaded_density: nu");
  require_positive(mu, "overloaded_density: mu");
  require_positive(K, "overloaded_density: K");
  PiecewiseNormalDensity d;
  d.breakpoint = beta;
  d.left = {0.0, std::sqrt(nu * mu * K) / (nu + mu), 0.0};
  d.right = {-mu * beta / nu, std::sqrt(mu * K / (nu + mu)), 0.0};
  if (std::isinf(beta)) {
    d.right.mean = 0.0;
    d.left.weight = beta > 0.0 ? 1.0 : 0.0;
    d.right.weight = 1.0 - d.left.weight;
    return d;
  }
  // Boundary values of the two normalized truncated pieces.
  const double s1 = d.left.sd;
  const double s2 = d.right.sd;
  const double at_left = normal::inverse_mills(-beta / s1) / s1;
  const double at_right = normal::inverse_mills((beta - d.right.mean) / s2) / s2;
  double r = at_left / at_right;
  if (rule == WeightRule::variance_ratio) r *= (s1 * s1) / (s2 * s2);
  d.left.weight = std::isinf(r) ? 0.0 : 1.0 / (1.0 + r);
  d.right.weight = 1.0 - d.left.weight;
  return d;
}

double overloaded_mean_approx(const ModelParams& raw, OverloadedVariant variant, WeightRule rule) {
  const ModelParams p = validate(raw);
  if (!p.spaces.is_finite()) {
    throw UnsupportedError("overloaded_mean_approx: requires finite K");
  }
  const double n = variant == OverloadedVariant::plain ? p.spaces.as_real() : expected_occupancy(p);
  if (n <= 0.0) return 0.0;
  const double centre = p.nu * n / (p.nu + p.mu);
  const double beta = (p.power - centre) / std::sqrt(n);
  return std::sqrt(n) * overloaded_density(p.nu, p.mu, 1.0, beta, rule).mean() + centre;
}

SmallNuApprox smallnu_approx(const ModelParams& raw) {
  const ModelParams p = validate(raw);
  const double mu_m = p.mu * p.power;
  if (!(p.lambda > mu_m)) {
    throw DomainError("smallnu_approx: requires lambda > mu M");
  }
  if (p.spaces.is_finite() && !(p.spaces.as_real() > p.lambda / p.nu)) {
    throw DomainError("smallnu_approx: requires K > lambda / nu");
  }
  SmallNuApprox a;
  a.e_z = (p.lambda - mu_m) / p.nu;
  a.e_q = p.lambda / p.nu;
  const double var = p.lambda / p.nu;
  const double cov = (2.0 * p.lambda - mu_m) / (2.0 * p.nu);
  a.covariance = {{{var, cov}, {cov, var}}};
  return a;
}

bool positive_definite(const Matrix2& m) noexcept {
  return m[0][0] > 0.0 && m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0;
}

}  // namespace evcharge
