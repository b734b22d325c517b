#include "harmapprox/spherical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <fmt/format.h>

namespace harmapprox {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Terms below e^-kCutoff relative to the leading one are dropped.
constexpr double kCutoff = 40.0;
// Degrees beyond this are not evaluated by recurrence.
constexpr double kMaxEvaluatedDegree = 1e7;

std::int64_t Binomial(std::int64_t n, std::int64_t r) {
  if (r < 0 || n < r) return 0;
  r = std::min(r, n - r);
  std::int64_t result = 1;
  for (std::int64_t i = 1; i <= r; ++i) result = result * (n - r + i) / i;
  return result;
}

double Uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1p-53;
}

void CheckUnit(std::span<const double> v, const char* what) {
  if (std::abs(Norm(v) - 1.0) > 1e-12) {
    throw DomainError(fmt::format("{} must be a unit vector", what));
  }
}

}  // namespace

std::int64_t dim_harm(int k, int d) {
  if (k < 0 || d < 2) throw DomainError(fmt::format("dim_harm({}, {}) undefined", k, d));
  if (d == 2) return k == 0 ? 1 : 2;
  return Binomial(k + d - 1, d - 1) - Binomial(k + d - 3, d - 1);
}

double gegenbauer(int k, double lambda, double t) {
  if (k < 0) throw DomainError("gegenbauer degree must be non-negative");
  if (!(lambda > -0.5)) throw DomainError("gegenbauer needs lambda > -1/2");
  if (!(std::abs(t) <= 1.0 + 1e-12)) {
    throw DomainError(fmt::format("gegenbauer argument t={} outside [-1, 1]", t));
  }
  t = std::clamp(t, -1.0, 1.0);
  if (k == 0) return 1.0;
  if (lambda == 0.0) {
    double prev = 1.0;
    double cur = t;
    for (int n = 1; n < k; ++n) {
      const double next = 2 * t * cur - prev;
      prev = cur;
      cur = next;
    }
    return cur;
  }
  double prev = 1.0;
  double cur = 2 * lambda * t;
  for (int n = 1; n < k; ++n) {
    const double next = (2 * t * (n + lambda) * cur - (n + 2 * lambda - 1) * prev) / (n + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> ZonalProfile(int k_max, int d, double t) {
  if (d < 2) throw DomainError("zonal profile needs d >= 2");
  t = std::clamp(t, -1.0, 1.0);
  std::vector<double> z(static_cast<std::size_t>(k_max) + 1);
  z[0] = 1.0;
  if (k_max == 0) return z;
  if (d == 2) {
    double prev = 1.0;
    double cur = t;
    z[1] = 2 * t;
    for (int n = 1; n < k_max; ++n) {
      const double next = 2 * t * cur - prev;
      prev = cur;
      cur = next;
      z[n + 1] = 2 * cur;
    }
    return z;
  }
  const double lambda = (d - 2) / 2.0;
  double prev = 1.0;
  double cur = 2 * lambda * t;
  z[1] = (1 + lambda) / lambda * cur;
  for (int n = 1; n < k_max; ++n) {
    const double next = (2 * t * (n + lambda) * cur - (n + 2 * lambda - 1) * prev) / (n + 1);
    prev = cur;
    cur = next;
    z[n + 1] = (n + 1 + lambda) / lambda * cur;
  }
  return z;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double Norm(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

double zonal(int k, int d, std::span<const double> x, std::span<const double> y) {
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d) {
    throw DomainError("zonal: point dimension mismatch");
  }
  CheckUnit(y, "zonal pole");
  const double r = Norm(x);
  if (r == 0.0) return k == 0 ? 1.0 : 0.0;
  const double t = Dot(x, y) / r;
  return std::pow(r, k) * ZonalProfile(k, d, t)[static_cast<std::size_t>(k)];
}

double y_k(int k, int d, std::span<const double> pole, std::span<const double> x) {
  return zonal(k, d, x, pole) / std::sqrt(static_cast<double>(dim_harm(k, d)));
}

AttainerFunction::AttainerFunction(ZonalBasis basis, CoefficientSequence coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (basis_.d < 2) throw DomainError("attainer needs d >= 2");
  if (static_cast<int>(basis_.pole.size()) != basis_.d) {
    throw DomainError("attainer pole has wrong dimension");
  }
  CheckUnit(basis_.pole, "attainer pole");
  for (const auto& e : coeffs_.entries) {
    if (e.k > basis_.k_max) throw DomainError("coefficient degree exceeds basis k_max");
  }
}

std::vector<std::size_t> AttainerFunction::RetainedTerms(double r) const {
  const double log_r = std::log(r);
  std::vector<double> bound(coeffs_.entries.size());
  double top = -kInf;
  for (std::size_t j = 0; j < coeffs_.entries.size(); ++j) {
    const auto& e = coeffs_.entries[j];
    // log(a_j r^k_j sqrt(dim H_k)), dim H_k <= (k+1)^(d-2) * 2.
    const double log_dim = std::log(2.0) + (basis_.d - 2) * std::log1p(e.k);
    bound[j] = coeffs_.LogTerm(j, log_r) + 0.5 * log_dim;
    top = std::max(top, coeffs_.LogTerm(j, log_r));
  }
  std::vector<std::size_t> keep;
  if (top == -kInf) return keep;
  for (std::size_t j = 0; j < bound.size(); ++j) {
    if (bound[j] >= top - kCutoff) keep.push_back(j);
  }
  return keep;
}

SignedLog AttainerFunction::Evaluate(double r, std::span<const double> direction) const {
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("attainer evaluated outside the closed ball");
  CheckUnit(direction, "attainer direction");
  const auto keep = RetainedTerms(r);
  if (keep.empty()) return {};
  double k_top = 0.0;
  double scale = -kInf;
  const double log_r = std::log(r);
  for (auto j : keep) {
    k_top = std::max(k_top, coeffs_.entries[j].k);
    scale = std::max(scale, coeffs_.LogTerm(j, log_r));
  }
  if (k_top > kMaxEvaluatedDegree) {
    throw DomainError(fmt::format("attainer term of degree {} too large to evaluate", k_top));
  }
  const auto profile = ZonalProfile(static_cast<int>(k_top), basis_.d, Dot(direction, basis_.pole));
  double sum = 0.0;
  for (auto j : keep) {
    const auto k = static_cast<int>(coeffs_.entries[j].k);
    const double y = profile[static_cast<std::size_t>(k)] /
                     std::sqrt(static_cast<double>(dim_harm(k, basis_.d)));
    sum += std::exp(coeffs_.LogTerm(j, log_r) - scale) * y;
  }
  if (sum == 0.0) return {};
  return {scale + std::log(std::abs(sum)), sum > 0 ? 1 : -1};
}

double AttainerFunction::LogM2SquaredClosed(double r) const {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("M2 needs r in [0, 1)");
  return eval_series_sq(coeffs_, r);
}

AttainerFunction build_l2_attainer(const CoefficientSequence& c, int d, std::vector<double> pole) {
  ZonalBasis basis;
  basis.d = d;
  basis.pole = std::move(pole);
  for (const auto& e : c.entries) basis.k_max = std::max(basis.k_max, e.k);
  return AttainerFunction(std::move(basis), c);
}

void GaussLegendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw QuadratureOrderError("Gauss-Legendre needs at least one node");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    const double w = 2.0 / ((1 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

SphereRule CircleRule(int n) {
  if (n < 1) throw QuadratureOrderError("circle rule needs at least one node");
  SphereRule rule;
  rule.d = 2;
  rule.exact_degree = n - 1;
  for (int i = 0; i < n; ++i) {
    const double angle = 2 * std::numbers::pi * i / n;
    rule.nodes.push_back({std::cos(angle), std::sin(angle)});
    rule.weights.push_back(1.0 / n);
  }
  return rule;
}

SphereRule ProductRule3(int theta_nodes, int phi_nodes) {
  if (theta_nodes < 1 || phi_nodes < 1) throw QuadratureOrderError("empty product rule");
  std::vector<double> z;
  std::vector<double> wz;
  GaussLegendre(theta_nodes, z, wz);
  SphereRule rule;
  rule.d = 3;
  rule.exact_degree = std::min(2 * theta_nodes - 1, phi_nodes - 1);
  for (int i = 0; i < theta_nodes; ++i) {
    const double ct = z[static_cast<std::size_t>(i)];
    const double st = std::sqrt(std::max(0.0, 1 - ct * ct));
    for (int k = 0; k < phi_nodes; ++k) {
      const double phi = 2 * std::numbers::pi * k / phi_nodes;
      rule.nodes.push_back({st * std::cos(phi), st * std::sin(phi), ct});
      rule.weights.push_back(wz[static_cast<std::size_t>(i)] / (2.0 * phi_nodes));
    }
  }
  return rule;
}

std::vector<std::vector<double>> UniformDirections(int d, int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::vector<double>> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::vector<double> v(static_cast<std::size_t>(d));
    double norm = 0.0;
    do {
      // Box-Muller on our own uniforms keeps the stream platform independent.
      for (int c = 0; c < d; c += 2) {
        const double u1 = 1.0 - Uniform01(gen);
        const double u2 = Uniform01(gen);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        v[static_cast<std::size_t>(c)] = radius * std::cos(2 * std::numbers::pi * u2);
        if (c + 1 < d) v[static_cast<std::size_t>(c + 1)] = radius * std::sin(2 * std::numbers::pi * u2);
      }
      norm = Norm(v);
    } while (norm < 1e-12);
    for (auto& c : v) c /= norm;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

SphereRule MonteCarloRule(int d, int samples, std::uint64_t seed) {
  if (samples < 2) throw QuadratureOrderError("Monte Carlo rule needs at least two samples");
  SphereRule rule;
  rule.d = d;
  rule.nodes = UniformDirections(d, samples, seed);
  rule.weights.assign(static_cast<std::size_t>(samples), 1.0 / samples);
  return rule;
}

M2Estimate m2_quadrature(const AttainerFunction& f, double r, const QuadratureSpec& spec) {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("M2 quadrature needs r in [0, 1)");
  const int d = f.basis().d;
  const auto keep = f.RetainedTerms(r);
  double k_top = 0.0;
  for (auto j : keep) k_top = std::max(k_top, f.coeffs().entries[j].k);
  if (k_top > kMaxEvaluatedDegree) {
    throw QuadratureOrderError(fmt::format("degree {} too large for quadrature", k_top));
  }
  const int degree = 2 * static_cast<int>(k_top);

  SphereRule rule;
  if (d == 2) {
    const int n = spec.angle_nodes > 0 ? spec.angle_nodes : degree + 1;
    rule = CircleRule(n);
  } else if (d == 3) {
    const int nt = spec.theta_nodes > 0 ? spec.theta_nodes : static_cast<int>(k_top) + 1;
    const int np = spec.phi_nodes > 0 ? spec.phi_nodes : degree + 1;
    rule = ProductRule3(nt, np);
  } else {
    rule = MonteCarloRule(d, spec.mc_samples, spec.seed);
  }
  if (rule.exact_degree >= 0 && rule.exact_degree < degree) {
    throw QuadratureOrderError(fmt::format(
        "rule exact to degree {} cannot integrate |f|^2 of degree {}", rule.exact_degree, degree));
  }

  // Common scale so that squares of astronomically large values stay finite.
  double scale = -kInf;
  for (auto j : keep) scale = std::max(scale, f.coeffs().LogTerm(j, std::log(r)));
  std::vector<double> values(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const auto v = f.Evaluate(r, rule.nodes[i]);
    values[i] = v.sign == 0 ? 0.0 : v.sign * std::exp(v.log_abs - scale);
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += rule.weights[i] * values[i] * values[i];
  M2Estimate est;
  est.degree = degree;
  est.nodes = rule.nodes.size();
  est.log_m2_sq = 2 * scale + std::log(mean);
  if (rule.exact_degree < 0) {
    double var = 0.0;
    for (double v : values) var += (v * v - mean) * (v * v - mean);
    var /= static_cast<double>(values.size() - 1);
    est.rel_std_error = std::sqrt(var / static_cast<double>(values.size())) / mean;
  }
  return est;
}

}  // namespace harmapprox
