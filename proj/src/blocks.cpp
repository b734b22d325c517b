#include "harmapprox/blocks.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "harmapprox/errors.hpp"
#include "harmapprox/spherical.hpp"

namespace harmapprox {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxScale = 1000;
// Slack for the two upper-bound inequalities, on the log scale.
constexpr double kUpperTolerance = 1e-9;

void CheckPoint(const BallPoint& x, int d, int n) {
  if (!(x.s > 0.0 && x.s <= 1.0)) {
    throw DomainError(fmt::format("block evaluated at 1-|x|={} outside (0, 1]", x.s));
  }
  if (static_cast<int>(x.direction.size()) != d) throw DomainError("block point has wrong dimension");
  if (n < 0 || n > kMaxScale) throw DomainError(fmt::format("block scale n={} out of range", n));
}

// Re or Im of (rho e^{i angle})^(2^n) with log rho given.
SignedLog PowerOfTwoPart(bool imaginary, int n, double log_rho, double angle) {
  const double log_mag = std::ldexp(log_rho, n);
  if (log_mag == -kInf) return {};
  const double arg = std::ldexp(angle, n);
  const double c = imaginary ? std::sin(arg) : std::cos(arg);
  if (c == 0.0) return {};
  return {log_mag + std::log(std::abs(c)), c > 0 ? 1 : -1};
}

void Record(AxiomResult& result, double margin, int q, int n, const BallPoint& x,
            double log_value) {
  ++result.checked;
  if (margin < result.worst_margin) {
    result.worst_margin = margin;
    result.q = q;
    result.n = n;
    result.witness = x;
    result.witness_value = std::exp(log_value);
  }
}

}  // namespace

std::vector<double> BallPoint::Cartesian() const {
  std::vector<double> x(direction);
  for (auto& c : x) c *= 1.0 - s;
  return x;
}

BallPoint BallPoint::FromCartesian(std::span<const double> x) {
  const double r = Norm(x);
  BallPoint p;
  p.s = 1.0 - r;
  p.direction.assign(x.size(), 0.0);
  if (r == 0.0) {
    p.direction[0] = 1.0;
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) p.direction[i] = x[i] / r;
  }
  return p;
}

double decay_constant(int p) {
  if (p < 1) throw DomainError("decay constant needs p >= 1");
  return std::pow(p / std::numbers::e, p);
}

double DiskBlockFamily::decay_constant(int p) const { return harmapprox::decay_constant(p); }

SignedLog DiskBlockFamily::Evaluate(int q, int n, const BallPoint& x) const {
  if (q != 1 && q != 2) throw DomainError(fmt::format("disk block index q={} not in {{1,2}}", q));
  CheckPoint(x, 2, n);
  const double angle = std::atan2(x.direction[1], x.direction[0]);
  return PowerOfTwoPart(q == 2, n, std::log1p(-x.s), angle);
}

double disk_block_eval(int q, int n, const BallPoint& x) {
  return DiskBlockFamily().Evaluate(q, n, x).value();
}

ScaledBlockFamily::ScaledBlockFamily(std::shared_ptr<const BlockFamily> base, double factor)
    : base_(std::move(base)), factor_(factor) {
  if (!(factor_ > 0.0)) throw ConfigError("block scale factor must be positive");
}

std::string ScaledBlockFamily::name() const {
  return fmt::format("{}*{}", base_->name(), factor_);
}

double ScaledBlockFamily::decay_constant(int p) const { return base_->decay_constant(p) * factor_; }

SignedLog ScaledBlockFamily::Evaluate(int q, int n, const BallPoint& x) const {
  auto v = base_->Evaluate(q, n, x);
  if (v.sign != 0) v.log_abs += std::log(factor_);
  return v;
}

PlanarRotationFamily::PlanarRotationFamily(int d) : d_(d) {
  if (d < 3) throw ConfigError("planar rotation candidate is for d >= 3");
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) planes_.emplace_back(a, b);
  }
}

double PlanarRotationFamily::decay_constant(int p) const { return harmapprox::decay_constant(p); }

SignedLog PlanarRotationFamily::Evaluate(int q, int n, const BallPoint& x) const {
  if (q < 1 || q > width()) throw DomainError(fmt::format("block index q={} out of range", q));
  CheckPoint(x, d_, n);
  const auto [a, b] = planes_[static_cast<std::size_t>((q - 1) / 2)];
  const double xa = x.direction[static_cast<std::size_t>(a)];
  const double xb = x.direction[static_cast<std::size_t>(b)];
  const double t = std::hypot(xa, xb);
  if (t == 0.0) return {};
  return PowerOfTwoPart(q % 2 == 0, n, std::log1p(-x.s) + std::log(std::min(t, 1.0)),
                        std::atan2(xb, xa));
}

CertificationReport certify_block_family(const BlockFamily& family, int p,
                                         std::span<const int> n_list,
                                         const CertificationSpec& spec) {
  if (n_list.empty()) throw ConfigError("certification needs at least one n");
  if (spec.shell_radii < 1 || spec.directions < 1 || spec.general_radii < 2) {
    throw ConfigError("certification sample spec is empty");
  }
  const int d = family.dim();
  const int alpha = family.shell_offset();
  const double log_c = std::log(family.decay_constant(p));

  CertificationReport report;
  report.family = family.name();
  report.dim = d;
  report.p = p;
  report.n_list.assign(n_list.begin(), n_list.end());
  report.spec = spec;
  report.decay_constant = family.decay_constant(p);

  std::vector<double> general_s;
  for (int i = 0; i < spec.general_radii; ++i) {
    general_s.push_back(std::exp2(-40.0 * i / (spec.general_radii - 1)));
  }

  for (int n : n_list) {
    std::vector<std::vector<double>> dirs;
    if (d == 2) {
      for (int i = 0; i < spec.directions; ++i) {
        const double angle = 2 * std::numbers::pi * i / spec.directions;
        dirs.push_back({std::cos(angle), std::sin(angle)});
      }
    } else {
      dirs = UniformDirections(d, spec.directions, spec.seed + static_cast<std::uint64_t>(n));
    }
    std::vector<double> shell_s;
    for (int i = 0; i < spec.shell_radii; ++i) {
      shell_s.push_back(std::exp2(-alpha - n - (i + 1) / 4.0));
    }

    auto check_upper = [&](const BallPoint& x) {
      for (int q = 1; q <= family.width(); ++q) {
        const auto u = family.Evaluate(q, n, x);
        const double log_u = u.sign == 0 ? -kInf : u.log_abs;
        Record(report.bounded, -log_u, q, n, x, log_u);
        const double rhs = log_c - n * p * std::log(2.0) - p * std::log(x.s);
        Record(report.decay, rhs - log_u, q, n, x, log_u);
      }
    };

    for (double s : general_s) {
      for (const auto& dir : dirs) check_upper(BallPoint{s, dir});
    }
    for (double s : shell_s) {
      for (const auto& dir : dirs) {
        BallPoint x{s, dir};
        check_upper(x);
        double best = -kInf;
        int best_q = 1;
        for (int q = 1; q <= family.width(); ++q) {
          const auto u = family.Evaluate(q, n, x);
          if (u.sign != 0 && u.log_abs > best) {
            best = u.log_abs;
            best_q = q;
          }
        }
        Record(report.shell, best - std::log(0.25), best_q, n, x, best);
      }
    }
  }
  report.bounded.pass = report.bounded.worst_margin >= -kUpperTolerance;
  report.decay.pass = report.decay.worst_margin >= -kUpperTolerance;
  report.shell.pass = report.shell.worst_margin >= 0.0;
  return report;
}

}  // namespace harmapprox
