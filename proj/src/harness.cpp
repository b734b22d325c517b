#include "harmapprox/harness.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "harmapprox/errors.hpp"
#include "harmapprox/spherical.hpp"

namespace harmapprox {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTolerance = 1e-6;

double LogAddExp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

SampleRow MakeRow(const SamplePoint& p, double log_S, double log_Phi) {
  return {p.m, p.j, p.one_minus_r_exp, p.direction_index, log_S, log_Phi,
          std::exp(log_S - log_Phi)};
}

}  // namespace

std::vector<std::vector<double>> SampleDirections(int d, int count, std::uint64_t seed) {
  if (d == 2) {
    std::vector<std::vector<double>> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const double angle = 2 * std::numbers::pi * i / count;
      dirs.push_back({std::cos(angle), std::sin(angle)});
    }
    return dirs;
  }
  return UniformDirections(d, count, seed);
}

std::vector<SamplePoint> sample_bands(const ConstructionPlan& plan, const SampleSpec& spec) {
  if (spec.radii_per_band < 1 || spec.directions < 1 || spec.max_band < 0) {
    throw ConfigError("sample spec needs radii >= 1, directions >= 1, max_band >= 0");
  }
  if (spec.max_band - 1 > plan.MaxBand()) {
    throw ConfigError(fmt::format("max_band {} exceeds the plan's range of {} bands",
                                  spec.max_band, plan.MaxBand() + 1));
  }
  const auto dirs = SampleDirections(plan.d, spec.directions, spec.seed);
  const int R = spec.radii_per_band;
  std::vector<SamplePoint> out;
  out.reserve(static_cast<std::size_t>((spec.max_band * plan.J + 1) * R * spec.directions));

  auto push_radius = [&](int m, int j, int K, double e) {
    const double s = std::exp2(e);
    for (int di = 0; di < spec.directions; ++di) {
      out.push_back({m, j, K, e, di, BallPoint{s, dirs[static_cast<std::size_t>(di)]}});
    }
  };

  for (int m = 0; m < spec.max_band; ++m) {
    for (int j = 0; j < plan.J; ++j) {
      const int K = plan.J * m + j;
      const auto top = static_cast<double>(-plan.alpha - plan.n[static_cast<std::size_t>(K)]);
      const auto bottom = static_cast<double>(-plan.alpha - plan.n[static_cast<std::size_t>(K) + 1]);
      for (int i = 0; i < R; ++i) {
        double e = top;
        if (i == R - 1 && R > 1) {
          e = bottom;
        } else if (i > 0) {
          e = top + (bottom - top) * i / (R - 1);
        }
        push_radius(m, j, K, e);
      }
    }
  }
  const double edge = -plan.alpha - static_cast<double>(plan.n[0]);
  for (int i = 0; i < R; ++i) push_radius(-1, -1, -1, edge * i / R);
  return out;
}

VerificationReport verify_construction(const ConstructionPlan& plan,
                                       std::shared_ptr<const BlockFamily> family,
                                       const WeightFunction& w, const SampleSpec& spec) {
  const auto samples = sample_bands(plan, spec);
  const HarmonicSum sum(plan, family);
  const auto normalized = normalize(w);
  const auto bounds = theoretical_bounds(plan);

  VerificationReport r;
  r.weight = plan.weight;
  r.d = plan.d;
  r.spec = spec;
  r.c_low = bounds.c_low;
  r.c_high = bounds.c_high;
  r.tol = kLogTolerance + plan.tail_eps;
  const double log_lo = std::log(r.c_low);
  const double log_hi = std::log(r.c_high);

  double min_log_ratio = kInf;
  double max_log_ratio = -kInf;
  double jlow_min = kInf;
  double attr_min = kInf;
  r.center_low_margin = kInf;
  r.center_high_margin = kInf;
  double center_worst = kInf;
  r.rows.reserve(samples.size());

  for (const auto& p : samples) {
    const auto ev = p.K >= 0 ? sum.Evaluate(p.x, p.K) : sum.Evaluate(p.x);
    const double log_phi = normalized.LogWeight(p.x.s);
    const auto row = MakeRow(p, ev.log_S, log_phi);
    r.rows.push_back(row);

    if (p.K < 0) {
      const double low = ev.log_S - std::min(0.0, log_lo + log_phi);
      const double high = LogAddExp(log_hi + log_phi, 0.0) - ev.log_S;
      r.center_low_margin = std::min(r.center_low_margin, low);
      r.center_high_margin = std::min(r.center_high_margin, high);
      if (std::min(low, high) < center_worst) {
        center_worst = std::min(low, high);
        r.center_witness = row;
      }
      continue;
    }

    if (r.bands.empty() || r.bands.back().m != p.m || r.bands.back().j != p.j) {
      BandSummary b;
      b.m = p.m;
      b.j = p.j;
      b.min_ratio = kInf;
      b.max_ratio = 0.0;
      r.bands.push_back(b);
    }
    auto& band = r.bands.back();
    ++band.count;
    if (row.ratio < band.min_ratio) {
      band.min_ratio = row.ratio;
      band.min_witness = row;
    }
    if (row.ratio > band.max_ratio) {
      band.max_ratio = row.ratio;
      band.max_witness = row;
    }
    const double log_ratio = ev.log_S - log_phi;
    if (log_ratio < min_log_ratio) {
      min_log_ratio = log_ratio;
      r.low_witness = row;
    }
    if (log_ratio > max_log_ratio) {
      max_log_ratio = log_ratio;
      r.high_witness = row;
    }

    double fj = 0.0;
    for (const auto& per_q : ev.scaled_abs_F) fj += per_q[static_cast<std::size_t>(ev.j)];
    const double jlow = std::log(fj) + ev.log_scale - log_phi;
    if (jlow < jlow_min) {
      jlow_min = jlow;
      r.jlow_witness = row;
    }

    double best = -kInf;
    const int n_k = static_cast<int>(plan.n[static_cast<std::size_t>(p.K)]);
    for (int q = 1; q <= family->width(); ++q) {
      const auto u = family->Evaluate(q, n_k, p.x);
      if (u.sign != 0) best = std::max(best, u.log_abs);
    }
    if (best < attr_min) {
      attr_min = best;
      r.attribution_witness = row;
    }
  }

  for (auto& b : r.bands) {
    b.pass = std::log(b.min_ratio) >= log_lo - r.tol && std::log(b.max_ratio) <= log_hi + r.tol;
  }
  r.c_low_meas = std::exp(min_log_ratio);
  r.c_high_meas = std::exp(max_log_ratio);
  r.corridor_pass = min_log_ratio >= log_lo - r.tol && max_log_ratio <= log_hi + r.tol;
  if (r.bands.empty()) r.corridor_pass = true;
  r.center_pass = r.center_low_margin >= -r.tol && r.center_high_margin >= -r.tol;
  r.jlow_min_ratio = std::exp(jlow_min);
  r.jlow_pass = jlow_min >= log_lo - r.tol;
  r.attribution_min = std::exp(attr_min);
  r.attribution_pass = attr_min >= std::log(0.25) - kLogTolerance;
  r.pass = r.corridor_pass && r.center_pass && r.jlow_pass && r.attribution_pass;
  return r;
}

std::string ReportCsv(const VerificationReport& report) {
  std::string out = "band_m,band_j,one_minus_r_exp,direction_index,log_S,log_Phi,ratio\n";
  for (const auto& row : report.rows) {
    out += fmt::format("{},{},{:.17g},{},{:.17g},{:.17g},{:.17g}\n", row.band_m, row.band_j,
                       row.one_minus_r_exp, row.direction_index, row.log_S, row.log_Phi,
                       row.ratio);
  }
  return out;
}

void emit_report_csv(const VerificationReport& report, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open {} for writing", path));
  f << ReportCsv(report);
  if (!f) throw IoError(fmt::format("write to {} failed", path));
}

}  // namespace harmapprox
