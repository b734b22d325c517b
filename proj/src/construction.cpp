#include "harmapprox/construction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "harmapprox/errors.hpp"

namespace harmapprox {
namespace {

// Measured doubling constants carry rounding, so comparisons against exact
// powers allow this much relative slack.
constexpr double kRelSlack = 1e-12;
// Largest n for which 2^-(alpha+n) is still a double.
constexpr long kMaxScale = 1000;
// Extended-range bookkeeping limit on log2 of the largest A^k.
constexpr double kMaxLog2Scale = 16000.0;

double Slack(double magnitude) { return kRelSlack * std::max(1.0, std::abs(magnitude)); }

double LogPhiAtPowerOfTwo(const WeightFunction& w, long j) {
  return w.LogWeight(std::ldexp(1.0, static_cast<int>(-j)));
}

}  // namespace

int ConstructionPlan::MaxBand() const {
  return static_cast<int>(n.size()) / J - T - 1;
}

std::vector<long> compute_nk(const WeightFunction& w, double A, int count) {
  if (!(A >= 2.0 - Slack(2.0))) throw DomainError(fmt::format("compute_nk needs A >= 2, got {}", A));
  if (std::abs(w.LogWeight(w.s_max())) > Slack(0.0) || w.s_max() != 1.0) {
    throw DomainError("compute_nk needs a normalized weight with Phi(1) = 1");
  }
  const double log_a = std::log(A);
  std::vector<long> n;
  n.reserve(static_cast<std::size_t>(count));
  long j = 0;
  for (int k = 0; k < count; ++k) {
    const double target = k * log_a;
    auto fits = [&](long jj) {
      return LogPhiAtPowerOfTwo(w, jj) <= target + Slack(target);
    };
    // j is the previous n (or 0); grow until the next exponent fails.
    long step = 1;
    long lo = j;
    long hi = -1;
    while (hi < 0) {
      const long probe = lo + step;
      if (probe > kMaxScale) {
        if (fits(kMaxScale)) {
          throw DomainError(fmt::format("n_{} exceeds the representable scale 2^-{}", k, kMaxScale));
        }
        hi = kMaxScale;
        break;
      }
      if (fits(probe)) {
        lo = probe;
        step *= 2;
      } else {
        hi = probe;
      }
    }
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      if (fits(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    if (!n.empty() && lo <= n.back()) {
      throw NotDoubling(fmt::format(
          "n_{} = n_{} = {}: Phi(2x) <= A Phi(x) fails for A = {}", k, k - 1, lo, A));
    }
    n.push_back(lo);
    j = lo;
  }
  return n;
}

int choose_p(double A) {
  if (!(A >= 2.0 - Slack(2.0))) throw DomainError(fmt::format("choose_p needs A >= 2, got {}", A));
  int p = 1;
  while (2 * A > std::ldexp(1.0, p) * (1 + kRelSlack)) ++p;
  return p;
}

bool TailCondition(int J, int p, double C_pd, int alpha) {
  const double tail = C_pd * std::ldexp(1.0, p * (alpha + 1)) / (std::ldexp(1.0, J) - 1);
  return tail < 1.0 / 16;
}

bool DominanceCondition(int J, double A) {
  return (J - 1) * std::log(A) >= std::log(16.0) - Slack(std::log(16.0));
}

int choose_j(int p, double C_pd, int alpha, double A) {
  for (int J = 1; J < 1024; ++J) {
    if (TailCondition(J, p, C_pd, alpha) && DominanceCondition(J, A)) return J;
  }
  throw ConfigError("no J below 1024 satisfies the band separation conditions");
}

ConstructionPlan build_plan(const WeightFunction& w, const BlockFamily& family,
                            const PlanOptions& options) {
  if (!(options.tail_eps > 0.0 && options.tail_eps < 1.0)) {
    throw ConfigError("tail_eps must lie in (0, 1)");
  }
  if (options.bands < 1) throw ConfigError("plan needs at least one band");
  const auto normalized = normalize(w);
  const auto est = estimate_doubling(normalized, options.j_max, options.cap);
  if (est.divergent) {
    throw NotDoubling(fmt::format("{} is not doubling: ratio e^{} at s={} exceeds cap {}",
                                  w.spec(), est.log_A, est.witness_s, options.cap));
  }
  double A = std::max(est.A, 2.0);
  // Snap rounding noise of exact integer ratios such as 2^beta.
  if (std::abs(A - std::round(A)) <= Slack(A)) A = std::round(A);
  if (options.A_override) A = std::max(A, *options.A_override);

  ConstructionPlan plan;
  plan.weight = w.spec();
  plan.d = family.dim();
  plan.A = A;
  plan.p = choose_p(A);
  plan.alpha = family.shell_offset();
  plan.Q = family.width();
  plan.C_pd = family.decay_constant(plan.p);
  plan.J = choose_j(plan.p, plan.C_pd, plan.alpha, A);
  plan.tail_eps = options.tail_eps;
  plan.T = static_cast<int>(std::ceil(std::log2(1.0 / options.tail_eps) / plan.J)) + 1;
  const int count = plan.J * (options.bands + plan.T + 1);
  if (count * std::log2(A) > kMaxLog2Scale) {
    throw ConfigError(fmt::format("plan needs A^{} which exceeds the supported range", count));
  }
  plan.n = compute_nk(normalized, A, count);
  return plan;
}

HarmonicSum::HarmonicSum(ConstructionPlan plan, std::shared_ptr<const BlockFamily> family)
    : plan_(std::move(plan)), family_(std::move(family)) {
  if (family_->dim() != plan_.d || family_->width() != plan_.Q ||
      family_->shell_offset() != plan_.alpha) {
    throw ConfigError("block family does not match the plan");
  }
  if (plan_.J < 1 || plan_.T < 1 || plan_.MaxBand() < 0) {
    throw ConfigError("plan n-table too short for its J and T");
  }
}

int HarmonicSum::BandIndex(double s) const {
  const auto& n = plan_.n;
  auto upper_edge = [&](std::size_t k) {
    return std::ldexp(1.0, static_cast<int>(-plan_.alpha - n[k]));
  };
  // Largest K with 2^(-alpha-n_K) >= s; the edges decrease in K.
  std::size_t lo = 0;
  std::size_t hi = n.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (upper_edge(mid) >= s) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return static_cast<int>(lo) - 1;
}

bool HarmonicSum::InClosedBand(int K, double s) const {
  const auto& n = plan_.n;
  const int a = plan_.alpha;
  if (K == -1) return s >= std::ldexp(1.0, static_cast<int>(-a - n[0]));
  if (K < 0 || static_cast<std::size_t>(K) + 1 >= n.size()) return false;
  const auto k = static_cast<std::size_t>(K);
  return std::ldexp(1.0, static_cast<int>(-a - n[k + 1])) <= s &&
         s <= std::ldexp(1.0, static_cast<int>(-a - n[k]));
}

SumEvaluation HarmonicSum::Evaluate(const BallPoint& x, std::optional<int> band_hint) const {
  if (!(x.s > 0.0 && x.s <= 1.0)) {
    throw DomainError(fmt::format("harmonic sum evaluated at 1-|x|={}", x.s));
  }
  SumEvaluation out;
  if (band_hint) {
    if (!InClosedBand(*band_hint, x.s)) {
      throw DomainError(fmt::format("1-|x|={} is not in band {}", x.s, *band_hint));
    }
    out.K = *band_hint;
  } else {
    out.K = BandIndex(x.s);
  }
  const int J = plan_.J;
  out.m = out.K >= 0 ? out.K / J : -1;
  out.j = out.K >= 0 ? out.K % J : -1;
  const int m_eff = std::max(out.m, 0);
  if (m_eff > plan_.MaxBand()) {
    throw DomainError(fmt::format("1-|x|={} lies beyond the plan's band range", x.s));
  }
  const double log_a = std::log(plan_.A);
  const int base = std::max(out.K, 0);
  out.log_scale = base * log_a;
  out.scaled_abs_F.assign(static_cast<std::size_t>(plan_.Q),
                          std::vector<double>(static_cast<std::size_t>(J), 0.0));
  double total = std::exp(-out.log_scale);
  for (int q = 1; q <= plan_.Q; ++q) {
    for (int jj = 0; jj < J; ++jj) {
      double sum = 0.0;
      for (int k = 0; k <= m_eff + plan_.T; ++k) {
        const int idx = J * k + jj;
        const auto u = family_->Evaluate(q, static_cast<int>(plan_.n[static_cast<std::size_t>(idx)]), x);
        if (u.sign == 0) continue;
        sum += u.sign * std::exp((idx - base) * log_a + u.log_abs);
      }
      out.scaled_abs_F[static_cast<std::size_t>(q - 1)][static_cast<std::size_t>(jj)] = std::abs(sum);
      total += std::abs(sum);
    }
  }
  out.log_S = out.log_scale + std::log(total);
  return out;
}

LowerDecomposition HarmonicSum::Decompose(const BallPoint& x, int q, int K) const {
  if (K < 0) throw DomainError("decomposition needs a band index K >= 0");
  const int J = plan_.J;
  const int m = K / J;
  const int j = K % J;
  if (m > plan_.MaxBand()) throw DomainError("band beyond the plan's range");
  const double log_a = std::log(plan_.A);
  LowerDecomposition out;
  for (int k = 0; k <= m + plan_.T; ++k) {
    const int idx = J * k + j;
    const auto u = family_->Evaluate(q, static_cast<int>(plan_.n[static_cast<std::size_t>(idx)]), x);
    if (u.sign == 0) continue;
    const double term = u.sign * std::exp((idx - K) * log_a + u.log_abs);
    if (k < m) {
      out.f1 += term;
    } else if (k == m) {
      out.f2 += term;
    } else {
      out.f3 += term;
    }
  }
  return out;
}

TheoreticalBounds theoretical_bounds(const ConstructionPlan& plan) {
  TheoreticalBounds b;
  b.c_low = std::pow(plan.A, -plan.alpha - 1) / 8;
  b.c_high = plan.A * plan.Q * (1 + 2 * plan.C_pd * std::ldexp(1.0, plan.p * plan.alpha));
  return b;
}

}  // namespace harmapprox
