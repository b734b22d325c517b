#include "harmapprox/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace harmapprox {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double SegmentSlope(const WeightFunction& w, const LogLogPoint& a, const LogLogPoint& b) {
  return w.LogWeightDiff(b.s, a.s) / LogRadiusDiff(b.s, a.s);
}

// Smallest representable increment above an integer-valued k.
double IntegerStep(double k) {
  return std::max(1.0, std::nextafter(k, kInf) - k);
}

struct Target {
  double s;
  double gap;  // log w - envelope at s
};

std::vector<Target> CoverageTargets(const LogConvexEnvelope& env) {
  std::vector<Target> targets;
  if (env.origin_log_w()) targets.push_back({1.0, 0.0});
  for (std::size_t i = 0; i < env.samples().size(); ++i) {
    targets.push_back({env.samples()[i].s, env.SampleGap(i)});
  }
  return targets;
}

// log(a r^k crossover / envelope) at a target; the greedy selection and
// coverage_margin share this expression so their verdicts agree exactly.
double CoverValue(const CoefficientEntry& e, const WeightFunction& w, const Target& t,
                  double log_c) {
  return log_term_over_weight(e, w, t.s) + t.gap + log_c;
}

// log sum_j (a_j r^k_j / w(r))^2 at r = 1 - s.
double LogSeriesSqOverWeight(const CoefficientSequence& c, const WeightFunction& w, double s) {
  std::vector<double> terms;
  terms.reserve(c.entries.size());
  double top = -kInf;
  for (const auto& e : c.entries) {
    terms.push_back(2 * log_term_over_weight(e, w, s));
    top = std::max(top, terms.back());
  }
  if (top == -kInf) return -kInf;
  double sum = 0.0;
  for (double x : terms) sum += std::exp(x - top);
  return top + std::log(sum);
}

}  // namespace

double LogRadiusDiff(double s1, double s2) {
  if (s1 == s2) return 0.0;
  if (s2 == 1.0) return kInf;
  if (s1 == 1.0) return -kInf;
  const double q = (1.0 - s1) / (1.0 - s2);
  if (q > 0.5 && q < 2.0) return std::log1p((s2 - s1) / (1.0 - s2));
  return std::log1p(-s1) - std::log1p(-s2);
}

std::vector<double> GeometricGrid(double s_max, double s_min, int points_per_dyad) {
  if (!(s_max <= 1.0 && s_min > 0.0 && s_min < s_max) || points_per_dyad < 1) {
    throw GridError(fmt::format("invalid geometric grid s in [{}, {}] with {} per dyad",
                                s_min, s_max, points_per_dyad));
  }
  const auto count = static_cast<long>(
      std::llround(std::log2(s_max / s_min) * points_per_dyad));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count) + 1);
  for (long i = 0; i <= count; ++i) {
    // Whole dyads through ldexp so that s = 2^-j is hit exactly.
    const long whole = i / points_per_dyad;
    const long frac = i % points_per_dyad;
    const double mantissa =
        frac == 0 ? s_max : s_max * std::exp2(-static_cast<double>(frac) / points_per_dyad);
    grid.push_back(std::ldexp(mantissa, static_cast<int>(-whole)));
  }
  return grid;
}

std::vector<double> DefaultGrid() { return GeometricGrid(1.0, 0x1p-40, 16); }

LogConvexEnvelope::LogConvexEnvelope(WeightFunction weight, std::vector<LogLogPoint> samples,
                                     std::vector<std::size_t> hull,
                                     std::optional<double> origin_log_w)
    : weight_(std::move(weight)),
      samples_(std::move(samples)),
      hull_(std::move(hull)),
      origin_(origin_log_w) {
  for (std::size_t i = 0; i + 1 < hull_.size(); ++i) {
    slopes_.push_back(SegmentSlope(weight_, samples_[hull_[i]], samples_[hull_[i + 1]]));
  }
  gaps_.assign(samples_.size(), 0.0);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    while (seg + 1 < hull_.size() && hull_[seg + 1] <= i) ++seg;
    if (hull_[seg] == i || seg + 1 == hull_.size()) continue;
    const auto& a = samples_[hull_[seg]];
    const double gap = weight_.LogWeightDiff(samples_[i].s, a.s) -
                       slopes_[seg] * LogRadiusDiff(samples_[i].s, a.s);
    gaps_[i] = std::max(gap, 0.0);
  }
}

double LogConvexEnvelope::r_min() const {
  return origin_ ? 0.0 : 1.0 - samples_.front().s;
}

double LogConvexEnvelope::r_max() const { return 1.0 - samples_.back().s; }

double LogConvexEnvelope::Slope(std::size_t i) const { return slopes_[i]; }

double LogConvexEnvelope::LogValueAt(double u) const {
  if (u == -kInf && origin_) return *origin_;
  const double lo = node(0).u;
  const double hi = node(node_count() - 1).u;
  if (!(u >= lo && u <= hi)) {
    throw DomainError(fmt::format("envelope evaluated at log r={} outside [{}, {}]", u, lo, hi));
  }
  // First node with u_node >= u.
  auto it = std::partition_point(hull_.begin(), hull_.end(),
                                 [&](std::size_t idx) { return samples_[idx].u < u; });
  auto i = static_cast<std::size_t>(it - hull_.begin());
  if (node(i).u == u) return node(i).v;
  return node(i - 1).v + (u - node(i - 1).u) * Slope(i - 1);
}

std::pair<double, double> LogConvexEnvelope::SlopesAt(double u) const {
  const std::size_t last = node_count() - 1;
  auto it = std::partition_point(hull_.begin(), hull_.end(),
                                 [&](std::size_t idx) { return samples_[idx].u < u; });
  auto i = static_cast<std::size_t>(it - hull_.begin());
  if (i > last) return {Slope(last - 1), Slope(last - 1)};
  if (node(i).u == u) {
    const double left = i == 0 ? Slope(0) : Slope(i - 1);
    const double right = i == last ? Slope(last - 1) : Slope(i);
    return {left, right};
  }
  if (i == 0) return {Slope(0), Slope(0)};
  return {Slope(i - 1), Slope(i - 1)};
}

LogConvexEnvelope build_envelope(const WeightFunction& w, std::span<const double> grid) {
  if (grid.size() < 16) {
    throw GridError(fmt::format("envelope grid needs at least 16 points, got {}", grid.size()));
  }
  std::vector<LogLogPoint> samples;
  samples.reserve(grid.size());
  std::optional<double> origin;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    if (!(s > 0.0 && s <= 1.0)) throw GridError(fmt::format("grid value s={} outside (0,1]", s));
    if (i > 0 && !(s < grid[i - 1])) throw GridError("grid s values must be strictly decreasing");
    if (s == 1.0) {
      origin = w.LogWeight(1.0);
      continue;
    }
    samples.push_back({s, std::log1p(-s), w.LogWeight(s)});
  }
  if (samples.size() < 2) throw GridError("envelope grid needs two points with r > 0");

  std::vector<std::size_t> hull;
  hull.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    while (hull.size() >= 2 &&
           SegmentSlope(w, samples[hull[hull.size() - 2]], samples[hull.back()]) >=
               SegmentSlope(w, samples[hull.back()], samples[i])) {
      hull.pop_back();
    }
    hull.push_back(i);
  }
  return LogConvexEnvelope(w, std::move(samples), std::move(hull), origin);
}

DefectReport logconvexity_defect(const WeightFunction& w, const LogConvexEnvelope& env) {
  DefectReport report;
  if (env.origin_log_w()) {
    report.log_defect = w.LogWeight(1.0) - *env.origin_log_w();
  } else {
    report.log_defect = -kInf;
  }
  for (std::size_t i = 0; i < env.samples().size(); ++i) {
    const auto& p = env.samples()[i];
    // Zero correction when w is the envelope's own weight.
    const double gap = env.SampleGap(i) + (w.LogWeight(p.s) - env.weight().LogWeight(p.s));
    if (gap > report.log_defect) {
      report.log_defect = gap;
      report.argmax_s = p.s;
      report.argmax_r = 1.0 - p.s;
    }
  }
  report.defect = std::exp(report.log_defect);
  return report;
}

HadamardCoefficient hadamard_coefficient(const LogConvexEnvelope& env, double k) {
  if (!(k >= 0.0) || k != std::floor(k)) {
    throw DomainError(fmt::format("Hadamard coefficient needs integer k >= 0, got {}", k));
  }
  if (k == 0.0 && env.origin_log_w()) {
    return {*env.origin_log_w(), 1.0, 0};
  }
  // Slopes increase strictly, so the minimizer of v - k u is the first node
  // whose outgoing slope is >= k.
  std::size_t lo = 0;
  std::size_t hi = env.node_count() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (env.Slope(mid) < k) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  const auto& n = env.node(lo);
  return {n.v - k * n.u, n.s, lo};
}

double CoefficientSequence::LogTerm(std::size_t j, double u) const {
  const auto& e = entries[j];
  if (e.k == 0.0) return e.log_a;
  if (u == -kInf) return -kInf;
  return e.log_a + e.k * u;
}

double CoefficientSequence::LogMaxTerm(double u) const {
  double best = -kInf;
  for (std::size_t j = 0; j < entries.size(); ++j) best = std::max(best, LogTerm(j, u));
  return best;
}

double log_term_over_weight(const CoefficientEntry& e, const WeightFunction& w, double s) {
  if (!(e.tangency_s > 0.0)) {
    // No tangency recorded: fall back to absolute logs.
    const double term = e.k == 0.0 ? e.log_a : e.log_a + e.k * std::log1p(-s);
    return term - w.LogWeight(s);
  }
  double rel = -w.LogWeightDiff(s, e.tangency_s);
  if (e.k != 0.0) rel += e.k * LogRadiusDiff(s, e.tangency_s);
  return rel;
}

CoverageReport coverage_margin(const CoefficientSequence& c, const LogConvexEnvelope& env) {
  const double log_c = std::log(c.crossover);
  CoverageReport report;
  report.margin = kInf;
  for (const auto& t : CoverageTargets(env)) {
    double best = -kInf;
    for (const auto& e : c.entries) best = std::max(best, CoverValue(e, env.weight(), t, log_c));
    if (best < report.margin) {
      report.margin = best;
      report.argmin_s = t.s;
    }
  }
  return report;
}

CoefficientSequence greedy_lacunary(const LogConvexEnvelope& env, double crossover_factor,
                                    double k_max, GreedyStats* stats) {
  if (!(crossover_factor >= 1.5 && crossover_factor <= 4.0)) {
    throw ConfigError(fmt::format("crossover factor must lie in [1.5, 4], got {}", crossover_factor));
  }
  if (!(k_max >= 1.0)) throw ConfigError("k_max must be at least 1");
  const double log_c = std::log(crossover_factor);
  const auto& w = env.weight();
  const auto targets = CoverageTargets(env);

  CoefficientSequence seq;
  seq.crossover = crossover_factor;
  seq.weight = w.spec();
  auto make_entry = [&](double k) {
    auto h = hadamard_coefficient(env, k);
    return CoefficientEntry{k, h.log_a, h.tangency_s};
  };
  auto covers = [&](const CoefficientEntry& e, const Target& t) {
    return CoverValue(e, w, t, log_c) >= 0.0;
  };

  // Snap slopes within rounding of an integer before taking the floor.
  const double slope0 = env.origin_log_w() ? 0.0 : env.Slope(0);
  const double k0 = std::max(0.0, std::floor(slope0 * (1 + 1e-12) + 1e-12));
  if (k0 > k_max) {
    throw SlopeOverflow("initial slope exceeds k_max", seq, targets.front().s);
  }
  seq.entries.push_back(make_entry(k0));
  // Slopes above the last hull slope all touch the last node and cover less
  // the larger they get, so the search never needs to go past this.
  const double k_last = std::ceil(env.Slope(env.node_count() - 2));
  std::size_t holes = 0;

  std::size_t next = 0;  // first target not yet known to be covered
  while (true) {
    const auto& current = seq.entries.back();
    while (next < targets.size() && covers(current, targets[next])) ++next;
    if (next == targets.size()) break;

    const Target& t = targets[next];
    const double u_t = t.s == 1.0 ? -kInf : std::log1p(-t.s);
    auto [left, right] = env.SlopesAt(u_t);
    // Integer slopes next to the envelope slope at t give the smallest gap.
    double candidate = -1.0;
    double best_value = -kInf;
    double admissible = -1.0;  // best candidate within k_max
    double admissible_value = -kInf;
    for (double k : {std::floor(right), std::ceil(left), current.k + IntegerStep(current.k)}) {
      if (!(k > current.k)) continue;
      const double value = CoverValue(make_entry(k), w, t, log_c);
      if (candidate < 0 || value > best_value || (value == best_value && k > candidate)) {
        best_value = value;
        candidate = k;
      }
      if (k <= k_max && (admissible < 0 || value > admissible_value ||
                         (value == admissible_value && k > admissible))) {
        admissible_value = value;
        admissible = k;
      }
    }
    if (candidate > k_max) {
      if (admissible < 0 || admissible_value < 0.0) {
        const double covered_s = next == 0 ? 1.0 : targets[next - 1].s;
        throw SlopeOverflow(fmt::format("slope {} needed at s={} exceeds k_max={}", candidate,
                                        t.s, k_max),
                            seq, covered_s);
      }
      candidate = admissible;
    }
    auto feasible = [&](double k) { return covers(make_entry(k), t); };
    if (!feasible(candidate)) {
      // No integer slope reaches this sample within the crossover factor.
      ++holes;
      seq.entries.push_back(make_entry(candidate));
      ++next;
      continue;
    }
    // Feasible slopes form an interval; find its upper end below the cap.
    const double cap = std::max(candidate, std::min(k_max, k_last));
    double lo = candidate;
    double hi = kInf;
    double step = IntegerStep(lo);
    while (true) {
      const double probe = lo + step;
      if (probe > cap) {
        if (feasible(cap)) {
          lo = cap;
        } else {
          hi = cap;
        }
        break;
      }
      if (!feasible(probe)) {
        hi = probe;
        break;
      }
      lo = probe;
      step *= 2;
    }
    while (hi < kInf) {
      const double mid = std::floor(lo + (hi - lo) / 2);
      if (mid <= lo || mid >= hi) break;
      if (feasible(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    seq.entries.push_back(make_entry(lo));
  }
  if (stats) stats->coverage_holes = holes;
  return seq;
}

double eval_series_sq(const CoefficientSequence& c, double r) {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError(fmt::format("series evaluated at r={}", r));
  return eval_series_sq_at_s(c, 1.0 - r);
}

double eval_series_sq_at_s(const CoefficientSequence& c, double s) {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError(fmt::format("series evaluated at s={}", s));
  const double u = std::log1p(-s);
  double top = -kInf;
  for (std::size_t j = 0; j < c.entries.size(); ++j) top = std::max(top, 2 * c.LogTerm(j, u));
  if (top == -kInf) return -kInf;
  double sum = 0.0;
  for (std::size_t j = 0; j < c.entries.size(); ++j) sum += std::exp(2 * c.LogTerm(j, u) - top);
  return top + std::log(sum);
}

RatioReport verify_l2_equiv(const CoefficientSequence& c, const WeightFunction& w,
                            std::span<const double> grid, double tolerance) {
  const auto env = build_envelope(w, grid);
  RatioReport report;
  report.defect = logconvexity_defect(w, env).defect;
  report.log_min_ratio = kInf;
  report.log_max_ratio = -kInf;
  for (double s : grid) {
    const double log_ratio = LogSeriesSqOverWeight(c, w, s);
    if (log_ratio < report.log_min_ratio) {
      report.log_min_ratio = log_ratio;
      report.argmin_s = s;
    }
    if (log_ratio > report.log_max_ratio) {
      report.log_max_ratio = log_ratio;
      report.argmax_s = s;
    }
  }
  report.min_ratio = std::exp(report.log_min_ratio);
  report.max_ratio = std::exp(report.log_max_ratio);
  report.threshold = std::pow(report.defect * c.crossover, -2.0) - tolerance;
  report.pass = std::isfinite(report.log_max_ratio) && report.min_ratio >= report.threshold;
  return report;
}

}  // namespace harmapprox
