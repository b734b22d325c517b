#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "harmapprox/errors.hpp"
#include "harmapprox/weights.hpp"

namespace harmapprox {

// s_i = s_max * 2^(-i / points_per_dyad), from s_max down to s_min.
std::vector<double> GeometricGrid(double s_max, double s_min, int points_per_dyad);

// Default construction grid: s from 1 down to 2^-40, 16 points per dyad.
std::vector<double> DefaultGrid();

// log(1 - s1) - log(1 - s2), accurate when s1 and s2 are close.
double LogRadiusDiff(double s1, double s2);

// One grid sample in log-log coordinates. u = log r, v = log w(r).
// The sample s = 1 (r = 0) has u = -inf and is kept apart as the origin.
struct LogLogPoint {
  double s;
  double u;
  double v;
};

// Lower convex hull of log w as a function of log r on a grid.
//
// Slopes and gaps between w and its hull are formed from differences of
// nearby samples, never from two large absolute logs.
class LogConvexEnvelope {
 public:
  LogConvexEnvelope(WeightFunction weight, std::vector<LogLogPoint> samples,
                    std::vector<std::size_t> hull, std::optional<double> origin_log_w);

  const WeightFunction& weight() const { return weight_; }

  // Grid samples with r > 0, ordered by increasing r.
  const std::vector<LogLogPoint>& samples() const { return samples_; }
  // Indices into samples() of the hull vertices.
  const std::vector<std::size_t>& hull() const { return hull_; }
  const LogLogPoint& node(std::size_t i) const { return samples_[hull_[i]]; }
  std::size_t node_count() const { return hull_.size(); }

  // log w at r = 0 when the grid contained s = 1.
  const std::optional<double>& origin_log_w() const { return origin_; }

  double r_min() const;
  double r_max() const;

  // Slope of hull segment i (between node i and node i + 1).
  double Slope(std::size_t i) const;

  // Envelope value at u = log r inside [log r_min, log r_max].
  double LogValueAt(double u) const;
  // Envelope value at grid sample i.
  double LogValueAtSample(std::size_t i) const { return samples_[i].v - gaps_[i]; }
  // log w - envelope at grid sample i, >= 0 and zero on hull nodes.
  double SampleGap(std::size_t i) const { return gaps_[i]; }

  // Left and right derivative in u at u.
  std::pair<double, double> SlopesAt(double u) const;

 private:
  WeightFunction weight_;
  std::vector<LogLogPoint> samples_;
  std::vector<std::size_t> hull_;
  std::vector<double> slopes_;
  std::vector<double> gaps_;
  std::optional<double> origin_;
};

// Monotone-chain lower hull of (log r_i, log w(r_i)). `grid` lists s values,
// strictly decreasing, at least 16 of them. Throws GridError otherwise.
LogConvexEnvelope build_envelope(const WeightFunction& w, std::span<const double> grid);

struct DefectReport {
  double log_defect = 0.0;  // max over grid of log(w / envelope)
  double defect = 1.0;
  double argmax_r = 0.0;
  double argmax_s = 1.0;
};

// How far w is from its log-convex envelope on the envelope's grid.
DefectReport logconvexity_defect(const WeightFunction& w, const LogConvexEnvelope& env);

struct HadamardCoefficient {
  double log_a;           // log inf_r w~(r) / r^k
  double tangency_s;      // s at which the infimum is attained
  std::size_t tangency;   // hull node index (origin reported as node 0)
};

// a_k = inf over the grid of w~(r) / r^k; k is an integer-valued double.
HadamardCoefficient hadamard_coefficient(const LogConvexEnvelope& env, double k);

// Sparse power series sum_j a_j r^(k_j). Exponents are integer-valued doubles
// since steep weights need degrees beyond 2^64; a_j is stored as log a_j.
struct CoefficientEntry {
  double k;
  double log_a;
  double tangency_s;
};

struct CoefficientSequence {
  std::vector<CoefficientEntry> entries;
  double crossover = 2.0;
  std::string weight;

  // log(a_j r^k_j) with u = log r.
  double LogTerm(std::size_t j, double u) const;
  // max_j log(a_j r^k_j); r = 0 is passed as u = -inf.
  double LogMaxTerm(double u) const;
};

// log(a_j r^k_j / w(r)) at r = 1 - s, formed relative to the tangency
// sample of the entry: k (log r - log r_t) - (log w(s) - log w(s_t)).
double log_term_over_weight(const CoefficientEntry& e, const WeightFunction& w, double s);

struct CoverageReport {
  // min over the grid of log(max_j a_j r^k_j * crossover / envelope); >= 0
  // when every sample is covered.
  double margin = 0.0;
  double argmin_s = 1.0;
};

// The coverage test the greedy selection enforces, recomputed on the
// envelope's grid (origin included).
CoverageReport coverage_margin(const CoefficientSequence& c, const LogConvexEnvelope& env);

// Thrown when the greedy selection needs a slope above k_max.
class SlopeOverflow : public Error {
 public:
  SlopeOverflow(std::string what, CoefficientSequence partial, double covered_s)
      : Error(std::move(what)), partial_(std::move(partial)), covered_s_(covered_s) {}
  const CoefficientSequence& partial() const { return partial_; }
  // Smallest grid s still covered when selection stopped.
  double covered_s() const { return covered_s_; }

 private:
  CoefficientSequence partial_;
  double covered_s_;
};

struct GreedyStats {
  std::size_t coverage_holes = 0;  // grid points no integer slope could cover
};

// Lacunary selection of supporting lines with integer slopes such that
// max_j a_j r^k_j >= w~(r) / crossover_factor on every grid sample.
CoefficientSequence greedy_lacunary(const LogConvexEnvelope& env, double crossover_factor,
                                    double k_max, GreedyStats* stats = nullptr);

// log sum_j a_j^2 r^(2 k_j), accumulated relative to the largest term.
double eval_series_sq(const CoefficientSequence& c, double r);
// Same with r = 1 - s supplied through s.
double eval_series_sq_at_s(const CoefficientSequence& c, double s);

struct RatioReport {
  double log_min_ratio = 0.0;
  double log_max_ratio = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double argmin_s = 1.0;
  double argmax_s = 1.0;
  double defect = 1.0;
  double threshold = 0.0;  // (defect * crossover)^-2 - tolerance
  bool pass = false;
};

// Ratio sum_j a_j^2 r^(2 k_j) / w(r)^2 over the grid.
RatioReport verify_l2_equiv(const CoefficientSequence& c, const WeightFunction& w,
                            std::span<const double> grid, double tolerance = 1e-6);

}  // namespace harmapprox
