#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace harmapprox {

enum class WeightKind { kPower, kLogPower, kExpPower, kTabulated };

// Radial weight function on [0,1), always addressed through s = 1 - r.
//
// The built-in families are
//   power:     w(r) = (1-r)^(-beta)
//   log-power: w(r) = log(e/(1-r))^gamma
//   exp-power: w(r) = exp((1-r)^(-gamma))
// and tabulated weights given by samples (s_i, log w(1-s_i)) with s_i
// strictly decreasing, interpolated linearly in (log s, log w).
//
// Instances are immutable. Copies share the sample table.
class WeightFunction {
 public:
  static WeightFunction Power(double beta);
  static WeightFunction LogPower(double gamma);
  static WeightFunction ExpPower(double gamma);
  static WeightFunction Tabulated(std::vector<double> s,
                                  std::vector<double> log_w,
                                  std::string source = "inline");

  // Parses `pow:beta=<f>`, `logpow:gamma=<f>`, `exppow:gamma=<f>` or
  // `table:<path>`. Throws ConfigError on malformed input.
  static WeightFunction Parse(std::string_view spec);

  WeightKind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  double normalization_offset() const { return offset_; }

  // Grammar string that reproduces the weight up to normalization.
  std::string spec() const;

  // log w(1 - s) including the normalization offset. Requires s in (0, 1].
  double LogWeight(double s) const;

  // LogWeight(s1) - LogWeight(s2) without cancellation between two large
  // logs; exact in value when s1 and s2 are close.
  double LogWeightDiff(double s1, double s2) const;

  // log Phi(x) = log w(1 - 1/x) for x >= 1.
  double LogPhi(double x) const;

  // Range of s on which the weight can be evaluated.
  double s_min() const;
  double s_max() const;

  // Same shape with log w shifted by `log_factor`.
  WeightFunction Scaled(double log_factor) const;

  // Offset chosen so that LogWeight(s_max()) == 0 exactly.
  WeightFunction Normalized() const;

 private:
  struct Table {
    std::vector<double> s;
    std::vector<double> log_s;
    std::vector<double> log_w;
    std::string source;
  };

  WeightFunction(WeightKind kind, double parameter, double offset,
                 std::shared_ptr<const Table> table)
      : kind_(kind), parameter_(parameter), offset_(offset),
        table_(std::move(table)) {}

  double RawLogWeight(double s) const;

  WeightKind kind_;
  double parameter_ = 0.0;
  double offset_ = 0.0;
  std::shared_ptr<const Table> table_;
};

inline double eval_log_weight(const WeightFunction& w, double s) {
  return w.LogWeight(s);
}

inline double phi(const WeightFunction& w, double x) { return w.LogPhi(x); }

// Shifts the weight so that w(0) = 1, i.e. LogWeight(1) == 0.
inline WeightFunction normalize(const WeightFunction& w) { return w.Normalized(); }

struct DoublingEstimate {
  double A = 1.0;          // measured sup of w(1-s/2)/w(1-s) on the probe grid
  double log_A = 0.0;      // kept separately; A overflows for divergent weights
  double A_clamped = 2.0;  // max(A, 2)
  bool divergent = false;
  double witness_s = 1.0;
  // max over x = 2^j of log Phi(2x) - log Phi(x)
  double phi_form_log_max = 0.0;
};

// Probes s = 2^(-j - i/8), 0 <= j <= j_max, i = 0..7, in log space.
DoublingEstimate estimate_doubling(const WeightFunction& w, int j_max = 60,
                                   double cap = 1e6);

// Reads a weight table: one `s logw` pair per line, '#' comments allowed.
WeightFunction LoadWeightTable(const std::string& path);

}  // namespace harmapprox
