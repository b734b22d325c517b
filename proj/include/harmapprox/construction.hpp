#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "harmapprox/blocks.hpp"
#include "harmapprox/weights.hpp"

namespace harmapprox {

// Frozen parameters of the lacunary construction
//   F_{q,j}(x) = sum_k A^(Jk+j) u_{q, n_(Jk+j)}(x),  q = 1..Q, j = 0..J-1.
struct ConstructionPlan {
  std::string weight;
  int d = 2;
  double A = 2.0;
  int p = 1;
  int J = 1;
  int alpha = 1;
  int Q = 1;
  double C_pd = 0.0;
  std::vector<long> n;  // n_0 < n_1 < ...
  int T = 1;            // bands kept beyond the active one
  double tail_eps = 1e-9;

  // Largest band m the n-table supports, including the T tail bands.
  int MaxBand() const;

  bool operator==(const ConstructionPlan&) const = default;
};

// n_k = max{ j >= 0 : Phi(2^j) <= A^k }, k = 0..count-1, for a normalized
// weight. Throws NotDoubling when the sequence fails to increase strictly.
std::vector<long> compute_nk(const WeightFunction& w, double A, int count);

// Minimal p with 2A <= 2^p.
int choose_p(double A);

// C 2^(p(alpha+1)) / (2^J - 1) < 1/16: the tail of the series past the
// dominant term stays below A^(Jm)/16.
bool TailCondition(int J, int p, double C_pd, int alpha);
// A^(J-1) >= 16: the head of the series stays below A^(Jm)/16.
bool DominanceCondition(int J, double A);

// Minimal J with both conditions.
int choose_j(int p, double C_pd, int alpha, double A);

struct PlanOptions {
  std::optional<double> A_override;
  int bands = 4;         // bands m = 0..bands evaluable
  double tail_eps = 1e-9;
  int j_max = 60;        // doubling probe depth
  double cap = 1e6;      // doubling ratio treated as divergence
};

ConstructionPlan build_plan(const WeightFunction& w, const BlockFamily& family,
                            const PlanOptions& options = {});

struct SumEvaluation {
  double log_S = 0.0;  // log(1 + sum_{q,j} |F_{q,j}(x)|)
  int K = -1;          // global band index Jm + j, -1 in the central region
  int m = -1;
  int j = -1;
  // |F_{q,j}(x)| / A^max(K,0), indexed [q-1][j].
  std::vector<std::vector<double>> scaled_abs_F;
  double log_scale = 0.0;  // max(K,0) log A
};

// f1 + f2 + f3 split of F_{q,j}(x) around the dominant term k = m, scaled by
// A^-(Jm+j).
struct LowerDecomposition {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
};

class HarmonicSum {
 public:
  HarmonicSum(ConstructionPlan plan, std::shared_ptr<const BlockFamily> family);

  const ConstructionPlan& plan() const { return plan_; }
  const BlockFamily& family() const { return *family_; }

  // Band index K with 2^(-alpha-n_(K+1)) < s <= 2^(-alpha-n_K); -1 when
  // s > 2^(-alpha-n_0).
  int BandIndex(double s) const;

  // True when s lies in the closed band K.
  bool InClosedBand(int K, double s) const;

  // Optional band hint replaces BandIndex when s lies in that closed band.
  SumEvaluation Evaluate(const BallPoint& x, std::optional<int> band_hint = std::nullopt) const;

  LowerDecomposition Decompose(const BallPoint& x, int q, int K) const;

 private:
  ConstructionPlan plan_;
  std::shared_ptr<const BlockFamily> family_;
};

struct TheoreticalBounds {
  double c_low = 0.0;
  double c_high = 0.0;
};

// c_low = A^(-alpha-1)/8, c_high = A Q (1 + 2 C 2^(p alpha)).
TheoreticalBounds theoretical_bounds(const ConstructionPlan& plan);

}  // namespace harmapprox
