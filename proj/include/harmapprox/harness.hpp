#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "harmapprox/blocks.hpp"
#include "harmapprox/construction.hpp"
#include "harmapprox/weights.hpp"

namespace harmapprox {

struct SampleSpec {
  int radii_per_band = 8;
  int directions = 64;
  int max_band = 3;  // bands m = 0..max_band-1, each with J sub-bands j
  std::uint64_t seed = 42;

  bool operator==(const SampleSpec&) const = default;
};

// A sample with 1 - |x| = 2^one_minus_r_exp. Band -1 marks the center batch.
struct SamplePoint {
  int m = -1;
  int j = -1;
  int K = -1;
  double one_minus_r_exp = 0.0;
  int direction_index = 0;
  BallPoint x;
};

// Band samples: per (m, j), radii geometric across the closed band with both
// endpoints, crossed with the directions. Then a center batch with
// 1 - |x| >= 2^(-alpha-n_0). Ordered by band, then radius, then direction.
std::vector<SamplePoint> sample_bands(const ConstructionPlan& plan, const SampleSpec& spec);

// Unit directions used by the sampler: equispaced for d = 2, seeded otherwise.
std::vector<std::vector<double>> SampleDirections(int d, int count, std::uint64_t seed);

struct SampleRow {
  int band_m = -1;
  int band_j = -1;
  double one_minus_r_exp = 0.0;
  int direction_index = 0;
  double log_S = 0.0;
  double log_Phi = 0.0;
  double ratio = 0.0;

  bool operator==(const SampleRow&) const = default;
};

struct BandSummary {
  int m = 0;
  int j = 0;
  std::size_t count = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  SampleRow min_witness;
  SampleRow max_witness;
  bool pass = true;

  bool operator==(const BandSummary&) const = default;
};

struct VerificationReport {
  std::string weight;
  int d = 2;
  SampleSpec spec;
  double c_low = 0.0;   // theoretical
  double c_high = 0.0;
  double tol = 0.0;     // log-scale tolerance
  double c_low_meas = 0.0;
  double c_high_meas = 0.0;
  SampleRow low_witness;
  SampleRow high_witness;
  std::vector<BandSummary> bands;

  // Center batch: log margins against [min(1, c_low Phi), c_high Phi + 1].
  double center_low_margin = 0.0;
  double center_high_margin = 0.0;
  SampleRow center_witness;  // point of the smaller margin
  bool center_pass = true;

  // sum_q |F_{q,j}(x)| / Phi for the active j alone.
  double jlow_min_ratio = 0.0;
  SampleRow jlow_witness;
  bool jlow_pass = true;

  // max_q |u_{q,n_K}(x)| at band samples, expected >= 1/4.
  double attribution_min = 0.0;
  SampleRow attribution_witness;
  bool attribution_pass = true;

  bool corridor_pass = true;
  bool pass = true;
  std::vector<SampleRow> rows;

  bool operator==(const VerificationReport&) const = default;
};

// Evaluates S(x)/Phi(1/(1-|x|)) at every sample and checks the two-sided
// corridor from theoretical_bounds, the single-j lower bound and the
// attribution of the dominant block.
VerificationReport verify_construction(const ConstructionPlan& plan,
                                       std::shared_ptr<const BlockFamily> family,
                                       const WeightFunction& w, const SampleSpec& spec = {});

std::string ReportCsv(const VerificationReport& report);
void emit_report_csv(const VerificationReport& report, const std::string& path);

}  // namespace harmapprox
