#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "harmapprox/envelope.hpp"
#include "harmapprox/signed_log.hpp"

namespace harmapprox {

// Dimension of the space of homogeneous harmonic polynomials of degree k in
// d variables: C(k+d-1, d-1) - C(k+d-3, d-1).
std::int64_t dim_harm(int k, int d);

// C_k^lambda(t) by the three-term recurrence. For lambda == 0 the Gegenbauer
// polynomials vanish identically for k >= 1; the Chebyshev polynomial T_k(t)
// is returned instead, which is the normalization the planar zonal kernel uses.
double gegenbauer(int k, double lambda, double t);

// Zonal profile Z_k(t) on the sphere, t = <x, y>, for all k = 0..k_max.
// d = 2: Z_0 = 1, Z_k = 2 T_k(t). d >= 3: Z_k = (k + l)/l C_k^l(t), l = (d-2)/2.
std::vector<double> ZonalProfile(int k_max, int d, double t);

// Reproducing kernel of degree-k spherical harmonics with pole y, extended to
// the ball as the homogeneous harmonic polynomial |x|^k Z_k(<x/|x|, y>).
double zonal(int k, int d, std::span<const double> x, std::span<const double> y);

// Normalized zonal harmonic Y_k = Z_k / sqrt(dim_harm(k, d)).
double y_k(int k, int d, std::span<const double> pole, std::span<const double> x);

double Dot(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> a);

struct ZonalBasis {
  int d = 2;
  std::vector<double> pole;
  double k_max = 0.0;
};

// f(x) = sum_j a_j Y_{k_j}(x) with Y_k the homogeneous zonal harmonic about
// the basis pole.
class AttainerFunction {
 public:
  AttainerFunction(ZonalBasis basis, CoefficientSequence coeffs);

  const ZonalBasis& basis() const { return basis_; }
  const CoefficientSequence& coeffs() const { return coeffs_; }

  // f at radius r along a unit direction. Terms smaller than the leading one
  // by more than e^-40 (including the sqrt(dim) sup bound of Y_k) are skipped.
  SignedLog Evaluate(double r, std::span<const double> direction) const;

  // log M_2^2(f, r) = log sum_j a_j^2 r^(2 k_j), from orthonormality.
  double LogM2SquaredClosed(double r) const;

  // Indices of terms that matter at radius r (relative cut e^-40 on |f|).
  std::vector<std::size_t> RetainedTerms(double r) const;

 private:
  ZonalBasis basis_;
  CoefficientSequence coeffs_;
};

AttainerFunction build_l2_attainer(const CoefficientSequence& c, int d,
                                   std::vector<double> pole);

// Normalized sphere rule: sum of weights is 1.
struct SphereRule {
  int d = 2;
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;
  int exact_degree = -1;  // -1 for Monte Carlo
};

// Gauss-Legendre nodes and weights on [-1, 1].
void GaussLegendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// d = 2: n equispaced angles, exact for trigonometric degree <= n - 1.
SphereRule CircleRule(int n);
// d = 3: Gauss-Legendre in cos(theta) x equispaced phi.
SphereRule ProductRule3(int theta_nodes, int phi_nodes);
// Uniform random directions, deterministic for a seed.
SphereRule MonteCarloRule(int d, int samples, std::uint64_t seed);

// Seeded uniform directions on the unit sphere of R^d.
std::vector<std::vector<double>> UniformDirections(int d, int count, std::uint64_t seed);

struct QuadratureSpec {
  int angle_nodes = 0;  // d = 2; 0 picks the minimal exact rule
  int theta_nodes = 0;  // d = 3
  int phi_nodes = 0;    // d = 3
  int mc_samples = 200000;
  std::uint64_t seed = 42;
};

struct M2Estimate {
  double log_m2_sq = 0.0;
  double rel_std_error = 0.0;  // zero for exact rules
  int degree = 0;              // polynomial degree integrated
  std::size_t nodes = 0;
};

// Numerical M_2^2(f, r) over the sphere. Throws QuadratureOrderError when the
// requested rule cannot integrate |f|^2 exactly.
M2Estimate m2_quadrature(const AttainerFunction& f, double r, const QuadratureSpec& spec = {});

}  // namespace harmapprox
