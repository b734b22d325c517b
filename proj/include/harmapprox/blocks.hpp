#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "harmapprox/signed_log.hpp"

namespace harmapprox {

// Point of the open unit ball stored as (1 - |x|, x/|x|). The distance to the
// boundary is carried exactly; |x| itself is never formed near the sphere.
struct BallPoint {
  double s = 1.0;
  std::vector<double> direction;

  std::vector<double> Cartesian() const;
  static BallPoint FromCartesian(std::span<const double> x);
};

// Building blocks u_{q,n}, q = 1..Q, n = 0, 1, ... with
//   |u_{q,n}| <= 1 on the ball,
//   max_q |u_{q,n}(x)| >= 1/4 when 0 < 1 - |x| < 2^(-alpha-n),
//   |u_{q,n}(x)| <= C(p,d) 2^(-np) (1 - |x|)^(-p).
class BlockFamily {
 public:
  virtual ~BlockFamily() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int width() const = 0;         // Q
  virtual int shell_offset() const = 0;  // alpha
  virtual double decay_constant(int p) const = 0;
  virtual SignedLog Evaluate(int q, int n, const BallPoint& x) const = 0;
};

// u_{1,n} = Re z^(2^n), u_{2,n} = Im z^(2^n) on the unit disk. alpha = 1, Q = 2.
class DiskBlockFamily final : public BlockFamily {
 public:
  std::string name() const override { return "disk"; }
  int dim() const override { return 2; }
  int width() const override { return 2; }
  int shell_offset() const override { return 1; }
  double decay_constant(int p) const override;
  SignedLog Evaluate(int q, int n, const BallPoint& x) const override;
};

// Another family multiplied by a constant factor.
class ScaledBlockFamily final : public BlockFamily {
 public:
  ScaledBlockFamily(std::shared_ptr<const BlockFamily> base, double factor);

  std::string name() const override;
  int dim() const override { return base_->dim(); }
  int width() const override { return base_->width(); }
  int shell_offset() const override { return base_->shell_offset(); }
  double decay_constant(int p) const override;
  SignedLog Evaluate(int q, int n, const BallPoint& x) const override;

 private:
  std::shared_ptr<const BlockFamily> base_;
  double factor_;
};

// Candidate for d >= 3: Re and Im of (x_a + i x_b)^(2^n) over every coordinate
// plane (a, b). Bounded and decaying, but off all planes |x_a + i x_b| < |x|
// and the shell lower bound collapses as n grows.
class PlanarRotationFamily final : public BlockFamily {
 public:
  explicit PlanarRotationFamily(int d);

  std::string name() const override { return "planar-rotations"; }
  int dim() const override { return d_; }
  int width() const override { return 2 * static_cast<int>(planes_.size()); }
  int shell_offset() const override { return 1; }
  double decay_constant(int p) const override;
  SignedLog Evaluate(int q, int n, const BallPoint& x) const override;

 private:
  int d_;
  std::vector<std::pair<int, int>> planes_;
};

// u_{q,n}(x) of the disk family for a plain value; never NaN, underflows to 0.
double disk_block_eval(int q, int n, const BallPoint& x);

// C(p, 2) = (p/e)^p, the sup of t^p e^-t.
double decay_constant(int p);

struct CertificationSpec {
  int shell_radii = 64;       // geometric in the shell below 2^(-alpha-n)
  int directions = 256;       // d = 2 equispaced, d >= 3 seeded uniform
  int general_radii = 64;     // 1 - |x| geometric over [2^-40, 1]
  std::uint64_t seed = 42;
};

struct AxiomResult {
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();  // log scale
  int q = 0;
  int n = 0;
  BallPoint witness;
  double witness_value = 0.0;  // |u| (max over q for the shell axiom)
  std::size_t checked = 0;
};

struct CertificationReport {
  std::string family;
  int dim = 0;
  int p = 0;
  std::vector<int> n_list;
  CertificationSpec spec;
  double decay_constant = 0.0;
  AxiomResult bounded;      // |u| <= 1
  AxiomResult shell;        // max_q |u| >= 1/4 on the shell
  AxiomResult decay;        // |u| <= C 2^-np (1-|x|)^-p

  bool pass() const { return bounded.pass && shell.pass && decay.pass; }
};

// Samples the three block inequalities for every n in n_list. Margins are
// log(rhs) - log(lhs) so a negative worst margin marks a violation.
CertificationReport certify_block_family(const BlockFamily& family, int p,
                                         std::span<const int> n_list,
                                         const CertificationSpec& spec = {});

}  // namespace harmapprox
