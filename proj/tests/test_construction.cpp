#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <doctest.h>

#include "harmapprox/blocks.hpp"
#include "harmapprox/construction.hpp"
#include "harmapprox/errors.hpp"
#include "harmapprox/serialization.hpp"
#include "harmapprox/weights.hpp"

using namespace harmapprox;

namespace {

const auto kDisk = std::make_shared<DiskBlockFamily>();

ConstructionPlan Plan(const char* spec, int bands = 4) {
  PlanOptions o;
  o.bands = bands;
  return build_plan(WeightFunction::Parse(spec), *kDisk, o);
}

// Largest j with log Phi(2^j) <= k log A, by linear scan.
long ScanN(const WeightFunction& w, double A, int k) {
  long j = 0;
  while (w.LogWeight(std::ldexp(1.0, static_cast<int>(-(j + 1)))) <= k * std::log(A) + 1e-12) ++j;
  return j;
}

BallPoint At(double s, double angle) { return {s, {std::cos(angle), std::sin(angle)}}; }

}  // namespace

TEST_CASE("choose_p: minimal p with 2A <= 2^p") {
  CHECK(choose_p(2) == 2);
  CHECK(choose_p(4) == 3);
  CHECK(choose_p(8) == 4);
  CHECK(choose_p(16) == 5);
  CHECK(choose_p(2.5) == 3);
  CHECK(choose_p(2 * (1 + 1e-15)) == 2);
  for (double A = 2; A < 1000; A *= 1.37) {
    const int p = choose_p(A);
    CHECK(2 * A <= std::ldexp(1.0, p) * (1 + 1e-12));
    CHECK(2 * A > std::ldexp(1.0, p - 1));
  }
  CHECK_THROWS_AS(choose_p(1.5), DomainError);
}

TEST_CASE("choose_j examples and minimality") {
  const double c2 = std::pow(2 / std::exp(1.0), 2);
  CHECK(choose_j(2, c2, 1, 2.0) == 8);
  CHECK_FALSE(TailCondition(7, 2, c2, 1));
  CHECK(TailCondition(8, 2, c2, 1));
  CHECK_FALSE(DominanceCondition(4, 2.0));
  CHECK(DominanceCondition(5, 2.0));

  CHECK(choose_j(3, std::pow(3 / std::exp(1.0), 3), 1, 4.0) == 11);
  // Without a tail constant J is set by A^(J-1) >= 16 alone.
  CHECK(choose_j(2, 0.0, 1, 2.0) == 5);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double A = 2 + 30 * u(rng);
    const int p = choose_p(A);
    const double C = decay_constant(p) * (0.1 + u(rng));
    const int alpha = 1 + trial % 3;
    const int J = choose_j(p, C, alpha, A);
    CHECK(TailCondition(J, p, C, alpha));
    CHECK(DominanceCondition(J, A));
    CHECK_FALSE((TailCondition(J - 1, p, C, alpha) && DominanceCondition(J - 1, A)));
  }
}

TEST_CASE("compute_nk") {
  const auto pow1 = WeightFunction::Power(1);
  const auto n1 = compute_nk(pow1, 2, 40);
  for (int k = 0; k < 40; ++k) CHECK(n1[k] == k);
  const auto n2 = compute_nk(pow1, 4, 40);
  for (int k = 0; k < 40; ++k) CHECK(n2[k] == 2 * k);
  const auto n3 = compute_nk(WeightFunction::Power(2), 4, 40);
  for (int k = 0; k < 40; ++k) CHECK(n3[k] == k);

  for (const auto& w : {WeightFunction::LogPower(2), WeightFunction::LogPower(0.5),
                        WeightFunction::Power(1.5), WeightFunction::Power(0.3)}) {
    const double A = std::max(2.0, estimate_doubling(w).A);
    // Slowly growing weights push n_k past the double range after a few terms.
    const int count = w.kind() == WeightKind::kLogPower ? 4 : 30;
    const auto n = compute_nk(w, A, count);
    for (std::size_t k = 0; k < n.size(); ++k) {
      CAPTURE(w.spec());
      CAPTURE(k);
      CHECK(n[k] == ScanN(w, A, static_cast<int>(k)));
      for (std::size_t l = 1; k + l < n.size(); ++l) CHECK(n[k + l] - n[k] >= static_cast<long>(l));
    }
  }
  // A below the true doubling constant cannot give a strictly increasing n.
  CHECK_THROWS_AS(compute_nk(WeightFunction::Power(3), 2, 10), NotDoubling);
  CHECK_THROWS_AS(compute_nk(WeightFunction::Power(1).Scaled(2), 2, 10), DomainError);
}

TEST_CASE("build_plan") {
  SUBCASE("pow(beta=1) on the disk") {
    const auto plan = Plan("pow:beta=1");
    CHECK(plan.A == 2.0);
    CHECK(plan.p == 2);
    CHECK(plan.J == 8);
    CHECK(plan.T == 5);
    CHECK(plan.Q == 2);
    CHECK(plan.alpha == 1);
    CHECK(plan.d == 2);
    for (std::size_t k = 0; k < plan.n.size(); ++k) CHECK(plan.n[k] == static_cast<long>(k));
    CHECK(plan.MaxBand() >= 4);
  }
  SUBCASE("pow(beta=2)") {
    const auto plan = Plan("pow:beta=2");
    CHECK(plan.A == 4.0);
    CHECK(plan.p == 3);
    CHECK(plan.J == 11);
    for (std::size_t k = 0; k < plan.n.size(); ++k) CHECK(plan.n[k] == static_cast<long>(k));
  }
  SUBCASE("A override") {
    PlanOptions o;
    o.A_override = 4.0;
    const auto plan = build_plan(WeightFunction::Power(1), *kDisk, o);
    CHECK(plan.A == 4.0);
    CHECK(plan.n[5] == 10);
  }
  SUBCASE("exppow is rejected") {
    CHECK_THROWS_AS(Plan("exppow:gamma=1"), NotDoubling);
  }
  SUBCASE("scaling the weight leaves the plan unchanged") {
    const auto a = build_plan(WeightFunction::Power(1.5), *kDisk);
    auto b = build_plan(WeightFunction::Power(1.5).Scaled(3.7), *kDisk);
    b.weight = a.weight;
    CHECK(a == b);
  }
  SUBCASE("out-of-range scale and bad options") {
    // log(1 - log s) growth needs 1 - |x| far below the smallest double.
    CHECK_THROWS_AS(Plan("logpow:gamma=2"), DomainError);
    CHECK_THROWS_AS(Plan("pow:beta=1", 3000), ConfigError);
    PlanOptions o;
    o.tail_eps = 0.0;
    CHECK_THROWS_AS(build_plan(WeightFunction::Power(1), *kDisk, o), ConfigError);
  }
  SUBCASE("JSON round trip") {
    const auto plan = Plan("pow:beta=1.5");
    CHECK(PlanFromJson(ToJson(plan)) == plan);
  }
}

TEST_CASE("theoretical bounds") {
  const auto plan = Plan("pow:beta=1");
  const auto b = theoretical_bounds(plan);
  CHECK(b.c_low == 0.03125);
  CHECK(b.c_high == doctest::Approx(2 * 2 * (1 + 2 * std::pow(2 / std::exp(1.0), 2) * 4)));
  CHECK(b.c_high == doctest::Approx(21.3229).epsilon(1e-5));
  ConstructionPlan degenerate = plan;
  degenerate.Q = 1;
  degenerate.C_pd = 0.0;
  CHECK(theoretical_bounds(degenerate).c_high == plan.A);
}

TEST_CASE("band index") {
  const auto plan = Plan("pow:beta=0.5");
  const HarmonicSum hs(plan, kDisk);
  CHECK(hs.BandIndex(1.0) == -1);
  CHECK(hs.BandIndex(0.5 + 1e-9) == -1);
  CHECK(hs.BandIndex(0.5) == 0);
  for (int K = 0; K + 1 < static_cast<int>(plan.n.size()); ++K) {
    const double edge = std::ldexp(1.0, static_cast<int>(-plan.alpha - plan.n[K]));
    const double next = std::ldexp(1.0, static_cast<int>(-plan.alpha - plan.n[K + 1]));
    CHECK(hs.BandIndex(edge) == K);
    CHECK(hs.InClosedBand(K, edge));
    CHECK(hs.InClosedBand(K, next));
    CHECK_FALSE(hs.InClosedBand(K, edge * 1.0001));
    CHECK(hs.BandIndex(std::sqrt(edge * next)) == K);
  }
  CHECK_THROWS_AS(HarmonicSum(Plan("pow:beta=1"), std::make_shared<PlanarRotationFamily>(3)),
                  ConfigError);
}

TEST_CASE("harmonic sum evaluation") {
  const auto w = WeightFunction::Power(1);
  const auto plan = Plan("pow:beta=1");
  const HarmonicSum hs(plan, kDisk);
  const auto b = theoretical_bounds(plan);

  SUBCASE("origin") {
    const auto e = hs.Evaluate(At(1.0, 0.0));
    CHECK(e.log_S == 0.0);
    CHECK(e.K == -1);
  }
  SUBCASE("two-sided bound and band-edge consistency") {
    for (int K = 0; K < plan.J * 4; ++K) {
      const double edge = std::ldexp(1.0, static_cast<int>(-plan.alpha - plan.n[K]));
      for (int a = 0; a < 32; ++a) {
        const auto x = At(edge, 2 * M_PI * a / 32);
        const auto e = hs.Evaluate(x, K);
        const double ratio = std::exp(e.log_S - w.LogWeight(edge));
        CHECK(ratio >= b.c_low);
        CHECK(ratio <= b.c_high);
        for (const auto& row : e.scaled_abs_F) {
          for (double f : row) CHECK(f <= b.c_high / plan.Q * plan.A);
        }
        if (K > 0) CHECK(std::abs(hs.Evaluate(x, K - 1).log_S - e.log_S) < plan.tail_eps);
      }
    }
    CHECK_THROWS_AS(hs.Evaluate(At(0.1, 0.0), 20), DomainError);
    CHECK_THROWS_AS(hs.Evaluate(At(0.0, 0.0)), DomainError);
  }
  SUBCASE("decomposition around the dominant term") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
      const double s = std::exp2(-plan.alpha - plan.J * 4 * u(rng));
      const auto x = At(s, 2 * M_PI * u(rng));
      const auto e = hs.Evaluate(x);
      if (e.K < 0) continue;
      double best_f2 = 0.0;
      for (int q = 1; q <= plan.Q; ++q) {
        const auto d = hs.Decompose(x, q, e.K);
        CHECK(std::abs(d.f1 + d.f2 + d.f3) ==
              doctest::Approx(e.scaled_abs_F[q - 1][e.j]).epsilon(1e-12).scale(1e-12));
        CHECK(std::abs(d.f1) <= std::pow(plan.A, 1 - plan.J));
        CHECK(std::abs(d.f3) <= 1.0 / 16);
        best_f2 = std::max(best_f2, std::abs(d.f2));
      }
      CHECK(best_f2 >= 0.25);
      CHECK(best_f2 - std::pow(plan.A, 1 - plan.J) - 1.0 / 16 >= 1.0 / 8);
    }
  }
}

TEST_CASE("doubling the tail bands moves log S by less than tail_eps") {
  const auto plan = Plan("pow:beta=1.5", 8);
  ConstructionPlan longer = plan;
  longer.T = 2 * plan.T;
  const HarmonicSum a(plan, kDisk);
  const HarmonicSum b(longer, kDisk);
  REQUIRE(longer.MaxBand() >= 3);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lowest = std::ldexp(1.0, static_cast<int>(-plan.alpha - plan.n[plan.J * 4]));
  for (int i = 0; i < 1000; ++i) {
    const double s = std::exp(std::log(lowest) * u(rng));
    const auto x = At(s, 2 * M_PI * u(rng));
    CHECK(std::abs(a.Evaluate(x).log_S - b.Evaluate(x).log_S) < plan.tail_eps);
  }
}
