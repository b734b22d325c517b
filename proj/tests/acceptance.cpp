// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "harmapprox/blocks.hpp"
#include "harmapprox/construction.hpp"
#include "harmapprox/envelope.hpp"
#include "harmapprox/errors.hpp"
#include "harmapprox/harness.hpp"
#include "harmapprox/serialization.hpp"
#include "harmapprox/spherical.hpp"
#include "harmapprox/weights.hpp"

namespace ha = harmapprox;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kCorridorTol = 1e-6;      // relative, on both ends of the corridor
constexpr double kLowPow1 = 0.03125;
constexpr double kHighPow1 = 21.33;
constexpr double kRuntimeLimit = 60.0;     // seconds
constexpr double kL2Tol = 1e-6;            // additive slack on the L2 ratio threshold
constexpr double kZonalTol = 1e-9;         // relative, Z_k(y, y) = dim
constexpr double kNormTol = 1e-8;          // sup and L2 norm of Y_k
constexpr double kM2Tol = 1e-6;            // quadrature vs closed form, relative
constexpr double kDefectTol = 1e-6;        // log-convexity defect of log M2

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void Report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, fmt::format("exception: {}", e.what())};
  }
  if (!o.pass) ++failures;
  fmt::print("{} {}: {} ({})\n", o.pass ? "PASS" : "FAIL", id, title, o.detail);
  std::fflush(stdout);
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(HARMAPPROX_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const auto kDisk = std::make_shared<ha::DiskBlockFamily>();

// Laplacian nullity on degree-k monomials in d variables, exact over GF(2^31 - 1).
std::int64_t LaplacianNullity(int d, int k) {
  std::vector<std::vector<int>> cols;
  std::vector<std::vector<int>> rows;
  std::function<void(std::vector<int>&, int, int, std::vector<std::vector<int>>&)> gen =
      [&](std::vector<int>& cur, int i, int left, std::vector<std::vector<int>>& out) {
        if (i == d - 1) {
          cur[i] = left;
          out.push_back(cur);
          return;
        }
        for (int a = left; a >= 0; --a) {
          cur[i] = a;
          gen(cur, i + 1, left - a, out);
        }
      };
  std::vector<int> cur(d);
  gen(cur, 0, k, cols);
  if (k < 2) return static_cast<std::int64_t>(cols.size());
  gen(cur, 0, k - 2, rows);
  constexpr std::int64_t P = 2147483647;
  std::vector<std::vector<std::int64_t>> m(rows.size(), std::vector<std::int64_t>(cols.size(), 0));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (int i = 0; i < d; ++i) {
      if (cols[c][i] < 2) continue;
      auto t = cols[c];
      t[i] -= 2;
      const auto r = std::find(rows.begin(), rows.end(), t) - rows.begin();
      m[static_cast<std::size_t>(r)][c] += cols[c][i] * (cols[c][i] - 1);
    }
  }
  auto inv = [&](std::int64_t a) {
    std::int64_t r = 1;
    std::int64_t e = P - 2;
    while (e) {
      if (e & 1) r = r * a % P;
      a = a * a % P;
      e >>= 1;
    }
    return r;
  };
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols.size() && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && m[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(m[piv], m[rank]);
    const std::int64_t iv = inv(m[rank][c]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || m[r][c] == 0) continue;
      const std::int64_t f = m[r][c] * iv % P;
      for (std::size_t j = c; j < cols.size(); ++j) m[r][j] = ((m[r][j] - f * m[rank][j]) % P + P) % P;
    }
    ++rank;
  }
  return static_cast<std::int64_t>(cols.size() - rank);
}

// Average over S^{d-1} of Y_k(<x, pole>)^2 via the one-dimensional reduction.
double YkSquaredAverage(int k, int d) {
  const double dim = static_cast<double>(ha::dim_harm(k, d));
  auto g = [&](double t) {
    const double z = ha::ZonalProfile(k, d, t)[static_cast<std::size_t>(k)];
    return z * z / dim;
  };
  double num = 0.0;
  double den = 0.0;
  if (d % 2 == 1) {
    std::vector<double> t;
    std::vector<double> w;
    ha::GaussLegendre(k + d + 2, t, w);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double dens = std::pow(1 - t[i] * t[i], (d - 3) / 2);
      num += w[i] * dens * g(t[i]);
      den += w[i] * dens;
    }
  } else {
    const int n = 2 * k + d + 2;
    for (int i = 0; i < n; ++i) {
      const double th = 2 * M_PI * i / n;
      const double dens = std::pow(std::sin(th), d - 2);
      num += dens * g(std::cos(th));
      den += dens;
    }
  }
  return num / den;
}

ha::CoefficientSequence Greedy(const ha::WeightFunction& w) {
  const auto env = ha::build_envelope(w, ha::DefaultGrid());
  auto c = ha::greedy_lacunary(env, 2.0, 1e30);
  c.weight = w.spec();
  return c;
}

Outcome CheckPlan(const char* spec, double A, int p, int J, bool check_nk, double low, double high) {
  const auto w = ha::normalize(ha::WeightFunction::Parse(spec));
  const auto plan = ha::build_plan(w, *kDisk);
  const auto b = ha::theoretical_bounds(plan);
  const auto r = ha::verify_construction(plan, kDisk, w);
  bool ok = plan.A == A && plan.p == p && plan.J == J && r.pass;
  if (check_nk) {
    for (std::size_t k = 0; k < plan.n.size(); ++k) ok = ok && plan.n[k] == static_cast<long>(k);
  }
  ok = ok && r.c_low_meas >= low * (1 - kCorridorTol) && r.c_high_meas <= high * (1 + kCorridorTol);
  ok = ok && r.c_low == b.c_low && r.c_high == b.c_high;
  return {ok, fmt::format("{}: A={} p={} J={} ratio in [{:.6g}, {:.6g}] vs [{:.6g}, {:.6g}], {} rows",
                          spec, plan.A, plan.p, plan.J, r.c_low_meas, r.c_high_meas, low, high,
                          r.rows.size())};
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / fmt::format("harmapprox_acceptance_{}", ::getpid());
  fs::create_directories(work);
  auto at = [&](const char* name) { return (work / name).string(); };

  Report(1, "pow:beta=1 two-sided estimate on the disk", [&] {
    const auto w = ha::WeightFunction::Power(1);
    const auto plan = ha::build_plan(w, *kDisk);
    const auto b = ha::theoretical_bounds(plan);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = ha::verify_construction(plan, kDisk, w);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = plan.A == 2 && plan.p == 2 && plan.J == 8 && r.pass;
    for (std::size_t k = 0; k < plan.n.size(); ++k) ok = ok && plan.n[k] == static_cast<long>(k);
    ok = ok && b.c_low == kLowPow1 && b.c_high <= kHighPow1;
    ok = ok && r.c_low_meas >= kLowPow1 * (1 - kCorridorTol) &&
         r.c_high_meas <= kHighPow1 * (1 + kCorridorTol);
    ok = ok && r.rows.size() == 12800 && secs <= kRuntimeLimit;
    // The CLI path with its defaults must agree.
    const int build = RunCli("construct build --weight pow:beta=1 --dim 2 --out " + at("p1.json"));
    const int verify = RunCli("construct verify --plan " + at("p1.json") + " --out " + at("p1.csv"));
    ok = ok && build == 0 && verify == 0;
    return Outcome{ok, fmt::format("ratio in [{:.6g}, {:.6g}] vs [{}, {}], {} points in {:.2f} s, "
                                   "cli exit {}/{}",
                                   r.c_low_meas, r.c_high_meas, kLowPow1, kHighPow1, r.rows.size(),
                                   secs, build, verify)};
  });

  Report(2, "pow:beta=2 and pow:beta=3 corridors; exppow:gamma=1 is not doubling", [&] {
    const double c4 = std::pow(3 / M_E, 3);
    const double c8 = std::pow(4 / M_E, 4);
    const auto o2 = CheckPlan("pow:beta=2", 4, 3, 11, true, std::pow(4.0, -2) / 8,
                              4 * 2 * (1 + 2 * c4 * 8));
    const auto o3 = CheckPlan("pow:beta=3", 8, 4, 15, true, std::pow(8.0, -2) / 8,
                              8 * 2 * (1 + 2 * c8 * 16));
    bool rejected = false;
    try {
      ha::build_plan(ha::WeightFunction::ExpPower(1), *kDisk);
    } catch (const ha::NotDoubling&) {
      rejected = true;
    }
    const int cli = RunCli("construct build --weight exppow:gamma=1 --dim 2 --out " + at("e.json"));
    return Outcome{o2.pass && o3.pass && rejected && cli == 1,
                   fmt::format("{}; {}; exppow NotDoubling {} cli exit {}", o2.detail, o3.detail,
                               rejected, cli)};
  });

  Report(3, "disk block certification and scaled negative control", [&] {
    std::vector<int> ns(21);
    for (int n = 0; n <= 20; ++n) ns[n] = n;
    bool ok = true;
    double worst = INFINITY;
    for (int p = 1; p <= 3; ++p) {
      const auto rep = ha::certify_block_family(*kDisk, p, ns);
      ok = ok && rep.pass() && rep.decay_constant == std::pow(p / M_E, p);
      for (const auto* a : {&rep.bounded, &rep.shell, &rep.decay}) {
        ok = ok && a->worst_margin > 0.0;
        worst = std::min(worst, a->worst_margin);
      }
    }
    const ha::ScaledBlockFamily scaled(kDisk, 1.1);
    const auto bad = ha::certify_block_family(scaled, 2, ns);
    const auto again = scaled.Evaluate(bad.bounded.q, bad.bounded.n, bad.bounded.witness);
    const bool caught = !bad.bounded.pass && again.sign != 0 && again.log_abs > 0.0;
    return Outcome{ok && caught,
                   fmt::format("smallest margin {:.4g}; scaled family witness |u| = {:.6g}", worst,
                               bad.bounded.witness_value)};
  });

  Report(4, "choose_j minimality", [&] {
    const double c = std::pow(2 / M_E, 2);
    const int J = ha::choose_j(2, c, 1, 2.0);
    const bool ok = J == 8 && !ha::TailCondition(7, 2, c, 1) && ha::TailCondition(8, 2, c, 1) &&
                    !ha::DominanceCondition(4, 2.0) && ha::DominanceCondition(5, 2.0);
    return Outcome{ok, fmt::format("J = {}", J)};
  });

  std::vector<ha::CoefficientSequence> attainers;
  Report(5, "greedy coefficients: coverage and L2 ratio", [&] {
    bool ok = true;
    std::string detail;
    const auto grid = ha::DefaultGrid();
    for (const char* spec : {"pow:beta=1", "exppow:gamma=0.5", "exppow:gamma=1"}) {
      const auto w = ha::WeightFunction::Parse(spec);
      const auto env = ha::build_envelope(w, grid);
      const auto c = Greedy(w);
      attainers.push_back(c);
      const auto cover = ha::coverage_margin(c, env);
      const auto defect = ha::logconvexity_defect(w, env);
      const auto ratio = ha::verify_l2_equiv(c, w, grid);
      const double threshold = 0.25 / (defect.defect * defect.defect) - kL2Tol;
      const bool pass = cover.margin >= 0.0 && ratio.min_ratio >= threshold &&
                        std::isfinite(ratio.max_ratio) && grid.back() == 0x1p-40;
      ok = ok && pass;
      detail += fmt::format("{}{}: {} terms, coverage margin {:.3g}, ratio [{:.6g}, {:.6g}]",
                            detail.empty() ? "" : "; ", spec, c.entries.size(), cover.margin,
                            ratio.min_ratio, ratio.max_ratio);
    }
    return Outcome{ok, detail};
  });

  Report(6, "spherical harmonics: dimensions, norms, M2 quadrature", [&] {
    bool ok = true;
    for (int d = 2; d <= 5; ++d)
      for (int k = 0; k <= 10; ++k) ok = ok && ha::dim_harm(k, d) == LaplacianNullity(d, k);
    const bool dims = ok;
    double zonal_err = 0.0;
    double norm_err = 0.0;
    for (int d = 2; d <= 5; ++d) {
      std::vector<double> y(d, 0.0);
      for (int i = 0; i < d; ++i) y[i] = 1.0 / std::sqrt(double(d));
      for (int k = 0; k <= 32; ++k) {
        const double dim = static_cast<double>(ha::dim_harm(k, d));
        zonal_err = std::max(zonal_err, std::abs(ha::zonal(k, d, y, y) - dim) / dim);
        norm_err = std::max(norm_err, std::abs(ha::y_k(k, d, y, y) - std::sqrt(dim)));
        norm_err = std::max(norm_err, std::abs(YkSquaredAverage(k, d) - 1.0));
      }
    }
    ok = ok && zonal_err <= kZonalTol && norm_err <= kNormTol;
    double m2_err = 0.0;
    for (const auto& c : attainers) {
      for (int d : {2, 3}) {
        std::vector<double> pole(d, 0.0);
        pole[0] = 1.0;
        const auto f = ha::build_l2_attainer(c, d, pole);
        for (int i = 1; i <= 9; ++i) {
          const double r = 0.1 * i;
          m2_err = std::max(m2_err, std::abs(std::expm1(ha::m2_quadrature(f, r).log_m2_sq -
                                                        f.LogM2SquaredClosed(r))));
        }
      }
    }
    ok = ok && !attainers.empty() && m2_err <= kM2Tol;
    return Outcome{ok, fmt::format("nullity match {}, zonal rel err {:.3g}, norm err {:.3g}, "
                                   "M2 rel err {:.3g} over {} attainers",
                                   dims, zonal_err, norm_err, m2_err, attainers.size())};
  });

  Report(7, "log M2 of every attainer is log-convex", [&] {
    const auto grid = ha::DefaultGrid();
    double worst = 0.0;
    for (const auto& c : attainers) {
      std::vector<double> v;
      v.reserve(grid.size());
      for (double s : grid) v.push_back(0.5 * ha::eval_series_sq_at_s(c, s));
      const auto m2 = ha::WeightFunction::Tabulated(grid, v, "log-M2:" + c.weight);
      const auto env = ha::build_envelope(m2, grid);
      worst = std::max(worst, ha::logconvexity_defect(m2, env).log_defect);
    }
    return Outcome{!attainers.empty() && worst <= kDefectTol,
                   fmt::format("largest log defect {:.3g} over {} attainers", worst, attainers.size())};
  });

  Report(8, "fixed seeds give byte-identical artifacts", [&] {
    bool ok = true;
    std::vector<std::string> names;
    auto twice = [&](const std::string& label, const std::string& args, const char* a, const char* b,
                     const char* extra_a = nullptr, const char* extra_b = nullptr) {
      std::string ea = extra_a ? std::string(" --json ") + at(extra_a) : "";
      std::string eb = extra_b ? std::string(" --json ") + at(extra_b) : "";
      const int r1 = RunCli(args + " --out " + at(a) + ea);
      const int r2 = RunCli(args + " --out " + at(b) + eb);
      bool same = r1 == r2 && Slurp(at(a)) == Slurp(at(b)) && !Slurp(at(a)).empty();
      if (extra_a) same = same && Slurp(at(extra_a)) == Slurp(at(extra_b));
      ok = ok && same;
      if (same) names.push_back(label);
    };
    twice("coeffs", "coeffs build --weight exppow:gamma=1", "c1.json", "c2.json");
    RunCli("l2 build --coeffs " + at("c1.json") + " --dim 4 --out " + at("att.json"));
    twice("l2-mc", "l2 verify --attainer " + at("att.json") + " --mc-samples 20000 --seed 7",
          "l1.csv", "l2.csv");
    twice("blocks", "blocks certify --dim 3 --p 2 --nmax 10 --seed 42", "b1.json", "b2.json");
    RunCli("construct build --weight pow:beta=2 --dim 2 --out " + at("plan.json"));
    twice("verify", "construct verify --plan " + at("plan.json") + " --seed 42", "v1.csv",
          "v2.csv", "v1.json", "v2.json");
    return Outcome{ok, fmt::format("identical: {}", fmt::join(names, ", "))};
  });

  fs::remove_all(work);
  return failures == 0 ? 0 : 1;
}
