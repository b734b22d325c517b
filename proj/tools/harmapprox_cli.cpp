// harmapprox command line: weight analysis, envelope and coefficient
// construction, L2 attainers, block certification and the lacunary
// construction with its verification harness.
//
// Exit codes: 0 all checks pass, 1 a check fails (or the weight is not
// doubling), 2 configuration or input error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
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

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfig = 2;

std::shared_ptr<const ha::BlockFamily> FamilyFor(int d) {
  if (d == 2) return std::make_shared<ha::DiskBlockFamily>();
  if (d >= 3) return std::make_shared<ha::PlanarRotationFamily>(d);
  throw ha::ConfigError(fmt::format("no block family for dimension {}", d));
}

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ha::ConfigError(fmt::format("bad number '{}' in list", item));
    }
  }
  if (out.empty()) throw ha::ConfigError("empty number list");
  return out;
}

std::vector<double> Grid(int smin_exp, int per_dyad) {
  if (smin_exp < 1 || smin_exp > 60) throw ha::ConfigError("--smin-exp must lie in [1, 60]");
  return ha::GeometricGrid(1.0, std::ldexp(1.0, -smin_exp), per_dyad);
}

const char* Verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic approximation of radial weights on the unit ball"};
  app.require_subcommand(1);

  // weights analyze
  auto* weights = app.add_subcommand("weights", "Radial weight utilities");
  weights->require_subcommand(1);
  auto* analyze = weights->add_subcommand("analyze", "Doubling constant and log-convexity defect");
  std::string weight_spec;
  std::string out_path;
  int jmax = 60;
  double cap = 1e6;
  analyze->add_option("--weight", weight_spec, "Weight grammar string")->required();
  analyze->add_option("--jmax", jmax, "Doubling probe depth")->capture_default_str();
  analyze->add_option("--cap", cap, "Ratio treated as divergence")->capture_default_str();
  analyze->add_option("--out", out_path, "Output JSON")->required();

  // envelope build
  auto* envelope = app.add_subcommand("envelope", "Log-convex envelope");
  envelope->require_subcommand(1);
  auto* env_build = envelope->add_subcommand("build", "Lower hull of log w against log r");
  int smin_exp = 40;
  int per_dyad = 16;
  env_build->add_option("--weight", weight_spec)->required();
  env_build->add_option("--smin-exp", smin_exp, "Grid reaches 1-r = 2^-E")->capture_default_str();
  env_build->add_option("--per-dyad", per_dyad, "Grid points per dyad")->capture_default_str();
  env_build->add_option("--out", out_path)->required();

  // coeffs build
  auto* coeffs = app.add_subcommand("coeffs", "Lacunary power series coefficients");
  coeffs->require_subcommand(1);
  auto* coeffs_build = coeffs->add_subcommand("build", "Greedy Hadamard coefficient selection");
  double crossover = 2.0;
  double kmax = 1e30;
  coeffs_build->add_option("--weight", weight_spec)->required();
  coeffs_build->add_option("--crossover", crossover)->capture_default_str();
  coeffs_build->add_option("--kmax", kmax, "Largest admissible exponent")->capture_default_str();
  coeffs_build->add_option("--smin-exp", smin_exp)->capture_default_str();
  coeffs_build->add_option("--per-dyad", per_dyad)->capture_default_str();
  coeffs_build->add_option("--out", out_path)->required();

  // l2 build / verify
  auto* l2 = app.add_subcommand("l2", "Zonal attainer with prescribed L2 means");
  l2->require_subcommand(1);
  auto* l2_build = l2->add_subcommand("build", "Attainer from a coefficient file");
  std::string coeffs_path;
  int dim = 2;
  l2_build->add_option("--coeffs", coeffs_path)->required();
  l2_build->add_option("--dim", dim)->required();
  l2_build->add_option("--out", out_path)->required();
  auto* l2_verify = l2->add_subcommand("verify", "Quadrature M2 against the closed form");
  std::string attainer_path;
  std::string grid_text = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  int mc_samples = 200000;
  std::uint64_t seed = 42;
  l2_verify->add_option("--attainer", attainer_path)->required();
  l2_verify->add_option("--grid", grid_text, "Comma separated radii")->capture_default_str();
  l2_verify->add_option("--mc-samples", mc_samples, "Monte Carlo nodes for d >= 4")
      ->capture_default_str();
  l2_verify->add_option("--seed", seed)->capture_default_str();
  l2_verify->add_option("--out", out_path)->required();

  // blocks certify
  auto* blocks = app.add_subcommand("blocks", "Building block families");
  blocks->require_subcommand(1);
  auto* certify = blocks->add_subcommand("certify", "Sample the three block inequalities");
  int p = 2;
  int nmax = 20;
  double scale = 1.0;
  ha::CertificationSpec cert_spec;
  certify->add_option("--dim", dim)->capture_default_str();
  certify->add_option("--p", p)->capture_default_str();
  certify->add_option("--nmax", nmax)->capture_default_str();
  certify->add_option("--seed", cert_spec.seed)->capture_default_str();
  certify->add_option("--scale", scale, "Multiply every block (negative control)")
      ->capture_default_str();
  certify->add_option("--dirs", cert_spec.directions)->capture_default_str();
  certify->add_option("--shell-radii", cert_spec.shell_radii)->capture_default_str();
  certify->add_option("--out", out_path)->required();

  // construct build / eval / verify
  auto* construct = app.add_subcommand("construct", "Lacunary harmonic construction");
  construct->require_subcommand(1);
  auto* c_build = construct->add_subcommand("build", "Plan (A, p, J, n_k) for a weight");
  ha::PlanOptions plan_opts;
  double a_override = 0.0;
  c_build->add_option("--weight", weight_spec)->required();
  c_build->add_option("--dim", dim)->capture_default_str();
  c_build->add_option("--tail-eps", plan_opts.tail_eps)->capture_default_str();
  c_build->add_option("--bands", plan_opts.bands, "Bands m the n-table supports")
      ->capture_default_str();
  c_build->add_option("--A", a_override, "Lower bound for the doubling constant");
  c_build->add_option("--out", out_path)->required();

  auto* c_eval = construct->add_subcommand("eval", "Evaluate 1 + sum |F_{q,j}| at one point");
  std::string plan_path;
  double one_minus_r_exp = -1.0;
  double angle = 0.0;
  std::string direction_text;
  c_eval->add_option("--plan", plan_path)->required();
  c_eval->add_option("--one-minus-r-exp", one_minus_r_exp, "1-|x| = 2^E")->required();
  c_eval->add_option("--angle", angle, "Polar angle for d = 2");
  c_eval->add_option("--direction", direction_text, "Comma separated direction for d >= 3");

  auto* c_verify = construct->add_subcommand("verify", "Two-sided estimate on sampled shells");
  ha::SampleSpec sample_spec;
  std::string json_path;
  c_verify->add_option("--plan", plan_path)->required();
  c_verify->add_option("--radii", sample_spec.radii_per_band)->capture_default_str();
  c_verify->add_option("--dirs", sample_spec.directions)->capture_default_str();
  c_verify->add_option("--bands", sample_spec.max_band)->capture_default_str();
  c_verify->add_option("--seed", sample_spec.seed)->capture_default_str();
  c_verify->add_option("--out", out_path, "CSV of all samples")->required();
  c_verify->add_option("--json", json_path, "Full report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (analyze->parsed()) {
      const auto w = ha::WeightFunction::Parse(weight_spec);
      const auto est = ha::estimate_doubling(w, jmax, cap);
      auto j = ha::ToJson(est, w);
      const auto env = ha::build_envelope(w, ha::DefaultGrid());
      j["logconvexity_defect"] = ha::ToJson(ha::logconvexity_defect(w, env));
      ha::WriteJson(out_path, j);
      fmt::print("{}: A = {:.6g} (clamped {:.6g}){}\n", w.spec(), est.A, est.A_clamped,
                 est.divergent ? ", not doubling" : "");
      return est.divergent ? kFail : kPass;
    }

    if (env_build->parsed()) {
      const auto w = ha::WeightFunction::Parse(weight_spec);
      const auto grid = Grid(smin_exp, per_dyad);
      const auto env = ha::build_envelope(w, grid);
      auto j = ha::ToJson(env, w);
      const auto defect = ha::logconvexity_defect(w, env);
      j["defect"] = ha::ToJson(defect);
      ha::WriteJson(out_path, j);
      fmt::print("{}: {} hull nodes of {} samples, defect {:.9g}\n", w.spec(), env.node_count(),
                 env.samples().size(), defect.defect);
      return kPass;
    }

    if (coeffs_build->parsed()) {
      const auto w = ha::WeightFunction::Parse(weight_spec);
      const auto grid = Grid(smin_exp, per_dyad);
      const auto env = ha::build_envelope(w, grid);
      ha::GreedyStats stats;
      auto c = ha::greedy_lacunary(env, crossover, kmax, &stats);
      c.weight = w.spec();
      ha::WriteJson(out_path, ha::ToJson(c));
      const auto ratio = ha::verify_l2_equiv(c, w, grid);
      fmt::print("{}: {} terms, k up to {:.17g}, coverage holes {}\n", w.spec(), c.entries.size(),
                 c.entries.back().k, stats.coverage_holes);
      fmt::print("sum a^2 r^2k / w^2 in [{:.6g}, {:.6g}], threshold {:.6g}: {}\n", ratio.min_ratio,
                 ratio.max_ratio, ratio.threshold, Verdict(ratio.pass));
      return ratio.pass ? kPass : kFail;
    }

    if (l2_build->parsed()) {
      const auto c = ha::CoefficientsFromJson(ha::ReadJson(coeffs_path));
      std::vector<double> pole(static_cast<std::size_t>(dim), 0.0);
      if (dim < 2) throw ha::ConfigError("--dim must be at least 2");
      pole[0] = 1.0;
      const auto f = ha::build_l2_attainer(c, dim, pole);
      const auto rel = std::filesystem::relative(
          std::filesystem::absolute(coeffs_path),
          std::filesystem::absolute(out_path).parent_path());
      ha::WriteJson(out_path, ha::AttainerJson(f.basis(), rel.string()));
      fmt::print("attainer in d={} with {} zonal terms\n", dim, c.entries.size());
      return kPass;
    }

    if (l2_verify->parsed()) {
      const auto f = ha::LoadAttainer(attainer_path);
      const auto w = ha::WeightFunction::Parse(f.coeffs().weight);
      ha::QuadratureSpec qs;
      qs.mc_samples = mc_samples;
      qs.seed = seed;
      std::string csv = "r,logM2_closed,logM2_quad,logw,ratio\n";
      bool pass = true;
      for (double r : ParseList(grid_text)) {
        const double closed = f.LogM2SquaredClosed(r);
        const auto quad = ha::m2_quadrature(f, r, qs);
        const double logw = w.LogWeight(1.0 - r);
        const double rel = std::abs(std::expm1(quad.log_m2_sq - closed));
        // Exact rules must agree to 1e-6; Monte Carlo within five standard errors.
        const double allowed = quad.rel_std_error > 0 ? 5 * quad.rel_std_error : 1e-6;
        pass = pass && rel <= allowed;
        csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r, closed, quad.log_m2_sq,
                           logw, std::exp(closed - 2 * logw));
      }
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw ha::IoError(fmt::format("cannot open {}", out_path));
      out << csv;
      fmt::print("M2 quadrature vs closed form: {}\n", Verdict(pass));
      return pass ? kPass : kFail;
    }

    if (certify->parsed()) {
      if (nmax < 0) throw ha::ConfigError("--nmax must be non-negative");
      std::shared_ptr<const ha::BlockFamily> family = FamilyFor(dim);
      if (scale != 1.0) family = std::make_shared<ha::ScaledBlockFamily>(family, scale);
      std::vector<int> ns;
      for (int n = 0; n <= nmax; ++n) ns.push_back(n);
      const auto report = ha::certify_block_family(*family, p, ns, cert_spec);
      ha::WriteJson(out_path, ha::ToJson(report));
      fmt::print("{} d={} p={}: bounded {} ({:.3g}), shell {} ({:.3g}), decay {} ({:.3g})\n",
                 report.family, report.dim, p, Verdict(report.bounded.pass),
                 report.bounded.worst_margin, Verdict(report.shell.pass),
                 report.shell.worst_margin, Verdict(report.decay.pass), report.decay.worst_margin);
      return report.pass() ? kPass : kFail;
    }

    if (c_build->parsed()) {
      const auto w = ha::WeightFunction::Parse(weight_spec);
      if (a_override > 0) plan_opts.A_override = a_override;
      const auto family = FamilyFor(dim);
      ha::ConstructionPlan plan;
      try {
        plan = ha::build_plan(w, *family, plan_opts);
      } catch (const ha::NotDoubling& e) {
        fmt::print(stderr, "NotDoubling: {}\n", e.what());
        return kFail;
      }
      ha::WriteJson(out_path, ha::ToJson(plan));
      const auto b = ha::theoretical_bounds(plan);
      fmt::print("{}: A={} p={} J={} T={} n-table {}; corridor [{:.6g}, {:.6g}]\n", plan.weight,
                 plan.A, plan.p, plan.J, plan.T, plan.n.size(), b.c_low, b.c_high);
      return kPass;
    }

    if (c_eval->parsed()) {
      const auto plan = ha::PlanFromJson(ha::ReadJson(plan_path));
      const auto w = ha::normalize(ha::WeightFunction::Parse(plan.weight));
      const ha::HarmonicSum sum(plan, FamilyFor(plan.d));
      ha::BallPoint x;
      x.s = std::exp2(one_minus_r_exp);
      if (plan.d == 2) {
        x.direction = {std::cos(angle), std::sin(angle)};
      } else {
        x.direction = ParseList(direction_text);
        const double norm = ha::Norm(x.direction);
        if (static_cast<int>(x.direction.size()) != plan.d || norm == 0) {
          throw ha::ConfigError("--direction must be a nonzero vector of length d");
        }
        for (auto& c : x.direction) c /= norm;
      }
      const auto ev = sum.Evaluate(x);
      const double log_phi = w.LogWeight(x.s);
      ha::Json j = {{"one_minus_r_exp", ha::JsonNumber(one_minus_r_exp)},
                    {"K", ev.K},
                    {"band_m", ev.m},
                    {"band_j", ev.j},
                    {"log_S", ha::JsonNumber(ev.log_S)},
                    {"log_Phi", ha::JsonNumber(log_phi)},
                    {"ratio", ha::JsonNumber(std::exp(ev.log_S - log_phi))}};
      std::cout << j.dump(2) << '\n';
      return kPass;
    }

    if (c_verify->parsed()) {
      const auto plan = ha::PlanFromJson(ha::ReadJson(plan_path));
      const auto w = ha::WeightFunction::Parse(plan.weight);
      const auto report = ha::verify_construction(plan, FamilyFor(plan.d), w, sample_spec);
      ha::emit_report_csv(report, out_path);
      if (!json_path.empty()) ha::WriteJson(json_path, ha::ToJson(report));
      fmt::print("{} samples; ratio in [{:.9g}, {:.9g}] vs [{:.9g}, {:.9g}]: {}\n",
                 report.rows.size(), report.c_low_meas, report.c_high_meas, report.c_low,
                 report.c_high, Verdict(report.corridor_pass));
      fmt::print("center {}, single-j lower bound {} ({:.6g}), attribution {} ({:.6g})\n",
                 Verdict(report.center_pass), Verdict(report.jlow_pass), report.jlow_min_ratio,
                 Verdict(report.attribution_pass), report.attribution_min);
      for (const auto& b : report.bands) {
        if (!b.pass) {
          fmt::print("band m={} j={} fails: ratio in [{:.9g}, {:.9g}], witness 1-|x|=2^{:.17g} dir {}\n",
                     b.m, b.j, b.min_ratio, b.max_ratio, b.min_witness.one_minus_r_exp,
                     b.min_witness.direction_index);
        }
      }
      return report.pass ? kPass : kFail;
    }
  } catch (const ha::NotDoubling& e) {
    fmt::print(stderr, "NotDoubling: {}\n", e.what());
    return kFail;
  } catch (const ha::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  }
  return kConfig;
}
