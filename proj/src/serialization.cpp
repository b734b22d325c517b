#include "harmapprox/serialization.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "harmapprox/errors.hpp"

namespace harmapprox {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json AxiomJson(const AxiomResult& a) {
  return {{"pass", a.pass},
          {"worst_margin", JsonNumber(a.worst_margin)},
          {"checked", a.checked},
          {"witness",
           {{"q", a.q},
            {"n", a.n},
            {"one_minus_r", JsonNumber(a.witness.s)},
            {"x", a.witness.Cartesian()},
            {"value", JsonNumber(a.witness_value)}}}};
}

Json RowJson(const SampleRow& r) {
  return {{"band_m", r.band_m},
          {"band_j", r.band_j},
          {"one_minus_r_exp", JsonNumber(r.one_minus_r_exp)},
          {"direction_index", r.direction_index},
          {"log_S", JsonNumber(r.log_S)},
          {"log_Phi", JsonNumber(r.log_Phi)},
          {"ratio", JsonNumber(r.ratio)}};
}

SampleRow RowFromJson(const Json& j) {
  SampleRow r;
  r.band_m = j.at("band_m").get<int>();
  r.band_j = j.at("band_j").get<int>();
  r.one_minus_r_exp = NumberFromJson(j.at("one_minus_r_exp"));
  r.direction_index = j.at("direction_index").get<int>();
  r.log_S = NumberFromJson(j.at("log_S"));
  r.log_Phi = NumberFromJson(j.at("log_Phi"));
  r.ratio = NumberFromJson(j.at("ratio"));
  return r;
}

template <typename F>
auto Guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("malformed {} JSON: {}", what, e.what()));
  }
}

}  // namespace

Json JsonNumber(double x) {
  if (std::isnan(x)) return "nan";
  if (x == kInf) return "inf";
  if (x == -kInf) return "-inf";
  return x;
}

double NumberFromJson(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError(fmt::format("expected a number, got {}", j.dump()));
}

Json ToJson(const DoublingEstimate& est, const WeightFunction& w) {
  return {{"weight", w.spec()},
          {"A", JsonNumber(est.A)},
          {"log_A", JsonNumber(est.log_A)},
          {"A_clamped", JsonNumber(est.A_clamped)},
          {"divergent", est.divergent},
          {"witness_s", JsonNumber(est.witness_s)},
          {"phi_form_log_max", JsonNumber(est.phi_form_log_max)}};
}

Json ToJson(const LogConvexEnvelope& env, const WeightFunction& w) {
  Json samples = Json::array();
  for (const auto& p : env.samples()) {
    samples.push_back({JsonNumber(p.s), JsonNumber(p.u), JsonNumber(p.v)});
  }
  Json slopes = Json::array();
  for (std::size_t i = 0; i + 1 < env.node_count(); ++i) slopes.push_back(JsonNumber(env.Slope(i)));
  Json out = {{"weight", w.spec()},
              {"samples", samples},
              {"hull", env.hull()},
              {"slopes", slopes}};
  out["origin_log_w"] = env.origin_log_w() ? JsonNumber(*env.origin_log_w()) : Json(nullptr);
  return out;
}

Json ToJson(const DefectReport& d) {
  return {{"log_defect", JsonNumber(d.log_defect)},
          {"defect", JsonNumber(d.defect)},
          {"argmax_r", JsonNumber(d.argmax_r)},
          {"argmax_s", JsonNumber(d.argmax_s)}};
}

Json ToJson(const CoefficientSequence& c) {
  Json entries = Json::array();
  for (const auto& e : c.entries) {
    entries.push_back({JsonNumber(e.k), JsonNumber(e.log_a), JsonNumber(e.tangency_s)});
  }
  return {{"entries", entries}, {"crossover", JsonNumber(c.crossover)}, {"weight", c.weight}};
}

CoefficientSequence CoefficientsFromJson(const Json& j) {
  return Guarded("coefficient", [&] {
    CoefficientSequence c;
    for (const auto& e : j.at("entries")) {
      if (!e.is_array() || e.size() < 2) throw ConfigError("coefficient entry must be [k, log_a]");
      CoefficientEntry entry{NumberFromJson(e[0]), NumberFromJson(e[1]), 0.0};
      if (e.size() > 2) entry.tangency_s = NumberFromJson(e[2]);
      if (!(entry.k >= 0.0) || entry.k != std::floor(entry.k)) {
        throw ConfigError(fmt::format("coefficient exponent {} is not a non-negative integer", entry.k));
      }
      if (!c.entries.empty() && entry.k <= c.entries.back().k) {
        throw ConfigError("coefficient exponents must increase strictly");
      }
      c.entries.push_back(entry);
    }
    c.crossover = NumberFromJson(j.at("crossover"));
    c.weight = j.at("weight").get<std::string>();
    return c;
  });
}

Json ToJson(const ConstructionPlan& plan) {
  return {{"weight", plan.weight},
          {"d", plan.d},
          {"A", JsonNumber(plan.A)},
          {"p", plan.p},
          {"J", plan.J},
          {"alpha", plan.alpha},
          {"Q", plan.Q},
          {"C_pd", JsonNumber(plan.C_pd)},
          {"n", plan.n},
          {"T", plan.T},
          {"tail_eps", JsonNumber(plan.tail_eps)}};
}

ConstructionPlan PlanFromJson(const Json& j) {
  return Guarded("plan", [&] {
    ConstructionPlan plan;
    plan.weight = j.at("weight").get<std::string>();
    plan.d = j.at("d").get<int>();
    plan.A = NumberFromJson(j.at("A"));
    plan.p = j.at("p").get<int>();
    plan.J = j.at("J").get<int>();
    plan.alpha = j.at("alpha").get<int>();
    plan.Q = j.at("Q").get<int>();
    plan.C_pd = NumberFromJson(j.at("C_pd"));
    plan.n = j.at("n").get<std::vector<long>>();
    plan.T = j.at("T").get<int>();
    if (j.contains("tail_eps")) plan.tail_eps = NumberFromJson(j.at("tail_eps"));
    if (plan.J < 1 || plan.T < 1 || plan.n.empty()) throw ConfigError("plan has empty J, T or n");
    return plan;
  });
}

Json ToJson(const CertificationReport& report) {
  return {{"family", report.family},
          {"dim", report.dim},
          {"p", report.p},
          {"n", report.n_list},
          {"decay_constant", JsonNumber(report.decay_constant)},
          {"spec",
           {{"shell_radii", report.spec.shell_radii},
            {"directions", report.spec.directions},
            {"general_radii", report.spec.general_radii},
            {"seed", report.spec.seed}}},
          {"bounded", AxiomJson(report.bounded)},
          {"shell", AxiomJson(report.shell)},
          {"decay", AxiomJson(report.decay)},
          {"pass", report.pass()}};
}

Json ToJson(const VerificationReport& r) {
  Json bands = Json::array();
  for (const auto& b : r.bands) {
    bands.push_back({{"m", b.m},
                     {"j", b.j},
                     {"count", b.count},
                     {"min_ratio", JsonNumber(b.min_ratio)},
                     {"max_ratio", JsonNumber(b.max_ratio)},
                     {"min_witness", RowJson(b.min_witness)},
                     {"max_witness", RowJson(b.max_witness)},
                     {"pass", b.pass}});
  }
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back(RowJson(row));
  return {{"weight", r.weight},
          {"d", r.d},
          {"spec",
           {{"radii_per_band", r.spec.radii_per_band},
            {"directions", r.spec.directions},
            {"max_band", r.spec.max_band},
            {"seed", r.spec.seed}}},
          {"c_low", JsonNumber(r.c_low)},
          {"c_high", JsonNumber(r.c_high)},
          {"tol", JsonNumber(r.tol)},
          {"c_low_meas", JsonNumber(r.c_low_meas)},
          {"c_high_meas", JsonNumber(r.c_high_meas)},
          {"low_witness", RowJson(r.low_witness)},
          {"high_witness", RowJson(r.high_witness)},
          {"bands", bands},
          {"center",
           {{"low_margin", JsonNumber(r.center_low_margin)},
            {"high_margin", JsonNumber(r.center_high_margin)},
            {"witness", RowJson(r.center_witness)},
            {"pass", r.center_pass}}},
          {"jlow",
           {{"min_ratio", JsonNumber(r.jlow_min_ratio)},
            {"witness", RowJson(r.jlow_witness)},
            {"pass", r.jlow_pass}}},
          {"attribution",
           {{"min", JsonNumber(r.attribution_min)},
            {"witness", RowJson(r.attribution_witness)},
            {"pass", r.attribution_pass}}},
          {"corridor_pass", r.corridor_pass},
          {"pass", r.pass},
          {"rows", rows}};
}

VerificationReport ReportFromJson(const Json& j) {
  return Guarded("report", [&] {
    VerificationReport r;
    r.weight = j.at("weight").get<std::string>();
    r.d = j.at("d").get<int>();
    const auto& spec = j.at("spec");
    r.spec.radii_per_band = spec.at("radii_per_band").get<int>();
    r.spec.directions = spec.at("directions").get<int>();
    r.spec.max_band = spec.at("max_band").get<int>();
    r.spec.seed = spec.at("seed").get<std::uint64_t>();
    r.c_low = NumberFromJson(j.at("c_low"));
    r.c_high = NumberFromJson(j.at("c_high"));
    r.tol = NumberFromJson(j.at("tol"));
    r.c_low_meas = NumberFromJson(j.at("c_low_meas"));
    r.c_high_meas = NumberFromJson(j.at("c_high_meas"));
    r.low_witness = RowFromJson(j.at("low_witness"));
    r.high_witness = RowFromJson(j.at("high_witness"));
    for (const auto& b : j.at("bands")) {
      BandSummary s;
      s.m = b.at("m").get<int>();
      s.j = b.at("j").get<int>();
      s.count = b.at("count").get<std::size_t>();
      s.min_ratio = NumberFromJson(b.at("min_ratio"));
      s.max_ratio = NumberFromJson(b.at("max_ratio"));
      s.min_witness = RowFromJson(b.at("min_witness"));
      s.max_witness = RowFromJson(b.at("max_witness"));
      s.pass = b.at("pass").get<bool>();
      r.bands.push_back(s);
    }
    const auto& center = j.at("center");
    r.center_low_margin = NumberFromJson(center.at("low_margin"));
    r.center_high_margin = NumberFromJson(center.at("high_margin"));
    r.center_witness = RowFromJson(center.at("witness"));
    r.center_pass = center.at("pass").get<bool>();
    const auto& jlow = j.at("jlow");
    r.jlow_min_ratio = NumberFromJson(jlow.at("min_ratio"));
    r.jlow_witness = RowFromJson(jlow.at("witness"));
    r.jlow_pass = jlow.at("pass").get<bool>();
    const auto& attr = j.at("attribution");
    r.attribution_min = NumberFromJson(attr.at("min"));
    r.attribution_witness = RowFromJson(attr.at("witness"));
    r.attribution_pass = attr.at("pass").get<bool>();
    r.corridor_pass = j.at("corridor_pass").get<bool>();
    r.pass = j.at("pass").get<bool>();
    for (const auto& row : j.at("rows")) r.rows.push_back(RowFromJson(row));
    return r;
  });
}

Json AttainerJson(const ZonalBasis& basis, const std::string& coeffs_path) {
  return {{"dim", basis.d},
          {"pole", basis.pole},
          {"k_max", JsonNumber(basis.k_max)},
          {"coeffs", coeffs_path}};
}

AttainerFunction LoadAttainer(const std::string& path) {
  const auto j = ReadJson(path);
  return Guarded("attainer", [&] {
    const int d = j.at("dim").get<int>();
    auto pole = j.at("pole").get<std::vector<double>>();
    std::filesystem::path coeffs = j.at("coeffs").get<std::string>();
    if (coeffs.is_relative()) coeffs = std::filesystem::path(path).parent_path() / coeffs;
    const auto c = CoefficientsFromJson(ReadJson(coeffs.string()));
    return build_l2_attainer(c, d, std::move(pole));
  });
}

Json ReadJson(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError(fmt::format("cannot open {}", path));
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

void WriteJson(const std::string& path, const Json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open {} for writing", path));
  f << j.dump(2) << '\n';
  if (!f) throw IoError(fmt::format("write to {} failed", path));
}

}  // namespace harmapprox
