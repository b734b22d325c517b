#include "harmapprox/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "harmapprox/errors.hpp"

namespace harmapprox {
namespace {

double ParseNumber(std::string_view text, std::string_view context) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ConfigError(fmt::format("malformed number '{}' in '{}'", text, context));
  }
  return value;
}

// Parses "<key>=<positive float>" after the family prefix.
double ParseParameter(std::string_view body, std::string_view key,
                      std::string_view spec) {
  if (body.substr(0, key.size()) != key || body.size() <= key.size() ||
      body[key.size()] != '=') {
    throw ConfigError(fmt::format("expected '{}=<float>' in weight '{}'", key, spec));
  }
  double value = ParseNumber(body.substr(key.size() + 1), spec);
  if (!(value > 0.0)) {
    throw ConfigError(fmt::format("weight parameter must be positive in '{}'", spec));
  }
  return value;
}

void CheckPositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{} must be positive and finite, got {}", name, value));
  }
}

void CheckS(double s) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw DomainError(fmt::format("weight evaluated at s={} outside (0,1]", s));
  }
}

// log(s1 / s2); the difference s1 - s2 is exact when the ratio is near 1.
double LogRatio(double s1, double s2) {
  const double q = s1 / s2;
  if (q > 0.5 && q < 2.0) return std::log1p((s1 - s2) / s2);
  return std::log(s1) - std::log(s2);
}

}  // namespace

WeightFunction WeightFunction::Power(double beta) {
  CheckPositive(beta, "beta");
  return WeightFunction(WeightKind::kPower, beta, 0.0, nullptr);
}

WeightFunction WeightFunction::LogPower(double gamma) {
  CheckPositive(gamma, "gamma");
  return WeightFunction(WeightKind::kLogPower, gamma, 0.0, nullptr);
}

WeightFunction WeightFunction::ExpPower(double gamma) {
  CheckPositive(gamma, "gamma");
  return WeightFunction(WeightKind::kExpPower, gamma, 0.0, nullptr);
}

WeightFunction WeightFunction::Tabulated(std::vector<double> s,
                                         std::vector<double> log_w,
                                         std::string source) {
  if (s.size() != log_w.size() || s.size() < 2) {
    throw ConfigError("weight table needs at least two (s, logw) pairs");
  }
  auto table = std::make_shared<Table>();
  table->source = std::move(source);
  table->log_s.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0 && s[i] <= 1.0) || !std::isfinite(log_w[i])) {
      throw ConfigError(fmt::format("weight table row {} out of range", i));
    }
    if (i > 0 && !(s[i] < s[i - 1])) {
      throw ConfigError("weight table s values must be strictly decreasing");
    }
    if (i > 0 && log_w[i] < log_w[i - 1]) {
      throw ConfigError("weight table must be non-decreasing in r");
    }
    table->log_s.push_back(std::log(s[i]));
  }
  table->s = std::move(s);
  table->log_w = std::move(log_w);
  return WeightFunction(WeightKind::kTabulated, 0.0, 0.0, std::move(table));
}

WeightFunction WeightFunction::Parse(std::string_view spec) {
  auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError(fmt::format("weight '{}' lacks a family prefix", spec));
  }
  auto family = spec.substr(0, colon);
  auto body = spec.substr(colon + 1);
  if (family == "pow") return Power(ParseParameter(body, "beta", spec));
  if (family == "logpow") return LogPower(ParseParameter(body, "gamma", spec));
  if (family == "exppow") return ExpPower(ParseParameter(body, "gamma", spec));
  if (family == "table") {
    if (body.empty()) throw ConfigError("table weight needs a path");
    return LoadWeightTable(std::string(body));
  }
  throw ConfigError(fmt::format("unknown weight family '{}'", family));
}

std::string WeightFunction::spec() const {
  switch (kind_) {
    case WeightKind::kPower:
      return fmt::format("pow:beta={}", parameter_);
    case WeightKind::kLogPower:
      return fmt::format("logpow:gamma={}", parameter_);
    case WeightKind::kExpPower:
      return fmt::format("exppow:gamma={}", parameter_);
    case WeightKind::kTabulated:
      return "table:" + table_->source;
  }
  return {};
}

double WeightFunction::s_min() const {
  return kind_ == WeightKind::kTabulated ? table_->s.back()
                                         : std::numeric_limits<double>::denorm_min();
}

double WeightFunction::s_max() const {
  return kind_ == WeightKind::kTabulated ? table_->s.front() : 1.0;
}

double WeightFunction::RawLogWeight(double s) const {
  const double log_s = std::log(s);
  switch (kind_) {
    case WeightKind::kPower:
      return -parameter_ * log_s;
    case WeightKind::kLogPower:
      return parameter_ * std::log1p(-log_s);
    case WeightKind::kExpPower:
      return std::exp(-parameter_ * log_s);
    case WeightKind::kTabulated: {
      const auto& ls = table_->log_s;
      const auto& lw = table_->log_w;
      // log_s is strictly decreasing; exact node hits return the node value.
      if (log_s > ls.front() || log_s < ls.back()) {
        // Allow the rounding slack of exp/log round trips at the ends.
        const double slack = 1e-12 * (1.0 + std::abs(log_s));
        if (log_s > ls.front() + slack || log_s < ls.back() - slack) {
          throw TableRangeError(fmt::format(
              "s={} outside weight table range [{}, {}]", s, std::exp(ls.back()),
              std::exp(ls.front())));
        }
        return log_s > ls.front() ? lw.front() : lw.back();
      }
      auto it = std::lower_bound(ls.begin(), ls.end(), log_s, std::greater<>());
      std::size_t i = static_cast<std::size_t>(it - ls.begin());
      if (ls[i] == log_s) return lw[i];
      const double t = (log_s - ls[i - 1]) / (ls[i] - ls[i - 1]);
      return lw[i - 1] + t * (lw[i] - lw[i - 1]);
    }
  }
  return 0.0;
}

double WeightFunction::LogWeight(double s) const {
  CheckS(s);
  return RawLogWeight(s) + offset_;
}

double WeightFunction::LogWeightDiff(double s1, double s2) const {
  CheckS(s1);
  CheckS(s2);
  if (s1 == s2) return 0.0;
  const double l12 = LogRatio(s1, s2);
  switch (kind_) {
    case WeightKind::kPower:
      return -parameter_ * l12;
    case WeightKind::kLogPower:
      // (1 - log s1) / (1 - log s2) = 1 - l12 / (1 - log s2)
      return parameter_ * std::log1p(-l12 / (1.0 - std::log(s2)));
    case WeightKind::kExpPower:
      return std::exp(-parameter_ * std::log(s2)) * std::expm1(-parameter_ * l12);
    case WeightKind::kTabulated:
      return RawLogWeight(s1) - RawLogWeight(s2);
  }
  return 0.0;
}

double WeightFunction::LogPhi(double x) const {
  if (!(x >= 1.0)) {
    throw DomainError(fmt::format("Phi evaluated at x={} < 1", x));
  }
  return LogWeight(1.0 / x);
}

WeightFunction WeightFunction::Scaled(double log_factor) const {
  return WeightFunction(kind_, parameter_, offset_ + log_factor, table_);
}

WeightFunction WeightFunction::Normalized() const {
  return WeightFunction(kind_, parameter_, -RawLogWeight(s_max()), table_);
}

DoublingEstimate estimate_doubling(const WeightFunction& w, int j_max, double cap) {
  if (j_max < 4) throw ConfigError("estimate_doubling needs j_max >= 4");
  constexpr int kRefinement = 8;
  const double log_cap = std::log(cap);
  DoublingEstimate est;
  est.log_A = -std::numeric_limits<double>::infinity();
  est.phi_form_log_max = -std::numeric_limits<double>::infinity();
  for (int j = 0; j <= j_max; ++j) {
    for (int i = 0; i < (j == j_max ? 1 : kRefinement); ++i) {
      const double s = std::exp2(-j - static_cast<double>(i) / kRefinement);
      if (s > w.s_max() || s / 2 < w.s_min()) continue;
      const double log_ratio = w.LogWeight(s / 2) - w.LogWeight(s);
      if (log_ratio > est.log_A) {
        est.log_A = log_ratio;
        est.witness_s = s;
      }
      if (i == 0) est.phi_form_log_max = std::max(est.phi_form_log_max, log_ratio);
    }
  }
  if (!std::isfinite(est.log_A)) {
    throw GridError("doubling probe grid does not meet the weight's range");
  }
  est.log_A = std::max(est.log_A, 0.0);
  est.A = std::exp(est.log_A);
  est.A_clamped = std::max(est.A, 2.0);
  est.divergent = est.log_A > log_cap;
  return est;
}

WeightFunction LoadWeightTable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open weight table '{}'", path));
  std::vector<double> s;
  std::vector<double> log_w;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string a;
    std::string b;
    if (!(fields >> a)) continue;
    if (!(fields >> b)) {
      throw ConfigError(fmt::format("{}:{}: expected 's logw'", path, line_no));
    }
    s.push_back(ParseNumber(a, path));
    log_w.push_back(ParseNumber(b, path));
  }
  return WeightFunction::Tabulated(std::move(s), std::move(log_w), path);
}

}  // namespace harmapprox
