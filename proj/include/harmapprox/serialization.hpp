#pragma once

#include <string>

#include <json.hpp>

#include "harmapprox/blocks.hpp"
#include "harmapprox/construction.hpp"
#include "harmapprox/envelope.hpp"
#include "harmapprox/harness.hpp"
#include "harmapprox/spherical.hpp"
#include "harmapprox/weights.hpp"

namespace harmapprox {

using Json = nlohmann::json;

// Doubles go out as JSON numbers; inf, -inf and nan as strings.
Json JsonNumber(double x);
double NumberFromJson(const Json& j);

Json ToJson(const DoublingEstimate& est, const WeightFunction& w);
Json ToJson(const LogConvexEnvelope& env, const WeightFunction& w);
Json ToJson(const DefectReport& d);

// {"entries": [[k, log_a, tangency_s], ...], "crossover": f, "weight": "..."}
Json ToJson(const CoefficientSequence& c);
CoefficientSequence CoefficientsFromJson(const Json& j);

// {weight, d, A, p, J, alpha, Q, C_pd, n, T, tail_eps}
Json ToJson(const ConstructionPlan& plan);
ConstructionPlan PlanFromJson(const Json& j);

// {family, dim, p, n, bounded|shell|decay: {pass, worst_margin, witness: {q, n, x}}}
Json ToJson(const CertificationReport& report);

Json ToJson(const VerificationReport& report);
VerificationReport ReportFromJson(const Json& j);

// Attainer file: {"dim", "pole", "coeffs"} with coeffs a path to a
// coefficient file, resolved relative to the attainer file.
Json AttainerJson(const ZonalBasis& basis, const std::string& coeffs_path);
AttainerFunction LoadAttainer(const std::string& path);

Json ReadJson(const std::string& path);
// Two-space indented dump with a trailing newline.
void WriteJson(const std::string& path, const Json& j);

}  // namespace harmapprox
