#pragma once

// JSON and CSV projections of the library's result types. JSON is the
// canonical form; CSV is flat and lossy.

#include "lambda_thermo/acceptance.hpp"
#include "lambda_thermo/dimension.hpp"
#include "lambda_thermo/measures.hpp"
#include "lambda_thermo/rational.hpp"
#include "lambda_thermo/spectra.hpp"
#include "lambda_thermo/stochastic.hpp"

#include "json.hpp"

#include <string>

namespace lambda_thermo {

using Json = nlohmann::ordered_json;

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "1";

/// Finite doubles as numbers; inf / -inf / nan as strings (JSON has no literal).
Json number(double x);

/// %.17g, with inf / -inf / nan spelled out.
std::string format_double(double x);

Json to_json(const Rational& q);
Json to_json(const TailLaw& law);
Json to_json(const WalkStats& s);
Json to_json(const Classification& c);
Json to_json(const DimensionReport& r);
Json to_json(const RecurrenceSeries& s);
Json to_json(const PressureSample& s, std::span<const std::size_t> k_schedule);
Json to_json(const PhaseTransitionReport& r);
Json to_json(const CylinderSum& c);
Json to_json(const CriterionResult& r);

/// Summary block ("key,value" rows), a blank line, then "state,count,frequency"
/// for every nonzero bin; the overflow bin is labelled ">512".
std::string to_csv(const WalkStats& s);

} // namespace lambda_thermo
