#pragma once

#include <string>

#include <json.hpp>

#include "utb/rational_function.hpp"

namespace utb {

using Json = nlohmann::ordered_json;

// Text syntax: integers, variables X1..Xd (X, Y, Z accepted for d <= 3,
// either case), + - * / ( ) and ^ with a signed integer exponent.
RationalFunction parse_rational(const std::string& text, const CoefficientField& f, int nvars);
LaurentPoly parse_laurent(const std::string& text, const CoefficientField& f, int nvars);

// Canonical JSON: list of {"e": [...], "c": "p/q"} sorted by exponent.
Json to_json(const LaurentPoly& p);
LaurentPoly laurent_from_json(const Json& j, const CoefficientField& f, int nvars);
Json to_json(const RationalFunction& r);
RationalFunction rational_from_json(const Json& j, const CoefficientField& f, int nvars);

CoefficientField field_from_characteristic(std::uint64_t p);

}  // namespace utb
