#ifndef SPREADCHECK_JSON_UTIL_HPP
#define SPREADCHECK_JSON_UTIL_HPP

#include "spreadcheck/rational.hpp"

#include <json.hpp>

namespace spreadcheck {

// Accepts JSON numbers, decimal strings ("1.05") and fraction strings ("1/3").
Rational rational_from_json(const nlohmann::json& j);

// Plain JSON number when the value survives a double round trip exactly,
// otherwise a "num/den" or decimal string.
nlohmann::json rational_to_json(const Rational& v);

} // namespace spreadcheck

#endif
