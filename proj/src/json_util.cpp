#include "spreadcheck/json_util.hpp"

#include <cmath>
#include <stdexcept>

namespace spreadcheck {

Rational rational_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return Rational(mpz_class(j.dump(), 10));
    if (j.is_number_float()) return from_double(j.get<double>());
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const auto slash = s.find('/');
        if (slash == std::string::npos) return parse_decimal(s);
        const mpz_class num(s.substr(0, slash), 10), den(s.substr(slash + 1), 10);
        if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
        Rational r(num, den);
        r.canonicalize();
        return r;
    }
    throw std::invalid_argument("expected a number, got " + j.dump());
}

nlohmann::json rational_to_json(const Rational& v) {
    if (v.get_den() == 1 && v.get_num().fits_slong_p()) return v.get_num().get_si();
    const double d = to_double(v);
    if (std::isfinite(d) && from_double(d) == v) return d;
    return to_string(v);
}

} // namespace spreadcheck
