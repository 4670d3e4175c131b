#ifndef SPREADCHECK_RATIONAL_HPP
#define SPREADCHECK_RATIONAL_HPP

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace spreadcheck {

// All condition checks run on exact rationals; doubles only appear at I/O.
using Rational = mpq_class;

// Parses a decimal literal ("12", "-0.125", "3.5e-4") exactly.
// Throws std::invalid_argument on malformed input.
Rational parse_decimal(std::string_view text);

// Exact value of the shortest decimal that round-trips to `value`.
// A JSON number written as 0.1 therefore becomes exactly 1/10.
Rational from_double(double value);

double to_double(const Rational& value);

// Decimal rendering when the denominator is of the form 2^a 5^b,
// otherwise "num/den".
std::string to_string(const Rational& value);

// Canonical n/d. Never build mpq_class(n, d) directly: it skips canonicalization.
inline Rational frac(long n, long d) {
    Rational r(n, d);
    r.canonicalize();
    return r;
}

inline Rational rabs(const Rational& v) { return v < 0 ? Rational(-v) : v; }
inline Rational rmin(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline Rational positive_part(const Rational& v) { return v > 0 ? v : Rational(0); }
inline Rational negative_part(const Rational& v) { return v < 0 ? Rational(-v) : Rational(0); }

} // namespace spreadcheck

#endif
