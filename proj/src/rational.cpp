#include "spreadcheck/rational.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace spreadcheck {

namespace {

Rational pow10(long exponent) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    Rational r = exponent < 0 ? Rational(mpz_class(1), p) : Rational(p);
    r.canonicalize();
    return r;
}

} // namespace

Rational parse_decimal(std::string_view text) {
    std::size_t pos = 0;
    const auto fail = [&] { throw std::invalid_argument("malformed decimal: '" + std::string(text) + "'"); };
    if (text.empty()) fail();

    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    bool any_digit = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            any_digit = true;
            if (seen_point) ++frac_digits;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!any_digit) fail();

    long exponent = 0;
    if (pos < text.size()) {
        if (text[pos] != 'e' && text[pos] != 'E') fail();
        ++pos;
        const char* first = text.data() + pos;
        const char* last = text.data() + text.size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, exponent);
        if (ec != std::errc() || ptr != last) fail();
    }

    Rational value{mpz_class(digits, 10)};
    value *= pow10(exponent - frac_digits);
    value.canonicalize();
    return negative ? Rational(-value) : value;
}

Rational from_double(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("non-finite number");
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) throw std::invalid_argument("cannot format number");
    return parse_decimal(std::string_view(buf.data(), static_cast<std::size_t>(ptr - buf.data())));
}

double to_double(const Rational& value) {
    // get_d truncates; pick the nearest of the truncation and its neighbours.
    const double d = value.get_d();
    double best = d;
    Rational best_err = rabs(Rational(d) - value);
    for (double c : {std::nextafter(d, -HUGE_VAL), std::nextafter(d, HUGE_VAL)}) {
        if (!std::isfinite(c)) continue;
        Rational err = rabs(Rational(c) - value);
        if (err < best_err) {
            best = c;
            best_err = std::move(err);
        }
    }
    return best;
}

std::string to_string(const Rational& value) {
    mpz_class den = value.get_den();
    int twos = 0;
    int fives = 0;
    while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) {
        den /= 2;
        ++twos;
    }
    while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
        den /= 5;
        ++fives;
    }
    if (den != 1) return value.get_str();

    const int scale = std::max(twos, fives);
    if (scale == 0) return value.get_num().get_str();
    mpz_class factor;
    mpz_ui_pow_ui(factor.get_mpz_t(), 10, static_cast<unsigned long>(scale));
    const mpz_class scaled = value.get_num() * factor / value.get_den();

    const bool negative = scaled < 0;
    std::string digits = (negative ? mpz_class(-scaled) : scaled).get_str();
    if (digits.size() <= static_cast<std::size_t>(scale)) digits.insert(0, scale - digits.size() + 1, '0');
    digits.insert(digits.size() - scale, ".");
    while (digits.back() == '0') digits.pop_back();
    if (digits.back() == '.') digits.pop_back();
    return negative ? "-" + digits : digits;
}

} // namespace spreadcheck
