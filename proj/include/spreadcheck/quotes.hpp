#ifndef SPREADCHECK_QUOTES_HPP
#define SPREADCHECK_QUOTES_HPP

#include "spreadcheck/rational.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace spreadcheck {

class QuoteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OptionQuote {
    Rational strike;
    Rational bid;
    Rational ask;
};

struct BidAsk {
    Rational bid;
    Rational ask;
};

// Raw market data in currency units. options[t] holds maturity t's calls
// sorted by strike; options[0] is always empty.
struct QuoteSet {
    std::vector<Rational> bank;  // B(0..T), B(0) = 1
    BidAsk underlying;
    std::vector<std::vector<OptionQuote>> options;

    int horizon() const { return static_cast<int>(bank.size()) - 1; }
};

// Same shape with strikes divided by B(t). Prices stay as quoted: call prices
// are time-0 amounts already.
//
// Index conventions used throughout: maturities t = 1..T, strikes i = 1..N_t,
// and i = 0 is the pseudo-option standing for the underlying (strike eps,
// bid S_0 bid - 2 eps, ask S_0 ask).
struct DiscountedQuoteSet {
    std::vector<Rational> bank;
    BidAsk underlying;
    std::vector<std::vector<OptionQuote>> options;

    int horizon() const { return static_cast<int>(bank.size()) - 1; }
    int count(int t) const { return static_cast<int>(options[t].size()); }

    Rational strike(int t, int i, const Rational& eps) const;
    Rational bid(int t, int i, const Rational& eps) const;
    Rational ask(int t, int i) const;
};

QuoteSet quotes_from_json(const nlohmann::json& doc);
QuoteSet parse_quotes(const std::string& text);
nlohmann::json to_json(const QuoteSet& qs);

// Builds and validates a QuoteSet from loose parts. Merges duplicate strikes.
QuoteSet make_quotes(std::vector<Rational> bank, BidAsk underlying,
                     const std::vector<std::pair<int, OptionQuote>>& records);

DiscountedQuoteSet discount(const QuoteSet& qs);

struct Diagnostic {
    enum class Kind { StrikeBelowEpsilon, PseudoBidNonpositive };
    Kind kind;
    int t = 0;
    int i = 0;
    std::string message;
};

// Empty result means ok.
std::vector<Diagnostic> validate_for_epsilon(const DiscountedQuoteSet& qs, const Rational& eps);

} // namespace spreadcheck

#endif
