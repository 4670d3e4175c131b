#ifndef SPREADCHECK_SINGLE_MATURITY_HPP
#define SPREADCHECK_SINGLE_MATURITY_HPP

#include "spreadcheck/measures.hpp"
#include "spreadcheck/portfolio.hpp"
#include "spreadcheck/quotes.hpp"
#include "spreadcheck/rational.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spreadcheck {

class SingleMaturityError : public std::runtime_error {
public:
    enum class Kind { PseudoBidNonpositive, InvalidStrip, InfeasibleBand, InvalidShadowPrices, PreconditionViolated, NotCertifiable };
    SingleMaturityError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Strikes k_0 < ... < k_N of one maturity with k_0 = eps standing for the
// underlying (band [S_0 bid - 2 eps, S_0 ask]).
struct AugmentedStrip {
    Rational eps;
    std::vector<Rational> k;
    std::vector<Rational> bid;
    std::vector<Rational> ask;

    int last() const { return static_cast<int>(k.size()) - 1; }
};

// Validates ordering, nonempty bands and k_1 > eps.
AugmentedStrip make_strip(Rational eps, std::vector<Rational> k, std::vector<Rational> bid, std::vector<Rational> ask);
AugmentedStrip augment(const DiscountedQuoteSet& qs, int t, const Rational& eps);

enum class Condition { Butterfly, CallSpreadSlope, CallSpreadPrice, Degenerate };
enum class Verdict { Consistent, WeakArbitrage, ModelIndependentArbitrage };

// Unused indices are -1: butterflies use (i, j, l), slope checks (i, l),
// price and degenerate checks (i, j).
struct Violation {
    Condition condition;
    int i = -1;
    int j = -1;
    int l = -1;
};

struct SingleVerdict {
    Verdict tag = Verdict::Consistent;
    std::vector<Violation> violations;
};

const char* condition_name(Condition c);
const char* verdict_name(Verdict v);

// Butterfly, call-spread slope, call-spread price and degenerate-spread
// conditions over the indices first..N. first = 1 drops the underlying
// (no spread bound at all).
SingleVerdict check_conditions(const AugmentedStrip& strip, int first = 0);

struct ShadowPrices {
    std::vector<Rational> e;                // e_0..e_N
    std::optional<Rational> virtual_strike; // zero-priced strike appended in the consistent case
};

// Shadow prices inside the bands with a convex, non-increasing linear
// interpolation whose first slope is >= -1. Consistent strips get a virtual
// zero-priced strike; strips failing only the degenerate condition get
// non-increasing prices without it (input to perturbed_prices).
ShadowPrices shadow_prices(const AugmentedStrip& strip);

// Reasons e is not an admissible shadow-price vector; empty if admissible.
std::vector<std::string> shadow_price_problems(const AugmentedStrip& strip, const std::vector<Rational>& e);

// Call function through (k_s, e_s): slope -1 left of k_0, linear in between,
// then continued along the last slope until it reaches zero.
PiecewiseLinear extended_call_function(const AugmentedStrip& strip, const ShadowPrices& sp);

struct SingleModel {
    DiscreteMeasure mu;  // law of D(t) S^C_t
    DiscreteMeasure nu;  // law of D(t) S*_t
};

// mu from the extended call function; nu is mu shifted by the smallest
// amount that brings the mean into [S_0 bid, S_0 ask].
SingleModel build_single_model(const AugmentedStrip& strip, const ShadowPrices& sp);

// Used when the law above puts a zero shadow price on its lowest atom. Exact
// LP over atoms at the strikes plus one tail atom, moved off the boundary so
// every price stays strictly positive. nullopt when every fitting law needs a
// zero price somewhere.
std::optional<SingleModel> positive_single_model(const AugmentedStrip& strip);

// Static hedge proving model-independent arbitrage for a butterfly, slope or
// price violation, as a portfolio on maturity t of a horizon-T market.
// Strip index 0 becomes the underlying leg.
SemiStaticPortfolio arbitrage_certificate(const AugmentedStrip& strip, const Violation& v, int t, int horizon);

// Model-dependent strategy for a degenerate violation (i, j): if the model
// gives no mass to D(t) S^C_t > k_j, sell C^j and bank the bid; otherwise buy
// the zero-cost spread C^i - C^j.
SemiStaticPortfolio weak_witness(const AugmentedStrip& strip, const Violation& v, int t, int horizon,
                                 bool strike_j_in_the_money);

// Perturbed shadow prices for a strip that fails only the degenerate
// condition; the returned prices pass every condition as point bands.
std::vector<Rational> perturbed_prices(const AugmentedStrip& strip, const std::vector<Rational>& e,
                                       const Rational& margin = 1);

nlohmann::json to_json(const Violation& v);
nlohmann::json to_json(const SingleVerdict& v);

} // namespace spreadcheck

#endif
