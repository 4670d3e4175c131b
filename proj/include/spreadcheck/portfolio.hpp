#ifndef SPREADCHECK_PORTFOLIO_HPP
#define SPREADCHECK_PORTFOLIO_HPP

#include "spreadcheck/model.hpp"
#include "spreadcheck/quotes.hpp"
#include "spreadcheck/rational.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spreadcheck {

class PortfolioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Static position in the call of maturity t with strike index i. Index 0 is
// the underlying leg: qty units of stock bought (or sold) at time 0 and held
// until t, priced like the pseudo-option (ask S_0 ask, bid S_0 bid - 2 eps).
// A short underlying leg therefore deposits 2 eps per unit in the bank.
struct OptionLeg {
    int t = 1;
    int i = 1;
    Rational qty;
};

// Predicate on the discounted reference price c = D(t) S^C_t.
enum class RuleTest { Always, Above, AtOrBelow };

// At time t, if the dynamic stock position is `from` and the test passes,
// the new dynamic position is `to`. The first matching rule wins; without a
// match the position is kept. The dynamic position excludes underlying legs
// that are still open, so the stock actually held is dynamic + open legs.
struct Rule {
    int t = 1;
    Rational from;
    RuleTest test = RuleTest::Always;
    Rational threshold;
    Rational to;
};

struct SemiStaticPortfolio {
    int horizon = 1;
    Rational eps;
    Rational bank0;   // bank units bought at time 0
    Rational stock0;  // dynamic stock position after trading at time 0
    std::vector<OptionLeg> legs;
    std::vector<Rule> rules;
    std::string note;
};

// Discounted prices at one date: D(t) times S lower, S^C, S upper.
struct PriceTriple {
    Rational bid;
    Rational ref;
    Rational ask;
};

struct LedgerRow {
    Rational stock;          // total stock position after trading
    Rational bank;           // bank units after trading
    Rational option_cash;    // discounted option payoffs credited at this date
};

// rows[0..T]; rows[0] is the position right after time-0 trading.
struct Ledger {
    std::vector<LedgerRow> rows;
    const LedgerRow& terminal() const { return rows.back(); }
};

// r_Phi under the quotes. Throws PortfolioError for unknown instruments.
Rational initial_value(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs);

// Runs the portfolio along one discounted path; path[t] for t = 1..T,
// path[0] is ignored.
Ledger run_path(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, const std::vector<PriceTriple>& path);

struct PathLedger {
    std::vector<int> nodes;  // root-to-leaf ids
    Rational probability;
    Ledger ledger;
};

// Ledger for every path of the tree. Throws PortfolioError on horizon mismatch.
std::vector<PathLedger> execute(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, const FiniteModel& model);

struct VerifyOptions {
    int grid_density = 5;
};

struct VerifyResult {
    Rational initial_value;
    bool negative_cost = false;
    bool terminal_ok = false;        // terminal bank >= 0 and stock 0 on every grid path
    bool is_arbitrage = false;       // both of the above
    Rational worst_terminal_bank;
    std::vector<PriceTriple> worst_path;
    std::string reason;
    std::size_t grid_points = 0;     // price triples per date
};

// Model-independent arbitrage check over a grid of admissible discounted
// triples (0 <= bid <= ref <= ask, ask - bid <= eps, ref >= eps) including
// every kink-critical value. Exact over the grid: the search keeps the
// smallest bank per stock position, which is all the rules can observe.
VerifyResult verify_model_independent(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs,
                                      const VerifyOptions& opts = {});

// Definition of a model-dependent arbitrage in the given model: r_Phi <= 0,
// terminal bank >= 0 and stock 0 on every path, and strictly positive
// terminal bank with positive probability or r_Phi < 0.
struct ModelCheck {
    bool ok = false;
    Rational initial_value;
    Rational min_terminal_bank;
    Rational positive_probability;
    std::string reason;
};
ModelCheck check_in_model(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, const FiniteModel& model);

nlohmann::json to_json(const SemiStaticPortfolio& p);
SemiStaticPortfolio portfolio_from_json(const nlohmann::json& j);

} // namespace spreadcheck

#endif
