#ifndef SPREADCHECK_MODEL_HPP
#define SPREADCHECK_MODEL_HPP

#include "spreadcheck/quotes.hpp"
#include "spreadcheck/rational.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace spreadcheck {

// One node of a scenario tree. Prices are in currency units, as observed at
// time `time`; `probability` is the branch probability from the parent.
struct ModelNode {
    int id = 0;
    int parent = -1;
    int time = 0;
    Rational probability = 1;
    Rational s_bid;   // S lower
    Rational s_ask;   // S upper
    Rational s_ref;   // S^C, settles the calls
    Rational s_star;  // shadow price, discounted martingale
};

// Finite scenario tree. nodes[0] is the root at time 0, every leaf sits at
// the horizon, and parents precede their children.
struct FiniteModel {
    std::vector<Rational> bank;  // B(0..T)
    std::vector<ModelNode> nodes;

    int horizon() const { return static_cast<int>(bank.size()) - 1; }
    Rational discount(int t) const { return 1 / bank[t]; }
    std::vector<std::vector<int>> children() const;
    // Unconditional probability of each node.
    std::vector<Rational> node_probabilities() const;
    // Root-to-leaf id sequences.
    std::vector<std::vector<int>> paths() const;
};

// Invariant problems, empty when the model is a valid eps-bounded model.
// Checks tree shape, probabilities, S_bid <= S^C, S* <= S_ask, positivity,
// the spread bound and S^C >= eps B(t) for t >= 1, and the martingale
// property of D(t) S*_t.
std::vector<std::string> check_model(const FiniteModel& model, const Rational& eps);
// Separate spread bound and S^C floor, for the arithmetic variant.
std::vector<std::string> check_model(const FiniteModel& model, const Rational& spread_bound, const Rational& ref_floor);

// Time-0 price of the discounted-strike-k call of maturity t.
Rational model_call_price(const FiniteModel& model, int t, const Rational& k);

// Problems with the model's call prices against the quotes (bands, and the
// root prices against the underlying quote).
std::vector<std::string> check_model_prices(const FiniteModel& model, const DiscountedQuoteSet& qs);

// The arithmetic variant: S^C is the midpoint of bid and ask. Rewrites the
// bid/ask around S^C with half-width |S^C - S*|, so the spread at most
// doubles.
FiniteModel to_arithmetic(const FiniteModel& model);
bool is_arithmetic(const FiniteModel& model);

nlohmann::json to_json(const FiniteModel& model);
FiniteModel model_from_json(const nlohmann::json& j);

} // namespace spreadcheck

#endif
