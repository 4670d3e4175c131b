#include "spreadcheck/portfolio.hpp"

#include "spreadcheck/json_util.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace spreadcheck {

namespace {

void validate(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs) {
    if (p.horizon != qs.horizon()) throw PortfolioError("portfolio horizon does not match the quotes");
    for (const auto& leg : p.legs) {
        if (leg.t < 1 || leg.t > qs.horizon() || leg.i < 0 || leg.i > qs.count(leg.t))
            throw PortfolioError("unknown instrument t=" + std::to_string(leg.t) + " i=" + std::to_string(leg.i));
    }
    for (const auto& r : p.rules)
        if (r.t < 1 || r.t > p.horizon) throw PortfolioError("rule outside the horizon");
}

Rational open_underlying(const SemiStaticPortfolio& p, int t) {
    Rational open = 0;
    for (const auto& leg : p.legs)
        if (leg.i == 0 && leg.t > t) open += leg.qty;
    return open;
}

Rational initial_bank(const SemiStaticPortfolio& p) {
    Rational bank = p.bank0;
    for (const auto& leg : p.legs)
        if (leg.i == 0) bank += 2 * p.eps * negative_part(leg.qty);
    return bank;
}

// side = +1 evaluates the tests at c + 0, i.e. just above c.
bool passes(const Rule& r, const Rational& c, int side) {
    switch (r.test) {
    case RuleTest::Always:
        return true;
    case RuleTest::Above:
        return c > r.threshold || (c == r.threshold && side > 0);
    case RuleTest::AtOrBelow:
        return c < r.threshold || (c == r.threshold && side <= 0);
    }
    return false;
}

Rational next_position(const SemiStaticPortfolio& p, int t, const Rational& d, const Rational& c, int side) {
    for (const auto& r : p.rules)
        if (r.t == t && r.from == d && passes(r, c, side)) return r.to;
    return d;
}

Rational option_cash(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, int t, const Rational& c) {
    Rational cash = 0;
    for (const auto& leg : p.legs)
        if (leg.t == t && leg.i > 0) cash += leg.qty * positive_part(c - qs.strike(t, leg.i, p.eps));
    return cash;
}

Rational trade_cash(const Rational& delta, const PriceTriple& s) {
    return negative_part(delta) * s.bid - positive_part(delta) * s.ask;
}

} // namespace

Rational initial_value(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs) {
    validate(p, qs);
    Rational v = p.bank0 + positive_part(p.stock0) * qs.underlying.ask - negative_part(p.stock0) * qs.underlying.bid;
    for (const auto& leg : p.legs)
        v += positive_part(leg.qty) * qs.ask(leg.t, leg.i) - negative_part(leg.qty) * qs.bid(leg.t, leg.i, p.eps);
    return v;
}

Ledger run_path(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, const std::vector<PriceTriple>& path) {
    validate(p, qs);
    if (static_cast<int>(path.size()) != p.horizon + 1) throw PortfolioError("path length does not match the horizon");
    Ledger ledger;
    Rational d = p.stock0;
    Rational stock = d + open_underlying(p, 0);
    Rational bank = initial_bank(p);
    ledger.rows.push_back({stock, bank, 0});
    for (int t = 1; t <= p.horizon; ++t) {
        const Rational cash = option_cash(p, qs, t, path[t].ref);
        d = next_position(p, t, d, path[t].ref, 0);
        const Rational next = d + open_underlying(p, t);
        bank += cash + trade_cash(next - stock, path[t]);
        stock = next;
        ledger.rows.push_back({stock, bank, cash});
    }
    return ledger;
}

std::vector<PathLedger> execute(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, const FiniteModel& model) {
    if (model.horizon() != p.horizon) throw PortfolioError("model horizon does not match the portfolio");
    const auto prob = model.node_probabilities();
    std::vector<PathLedger> out;
    for (const auto& ids : model.paths()) {
        std::vector<PriceTriple> path(ids.size());
        for (std::size_t t = 1; t < ids.size(); ++t) {
            const auto& n = model.nodes[ids[t]];
            const Rational disc = model.discount(static_cast<int>(t));
            path[t] = {n.s_bid * disc, n.s_ref * disc, n.s_ask * disc};
        }
        out.push_back({ids, prob[ids.back()], run_path(p, qs, path)});
    }
    return out;
}

VerifyResult verify_model_independent(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs,
                                      const VerifyOptions& opts) {
    VerifyResult res;
    res.initial_value = initial_value(p, qs);
    res.negative_cost = sgn(res.initial_value) < 0;
    const Rational& eps = p.eps;

    struct State {
        Rational bank;
        std::vector<PriceTriple> path;
    };
    std::map<Rational, State> states;
    states[p.stock0] = {initial_bank(p), {PriceTriple{}}};

    for (int t = 1; t <= p.horizon; ++t) {
        std::set<Rational> critical{eps};
        for (const auto& leg : p.legs) {
            if (leg.t != t || leg.i == 0) continue;
            const Rational k = qs.strike(t, leg.i, eps);
            critical.insert({k, Rational(k - eps), Rational(k + eps)});
        }
        for (const auto& r : p.rules) {
            if (r.t != t || r.test == RuleTest::Always) continue;
            critical.insert({r.threshold, Rational(r.threshold - eps), Rational(r.threshold + eps)});
        }
        const Rational hi = *critical.rbegin() + 2 * eps + 1;
        const int density = std::max(opts.grid_density, 1);
        for (int j = 0; j <= density; ++j) critical.insert(eps + (hi - eps) * frac(j, density));

        std::vector<std::pair<PriceTriple, int>> grid;
        for (const auto& c : critical) {
            if (c < eps || sgn(c) <= 0) continue;
            const Rational lo = rmax(Rational(c - eps), Rational(0));
            std::set<Rational> bids{lo, Rational((lo + c) / 2), c};
            for (const auto& b : bids) {
                std::set<Rational> asks{c, Rational(b + eps), Rational((c + b + eps) / 2)};
                for (const auto& a : asks) {
                    if (a < c || a - b > eps) continue;
                    for (int side : {-1, 1}) grid.push_back({{b, c, a}, side});
                }
            }
        }
        res.grid_points = std::max(res.grid_points, grid.size());

        std::map<Rational, State> next;
        const Rational open_before = open_underlying(p, t - 1), open_after = open_underlying(p, t);
        for (const auto& [d, st] : states) {
            for (const auto& [s, side] : grid) {
                const Rational d2 = next_position(p, t, d, s.ref, side);
                const Rational delta = (d2 + open_after) - (d + open_before);
                const Rational bank = st.bank + option_cash(p, qs, t, s.ref) + trade_cash(delta, s);
                auto it = next.find(d2);
                if (it == next.end() || bank < it->second.bank) {
                    auto path = st.path;
                    path.push_back(s);
                    next[d2] = {bank, std::move(path)};
                }
            }
        }
        states = std::move(next);
    }

    res.terminal_ok = true;
    bool first = true;
    for (const auto& [d, st] : states) {
        if (sgn(d) != 0) {
            res.terminal_ok = false;
            res.reason = "terminal stock position " + to_string(d) + " on some path";
        }
        if (first || st.bank < res.worst_terminal_bank) {
            res.worst_terminal_bank = st.bank;
            res.worst_path = st.path;
            first = false;
        }
    }
    if (sgn(res.worst_terminal_bank) < 0) {
        res.terminal_ok = false;
        res.reason = "terminal bank " + to_string(res.worst_terminal_bank) + " on the worst grid path";
    }
    if (!res.negative_cost && res.reason.empty()) res.reason = "initial value " + to_string(res.initial_value) + " is not negative";
    res.is_arbitrage = res.negative_cost && res.terminal_ok;
    return res;
}

ModelCheck check_in_model(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, const FiniteModel& model) {
    ModelCheck mc;
    mc.initial_value = initial_value(p, qs);
    bool first = true, stock_ok = true;
    for (const auto& pl : execute(p, qs, model)) {
        const auto& row = pl.ledger.terminal();
        if (sgn(row.stock) != 0) stock_ok = false;
        if (first || row.bank < mc.min_terminal_bank) mc.min_terminal_bank = row.bank;
        first = false;
        if (sgn(row.bank) > 0) mc.positive_probability += pl.probability;
    }
    if (!stock_ok) {
        mc.reason = "terminal stock position is not zero";
    } else if (sgn(mc.min_terminal_bank) < 0) {
        mc.reason = "negative terminal bank on some path";
    } else if (sgn(mc.initial_value) > 0) {
        mc.reason = "positive initial value";
    } else if (sgn(mc.initial_value) == 0 && sgn(mc.positive_probability) == 0) {
        mc.reason = "zero cost and no positive payoff";
    } else {
        mc.ok = true;
    }
    return mc;
}

namespace {

const char* test_name(RuleTest t) {
    switch (t) {
    case RuleTest::Always:
        return "always";
    case RuleTest::Above:
        return "above";
    case RuleTest::AtOrBelow:
        return "at_or_below";
    }
    return "always";
}

RuleTest test_from(const std::string& s) {
    if (s == "always") return RuleTest::Always;
    if (s == "above") return RuleTest::Above;
    if (s == "at_or_below") return RuleTest::AtOrBelow;
    throw PortfolioError("unknown rule test '" + s + "'");
}

} // namespace

nlohmann::json to_json(const SemiStaticPortfolio& p) {
    nlohmann::json legs = nlohmann::json::array(), rules = nlohmann::json::array();
    for (const auto& l : p.legs) legs.push_back({{"t", l.t}, {"i", l.i}, {"qty", rational_to_json(l.qty)}});
    for (const auto& r : p.rules) {
        rules.push_back({{"t", r.t},
                         {"from", rational_to_json(r.from)},
                         {"test", test_name(r.test)},
                         {"threshold", rational_to_json(r.threshold)},
                         {"to", rational_to_json(r.to)}});
    }
    nlohmann::json j = {{"horizon", p.horizon},     {"epsilon", rational_to_json(p.eps)},
                        {"bank0", rational_to_json(p.bank0)}, {"stock0", rational_to_json(p.stock0)},
                        {"legs", legs},             {"rules", rules}};
    if (!p.note.empty()) j["note"] = p.note;
    return j;
}

SemiStaticPortfolio portfolio_from_json(const nlohmann::json& j) {
    SemiStaticPortfolio p;
    p.horizon = j.at("horizon").get<int>();
    p.eps = rational_from_json(j.at("epsilon"));
    p.bank0 = rational_from_json(j.at("bank0"));
    p.stock0 = rational_from_json(j.at("stock0"));
    for (const auto& l : j.at("legs")) p.legs.push_back({l.at("t").get<int>(), l.at("i").get<int>(), rational_from_json(l.at("qty"))});
    for (const auto& r : j.at("rules")) {
        p.rules.push_back({r.at("t").get<int>(), rational_from_json(r.at("from")), test_from(r.at("test").get<std::string>()),
                           rational_from_json(r.value("threshold", nlohmann::json(0))), rational_from_json(r.at("to"))});
    }
    if (j.contains("note")) p.note = j.at("note").get<std::string>();
    return p;
}

} // namespace spreadcheck
