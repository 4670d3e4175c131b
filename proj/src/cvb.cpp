#include "spreadcheck/json_util.hpp"
#include "spreadcheck/multi_maturity.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <tuple>

namespace spreadcheck {

namespace {

using K = MultiMaturityError::Kind;

// Whether a basket ending at x_prev may continue with strike k and sign sigma.
bool sign_allowed(const Rational& x_prev, const Rational& k, int sigma, const Rational& eps) {
    return sigma > 0 ? x_prev >= k - eps : x_prev <= k + eps;
}

// Cheapest long leg of maturity t with strike <= bound, or -1.
int cheapest_long(const DiscountedQuoteSet& qs, int t, const Rational& bound, const Rational& eps) {
    int best = -1;
    for (int i = 0; i <= qs.count(t); ++i) {
        if (qs.strike(t, i, eps) > bound) continue;
        if (best < 0 || qs.ask(t, i) < qs.ask(t, best)) best = i;
    }
    return best;
}

Rational sigma_one_term(const CVBSpec& spec) { return spec.sigma[0] < 0 ? Rational(2 * spec.eps) : Rational(0); }

} // namespace

std::vector<std::string> cvb_spec_problems(const DiscountedQuoteSet& qs, const CVBSpec& spec) {
    std::vector<std::string> bad;
    const int u = spec.u;
    if (u < 1 || u > qs.horizon()) {
        bad.push_back("maturity outside 1..T");
        return bad;
    }
    if (static_cast<int>(spec.sigma.size()) != u || static_cast<int>(spec.x.size()) != u ||
        static_cast<int>(spec.J.size()) != u || static_cast<int>(spec.I.size()) != u - 1) {
        bad.push_back("parameter vectors have the wrong length");
        return bad;
    }
    if (sgn(spec.eps) < 0) bad.push_back("negative epsilon");
    for (int t = 1; t <= u; ++t) {
        const int s = spec.sigma[t - 1];
        if (s != 1 && s != -1) bad.push_back("sigma_" + std::to_string(t) + " is not +-1");
        if (t >= 2) {
            const int d = sgn(spec.x[t - 2] - spec.x[t - 1]);
            if (d != 0 && d != s) bad.push_back("sigma_" + std::to_string(t) + " disagrees with sgn(x_{t-1} - x_t)");
        }
        const int j = spec.J[t - 1];
        if (j < 0 || j > qs.count(t)) {
            bad.push_back("j_" + std::to_string(t) + " out of range");
        } else if (qs.strike(t, j, spec.eps) != spec.x[t - 1] + spec.eps * s) {
            bad.push_back("k_{t,j_t} != x_t + eps sigma_t at t=" + std::to_string(t));
        }
        if (t < u) {
            const int i = spec.I[t - 1];
            if (i < 0 || i > qs.count(t + 1)) {
                bad.push_back("i_" + std::to_string(t) + " out of range");
            } else if (qs.strike(t + 1, i, spec.eps) > spec.x[t - 1] + spec.eps * spec.sigma[t]) {
                bad.push_back("k_{t+1,i_t} > x_t + eps sigma_{t+1} at t=" + std::to_string(t));
            }
        }
    }
    return bad;
}

CVBPrices cvb_prices(const DiscountedQuoteSet& qs, const CVBSpec& spec) {
    const auto bad = cvb_spec_problems(qs, spec);
    if (!bad.empty()) throw MultiMaturityError(K::InvalidSpec, bad.front());
    const Rational& eps = spec.eps;
    CVBPrices p{qs.ask(1, spec.J[0]), qs.bid(1, spec.J[0], eps)};
    for (int t = 2; t <= spec.u; ++t) {
        p.ask += qs.ask(t, spec.J[t - 1]) - qs.bid(t, spec.I[t - 2], eps);
        p.bid += qs.bid(t, spec.J[t - 1], eps) - qs.ask(t, spec.I[t - 2]);
    }
    p.ask -= sigma_one_term(spec);
    p.bid -= sigma_one_term(spec);
    return p;
}

SemiStaticPortfolio cvb_strategy(const DiscountedQuoteSet& qs, const CVBSpec& spec, int horizon) {
    const auto bad = cvb_spec_problems(qs, spec);
    if (!bad.empty()) throw MultiMaturityError(K::InvalidSpec, bad.front());
    if (horizon < spec.u) throw MultiMaturityError(K::InvalidSpec, "horizon shorter than the basket");
    const Rational& eps = spec.eps;
    SemiStaticPortfolio p;
    p.horizon = horizon;
    p.eps = eps;
    p.bank0 = sigma_one_term(spec);
    p.note = "short calendar vertical basket";
    p.legs.push_back({1, spec.J[0], -1});
    for (int t = 2; t <= spec.u; ++t) {
        p.legs.push_back({t, spec.I[t - 2], 1});
        p.legs.push_back({t, spec.J[t - 1], -1});
    }
    for (int t = 1; t <= spec.u; ++t) {
        const Rational b = qs.strike(t, spec.J[t - 1], eps);
        if (t == 1) {
            p.rules.push_back({1, 0, RuleTest::Above, b, -1});
            continue;
        }
        // Out of the short: only the uncovered part k_i > k_j needs a hedge.
        const Rational a = qs.strike(t, spec.I[t - 2], eps);
        if (a > b) p.rules.push_back({t, 0, RuleTest::Above, b, -1});
        // Short and the call expired worthless: cover when x has not fallen.
        if (spec.sigma[t - 1] < 0) {
            p.rules.push_back({t, -1, RuleTest::Above, b, -1});
            p.rules.push_back({t, -1, RuleTest::Always, 0, 0});
        }
    }
    return p;
}

std::vector<CVBSpec> enumerate_cvbs(const DiscountedQuoteSet& qs, const Rational& eps, int max_u, std::size_t cap) {
    std::vector<CVBSpec> out;
    const int top = std::min(max_u, qs.horizon());
    std::function<void(CVBSpec&)> grow = [&](CVBSpec& spec) {
        if (out.size() >= cap)
            throw MultiMaturityError(K::BudgetExceeded, "more than " + std::to_string(cap) + " baskets");
        out.push_back(spec);
        const int t = spec.u + 1;
        if (t > top) return;
        const Rational x_prev = spec.x.back();
        for (int j = 0; j <= qs.count(t); ++j) {
            const Rational k = qs.strike(t, j, eps);
            for (int sigma : {1, -1}) {
                if (!sign_allowed(x_prev, k, sigma, eps)) continue;
                for (int i = 0; i <= qs.count(t); ++i) {
                    if (qs.strike(t, i, eps) > x_prev + eps * sigma) continue;
                    spec.u = t;
                    spec.sigma.push_back(sigma);
                    spec.x.push_back(k - eps * sigma);
                    spec.I.push_back(i);
                    spec.J.push_back(j);
                    grow(spec);
                    spec.u = t - 1;
                    spec.sigma.pop_back();
                    spec.x.pop_back();
                    spec.I.pop_back();
                    spec.J.pop_back();
                }
            }
        }
    };
    for (int j = 0; j <= qs.count(1) && top >= 1; ++j) {
        for (int sigma : {1, -1}) {
            CVBSpec spec{1, {sigma}, {Rational(qs.strike(1, j, eps) - eps * sigma)}, {}, {j}, eps};
            grow(spec);
        }
    }
    return out;
}

Rational cvb_dynamic_position(const SemiStaticPortfolio& p, const Ledger& ledger, int t) {
    Rational d = ledger.rows[t].stock;
    for (const auto& leg : p.legs)
        if (leg.i == 0 && leg.t > t) d -= leg.qty;
    return d;
}

Rational cvb_reference_bank(const SemiStaticPortfolio& p, const DiscountedQuoteSet&, const Ledger& ledger, int t) {
    Rational bank = ledger.rows[t].bank;
    for (const auto& leg : p.legs)
        if (leg.i == 0 && leg.t > t) bank -= 2 * p.eps * negative_part(leg.qty);
    return bank;
}

bool cvb_scenario_holds(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, const CVBSpec& spec,
                        const Ledger& ledger, int t) {
    const Rational d = cvb_dynamic_position(p, ledger, t);
    const Rational bank = cvb_reference_bank(p, qs, ledger, t);
    if (d == 0 && sgn(bank) >= 0) return true;
    return d == -1 && bank >= spec.x[t - 1];
}

const char* necessary_id(NecessaryCondition c) {
    switch (c) {
    case NecessaryCondition::SlopeComparison:
        return "4.3-i";
    case NecessaryCondition::SlopeBound:
        return "4.3-ii";
    case NecessaryCondition::Price:
        return "4.3-iii";
    case NecessaryCondition::Degenerate:
        return "4.3-iv";
    }
    return "";
}

std::vector<NecessaryViolation> check_necessary(const DiscountedQuoteSet& qs, const Rational& eps,
                                                const NecessaryOptions& opts) {
    const int T = qs.horizon();
    const int top = opts.max_u > 0 ? std::min(opts.max_u, T - 1) : T - 1;
    std::vector<NecessaryViolation> out;
    if (top < 1) return out;

    // Budget: one evaluation per (s, j, sigma) and pair of later instruments.
    std::size_t later = 0, work = 0;
    for (int s = top; s >= 1; --s) {
        later = 0;
        for (int t = s + 1; t <= T; ++t) later += static_cast<std::size_t>(qs.count(t) + 1);
        work += 2 * static_cast<std::size_t>(qs.count(s) + 1) * (later * later + 2 * later);
    }
    if (work > opts.cap)
        throw MultiMaturityError(K::BudgetExceeded, "necessary conditions need " + std::to_string(work) +
                                                         " evaluations, cap is " + std::to_string(opts.cap));

    // Highest bid over baskets ending in (j, sigma) at each maturity.
    struct Cell {
        bool reachable = false;
        Rational bid;
        int prev_j = -1, prev_sigma = 0, i = -1;
    };
    auto sidx = [](int sigma) { return sigma > 0 ? 0 : 1; };
    std::vector<std::vector<std::array<Cell, 2>>> best(top + 1);
    best[1].resize(qs.count(1) + 1);
    for (int j = 0; j <= qs.count(1); ++j) {
        for (int sigma : {1, -1}) {
            auto& c = best[1][j][sidx(sigma)];
            c.reachable = true;
            c.bid = qs.bid(1, j, eps) - (sigma < 0 ? Rational(2 * eps) : Rational(0));
        }
    }
    for (int t = 2; t <= top; ++t) {
        best[t].resize(qs.count(t) + 1);
        for (int jp = 0; jp <= qs.count(t - 1); ++jp) {
            for (int sp : {1, -1}) {
                const auto& prev = best[t - 1][jp][sidx(sp)];
                if (!prev.reachable) continue;
                const Rational x_prev = qs.strike(t - 1, jp, eps) - eps * sp;
                for (int j = 0; j <= qs.count(t); ++j) {
                    const Rational k = qs.strike(t, j, eps);
                    for (int sigma : {1, -1}) {
                        if (!sign_allowed(x_prev, k, sigma, eps)) continue;
                        const int i = cheapest_long(qs, t, x_prev + eps * sigma, eps);
                        if (i < 0) continue;
                        const Rational bid = prev.bid + qs.bid(t, j, eps) - qs.ask(t, i);
                        auto& c = best[t][j][sidx(sigma)];
                        if (!c.reachable || bid > c.bid) c = {true, bid, jp, sp, i};
                    }
                }
            }
        }
    }
    auto rebuild = [&](int s, int j, int sigma) {
        CVBSpec spec;
        spec.u = s;
        spec.eps = eps;
        spec.sigma.assign(s, 0);
        spec.x.assign(s, 0);
        spec.J.assign(s, 0);
        spec.I.assign(s - 1, 0);
        for (int t = s; t >= 1; --t) {
            const auto& c = best[t][j][sidx(sigma)];
            spec.sigma[t - 1] = sigma;
            spec.J[t - 1] = j;
            spec.x[t - 1] = qs.strike(t, j, eps) - eps * sigma;
            if (t > 1) {
                spec.I[t - 2] = c.i;
                j = c.prev_j;
                sigma = c.prev_sigma;
            }
        }
        return spec;
    };

    for (int s = 1; s <= top; ++s) {
        std::vector<std::pair<int, int>> later_instruments;
        for (int t = s + 1; t <= T; ++t)
            for (int i = 0; i <= qs.count(t); ++i) later_instruments.push_back({t, i});
        for (int j = 0; j <= qs.count(s); ++j) {
            for (int sigma : {1, -1}) {
                const auto& cell = best[s][j][sidx(sigma)];
                if (!cell.reachable) continue;
                const Rational& b = cell.bid;
                const Rational x = qs.strike(s, j, eps) - eps * sigma;
                std::optional<CVBSpec> spec;
                auto report = [&](NecessaryCondition c, int t, int i, int u, int l) {
                    if (!spec) spec = rebuild(s, j, sigma);
                    out.push_back({c, s, t, i, u, l, *spec, b});
                };
                for (const auto& [t, i] : later_instruments) {
                    const Rational lo = qs.strike(t, i, eps) + eps;
                    const Rational r = qs.ask(t, i);
                    if (x >= lo && b > r) report(NecessaryCondition::Price, t, i, -1, -1);
                    if (x > lo && b == r && sgn(r) != 0) report(NecessaryCondition::Degenerate, t, i, -1, -1);
                }
                for (const auto& [u, l] : later_instruments) {
                    const Rational hi = qs.strike(u, l, eps) + eps;
                    if (!(x < hi)) continue;
                    const Rational r = qs.ask(u, l);
                    if (r - b < -(hi - x)) report(NecessaryCondition::SlopeBound, -1, -1, u, l);
                    for (const auto& [t, i] : later_instruments) {
                        const Rational lo = qs.strike(t, i, eps) + eps;
                        if (!(lo < x)) continue;
                        // (b - r_t)/(x - lo) <= (r_u - b)/(hi - x), denominators positive
                        if ((b - qs.ask(t, i)) * (hi - x) > (r - b) * (x - lo))
                            report(NecessaryCondition::SlopeComparison, t, i, u, l);
                    }
                }
            }
        }
    }
    return out;
}

SemiStaticPortfolio necessary_certificate(const DiscountedQuoteSet& qs, const Rational& eps, const NecessaryViolation& v) {
    const int T = qs.horizon();
    SemiStaticPortfolio p = cvb_strategy(qs, v.cvb, T);
    const Rational x = v.cvb.x.back();
    switch (v.condition) {
    case NecessaryCondition::SlopeComparison: {
        const Rational kt = qs.strike(v.t, v.i, eps), ku = qs.strike(v.u, v.l, eps);
        const Rational theta = (ku + eps - x) / (ku - kt);
        p.legs.push_back({v.t, v.i, theta});
        p.legs.push_back({v.u, v.l, Rational(1 - theta)});
        if (v.t == v.u) {
            p.rules.push_back({v.t, -1, RuleTest::Always, 0, 0});
        } else {
            // Buy back theta at t and the rest at u, in date order.
            const int first = std::min(v.t, v.u), second = std::max(v.t, v.u);
            const Rational part = first == v.t ? theta : Rational(1 - theta);
            p.rules.push_back({first, -1, RuleTest::Always, 0, Rational(-1 + part)});
            p.rules.push_back({second, Rational(-1 + part), RuleTest::Always, 0, 0});
        }
        p.note = "basket spread against two later calls";
        break;
    }
    case NecessaryCondition::SlopeBound:
        p.legs.push_back({v.u, v.l, 1});
        p.bank0 += qs.strike(v.u, v.l, eps) + eps - x;
        p.rules.push_back({v.u, -1, RuleTest::Always, 0, 0});
        p.note = "basket against a later call plus deposit";
        break;
    case NecessaryCondition::Price:
        p.legs.push_back({v.t, v.i, 1});
        p.rules.push_back({v.t, -1, RuleTest::Always, 0, 0});
        p.note = "basket against a later call";
        break;
    case NecessaryCondition::Degenerate:
        throw MultiMaturityError(K::InvalidSpec, "the degenerate condition only admits weak arbitrage");
    }
    return p;
}

SemiStaticPortfolio necessary_weak_witness(const DiscountedQuoteSet& qs, const Rational& eps, const NecessaryViolation& v,
                                           bool basket_can_end_in_the_money) {
    if (v.condition != NecessaryCondition::Degenerate)
        throw MultiMaturityError(K::InvalidSpec, "weak witnesses are for the degenerate condition");
    const int T = qs.horizon();
    if (basket_can_end_in_the_money) {
        NecessaryViolation as_price = v;
        as_price.condition = NecessaryCondition::Price;
        auto p = necessary_certificate(qs, eps, as_price);
        p.note = "zero-cost basket hedge";
        return p;
    }
    SemiStaticPortfolio p = cvb_strategy(qs, v.cvb, T);
    p.rules.push_back({T, -1, RuleTest::Always, 0, 0});
    p.note = "sell the basket";
    return p;
}

nlohmann::json to_json(const CVBSpec& spec) {
    nlohmann::json x = nlohmann::json::array();
    for (const auto& v : spec.x) x.push_back(rational_to_json(v));
    return {{"u", spec.u}, {"sigma", spec.sigma}, {"x", x}, {"I", spec.I}, {"J", spec.J}, {"epsilon", rational_to_json(spec.eps)}};
}

nlohmann::json to_json(const NecessaryViolation& v) {
    nlohmann::json j = {{"condition", necessary_id(v.condition)},
                        {"s", v.s},
                        {"j", v.cvb.J.back()},
                        {"sigma", v.cvb.sigma.back()},
                        {"basket", to_json(v.cvb)},
                        {"basket_bid", rational_to_json(v.bid)}};
    if (v.t >= 0) {
        j["t"] = v.t;
        j["i"] = v.i;
    }
    if (v.u >= 0) {
        j["u"] = v.u;
        j["l"] = v.l;
    }
    return j;
}

} // namespace spreadcheck
