#include "spreadcheck/single_maturity.hpp"

#include "spreadcheck/lp.hpp"

namespace spreadcheck {

namespace {

using K = SingleMaturityError::Kind;

// Line through (x1, y1) and (x2, y2), evaluated at x.
Rational line_at(const Rational& x1, const Rational& y1, const Rational& x2, const Rational& y2, const Rational& x) {
    return y1 + (y2 - y1) * (x - x1) / (x2 - x1);
}

} // namespace

AugmentedStrip make_strip(Rational eps, std::vector<Rational> k, std::vector<Rational> bid, std::vector<Rational> ask) {
    if (k.empty() || k.size() != bid.size() || k.size() != ask.size())
        throw SingleMaturityError(K::InvalidStrip, "strip needs matching strike and band vectors");
    if (sgn(eps) < 0) throw SingleMaturityError(K::InvalidStrip, "negative epsilon");
    for (std::size_t s = 0; s < k.size(); ++s) {
        if (bid[s] > ask[s]) throw SingleMaturityError(K::InvalidStrip, "empty band at index " + std::to_string(s));
        if (s > 0 && k[s] <= k[s - 1]) throw SingleMaturityError(K::InvalidStrip, "strikes must increase");
    }
    if (k.size() > 1 && k[1] <= eps) throw SingleMaturityError(K::InvalidStrip, "first strike must exceed epsilon");
    return {std::move(eps), std::move(k), std::move(bid), std::move(ask)};
}

AugmentedStrip augment(const DiscountedQuoteSet& qs, int t, const Rational& eps) {
    const Rational pseudo_bid = qs.bid(t, 0, eps);
    if (sgn(pseudo_bid) <= 0)
        throw SingleMaturityError(K::PseudoBidNonpositive, "S_0 bid - 2 eps = " + to_string(pseudo_bid) + " is not positive");
    std::vector<Rational> k, bid, ask;
    for (int i = 0; i <= qs.count(t); ++i) {
        k.push_back(qs.strike(t, i, eps));
        bid.push_back(qs.bid(t, i, eps));
        ask.push_back(qs.ask(t, i));
    }
    return make_strip(eps, std::move(k), std::move(bid), std::move(ask));
}

const char* condition_name(Condition c) {
    switch (c) {
    case Condition::Butterfly:
        return "butterfly";
    case Condition::CallSpreadSlope:
        return "callspread_slope";
    case Condition::CallSpreadPrice:
        return "callspread_price";
    case Condition::Degenerate:
        return "degenerate";
    }
    return "";
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Consistent:
        return "consistent";
    case Verdict::WeakArbitrage:
        return "weak_arbitrage";
    case Verdict::ModelIndependentArbitrage:
        return "model_independent_arbitrage";
    }
    return "";
}

SingleVerdict check_conditions(const AugmentedStrip& s, int first) {
    SingleVerdict out;
    const int n = s.last();
    const auto& k = s.k;
    const auto& lo = s.bid;
    const auto& hi = s.ask;
    for (int i = first; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            for (int l = j + 1; l <= n; ++l) {
                // (hi_l - lo_j)/(k_l - k_j) >= (lo_j - hi_i)/(k_j - k_i), cross-multiplied
                if ((hi[l] - lo[j]) * (k[j] - k[i]) < (lo[j] - hi[i]) * (k[l] - k[j]))
                    out.violations.push_back({Condition::Butterfly, i, j, l});
            }
        }
    }
    for (int i = first; i <= n; ++i)
        for (int l = i + 1; l <= n; ++l)
            if (hi[l] - lo[i] < -(k[l] - k[i])) out.violations.push_back({Condition::CallSpreadSlope, i, -1, l});
    bool hard = !out.violations.empty();
    for (int i = first; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            if (lo[j] > hi[i]) {
                out.violations.push_back({Condition::CallSpreadPrice, i, j, -1});
                hard = true;
            } else if (lo[j] == hi[i] && sgn(lo[j]) != 0) {
                out.violations.push_back({Condition::Degenerate, i, j, -1});
            }
        }
    }
    if (hard)
        out.tag = Verdict::ModelIndependentArbitrage;
    else if (!out.violations.empty())
        out.tag = Verdict::WeakArbitrage;
    return out;
}

ShadowPrices shadow_prices(const AugmentedStrip& strip) {
    const auto verdict = check_conditions(strip);
    if (verdict.tag == Verdict::ModelIndependentArbitrage)
        throw SingleMaturityError(K::PreconditionViolated, "shadow prices need the butterfly, slope and price conditions");
    const bool weak = verdict.tag == Verdict::WeakArbitrage;

    std::vector<Rational> k = strip.k, lo = strip.bid, hi = strip.ask;
    const int n = strip.last();
    ShadowPrices sp;
    if (!weak) {
        // Virtual strike where every relevant line and the slope -1 rays from
        // the bids have reached zero.
        bool any = false;
        Rational ks = 0;
        for (int i = 0; i <= n; ++i) {
            for (int j = i + 1; j <= n; ++j) {
                if (hi[i] <= lo[j]) continue;
                const Rational x = (hi[i] * k[j] - lo[j] * k[i]) / (hi[i] - lo[j]);
                ks = any ? rmax(ks, x) : x;
                any = true;
            }
        }
        Rational ray = k[0] + lo[0];
        for (int j = 1; j <= n; ++j) ray = rmax(ray, k[j] + lo[j]);
        ks = any ? rmax(ks, ray) : Rational(ray + 1);
        sp.virtual_strike = ks;
        k.push_back(ks);
        lo.push_back(0);
        hi.push_back(0);
    }
    const int m = static_cast<int>(k.size()) - 1;

    std::vector<Rational> e(m + 1);
    for (int s = 0; s <= m; ++s) {
        Rational low = lo[s], high = hi[s];
        // Lines through (k_j, bid_j) and (k_l, ask_l) bound e_s from below.
        for (int j = s; j <= m; ++j)
            for (int l = j + 1; l <= m; ++l) low = rmax(low, line_at(k[j], lo[j], k[l], hi[l], k[s]));
        // Without a zero-priced strike, monotonicity has to be imposed directly.
        if (weak)
            for (int l = s + 1; l <= m; ++l) low = rmax(low, lo[l]);
        if (s == 0) {
            for (int i = 1; i <= m; ++i) high = rmin(high, k[i] + hi[i] - k[0]);
        } else {
            if (s == 1)
                low = rmax(low, e[0] + k[0] - k[1]);
            else
                low = rmax(low, line_at(k[s - 2], e[s - 2], k[s - 1], e[s - 1], k[s]));
            for (int i = s; i <= m; ++i) high = rmin(high, line_at(k[s - 1], e[s - 1], k[i], hi[i], k[s]));
            if (weak) high = rmin(high, e[s - 1]);
        }
        if (low > high)
            throw SingleMaturityError(K::InfeasibleBand, "no admissible shadow price at index " + std::to_string(s) + ": [" +
                                                              to_string(low) + ", " + to_string(high) + "]");
        e[s] = (low + high) / 2;
    }
    if (!weak) e.pop_back();
    sp.e = std::move(e);
    return sp;
}

std::vector<std::string> shadow_price_problems(const AugmentedStrip& strip, const std::vector<Rational>& e) {
    std::vector<std::string> bad;
    if (e.size() != strip.k.size()) {
        bad.push_back("expected " + std::to_string(strip.k.size()) + " shadow prices");
        return bad;
    }
    const auto& k = strip.k;
    for (std::size_t s = 0; s < e.size(); ++s)
        if (e[s] < strip.bid[s] || e[s] > strip.ask[s]) bad.push_back("e_" + std::to_string(s) + " outside its band");
    Rational prev = -1;
    for (std::size_t s = 0; s + 1 < e.size(); ++s) {
        const Rational slope = (e[s + 1] - e[s]) / (k[s + 1] - k[s]);
        if (slope < prev) bad.push_back(s == 0 ? "first slope below -1" : "not convex at index " + std::to_string(s));
        if (sgn(slope) > 0) bad.push_back("increasing after index " + std::to_string(s));
        if (sgn(slope) == 0 && sgn(e[s]) != 0) bad.push_back("flat at a positive value after index " + std::to_string(s));
        prev = slope;
    }
    return bad;
}

PiecewiseLinear extended_call_function(const AugmentedStrip& strip, const ShadowPrices& sp) {
    std::vector<Rational> xs = strip.k, ys = sp.e;
    if (ys.size() != xs.size()) throw SingleMaturityError(K::InvalidShadowPrices, "shadow price count mismatch");
    if (sp.virtual_strike) {
        xs.push_back(*sp.virtual_strike);
        ys.push_back(0);
    }
    const std::size_t n = xs.size();
    if (sgn(ys.back()) != 0) {
        const Rational slope = n == 1 ? Rational(-1) : Rational((ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]));
        if (sgn(slope) >= 0)
            throw SingleMaturityError(K::InvalidShadowPrices, "shadow prices end flat at a positive value");
        xs.push_back(xs.back() - ys.back() / slope);
        ys.push_back(0);
    }
    return PiecewiseLinear(std::move(xs), std::move(ys), -1, 0).simplified();
}

SingleModel build_single_model(const AugmentedStrip& strip, const ShadowPrices& sp) {
    auto bad = shadow_price_problems(strip, sp.e);
    if (!bad.empty()) throw SingleMaturityError(K::InvalidShadowPrices, bad.front());
    const auto r = extended_call_function(strip, sp);
    DiscreteMeasure mu = measure_of(r);
    // S_0 bid = bid_0 + 2 eps and S_0 ask = ask_0.
    const Rational s_bid = strip.bid[0] + 2 * strip.eps, s_ask = strip.ask[0];
    const Rational mean = mu.mean();
    const Rational target = rmin(rmax(mean, s_bid), s_ask);
    DiscreteMeasure nu = shift_measure(mu, target - mean);
    return {std::move(mu), std::move(nu)};
}

std::optional<SingleModel> positive_single_model(const AugmentedStrip& strip) {
    const int n = strip.last();
    const auto& k = strip.k;
    const Rational s_bid = strip.bid[0] + 2 * strip.eps, s_ask = strip.ask[0];
    const Rational bound = s_ask + strip.eps;
    // Variables 0..n: atoms at k_s; n+1: tail mass q; n+2: tail first moment w.
    const int q = n + 1, w = n + 2;
    std::vector<lp::Term> mean{{w, 1}};
    for (int s = 0; s <= n; ++s) mean.push_back({s, k[s]});
    auto solve = [&](bool no_tail, bool no_bottom, int objective) {
        lp::Program prog;
        for (int v = 0; v <= w; ++v) prog.add_variable();
        std::vector<lp::Term> total{{q, 1}};
        for (int s = 0; s <= n; ++s) total.push_back({s, 1});
        prog.add_constraint(total, lp::Relation::Equal, 1);
        prog.add_constraint({{w, 1}, {q, -k[n]}}, lp::Relation::GreaterEqual, 0);
        for (int i = 1; i <= n; ++i) {
            std::vector<lp::Term> price{{w, 1}, {q, -k[i]}};
            for (int j = i + 1; j <= n; ++j) price.push_back({j, k[j] - k[i]});
            prog.add_constraint(price, lp::Relation::GreaterEqual, strip.bid[i]);
            prog.add_constraint(price, lp::Relation::LessEqual, strip.ask[i]);
        }
        prog.add_constraint(mean, lp::Relation::GreaterEqual, s_bid - strip.eps);
        prog.add_constraint(mean, lp::Relation::LessEqual, bound);
        if (no_tail) prog.add_constraint({{w, 1}}, lp::Relation::Equal, 0);
        if (no_bottom) prog.add_constraint({{0, 1}}, lp::Relation::Equal, 0);
        if (objective > 0) prog.set_objective({{q, 1}}, lp::Sense::Maximize);
        if (objective < 0) prog.set_objective(mean, lp::Sense::Minimize);
        return prog.solve();
    };
    // A usable law has a genuine tail (q > 0, or no tail moment at all) and
    // either no atom at k_0 or a mean below the bound, which leaves room to
    // keep the lowest shadow price positive.
    std::optional<std::vector<Rational>> x;
    if (auto r = solve(false, true, 1); r.status == lp::Status::Optimal && sgn(r.objective) > 0) {
        x = r.values;
    } else if (auto r0 = solve(true, true, 0); r0.status == lp::Status::Optimal) {
        x = r0.values;
    } else if (auto low = solve(false, false, -1); low.status == lp::Status::Optimal && low.objective < bound) {
        if (auto tail = solve(false, false, 1); tail.status == lp::Status::Optimal && sgn(tail.objective) > 0) {
            std::vector<Rational> mid(low.values.size());
            for (std::size_t v = 0; v < mid.size(); ++v) mid[v] = (low.values[v] + tail.values[v]) / 2;
            x = mid;
        } else if (auto flat = solve(true, false, -1); flat.status == lp::Status::Optimal && flat.objective < bound) {
            x = flat.values;
        }
    }
    if (!x) return std::nullopt;

    const auto& v = *x;
    std::vector<Atom> atoms;
    for (int s = 0; s <= n; ++s) atoms.push_back({k[s], v[s]});
    if (sgn(v[q]) > 0) atoms.push_back({v[w] / v[q], v[q]});
    Rational m = 0;
    for (const auto& a : atoms) m += a.point * a.mass;
    if (sgn(k[0]) == 0 && sgn(v[0]) > 0) {
        // eps = 0: lift the atom at zero while the mean stays below S_0 ask.
        atoms[0].point = rmin(k[1] / 2, (bound - m) / (2 * v[0]));
        m += atoms[0].point * v[0];
    }
    DiscreteMeasure mu(std::move(atoms));
    DiscreteMeasure nu = shift_measure(mu, rmin(rmax(m, s_bid), s_ask) - m);
    if (sgn(mu.min_point()) <= 0 || sgn(nu.min_point()) <= 0) return std::nullopt;
    return SingleModel{std::move(mu), std::move(nu)};
}

SemiStaticPortfolio arbitrage_certificate(const AugmentedStrip& s, const Violation& v, int t, int horizon) {
    SemiStaticPortfolio p;
    p.horizon = horizon;
    p.eps = s.eps;
    const auto& k = s.k;
    switch (v.condition) {
    case Condition::Butterfly: {
        const Rational a = 1 / (k[v.j] - k[v.i]), b = 1 / (k[v.l] - k[v.j]);
        p.legs = {{t, v.i, a}, {t, v.j, Rational(-(a + b))}, {t, v.l, b}};
        p.note = "butterfly";
        break;
    }
    case Condition::CallSpreadSlope:
        p.legs = {{t, v.l, 1}, {t, v.i, -1}};
        p.bank0 = k[v.l] - k[v.i];
        p.note = "call spread with deposit";
        break;
    case Condition::CallSpreadPrice:
        p.legs = {{t, v.i, 1}, {t, v.j, -1}};
        p.note = "call spread";
        break;
    case Condition::Degenerate:
        throw SingleMaturityError(K::NotCertifiable, "a degenerate spread only admits weak arbitrage");
    }
    return p;
}

SemiStaticPortfolio weak_witness(const AugmentedStrip& s, const Violation& v, int t, int horizon,
                                 bool strike_j_in_the_money) {
    if (v.condition != Condition::Degenerate)
        throw SingleMaturityError(K::PreconditionViolated, "weak witnesses are for degenerate spreads");
    SemiStaticPortfolio p;
    p.horizon = horizon;
    p.eps = s.eps;
    if (!strike_j_in_the_money) {
        p.legs = {{t, v.j, -1}};
        p.bank0 = s.bid[v.j];
        p.note = "sell the worthless call";
    } else {
        p.legs = {{t, v.i, 1}, {t, v.j, -1}};
        p.note = "zero-cost call spread";
    }
    return p;
}

std::vector<Rational> perturbed_prices(const AugmentedStrip& strip, const std::vector<Rational>& e, const Rational& margin) {
    if (check_conditions(strip).tag != Verdict::WeakArbitrage)
        throw SingleMaturityError(K::PreconditionViolated, "perturbation needs a strip failing only the degenerate condition");
    if (e.size() != strip.k.size() || sgn(margin) <= 0)
        throw SingleMaturityError(K::PreconditionViolated, "bad shadow prices or margin");
    const auto& k = strip.k;
    const int n = strip.last();
    int l0 = 0;
    for (int l = 0; l <= n; ++l)
        if (e[l] + k[l] == e[0] + k[0]) l0 = l;
    if (l0 == n) throw SingleMaturityError(K::PreconditionViolated, "shadow prices have slope -1 throughout");
    Rational sigma = 0;
    for (int s = l0; s <= n; ++s) sigma += k[s] - k[l0];
    Rational z = margin;
    z = rmin(z, (e[l0 + 1] + k[l0 + 1] - e[l0] - k[l0]) * sigma / (k[l0 + 1] - k[l0]));
    z = rmin(z, e[n] * sigma / (k[n] - k[l0]));
    std::vector<Rational> out = e;
    for (int l = l0 + 1; l <= n; ++l) out[l] -= z * (k[l] - k[l0]) / sigma;
    return out;
}

nlohmann::json to_json(const Violation& v) {
    nlohmann::json j = {{"condition", condition_name(v.condition)}};
    if (v.i >= 0) j["i"] = v.i;
    if (v.j >= 0) j["j"] = v.j;
    if (v.l >= 0) j["l"] = v.l;
    return j;
}

nlohmann::json to_json(const SingleVerdict& v) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& x : v.violations) list.push_back(to_json(x));
    return {{"verdict", verdict_name(v.tag)}, {"violations", list}};
}

} // namespace spreadcheck
