#include "spreadcheck/certificates.hpp"

#include "spreadcheck/json_util.hpp"

#include <algorithm>
#include <stdexcept>

namespace spreadcheck {

namespace {

// Prefix nodes of the X-path tree behind the peacock construction.
constexpr std::size_t kMaxPathNodes = 4000;

Classification worse(Classification a, Classification b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

Classification of_tag(Verdict v) {
    switch (v) {
    case Verdict::Consistent:
        return Classification::Consistent;
    case Verdict::WeakArbitrage:
        return Classification::WeakArbitrage;
    case Verdict::ModelIndependentArbitrage:
        break;
    }
    return Classification::ModelIndependentArbitrage;
}

std::size_t path_nodes(const std::vector<DiscreteMeasure>& mus) {
    std::size_t total = 0, level = 1;
    for (const auto& mu : mus) {
        level *= mu.size();
        total += level;
        if (total > kMaxPathNodes) return total;
    }
    return total;
}

// Model through peacock + kernels, kept only if every invariant and every
// quote band checks out.
std::optional<FiniteModel> model_from_marginals(const DiscountedQuoteSet& qs, const std::vector<DiscreteMeasure>& mus,
                                                const Rational& eps, std::vector<std::string>& notes) {
    Rational lo = qs.underlying.bid, hi = qs.underlying.ask;
    for (const auto& mu : mus) {
        lo = rmax(lo, mu.mean() - eps);
        hi = rmin(hi, mu.mean() + eps);
    }
    if (lo > hi) {
        notes.push_back("marginal means admit no common shadow mean inside the underlying band");
        return std::nullopt;
    }
    if (path_nodes(mus) > kMaxPathNodes) {
        notes.push_back("path tree above " + std::to_string(kMaxPathNodes) + " nodes; model construction skipped");
        return std::nullopt;
    }
    std::vector<Rational> candidates{(lo + hi) / 2, lo, hi};
    for (const auto& m : candidates) {
        const auto nus = peacock_construct(mus, eps, m);
        if (!nus) continue;
        try {
            auto model = assemble_model(mus, *nus, martingale_from_peacock(*nus), qs.bank, qs.underlying, eps);
            if (check_model(model, eps).empty() && check_model_prices(model, qs).empty()) return model;
        } catch (const MultiMaturityError& e) {
            notes.push_back(std::string("model assembly: ") + e.what());
        }
    }
    return std::nullopt;
}

// Point masses that fit every call band, against the mean band. A point
// mass can fit the calls and still fail the mean.
void dirac_note(const AugmentedStrip& strip, const DiscountedQuoteSet& qs, const FiniteModel& model,
                std::vector<std::string>& notes) {
    Rational a = strip.eps;
    std::optional<Rational> b;
    for (int i = 1; i <= strip.last(); ++i) {
        const Rational top = strip.k[i] + strip.ask[i];
        b = b ? rmin(*b, top) : top;
        if (sgn(strip.bid[i]) > 0) a = rmax(a, strip.k[i] + strip.bid[i]);
    }
    const Rational mlo = qs.underlying.bid - strip.eps, mhi = qs.underlying.ask + strip.eps;
    const Rational mean = model.nodes.size() > 1 ? model_call_price(model, 1, 0) : Rational(0);
    notes.push_back("witness mean E[D(1) S^C_1] = " + to_string(mean) + ", mean band [" + to_string(mlo) + ", " +
                    to_string(mhi) + "]");
    if (!b || a > *b) return;
    if (a < mlo || *b > mhi)
        notes.push_back("point masses fitting the call bands sit in [" + to_string(a) + ", " + to_string(*b) +
                        "]; only those with mean inside the mean band are witnesses");
}

} // namespace

const char* classification_name(Classification c) {
    switch (c) {
    case Classification::Consistent:
        return "consistent";
    case Classification::NecessaryPass:
        return "necessary_pass";
    case Classification::WeakArbitrage:
        return "weak_arbitrage";
    case Classification::ModelIndependentArbitrage:
        return "model_independent_arbitrage";
    }
    return "";
}

int exit_code(Classification c) {
    switch (c) {
    case Classification::Consistent:
    case Classification::NecessaryPass:
        return 0;
    case Classification::WeakArbitrage:
        return 2;
    case Classification::ModelIndependentArbitrage:
        return 3;
    }
    return 1;
}

bool strike_in_the_money(const FiniteModel& model, int t, const Rational& k) {
    const auto probs = model.node_probabilities();
    for (std::size_t n = 0; n < model.nodes.size(); ++n) {
        const auto& node = model.nodes[n];
        if (node.time == t && sgn(probs[n]) > 0 && node.s_ref / model.bank[t] > k) return true;
    }
    return false;
}

bool basket_ends_short(const DiscountedQuoteSet& qs, const CVBSpec& spec, const FiniteModel& model) {
    const auto p = cvb_strategy(qs, spec, qs.horizon());
    for (const auto& pl : execute(p, qs, model))
        if (sgn(pl.probability) > 0 && cvb_dynamic_position(p, pl.ledger, spec.u) == -1) return true;
    return false;
}

const SemiStaticPortfolio& select(const WeakWitness& w, const DiscountedQuoteSet& qs, const FiniteModel& model) {
    const bool event = w.basket ? basket_ends_short(qs, *w.basket, model) : strike_in_the_money(model, w.t, w.strike);
    return event ? w.if_event : w.otherwise;
}

ClassifyReport classify(const DiscountedQuoteSet& qs, const Rational& eps, const ClassifyOptions& opts) {
    const auto diags = validate_for_epsilon(qs, eps);
    if (!diags.empty()) throw std::invalid_argument(diags.front().message);
    const int T = qs.horizon();
    ClassifyReport rep;
    rep.eps = eps;
    std::size_t skipped = 0;
    auto certify = [&](std::string condition, int t, SemiStaticPortfolio p) {
        if (rep.certificates.size() >= opts.max_certificates) {
            ++skipped;
            return;
        }
        Certificate c{std::move(condition), t, std::move(p), {}};
        c.verification = verify_model_independent(c.portfolio, qs, {opts.grid_density});
        rep.certificates.push_back(std::move(c));
    };

    std::vector<AugmentedStrip> strips(T + 1);
    for (int t = 1; t <= T; ++t) {
        strips[t] = augment(qs, t, eps);
        const auto v = check_conditions(strips[t]);
        rep.verdict = worse(rep.verdict, of_tag(v.tag));
        for (const auto& x : v.violations) {
            rep.single.push_back({t, x});
            if (x.condition == Condition::Degenerate) {
                rep.weak.push_back({condition_name(x.condition), t, std::nullopt, strips[t].k[x.j],
                                    weak_witness(strips[t], x, t, T, true), weak_witness(strips[t], x, t, T, false)});
            } else {
                certify(condition_name(x.condition), t, arbitrage_certificate(strips[t], x, t, T));
            }
        }
    }

    if (T >= 2 && opts.max_u < 0) rep.notes.push_back("basket conditions skipped (per-maturity mode)");
    if (T >= 2 && opts.max_u >= 0) {
        rep.necessary = check_necessary(qs, eps, {opts.max_u, opts.cap});
        for (const auto& v : rep.necessary) {
            if (v.condition == NecessaryCondition::Degenerate) {
                rep.verdict = worse(rep.verdict, Classification::WeakArbitrage);
                rep.weak.push_back({necessary_id(v.condition), 0, v.cvb, 0, necessary_weak_witness(qs, eps, v, true),
                                    necessary_weak_witness(qs, eps, v, false)});
            } else {
                rep.verdict = worse(rep.verdict, Classification::ModelIndependentArbitrage);
                certify(necessary_id(v.condition), 0, necessary_certificate(qs, eps, v));
            }
        }
        if (opts.max_u > 0 && opts.max_u < T - 1)
            rep.notes.push_back("baskets limited to maturity " + std::to_string(opts.max_u));
    }
    if (skipped > 0) rep.notes.push_back(std::to_string(skipped) + " further certificates not built (cap)");
    for (const auto& c : rep.certificates)
        if (!c.verification.is_arbitrage)
            rep.notes.push_back("certificate for " + c.condition + " failed grid verification: " + c.verification.reason);
    if (!rep.certificates.empty())
        rep.notes.push_back("certificates are verified on a finite grid of price paths including every kink-critical "
                            "value, not symbolically");
    if (rep.verdict != Classification::Consistent) return rep;

    if (T == 1) {
        try {
            auto build = [&](const SingleModel& sm) {
                auto model = assemble_model({sm.mu}, {sm.nu}, {}, qs.bank, qs.underlying, eps);
                const auto bad = check_model(model, eps);
                if (!bad.empty()) throw std::logic_error(bad.front());
                return model;
            };
            try {
                rep.model = build(build_single_model(strips[1], shadow_prices(strips[1])));
            } catch (const std::exception&) {
                const auto positive = positive_single_model(strips[1]);
                if (!positive)
                    throw std::runtime_error("every law fitting the quotes needs a zero price; only the closure of "
                                             "the model set fits");
                rep.model = build(*positive);
            }
            dirac_note(strips[1], qs, *rep.model, rep.notes);
        } catch (const std::exception& e) {
            rep.verdict = Classification::NecessaryPass;
            rep.notes.push_back(std::string("model construction failed: ") + e.what());
        }
        return rep;
    }

    if (opts.marginals) {
        try {
            rep.simplified = check_simplified(*opts.marginals, qs.underlying.bid, eps);
        } catch (const MultiMaturityError& e) {
            rep.notes.push_back(std::string("complete-curve check not applicable: ") + e.what());
        }
        if (qs.underlying.bid != qs.underlying.ask)
            rep.notes.push_back("complete-curve check assumes S_0 bid = S_0 ask");
        if (rep.simplified && !rep.simplified->consistent) {
            // No eps-bounded model exists, but no explicit strategy is built.
            rep.verdict = Classification::WeakArbitrage;
            rep.notes.push_back("complete-curve condition " + rep.simplified->violation->id() +
                                " fails: no eps-bounded model, no certificate constructed");
            return rep;
        }
        if (rep.simplified) rep.model = model_from_marginals(qs, *opts.marginals, eps, rep.notes);
    } else {
        // Sufficient route: shadow-price laws per maturity, then a peacock.
        std::vector<DiscreteMeasure> mus;
        for (int t = 1; t <= T; ++t) mus.push_back(build_single_model(strips[t], shadow_prices(strips[t])).mu);
        rep.model = model_from_marginals(qs, mus, eps, rep.notes);
    }
    if (!rep.model) {
        rep.verdict = Classification::NecessaryPass;
        rep.notes.push_back("necessary conditions pass; they are not sufficient for several maturities and no model "
                            "was constructed");
    }
    return rep;
}

ClassifyReport classify_unbounded(const DiscountedQuoteSet& qs, const std::optional<Rational>& p) {
    ClassifyReport rep;
    const auto r = p ? check_p_bounded(qs, 0, *p) : check_unbounded(qs);
    rep.verdict = of_tag(r.tag);
    rep.single = r.violations;
    rep.notes.push_back(p ? "p-bounded spreads: same conditions as unbounded spreads, for every p in (0, 1]"
                          : "unbounded spreads: per-maturity conditions over the quoted calls only");
    return rep;
}

nlohmann::json to_json(const Certificate& c) {
    nlohmann::json j = {{"condition", c.condition},
                        {"portfolio", to_json(c.portfolio)},
                        {"initial_value", rational_to_json(c.verification.initial_value)},
                        {"verified", c.verification.is_arbitrage},
                        {"worst_terminal_bank", rational_to_json(c.verification.worst_terminal_bank)},
                        {"grid_points", c.verification.grid_points}};
    if (c.t > 0) j["t"] = c.t;
    if (!c.verification.reason.empty()) j["reason"] = c.verification.reason;
    return j;
}

nlohmann::json to_json(const WeakWitness& w) {
    nlohmann::json j = {{"condition", w.condition},
                        {"if_event", to_json(w.if_event)},
                        {"otherwise", to_json(w.otherwise)}};
    if (w.basket) {
        j["basket"] = to_json(*w.basket);
        j["event"] = "basket strategy ends short at its maturity";
    } else {
        j["t"] = w.t;
        j["event"] = "D(t) S^C_t > " + to_string(w.strike);
    }
    return j;
}

nlohmann::json to_json(const ClassifyReport& r) {
    nlohmann::json single = nlohmann::json::array();
    for (const auto& [t, v] : r.single) {
        auto j = to_json(v);
        j["t"] = t;
        single.push_back(j);
    }
    nlohmann::json necessary = nlohmann::json::array();
    for (const auto& v : r.necessary) necessary.push_back(to_json(v));
    nlohmann::json certs = nlohmann::json::array();
    for (const auto& c : r.certificates) certs.push_back(to_json(c));
    nlohmann::json weak = nlohmann::json::array();
    for (const auto& w : r.weak) weak.push_back(to_json(w));
    nlohmann::json j = {{"verdict", classification_name(r.verdict)},
                        {"exit_code", exit_code(r.verdict)},
                        {"epsilon", rational_to_json(r.eps)},
                        {"single_maturity_violations", single},
                        {"necessary_violations", necessary},
                        {"certificates", certs},
                        {"weak_witnesses", weak},
                        {"notes", r.notes}};
    if (r.simplified) {
        nlohmann::json s = {{"consistent", r.simplified->consistent}};
        if (r.simplified->violation) {
            const auto& v = *r.simplified->violation;
            nlohmann::json ks = nlohmann::json::array();
            for (const auto& k : v.k) ks.push_back(rational_to_json(k));
            s["violation"] = {{"id", v.id()}, {"u", v.u}, {"k", ks}, {"value", rational_to_json(v.value)}};
        }
        j["complete_curves"] = s;
    }
    if (r.model) j["model"] = to_json(*r.model);
    return j;
}

} // namespace spreadcheck
