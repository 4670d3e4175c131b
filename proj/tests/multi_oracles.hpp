// Random multi-maturity instances and brute-force references for the
// multi-maturity checks.
#ifndef SPREADCHECK_TESTS_MULTI_ORACLES_HPP
#define SPREADCHECK_TESTS_MULTI_ORACLES_HPP

#include "spreadcheck/lp.hpp"
#include "spreadcheck/multi_maturity.hpp"
#include "support.hpp"

#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

namespace multi_oracles {

using namespace spreadcheck;
using support::uniform;

// T maturities, 1..max_n strikes each on a half-integer grid in [1, 7],
// random positive bands. Bank grows by 1/10 per period.
inline DiscountedQuoteSet random_quotes(std::mt19937_64& rng, int T, int max_n) {
    std::vector<Rational> bank;
    for (int t = 0; t <= T; ++t) bank.push_back(1 + frac(t, 10));
    const Rational s0 = frac(uniform(rng, 8, 16), 2);
    const BidAsk under{s0 - frac(uniform(rng, 0, 1), 2), s0};
    std::vector<std::pair<int, OptionQuote>> recs;
    for (int t = 1; t <= T; ++t) {
        const int n = uniform(rng, 1, max_n);
        std::set<int> halves;
        while (static_cast<int>(halves.size()) < n) halves.insert(uniform(rng, 2, 14));
        for (int h : halves) {
            const Rational k = frac(h, 2);
            const Rational mid = rmax(frac(1, 4), s0 - k + frac(uniform(rng, -2, 6), 4));
            const Rational half = frac(uniform(rng, 0, 2), 4);
            const Rational bid = rmax(frac(1, 8), mid - half);
            // strikes are given in currency units: K = B(t) k
            recs.push_back({t, {k * bank[t], bid, mid + half}});
        }
    }
    return discount(make_quotes(bank, under, recs));
}

// Complete curves: calls at every atom of mu_t but the last, bid = ask = E(X - k)^+,
// strikes scaled by the bank, stock quoted at s0 without spread.
inline DiscountedQuoteSet quotes_from_marginals(const std::vector<DiscreteMeasure>& mus, const Rational& s0,
                                                const std::vector<Rational>& bank) {
    std::vector<std::pair<int, OptionQuote>> recs;
    for (std::size_t t = 1; t <= mus.size(); ++t)
        for (const auto& at : mus[t - 1].atoms()) {
            const Rational r = support::call_sum(mus[t - 1], at.point);
            if (sgn(r) == 0) continue;  // quotes must be positive
            recs.push_back({static_cast<int>(t), {at.point * bank[t], r, r}});
        }
    return discount(make_quotes(bank, {s0, s0}, recs));
}

// Random tree of depth T with branching 1..2. Discounted S^C is drawn near
// the given critical values, S lower/upper within the eps band around it.
// S* is set to S^C; the tree is only used for strategy replay.
inline FiniteModel random_bounded_model(std::mt19937_64& rng, const std::vector<Rational>& bank, const Rational& eps,
                                        const std::vector<std::vector<Rational>>& critical) {
    const int T = static_cast<int>(bank.size()) - 1;
    FiniteModel m;
    m.bank = bank;
    m.nodes.push_back({0, -1, 0, 1, 10, 10, 10, 10});
    std::vector<int> frontier{0};
    for (int t = 1; t <= T; ++t) {
        std::vector<int> next;
        for (int parent : frontier) {
            const int kids = uniform(rng, 1, 2);
            for (int c = 0; c < kids; ++c) {
                Rational ref;
                const auto& crit = critical[t];
                if (!crit.empty() && uniform(rng, 0, 2) > 0) {
                    ref = crit[uniform(rng, 0, static_cast<int>(crit.size()) - 1)];
                    ref += eps * frac(uniform(rng, -2, 2), 2);
                } else {
                    ref = frac(uniform(rng, 1, 40), 2);
                }
                if (ref < eps) ref = eps;
                if (sgn(ref) == 0) ref = frac(1, 4);
                // bid in [max(ref - eps, small), ref], ask in [ref, bid + eps]
                Rational lo = rmax(ref - eps, ref / 2);
                const Rational bid = lo + (ref - lo) * frac(uniform(rng, 0, 2), 2);
                const Rational ask = ref + (bid + eps - ref) * frac(uniform(rng, 0, 2), 2);
                const int id = static_cast<int>(m.nodes.size());
                m.nodes.push_back({id, parent, t, frac(1, kids), bid * bank[t], ask * bank[t], ref * bank[t],
                                   ref * bank[t]});
                next.push_back(id);
            }
        }
        frontier = std::move(next);
    }
    return m;
}

// Critical discounted reference values per maturity: every strike, the
// pseudo strike and the basket thresholds.
inline std::vector<std::vector<Rational>> critical_values(const DiscountedQuoteSet& qs, const Rational& eps) {
    std::vector<std::vector<Rational>> out(qs.horizon() + 1);
    for (int t = 1; t <= qs.horizon(); ++t)
        for (int i = 0; i <= qs.count(t); ++i) out[t].push_back(qs.strike(t, i, eps));
    return out;
}

using Key = std::tuple<int, int, int, int, int, int, int, int>;  // cond, s, j, sigma, t, i, u, l

// Condition battery over every enumerated basket. The conditions are
// evaluated at the highest bid per terminal (s, j_s, sigma_s), since the
// degenerate one is an equality and would otherwise fire on cheaper baskets.
inline std::set<Key> necessary_brute(const DiscountedQuoteSet& qs, const Rational& eps) {
    std::set<Key> keys;
    const int T = qs.horizon();
    if (T < 2) return keys;
    std::map<std::tuple<int, int, int>, Rational> best;
    for (const auto& spec : enumerate_cvbs(qs, eps, T - 1, 1000000)) {
        // bid recomputed leg by leg
        Rational b = qs.bid(1, spec.J[0], eps) - (spec.sigma[0] < 0 ? Rational(2 * eps) : Rational(0));
        for (int t = 2; t <= spec.u; ++t) b += qs.bid(t, spec.J[t - 1], eps) - qs.ask(t, spec.I[t - 2]);
        const std::tuple<int, int, int> key{spec.u, spec.J.back(), spec.sigma.back()};
        auto it = best.find(key);
        if (it == best.end() || b > it->second) best[key] = b;
    }
    for (const auto& [key, b] : best) {
        const auto [s, j, sigma] = key;
        const Rational x = qs.strike(s, j, eps) - eps * sigma;
        for (int t = s + 1; t <= T; ++t) {
            for (int i = 0; i <= qs.count(t); ++i) {
                const Rational kt = qs.strike(t, i, eps), rt = qs.ask(t, i);
                if (x >= kt + eps && b - rt > 0) keys.insert({2, s, j, sigma, t, i, -1, -1});
                if (x > kt + eps && b == rt && rt != 0) keys.insert({3, s, j, sigma, t, i, -1, -1});
            }
        }
        for (int u = s + 1; u <= T; ++u) {
            for (int l = 0; l <= qs.count(u); ++l) {
                const Rational ku = qs.strike(u, l, eps), ru = qs.ask(u, l);
                if (!(x < ku + eps)) continue;
                if ((ru - b) / (ku + eps - x) < -1) keys.insert({1, s, j, sigma, -1, -1, u, l});
                for (int t = s + 1; t <= T; ++t) {
                    for (int i = 0; i <= qs.count(t); ++i) {
                        const Rational kt = qs.strike(t, i, eps), rt = qs.ask(t, i);
                        if (!(kt + eps < x)) continue;
                        if ((b - rt) / (x - kt - eps) > (ru - b) / (ku + eps - x))
                            keys.insert({0, s, j, sigma, t, i, u, l});
                    }
                }
            }
        }
    }
    return keys;
}

inline std::set<Key> keys_of(const std::vector<NecessaryViolation>& vs) {
    std::set<Key> keys;
    for (const auto& v : vs)
        keys.insert({static_cast<int>(v.condition), v.s, v.cvb.J.back(), v.cvb.sigma.back(), v.t, v.i, v.u, v.l});
    return keys;
}

// Existence of a martingale Y with E Y = m and a process X with marginals
// mu_t such that |X_t - Y_t| <= eps. Y_t is taken as a function of the
// X-path prefix: per prefix, mass q and first moment w of Y.
inline bool peacock_oracle(const std::vector<DiscreteMeasure>& mus, const Rational& eps, const Rational& m) {
    using spreadcheck::lp::Relation;
    using spreadcheck::lp::Term;
    spreadcheck::lp::Program prog;
    std::map<std::vector<int>, std::pair<int, int>> var;
    std::vector<std::vector<std::vector<int>>> level(mus.size() + 1);
    level[0].push_back({});
    for (std::size_t t = 0; t < mus.size(); ++t)
        for (const auto& prefix : level[t])
            for (std::size_t a = 0; a < mus[t].size(); ++a) {
                auto p = prefix;
                p.push_back(static_cast<int>(a));
                const int q = prog.add_variable();
                var[p] = {q, prog.add_variable(true)};
                level[t + 1].push_back(p);
            }
    std::vector<Term> top;
    for (const auto& p : level[1]) top.push_back({var[p].second, 1});
    prog.add_constraint(top, Relation::Equal, m);
    for (std::size_t t = 1; t <= mus.size(); ++t) {
        for (std::size_t a = 0; a < mus[t - 1].size(); ++a) {
            std::vector<Term> row;
            for (const auto& p : level[t])
                if (p.back() == static_cast<int>(a)) row.push_back({var[p].first, 1});
            prog.add_constraint(row, Relation::Equal, mus[t - 1].atoms()[a].mass);
        }
        for (const auto& p : level[t]) {
            const auto [q, w] = var[p];
            const Rational& x = mus[t - 1].atoms()[p.back()].point;
            prog.add_constraint({{w, 1}, {q, -x - eps}}, Relation::LessEqual, 0);
            prog.add_constraint({{w, 1}, {q, -x + eps}}, Relation::GreaterEqual, 0);
            if (t == mus.size()) continue;
            std::vector<Term> mass{{q, -1}}, moment{{w, -1}};
            for (std::size_t b = 0; b < mus[t].size(); ++b) {
                auto c = p;
                c.push_back(static_cast<int>(b));
                mass.push_back({var[c].first, 1});
                moment.push_back({var[c].second, 1});
            }
            prog.add_constraint(mass, Relation::Equal, 0);
            prog.add_constraint(moment, Relation::Equal, 0);
        }
    }
    return prog.solve().feasible();
}

} // namespace multi_oracles

#endif
