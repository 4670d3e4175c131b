#include "spreadcheck/lp.hpp"
#include "spreadcheck/multi_maturity.hpp"

#include <algorithm>
#include <set>

namespace spreadcheck {

namespace {

using K = MultiMaturityError::Kind;

struct Signs {
    int first;
    int last;
};

Signs condition_signs(int condition) {
    switch (condition) {
    case 1:
        return {-1, 1};
    case 2:
        return {-1, -1};
    case 3:
        return {1, 1};
    case 4:
        return {1, -1};
    }
    throw MultiMaturityError(K::InvalidSpec, "condition must be 1..4");
}

Rational condition_constant(const std::vector<CallFunctionPL>& r, const Rational& s0, const Rational& eps, int u,
                            int condition) {
    switch (condition) {
    case 1:
        return r[0](eps) - r[u - 1](eps) + 2 * eps;
    case 2:
        return r[0](eps) - s0 + 2 * eps;
    case 3:
        return s0 - r[u - 1](eps);
    default:
        return 0;
    }
}

std::vector<CallFunctionPL> curves_of(const std::vector<DiscreteMeasure>& mus) {
    std::vector<CallFunctionPL> r;
    for (const auto& mu : mus) r.push_back(call_function_of(mu));
    return r;
}

// R_t(a + eps sigma) - R_t(b + eps sigma) with sigma = sgn(a - b); 0 at a tie.
Rational step_cost(const CallFunctionPL& r, const Rational& a, const Rational& b, const Rational& eps) {
    if (a == b) return 0;
    const Rational shift = a > b ? eps : Rational(-eps);
    return r(a + shift) - r(b + shift);
}

// Tree of X-paths: node n at level t (1-based) carries atom index of mu_t.
struct PathTree {
    std::vector<int> parent, level, atom;
    std::vector<std::vector<int>> children;
    std::vector<int> roots;
};

PathTree path_tree(const std::vector<DiscreteMeasure>& mus) {
    PathTree tree;
    std::vector<int> frontier{-1};
    for (std::size_t t = 0; t < mus.size(); ++t) {
        std::vector<int> next;
        for (int p : frontier) {
            for (std::size_t a = 0; a < mus[t].size(); ++a) {
                const int id = static_cast<int>(tree.parent.size());
                tree.parent.push_back(p);
                tree.level.push_back(static_cast<int>(t) + 1);
                tree.atom.push_back(static_cast<int>(a));
                tree.children.emplace_back();
                if (p < 0)
                    tree.roots.push_back(id);
                else
                    tree.children[p].push_back(id);
                next.push_back(id);
            }
        }
        frontier = std::move(next);
    }
    return tree;
}

// Monotone coupling of nu (rows) and mu (columns).
std::vector<std::vector<Rational>> monotone_coupling(const DiscreteMeasure& nu, const DiscreteMeasure& mu) {
    std::vector<std::vector<Rational>> plan(nu.size(), std::vector<Rational>(mu.size()));
    std::size_t a = 0, b = 0;
    Rational left_a = nu.atoms()[0].mass, left_b = mu.atoms()[0].mass;
    while (a < nu.size() && b < mu.size()) {
        const Rational m = rmin(left_a, left_b);
        plan[a][b] += m;
        left_a -= m;
        left_b -= m;
        if (sgn(left_a) == 0 && ++a < nu.size()) left_a = nu.atoms()[a].mass;
        if (sgn(left_b) == 0 && ++b < mu.size()) left_b = mu.atoms()[b].mass;
    }
    return plan;
}

} // namespace

std::string SimplifiedViolation::id() const {
    static const char* names[] = {"5.3-i", "5.3-ii", "5.3-iii", "5.3-iv"};
    return condition >= 1 && condition <= 4 ? names[condition - 1] : "";
}

Rational simplified_value(const std::vector<CallFunctionPL>& curves, const Rational& s0, const Rational& eps, int u,
                          int condition, const std::vector<Rational>& k) {
    if (u < 2 || u > static_cast<int>(curves.size()) || static_cast<int>(k.size()) != u - 1)
        throw MultiMaturityError(K::InvalidSpec, "need 2 <= u <= T and u - 1 strikes");
    const Signs sg = condition_signs(condition);
    // sigma[t] for t = 1..u, 1-based.
    std::vector<int> sigma(u + 1, 1);
    sigma[1] = sg.first;
    sigma[u] = sg.last;
    for (int t = 2; t < u; ++t) sigma[t] = k[t - 2] >= k[t - 1] ? 1 : -1;
    Rational v = condition_constant(curves, s0, eps, u, condition);
    for (int t = 1; t < u; ++t) {
        const Rational& kt = k[t - 1];
        v += curves[t](kt + eps * sigma[t + 1]) - curves[t - 1](kt + eps * sigma[t]);
    }
    return v;
}

void check_curve_assumption(const std::vector<DiscreteMeasure>& mus, const Rational& s0, const Rational& eps) {
    if (mus.empty()) throw MultiMaturityError(K::AssumptionViolated, "no marginals");
    for (std::size_t t = 0; t < mus.size(); ++t) {
        const std::string at = " at maturity " + std::to_string(t + 1);
        if (mus[t].size() == 0) throw MultiMaturityError(K::AssumptionViolated, "empty marginal" + at);
        if (mus[t].min_point() < eps)
            throw MultiMaturityError(K::AssumptionViolated, "support reaches below epsilon" + at);
        // For T >= 2 the conditions at far strikes already bound the means.
        if (mus.size() == 1 && rabs(mus[t].mean() - s0) > eps)
            throw MultiMaturityError(K::AssumptionViolated, "mean farther than epsilon from S_0" + at);
    }
}

std::vector<Rational> simplified_grid(const std::vector<DiscreteMeasure>& mus, const Rational& eps) {
    std::set<Rational> g;
    for (const auto& mu : mus)
        for (const auto& a : mu.atoms())
            for (int d = -2; d <= 2; ++d) g.insert(a.point + eps * d);
    if (g.empty()) return {};
    const Rational lo = *g.begin() - 1, hi = *g.rbegin() + 1;
    g.insert(lo);
    g.insert(hi);
    return {g.begin(), g.end()};
}

SimplifiedResult check_simplified_on_grid(const std::vector<DiscreteMeasure>& mus, const Rational& s0,
                                          const Rational& eps, const std::vector<Rational>& grid) {
    check_curve_assumption(mus, s0, eps);
    const auto r = curves_of(mus);
    const int T = static_cast<int>(mus.size());
    const std::size_t n = grid.size();
    SimplifiedResult out;
    for (int u = 2; u <= T; ++u) {
        for (int cond = 1; cond <= 4; ++cond) {
            const Signs sg = condition_signs(cond);
            // value[t][g]: minimal partial sum with k_t = grid[g]; back[t][g] the k_{t-1} index.
            std::vector<std::vector<Rational>> value(u, std::vector<Rational>(n));
            std::vector<std::vector<std::size_t>> back(u, std::vector<std::size_t>(n, 0));
            for (std::size_t g = 0; g < n; ++g) value[1][g] = -r[0](grid[g] + eps * sg.first);
            for (int t = 2; t < u; ++t) {
                for (std::size_t g = 0; g < n; ++g) {
                    for (std::size_t h = 0; h < n; ++h) {
                        const Rational v = value[t - 1][h] + step_cost(r[t - 1], grid[h], grid[g], eps);
                        if (h == 0 || v < value[t][g]) {
                            value[t][g] = v;
                            back[t][g] = h;
                        }
                    }
                }
            }
            const Rational c = condition_constant(r, s0, eps, u, cond);
            std::size_t best = 0;
            Rational best_v;
            for (std::size_t g = 0; g < n; ++g) {
                const Rational v = value[u - 1][g] + r[u - 1](grid[g] + eps * sg.last) + c;
                if (g == 0 || v < best_v) {
                    best_v = v;
                    best = g;
                }
            }
            if (sgn(best_v) >= 0) continue;
            out.consistent = false;
            if (out.violation && out.violation->value <= best_v) continue;
            SimplifiedViolation v{u, cond, std::vector<Rational>(u - 1), best_v};
            std::size_t g = best;
            for (int t = u - 1; t >= 1; --t) {
                v.k[t - 1] = grid[g];
                g = back[t][g];
            }
            out.violation = v;
        }
    }
    return out;
}

SimplifiedResult check_simplified(const std::vector<DiscreteMeasure>& mus, const Rational& s0, const Rational& eps) {
    return check_simplified_on_grid(mus, s0, eps, simplified_grid(mus, eps));
}

std::optional<std::vector<DiscreteMeasure>> peacock_construct(const std::vector<DiscreteMeasure>& mus,
                                                              const Rational& eps, const Rational& m) {
    for (const auto& mu : mus)
        if (rabs(mu.mean() - m) > eps)
            throw MultiMaturityError(K::MeanOutsideIntersection, "m is farther than epsilon from a marginal mean");
    if (mus.empty()) return std::vector<DiscreteMeasure>{};
    const PathTree tree = path_tree(mus);
    const std::size_t n = tree.parent.size();
    lp::Program prog;
    std::vector<int> q(n), w(n);
    for (std::size_t a = 0; a < n; ++a) {
        q[a] = prog.add_variable();
        w[a] = prog.add_variable(true);
    }
    const int T = static_cast<int>(mus.size());
    // Marginals of X.
    std::vector<std::vector<std::vector<lp::Term>>> marg(T);
    for (int t = 0; t < T; ++t) marg[t].resize(mus[t].size());
    for (std::size_t a = 0; a < n; ++a) marg[tree.level[a] - 1][tree.atom[a]].push_back({q[a], 1});
    for (int t = 0; t < T; ++t)
        for (std::size_t b = 0; b < mus[t].size(); ++b)
            prog.add_constraint(marg[t][b], lp::Relation::Equal, mus[t].atoms()[b].mass);
    std::vector<lp::Term> mean;
    for (int root : tree.roots) mean.push_back({w[root], 1});
    prog.add_constraint(mean, lp::Relation::Equal, m);
    for (std::size_t a = 0; a < n; ++a) {
        const Rational& x = mus[tree.level[a] - 1].atoms()[tree.atom[a]].point;
        // |w - x q| <= eps q
        prog.add_constraint({{w[a], 1}, {q[a], -(x + eps)}}, lp::Relation::LessEqual, 0);
        prog.add_constraint({{w[a], 1}, {q[a], -(x - eps)}}, lp::Relation::GreaterEqual, 0);
        if (tree.children[a].empty()) continue;
        std::vector<lp::Term> mass{{q[a], -1}}, flow{{w[a], -1}};
        for (int c : tree.children[a]) {
            mass.push_back({q[c], 1});
            flow.push_back({w[c], 1});
        }
        prog.add_constraint(mass, lp::Relation::Equal, 0);
        prog.add_constraint(flow, lp::Relation::Equal, 0);
    }
    const auto res = prog.solve();
    if (!res.feasible()) return std::nullopt;
    std::vector<std::vector<Atom>> atoms(T);
    for (std::size_t a = 0; a < n; ++a) {
        const Rational& mass = res.values[q[a]];
        if (sgn(mass) > 0) atoms[tree.level[a] - 1].push_back({res.values[w[a]] / mass, mass});
    }
    std::vector<DiscreteMeasure> nus;
    for (auto& list : atoms) nus.emplace_back(std::move(list));
    return nus;
}

std::vector<Kernel> martingale_from_peacock(const std::vector<DiscreteMeasure>& nus) {
    std::vector<Kernel> out;
    for (std::size_t t = 0; t + 1 < nus.size(); ++t) {
        const auto& a = nus[t].atoms();
        const auto& b = nus[t + 1].atoms();
        lp::Program prog;
        std::vector<std::vector<int>> v(a.size(), std::vector<int>(b.size()));
        for (auto& row : v)
            for (int& x : row) x = prog.add_variable();
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::vector<lp::Term> mass, moment;
            for (std::size_t j = 0; j < b.size(); ++j) {
                mass.push_back({v[i][j], 1});
                moment.push_back({v[i][j], b[j].point});
            }
            prog.add_constraint(mass, lp::Relation::Equal, a[i].mass);
            prog.add_constraint(moment, lp::Relation::Equal, a[i].mass * a[i].point);
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            std::vector<lp::Term> col;
            for (std::size_t i = 0; i < a.size(); ++i) col.push_back({v[i][j], 1});
            prog.add_constraint(col, lp::Relation::Equal, b[j].mass);
        }
        const auto res = prog.solve();
        if (!res.feasible())
            throw MultiMaturityError(K::Infeasible, "no martingale kernel at step " + std::to_string(t + 1));
        Kernel k(a.size(), std::vector<Rational>(b.size()));
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) k[i][j] = res.values[v[i][j]] / a[i].mass;
        out.push_back(std::move(k));
    }
    return out;
}

FiniteModel assemble_model(const std::vector<DiscreteMeasure>& mus, const std::vector<DiscreteMeasure>& nus,
                           const std::vector<Kernel>& kernels, const std::vector<Rational>& bank,
                           const BidAsk& underlying, const Rational& eps) {
    const std::size_t T = mus.size();
    if (T == 0 || nus.size() != T || kernels.size() + 1 != T || bank.size() != T + 1)
        throw MultiMaturityError(K::InvalidSpec, "need T marginals, T shadow laws, T - 1 kernels and T + 1 bank values");
    for (std::size_t t = 0; t < T; ++t)
        if (w_inf(mus[t], nus[t]) > eps)
            throw MultiMaturityError(K::DistanceExceeded, "shadow law too far at maturity " + std::to_string(t + 1));
    const Rational m = nus[0].mean();
    if (m < underlying.bid || m > underlying.ask)
        throw MultiMaturityError(K::Infeasible, "shadow mean outside the quoted underlying band");

    std::vector<std::vector<std::vector<Rational>>> cond(T);  // cond[t][y][x] = P(x | y)
    for (std::size_t t = 0; t < T; ++t) {
        cond[t] = monotone_coupling(nus[t], mus[t]);
        for (std::size_t y = 0; y < nus[t].size(); ++y)
            for (auto& p : cond[t][y]) p /= nus[t].atoms()[y].mass;
    }

    FiniteModel model;
    model.bank = bank;
    model.nodes.push_back({0, -1, 0, 1, underlying.bid, underlying.ask, m, m});
    struct Open {
        int id;
        std::size_t y;
    };
    std::vector<Open> frontier;
    auto add = [&](int parent, std::size_t t, std::size_t y, const Rational& prob, std::vector<Open>& next) {
        for (std::size_t x = 0; x < mus[t].size(); ++x) {
            const Rational& px = cond[t][y][x];
            if (sgn(px) == 0) continue;
            const Rational ys = bank[t + 1] * nus[t].atoms()[y].point;
            const Rational xs = bank[t + 1] * mus[t].atoms()[x].point;
            const Rational lo = rmin(xs, ys), hi = rmax(xs, ys);
            if (sgn(lo) <= 0) throw MultiMaturityError(K::Infeasible, "shadow price reaches zero");
            const int id = static_cast<int>(model.nodes.size());
            model.nodes.push_back({id, parent, static_cast<int>(t) + 1, prob * px, lo, hi, xs, ys});
            next.push_back({id, y});
        }
    };
    for (std::size_t y = 0; y < nus[0].size(); ++y) add(0, 0, y, nus[0].atoms()[y].mass, frontier);
    for (std::size_t t = 1; t < T; ++t) {
        std::vector<Open> next;
        for (const auto& o : frontier)
            for (std::size_t y = 0; y < nus[t].size(); ++y)
                if (sgn(kernels[t - 1][o.y][y]) > 0) add(o.id, t, y, kernels[t - 1][o.y][y], next);
        frontier = std::move(next);
    }
    return model;
}

UnboundedResult check_unbounded(const DiscountedQuoteSet& qs) {
    UnboundedResult out;
    for (int t = 1; t <= qs.horizon(); ++t) {
        if (qs.count(t) == 0) continue;
        const auto v = check_conditions(augment(qs, t, 0), 1);
        for (const auto& x : v.violations) out.violations.push_back({t, x});
        if (static_cast<int>(v.tag) > static_cast<int>(out.tag)) out.tag = v.tag;
    }
    return out;
}

UnboundedResult check_p_bounded(const DiscountedQuoteSet& qs, const Rational& eps, const Rational& p) {
    if (sgn(p) <= 0 || p > 1 || sgn(eps) < 0)
        throw MultiMaturityError(K::InvalidSpec, "need p in (0, 1] and eps >= 0");
    return check_unbounded(qs);
}

std::optional<TransportPlan> p_bounded_witness(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                               const Rational& eps, const Rational& p) {
    return d_p_coupling(mu, nu, eps, p);
}

bool passes_at(const DiscountedQuoteSet& qs, EpsilonMode mode, const Rational& eps,
               const std::optional<std::vector<DiscreteMeasure>>& marginals) {
    if (!validate_for_epsilon(qs, eps).empty()) return false;
    if (mode == EpsilonMode::Simplified) {
        if (!marginals) throw MultiMaturityError(K::AssumptionViolated, "simplified mode needs marginals");
        if (qs.underlying.bid != qs.underlying.ask)
            throw MultiMaturityError(K::AssumptionViolated, "simplified mode needs S_0 bid = S_0 ask");
        try {
            return check_simplified(*marginals, qs.underlying.bid, eps).consistent;
        } catch (const MultiMaturityError& e) {
            if (e.kind() == K::AssumptionViolated) return false;
            throw;
        }
    }
    for (int t = 1; t <= qs.horizon(); ++t)
        if (check_conditions(augment(qs, t, eps)).tag != Verdict::Consistent) return false;
    return mode == EpsilonMode::Single || check_necessary(qs, eps).empty();
}

MinEpsilonResult min_epsilon(const DiscountedQuoteSet& qs, EpsilonMode mode, const Rational& tolerance,
                             const std::optional<std::vector<DiscreteMeasure>>& marginals) {
    if (sgn(tolerance) <= 0) throw MultiMaturityError(K::InvalidSpec, "tolerance must be positive");
    MinEpsilonResult out;
    out.ceiling = qs.underlying.bid / 2;
    for (int t = 1; t <= qs.horizon(); ++t)
        if (qs.count(t) > 0) out.ceiling = rmin(out.ceiling, qs.strike(t, 1, 0));
    auto probe = [&](const Rational& eps) {
        const bool pass = passes_at(qs, mode, eps, marginals);
        out.trace.push_back({eps, pass});
        return pass;
    };
    if (probe(0)) {
        out.value = 0;
        return out;
    }
    // Ascending scan: ceiling / 2^n towards the middle, then ceiling (1 - 2^-n).
    std::vector<Rational> scan;
    for (int n = 30; n >= 1; --n) scan.push_back(out.ceiling / Rational(mpz_class(1) << n));
    for (int n = 2; n <= 30; ++n) scan.push_back(out.ceiling - out.ceiling / Rational(mpz_class(1) << n));
    Rational lo = 0;
    for (const Rational& eps : scan) {
        if (!probe(eps)) {
            lo = eps;
            continue;
        }
        Rational hi = eps;
        while (hi - lo > tolerance) {
            const Rational mid = (lo + hi) / 2;
            if (probe(mid))
                hi = mid;
            else
                lo = mid;
        }
        out.value = hi;
        out.failing = lo;
        return out;
    }
    throw MultiMaturityError(K::NoConsistentEpsilon,
                             "no consistent epsilon below the ceiling " + to_string(out.ceiling));
}

} // namespace spreadcheck
