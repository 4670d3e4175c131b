#include "spreadcheck/measures.hpp"

#include "spreadcheck/json_util.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace spreadcheck {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) {
    std::map<Rational, Rational> merged;
    Rational total = 0;
    for (auto& a : atoms) {
        if (sgn(a.mass) < 0) throw MeasureError(MeasureError::Kind::InvalidMasses, "negative mass");
        total += a.mass;
        if (sgn(a.mass) == 0) continue;
        merged[a.point] += a.mass;
    }
    if (total != 1) throw MeasureError(MeasureError::Kind::InvalidMasses, "masses sum to " + to_string(total));
    for (auto& [x, w] : merged) atoms_.push_back({x, w});
}

DiscreteMeasure DiscreteMeasure::dirac(const Rational& x) { return DiscreteMeasure({{x, 1}}); }

Rational DiscreteMeasure::mean() const {
    Rational m = 0;
    for (const auto& a : atoms_) m += a.point * a.mass;
    return m;
}

bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.atoms_.size() != b.atoms_.size()) return false;
    for (std::size_t i = 0; i < a.atoms_.size(); ++i)
        if (a.atoms_[i].point != b.atoms_[i].point || a.atoms_[i].mass != b.atoms_[i].mass) return false;
    return true;
}

CallFunctionPL call_function_of(const DiscreteMeasure& mu) {
    const auto& atoms = mu.atoms();
    std::vector<Rational> xs, ys(atoms.size());
    for (const auto& a : atoms) xs.push_back(a.point);
    // R(x_i) = sum_{j > i} m_j (x_j - x_i), accumulated from the right.
    Rational mass_right = 0;
    for (std::size_t i = atoms.size() - 1; i-- > 0;) {
        mass_right += atoms[i + 1].mass;
        ys[i] = ys[i + 1] + mass_right * (xs[i + 1] - xs[i]);
    }
    return PiecewiseLinear(std::move(xs), std::move(ys), -1, 0);
}

DiscreteMeasure measure_of(const PiecewiseLinear& r) {
    using K = MeasureError::Kind;
    if (r.left_slope() < -1) throw MeasureError(K::SlopeBelowMinusOne, "left tail slope below -1");
    if (r.left_slope() != -1) throw MeasureError(K::NotCallFunction, "left tail slope must be -1");
    if (r.right_slope() < 0) throw MeasureError(K::NegativeValue, "right tail decreases to -infinity");
    if (r.right_slope() > 0) throw MeasureError(K::NonConvex, "call function must be non-increasing");
    for (const auto& y : r.ys())
        if (sgn(y) < 0) throw MeasureError(K::NegativeValue, "negative call function value");
    if (sgn(r.ys().back()) != 0) throw MeasureError(K::NotCallFunction, "call function must vanish on the right");

    std::vector<Atom> atoms;
    Rational before = r.left_slope();
    for (std::size_t i = 0; i < r.size(); ++i) {
        const Rational after = r.slope_after(i);
        if (after < -1) throw MeasureError(K::SlopeBelowMinusOne, "slope below -1");
        if (after < before) throw MeasureError(K::NonConvex, "call function is not convex");
        if (after != before) atoms.push_back({r.xs()[i], after - before});
        before = after;
    }
    return DiscreteMeasure(std::move(atoms));
}

bool convex_order_leq(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.mean() != nu.mean()) return false;
    const auto rm = call_function_of(mu), rn = call_function_of(nu);
    for (const auto& a : mu.atoms())
        if (rm(a.point) > rn(a.point)) return false;
    for (const auto& a : nu.atoms())
        if (rm(a.point) > rn(a.point)) return false;
    return true;
}

bool is_peacock(const std::vector<DiscreteMeasure>& seq) {
    for (std::size_t t = 1; t < seq.size(); ++t)
        if (!convex_order_leq(seq[t - 1], seq[t])) return false;
    return true;
}

Rational w_inf(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    // Walk the merged cumulative-mass grid; on each cell both quantile
    // functions are constant.
    const auto& a = mu.atoms();
    const auto& b = nu.atoms();
    std::size_t i = 0, j = 0;
    Rational ca = a[0].mass, cb = b[0].mass;
    Rational worst = 0;
    for (;;) {
        worst = rmax(worst, rabs(a[i].point - b[j].point));
        if (i + 1 == a.size() && j + 1 == b.size()) break;
        if (ca < cb) {
            ca += a[++i].mass;
        } else if (cb < ca) {
            cb += b[++j].mass;
        } else {
            ca += a[++i].mass;
            cb += b[++j].mass;
        }
    }
    return worst;
}

Envelopes envelopes(const DiscreteMeasure& mu, const Rational& m, const Rational& eps) {
    const Rational mean = mu.mean();
    if (m < mean - eps || m > mean + eps)
        throw MeasureError(MeasureError::Kind::MeanOutsideBand, "target mean outside [E mu - eps, E mu + eps]");
    const auto r = call_function_of(mu);
    const auto right_shift = r.shifted(eps);   // x -> R(x - eps)
    const auto left_shift = r.shifted(-eps);   // x -> R(x + eps)
    Envelopes env;
    env.r_min = pointwise_max(right_shift.plus(m - mean - eps), left_shift);
    env.r_max = pointwise_min(left_shift.plus(m - mean + eps), right_shift).convex_minorant();
    return env;
}

std::pair<Rational, TransportPlan> max_close_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                      const Rational& eps) {
    const std::size_t n = mu.size(), m = nu.size();
    const std::size_t source = 0, sink = n + m + 1, nodes = n + m + 2;
    std::vector<std::vector<Rational>> residual(nodes, std::vector<Rational>(nodes));
    for (std::size_t i = 0; i < n; ++i) residual[source][1 + i] = mu.atoms()[i].mass;
    for (std::size_t j = 0; j < m; ++j) residual[1 + n + j][sink] = nu.atoms()[j].mass;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (rabs(mu.atoms()[i].point - nu.atoms()[j].point) <= eps) residual[1 + i][1 + n + j] = 1;

    Rational total = 0;
    for (;;) {
        std::vector<std::size_t> parent(nodes, nodes);
        parent[source] = source;
        std::deque<std::size_t> queue{source};
        while (!queue.empty() && parent[sink] == nodes) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v = 0; v < nodes; ++v) {
                if (parent[v] == nodes && sgn(residual[u][v]) > 0) {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if (parent[sink] == nodes) break;
        Rational push = residual[parent[sink]][sink];
        for (std::size_t v = sink; v != source; v = parent[v]) push = rmin(push, residual[parent[v]][v]);
        for (std::size_t v = sink; v != source; v = parent[v]) {
            residual[parent[v]][v] -= push;
            residual[v][parent[v]] += push;
        }
        total += push;
    }

    TransportPlan plan(n, std::vector<Rational>(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (rabs(mu.atoms()[i].point - nu.atoms()[j].point) <= eps) plan[i][j] = 1 - residual[1 + i][1 + n + j];
    return {total, plan};
}

std::optional<TransportPlan> d_p_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Rational& eps,
                                          const Rational& p) {
    auto [shipped, plan] = max_close_transport(mu, nu, eps);
    if (shipped < 1 - p) return std::nullopt;
    const Rational rest = 1 - shipped;
    if (sgn(rest) == 0) return plan;
    // Couple the leftover marginals independently.
    std::vector<Rational> left(mu.size()), right(nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        left[i] = mu.atoms()[i].mass;
        for (std::size_t j = 0; j < nu.size(); ++j) left[i] -= plan[i][j];
    }
    for (std::size_t j = 0; j < nu.size(); ++j) {
        right[j] = nu.atoms()[j].mass;
        for (std::size_t i = 0; i < mu.size(); ++i) right[j] -= plan[i][j];
    }
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j) plan[i][j] += left[i] * right[j] / rest;
    return plan;
}

bool d_p_feasible(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Rational& eps, const Rational& p) {
    return max_close_transport(mu, nu, eps).first >= 1 - p;
}

DiscreteMeasure shift_measure(const DiscreteMeasure& mu, const Rational& delta) {
    std::vector<Atom> atoms = mu.atoms();
    for (auto& a : atoms) a.point += delta;
    return DiscreteMeasure(std::move(atoms));
}

nlohmann::json to_json(const DiscreteMeasure& mu) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : mu.atoms()) atoms.push_back({rational_to_json(a.point), rational_to_json(a.mass)});
    return {{"atoms", atoms}};
}

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) {
        if (!a.is_array() || a.size() != 2) throw std::invalid_argument("atom must be [point, mass]");
        atoms.push_back({rational_from_json(a[0]), rational_from_json(a[1])});
    }
    if (atoms.empty()) throw std::invalid_argument("measure without atoms");
    return DiscreteMeasure(std::move(atoms));
}

} // namespace spreadcheck
