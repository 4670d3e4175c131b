// Shared helpers for the unit and acceptance tests: seeded random instances
// and small brute-force oracles that do not reuse library algorithms.
#ifndef SPREADCHECK_TESTS_SUPPORT_HPP
#define SPREADCHECK_TESTS_SUPPORT_HPP

#include "spreadcheck/lp.hpp"
#include "spreadcheck/measures.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace support {

using spreadcheck::Atom;
using spreadcheck::DiscreteMeasure;
using spreadcheck::Rational;
using spreadcheck::frac;

inline int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Random masses: positive integers normalized to sum 1.
inline std::vector<Rational> random_masses(std::mt19937_64& rng, int n) {
    std::vector<int> w(n);
    int total = 0;
    for (auto& x : w) total += (x = uniform(rng, 1, 6));
    std::vector<Rational> out;
    for (int x : w) out.push_back(frac(x, total));
    return out;
}

// Up to max_atoms distinct points on the grid {lo, lo + 1/den, ..., hi}.
inline DiscreteMeasure random_measure(std::mt19937_64& rng, int max_atoms, int lo, int hi, int den = 2) {
    const int n = uniform(rng, 1, max_atoms);
    std::vector<Rational> pts;
    while (static_cast<int>(pts.size()) < n) {
        Rational p = frac(uniform(rng, lo * den, hi * den), den);
        if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
    }
    const auto masses = random_masses(rng, n);
    std::vector<Atom> atoms;
    for (int i = 0; i < n; ++i) atoms.push_back({pts[i], masses[i]});
    return DiscreteMeasure(atoms);
}

// Integral of (x - a)^+ computed atom by atom.
inline Rational call_sum(const DiscreteMeasure& mu, const Rational& a) {
    Rational s = 0;
    for (const auto& at : mu.atoms())
        if (at.point > a) s += at.mass * (at.point - a);
    return s;
}

// Exact LP: does a coupling exist that only uses pairs within distance eps?
inline bool coupling_within(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Rational& eps) {
    spreadcheck::lp::Program p;
    std::vector<std::vector<int>> var(mu.size(), std::vector<int>(nu.size(), -1));
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j)
            if (spreadcheck::rabs(mu.atoms()[i].point - nu.atoms()[j].point) <= eps) var[i][j] = p.add_variable();
    for (std::size_t i = 0; i < mu.size(); ++i) {
        std::vector<spreadcheck::lp::Term> row;
        for (std::size_t j = 0; j < nu.size(); ++j)
            if (var[i][j] >= 0) row.push_back({var[i][j], 1});
        if (row.empty()) return false;
        p.add_constraint(row, spreadcheck::lp::Relation::Equal, mu.atoms()[i].mass);
    }
    for (std::size_t j = 0; j < nu.size(); ++j) {
        std::vector<spreadcheck::lp::Term> row;
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (var[i][j] >= 0) row.push_back({var[i][j], 1});
        if (row.empty()) return false;
        p.add_constraint(row, spreadcheck::lp::Relation::Equal, nu.atoms()[j].mass);
    }
    return p.solve().feasible();
}

// Smallest threshold in {|x_i - y_j|} admitting a coupling within it.
inline Rational w_inf_by_threshold(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    std::vector<Rational> cands;
    for (const auto& a : mu.atoms())
        for (const auto& b : nu.atoms()) cands.push_back(spreadcheck::rabs(a.point - b.point));
    std::sort(cands.begin(), cands.end());
    for (const auto& c : cands)
        if (coupling_within(mu, nu, c)) return c;
    return cands.back();
}

// Solves A x = b (square or overdetermined with consistent rows) by Gaussian
// elimination. Returns false unless the solution is unique.
inline bool solve_unique(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::vector<Rational>& x) {
    const std::size_t rows = a.size(), cols = a.empty() ? 0 : a[0].size();
    std::size_t r = 0;
    std::vector<std::size_t> pivot_col;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && sgn(a[p][c]) == 0) ++p;
        if (p == rows) return false;
        std::swap(a[p], a[r]);
        std::swap(b[p], b[r]);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || sgn(a[i][c]) == 0) continue;
            const Rational f = a[i][c] / a[r][c];
            for (std::size_t k = c; k < cols; ++k) a[i][k] -= f * a[r][k];
            b[i] -= f * b[r];
        }
        pivot_col.push_back(c);
        ++r;
    }
    if (r < cols) return false;
    for (std::size_t i = r; i < rows; ++i)
        if (sgn(b[i]) != 0) return false;
    x.assign(cols, 0);
    for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = b[i] / a[i][pivot_col[i]];
    return true;
}

// Maximum mass on pairs within eps over all vertices of the transportation
// polytope, by enumerating every basis of n + m - 1 cells.
inline Rational max_close_mass_by_vertices(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Rational& eps) {
    const std::size_t n = mu.size(), m = nu.size(), cells = n * m, basis = n + m - 1;
    Rational best = -1;
    std::vector<bool> pick(cells, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(basis), true);
    do {
        std::vector<std::size_t> chosen;
        for (std::size_t c = 0; c < cells; ++c)
            if (pick[c]) chosen.push_back(c);
        std::vector<std::vector<Rational>> a(n + m, std::vector<Rational>(chosen.size()));
        std::vector<Rational> b(n + m);
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            a[chosen[k] / m][k] = 1;
            a[n + chosen[k] % m][k] = 1;
        }
        for (std::size_t i = 0; i < n; ++i) b[i] = mu.atoms()[i].mass;
        for (std::size_t j = 0; j < m; ++j) b[n + j] = nu.atoms()[j].mass;
        std::vector<Rational> x;
        if (!solve_unique(a, b, x)) continue;
        if (std::any_of(x.begin(), x.end(), [](const Rational& v) { return sgn(v) < 0; })) continue;
        Rational close = 0;
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            const auto& xi = mu.atoms()[chosen[k] / m].point;
            const auto& yj = nu.atoms()[chosen[k] % m].point;
            if (spreadcheck::rabs(xi - yj) <= eps) close += x[k];
        }
        best = spreadcheck::rmax(best, close);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

} // namespace support

#endif
