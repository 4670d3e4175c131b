#include "spreadcheck/lp.hpp"

#include <cstdint>
#include <stdexcept>

namespace spreadcheck::lp {

int Program::add_variable(bool free) {
    free_.push_back(free);
    return static_cast<int>(free_.size()) - 1;
}

void Program::add_constraint(std::vector<Term> terms, Relation rel, Rational rhs) {
    for (const auto& t : terms)
        if (t.var < 0 || t.var >= variable_count()) throw std::out_of_range("lp: unknown variable");
    rows_.push_back(Row{std::move(terms), rel, std::move(rhs)});
}

void Program::set_objective(std::vector<Term> terms, Sense sense) {
    for (const auto& t : terms)
        if (t.var < 0 || t.var >= variable_count()) throw std::out_of_range("lp: unknown variable");
    objective_ = std::move(terms);
    sense_ = sense;
}

namespace {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : a_(rows, std::vector<Rational>(cols + 1)), z_(cols + 1), basis_(rows, 0) {}

    std::vector<Rational>& row(std::size_t i) { return a_[i]; }
    std::vector<Rational>& z() { return z_; }
    std::vector<std::size_t>& basis() { return basis_; }
    std::size_t rows() const { return a_.size(); }
    std::size_t cols() const { return z_.size() - 1; }
    std::size_t rhs() const { return z_.size() - 1; }

    void pivot(std::size_t r, std::size_t c) {
        auto& pr = a_[r];
        const Rational inv = 1 / pr[c];
        std::vector<std::size_t> nz;
        for (std::size_t j = 0; j < pr.size(); ++j) {
            if (sgn(pr[j]) == 0) continue;
            pr[j] *= inv;
            nz.push_back(j);
        }
        const auto eliminate = [&](std::vector<Rational>& target) {
            if (sgn(target[c]) == 0) return;
            const Rational f = target[c];
            for (std::size_t j : nz) target[j] -= f * pr[j];
        };
        for (std::size_t i = 0; i < a_.size(); ++i)
            if (i != r) eliminate(a_[i]);
        eliminate(z_);
        basis_[r] = c;
    }

    // Minimizes the objective encoded in z over columns with allowed[c].
    // Returns false when unbounded.
    bool optimize(const std::vector<bool>& allowed) {
        int stalled = 0;
        bool bland = false;
        for (;;) {
            std::size_t enter = cols();
            for (std::size_t j = 0; j < cols(); ++j) {
                if (!allowed[j] || sgn(z_[j]) >= 0) continue;
                if (enter == cols()) {
                    enter = j;
                    if (bland) break;
                } else if (z_[j] < z_[enter]) {
                    enter = j;
                }
            }
            if (enter == cols()) return true;

            std::size_t leave = rows();
            Rational best;
            for (std::size_t i = 0; i < rows(); ++i) {
                if (sgn(a_[i][enter]) <= 0) continue;
                Rational ratio = a_[i][rhs()] / a_[i][enter];
                if (leave == rows() || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = std::move(ratio);
                }
            }
            if (leave == rows()) return false;
            if (sgn(best) == 0) {
                if (++stalled > 50) bland = true;
            } else {
                stalled = 0;
            }
            pivot(leave, enter);
        }
    }

private:
    std::vector<std::vector<Rational>> a_;
    std::vector<Rational> z_;
    std::vector<std::size_t> basis_;
};

} // namespace

Result Program::solve() const {
    const std::size_t nvars = free_.size();
    std::vector<std::size_t> plus(nvars), minus(nvars, SIZE_MAX);
    std::size_t ncols = 0;
    for (std::size_t v = 0; v < nvars; ++v) {
        plus[v] = ncols++;
        if (free_[v]) minus[v] = ncols++;
    }
    std::vector<std::size_t> slack(rows_.size(), SIZE_MAX);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        if (rows_[i].rel != Relation::Equal) slack[i] = ncols++;
    const std::size_t first_artificial = ncols;

    // Decide which rows need an artificial before sizing the tableau.
    std::vector<bool> negate(rows_.size());
    std::vector<bool> needs_art(rows_.size());
    std::size_t nart = 0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        negate[i] = rows_[i].rhs < 0;
        const bool slack_positive = (rows_[i].rel == Relation::LessEqual && !negate[i]) ||
                                    (rows_[i].rel == Relation::GreaterEqual && negate[i]);
        needs_art[i] = !slack_positive;
        if (needs_art[i]) ++nart;
    }
    ncols += nart;

    Tableau tab(rows_.size(), ncols);
    std::size_t art = first_artificial;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        auto& r = tab.row(i);
        const int s = negate[i] ? -1 : 1;
        for (const auto& t : rows_[i].terms) {
            r[plus[t.var]] += s * t.coef;
            if (minus[t.var] != SIZE_MAX) r[minus[t.var]] -= s * t.coef;
        }
        if (slack[i] != SIZE_MAX) r[slack[i]] = rows_[i].rel == Relation::LessEqual ? s : -s;
        r[tab.rhs()] = s * rows_[i].rhs;
        if (needs_art[i]) {
            r[art] = 1;
            tab.basis()[i] = art++;
        } else {
            tab.basis()[i] = slack[i];
        }
    }

    // Phase I: minimize the sum of artificials.
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        if (!needs_art[i]) continue;
        const auto& r = tab.row(i);
        for (std::size_t j = 0; j <= ncols; ++j)
            if (j < first_artificial || j == tab.rhs()) tab.z()[j] -= r[j];
    }
    std::vector<bool> allowed(ncols, true);
    tab.optimize(allowed);
    if (sgn(tab.z()[tab.rhs()]) != 0) return Result{Status::Infeasible, 0, {}};

    for (std::size_t j = first_artificial; j < ncols; ++j) allowed[j] = false;
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        if (tab.basis()[i] < first_artificial) continue;
        for (std::size_t j = 0; j < first_artificial; ++j) {
            if (sgn(tab.row(i)[j]) != 0) {
                tab.pivot(i, j);
                break;
            }
        }
        // A row left with an artificial basic at zero is redundant; it never
        // blocks a ratio test because every allowed column has a zero there.
    }

    // Phase II.
    auto& z = tab.z();
    for (auto& v : z) v = 0;
    const int dir = sense_ == Sense::Maximize ? -1 : 1;
    for (const auto& t : objective_) {
        z[plus[t.var]] += dir * t.coef;
        if (minus[t.var] != SIZE_MAX) z[minus[t.var]] -= dir * t.coef;
    }
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        const std::size_t b = tab.basis()[i];
        if (sgn(z[b]) == 0) continue;
        const Rational f = z[b];
        const auto& r = tab.row(i);
        for (std::size_t j = 0; j <= ncols; ++j)
            if (sgn(r[j]) != 0) z[j] -= f * r[j];
    }
    if (!tab.optimize(allowed)) return Result{Status::Unbounded, 0, {}};

    std::vector<Rational> col(ncols);
    for (std::size_t i = 0; i < tab.rows(); ++i) col[tab.basis()[i]] = tab.row(i)[tab.rhs()];
    Result res;
    res.status = Status::Optimal;
    res.values.resize(nvars);
    for (std::size_t v = 0; v < nvars; ++v) {
        res.values[v] = col[plus[v]];
        if (minus[v] != SIZE_MAX) res.values[v] -= col[minus[v]];
    }
    for (const auto& t : objective_) res.objective += t.coef * res.values[t.var];
    return res;
}

} // namespace spreadcheck::lp
