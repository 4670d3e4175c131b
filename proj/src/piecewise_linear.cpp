#include "spreadcheck/piecewise_linear.hpp"

#include <algorithm>
#include <stdexcept>

namespace spreadcheck {

PiecewiseLinear::PiecewiseLinear(std::vector<Rational> xs, std::vector<Rational> ys, Rational left_slope,
                                 Rational right_slope)
    : xs_(std::move(xs)), ys_(std::move(ys)), left_(std::move(left_slope)), right_(std::move(right_slope)) {
    if (xs_.empty() || xs_.size() != ys_.size()) throw std::invalid_argument("piecewise linear: bad breakpoint arrays");
    for (std::size_t i = 1; i < xs_.size(); ++i)
        if (!(xs_[i - 1] < xs_[i])) throw std::invalid_argument("piecewise linear: breakpoints not increasing");
}

PiecewiseLinear PiecewiseLinear::constant(const Rational& c) { return PiecewiseLinear({Rational(0)}, {c}, 0, 0); }

Rational PiecewiseLinear::operator()(const Rational& x) const {
    if (x <= xs_.front()) return ys_.front() + left_ * (x - xs_.front());
    if (x >= xs_.back()) return ys_.back() + right_ * (x - xs_.back());
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
    const std::size_t lo = hi - 1;
    return ys_[lo] + (ys_[hi] - ys_[lo]) * (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
}

Rational PiecewiseLinear::slope_after(std::size_t i) const {
    if (i + 1 >= xs_.size()) return right_;
    return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
}

PiecewiseLinear PiecewiseLinear::shifted(const Rational& d) const {
    auto xs = xs_;
    for (auto& x : xs) x += d;
    return PiecewiseLinear(std::move(xs), ys_, left_, right_);
}

PiecewiseLinear PiecewiseLinear::plus(const Rational& c) const {
    auto ys = ys_;
    for (auto& y : ys) y += c;
    return PiecewiseLinear(xs_, std::move(ys), left_, right_);
}

PiecewiseLinear PiecewiseLinear::simplified() const {
    std::vector<Rational> xs, ys;
    Rational before = left_;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        const Rational after = slope_after(i);
        if (after != before) {
            xs.push_back(xs_[i]);
            ys.push_back(ys_[i]);
        }
        before = after;
    }
    if (xs.empty()) {
        xs.push_back(xs_.front());
        ys.push_back(ys_.front());
    }
    return PiecewiseLinear(std::move(xs), std::move(ys), left_, right_);
}

bool PiecewiseLinear::is_convex() const {
    Rational prev = left_;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        const Rational s = slope_after(i);
        if (s < prev) return false;
        prev = s;
    }
    return true;
}

PiecewiseLinear PiecewiseLinear::convex_minorant() const {
    if (left_ > right_) throw std::domain_error("convex minorant: tails diverge to -infinity");
    const std::size_t n = xs_.size();
    // The tails touch the hull at the points minimizing y - s x for their slope s.
    std::size_t first = 0, last = n - 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (ys_[i] - left_ * xs_[i] <= ys_[first] - left_ * xs_[first]) first = i;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        if (ys_[i] - right_ * xs_[i] <= ys_[last] - right_ * xs_[last]) last = i;
    }
    if (first > last) first = last;

    std::vector<std::size_t> hull;
    for (std::size_t i = first; i <= last; ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2], b = hull.back();
            const Rational cross = (xs_[b] - xs_[a]) * (ys_[i] - ys_[a]) - (ys_[b] - ys_[a]) * (xs_[i] - xs_[a]);
            if (cross > 0) break;
            hull.pop_back();
        }
        hull.push_back(i);
    }
    std::vector<Rational> xs, ys;
    for (std::size_t i : hull) {
        xs.push_back(xs_[i]);
        ys.push_back(ys_[i]);
    }
    return PiecewiseLinear(std::move(xs), std::move(ys), left_, right_).simplified();
}

namespace {

template <class Pick>
PiecewiseLinear combine(const PiecewiseLinear& a, const PiecewiseLinear& b, Pick pick_a) {
    std::vector<Rational> grid = a.xs();
    grid.insert(grid.end(), b.xs().begin(), b.xs().end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<Rational> pts = grid;
    const auto diff = [&](const Rational& x) -> Rational { return a(x) - b(x); };
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const Rational dp = diff(grid[i]), dq = diff(grid[i + 1]);
        if (sgn(dp) * sgn(dq) < 0) pts.push_back(grid[i] + dp * (grid[i + 1] - grid[i]) / (dp - dq));
    }
    {
        const Rational d0 = diff(grid.front());
        const Rational rate = a.left_slope() - b.left_slope();
        if (sgn(rate) != 0) {
            const Rational t = d0 / rate;
            if (t > 0) pts.push_back(grid.front() - t);
        }
        const Rational dn = diff(grid.back());
        const Rational rrate = a.right_slope() - b.right_slope();
        if (sgn(rrate) != 0) {
            const Rational t = -dn / rrate;
            if (t > 0) pts.push_back(grid.back() + t);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::vector<Rational> ys;
    ys.reserve(pts.size());
    for (const auto& x : pts) {
        const Rational va = a(x), vb = b(x);
        ys.push_back(pick_a(va, vb) ? va : vb);
    }
    const Rational far_left = pts.front() - 1, far_right = pts.back() + 1;
    const Rational& ls = pick_a(a(far_left), b(far_left)) ? a.left_slope() : b.left_slope();
    const Rational& rs = pick_a(a(far_right), b(far_right)) ? a.right_slope() : b.right_slope();
    return PiecewiseLinear(std::move(pts), std::move(ys), ls, rs).simplified();
}

} // namespace

PiecewiseLinear pointwise_max(const PiecewiseLinear& a, const PiecewiseLinear& b) {
    return combine(a, b, [](const Rational& x, const Rational& y) { return x >= y; });
}

PiecewiseLinear pointwise_min(const PiecewiseLinear& a, const PiecewiseLinear& b) {
    return combine(a, b, [](const Rational& x, const Rational& y) { return x <= y; });
}

bool operator==(const PiecewiseLinear& a, const PiecewiseLinear& b) {
    const PiecewiseLinear sa = a.simplified(), sb = b.simplified();
    if (sa.left_ != sb.left_ || sa.right_ != sb.right_) return false;
    // A single breakpoint of a straight line is arbitrary; compare values instead.
    if (sa.size() == 1 && sb.size() == 1 && sa.left_ == sa.right_) return sa(0) == sb(0);
    return sa.xs_ == sb.xs_ && sa.ys_ == sb.ys_;
}

} // namespace spreadcheck
