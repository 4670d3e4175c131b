#ifndef SPREADCHECK_PIECEWISE_LINEAR_HPP
#define SPREADCHECK_PIECEWISE_LINEAR_HPP

#include "spreadcheck/rational.hpp"

#include <vector>

namespace spreadcheck {

// Continuous piecewise-linear function on the whole line: linear interpolation
// between breakpoints, with fixed slopes on the two unbounded tails.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    PiecewiseLinear(std::vector<Rational> xs, std::vector<Rational> ys, Rational left_slope, Rational right_slope);

    static PiecewiseLinear constant(const Rational& c);

    Rational operator()(const Rational& x) const;

    const std::vector<Rational>& xs() const { return xs_; }
    const std::vector<Rational>& ys() const { return ys_; }
    const Rational& left_slope() const { return left_; }
    const Rational& right_slope() const { return right_; }
    std::size_t size() const { return xs_.size(); }

    // Slope on the piece to the right of breakpoint i (right tail for the last).
    Rational slope_after(std::size_t i) const;

    // x -> f(x - d)
    PiecewiseLinear shifted(const Rational& d) const;
    PiecewiseLinear plus(const Rational& c) const;

    // Drops breakpoints where the slope does not change.
    PiecewiseLinear simplified() const;

    bool is_convex() const;

    // Greatest convex minorant. Requires left_slope <= right_slope.
    PiecewiseLinear convex_minorant() const;

    friend PiecewiseLinear pointwise_max(const PiecewiseLinear& a, const PiecewiseLinear& b);
    friend PiecewiseLinear pointwise_min(const PiecewiseLinear& a, const PiecewiseLinear& b);

    friend bool operator==(const PiecewiseLinear& a, const PiecewiseLinear& b);

private:
    std::vector<Rational> xs_;
    std::vector<Rational> ys_;
    Rational left_;
    Rational right_;
};

PiecewiseLinear pointwise_max(const PiecewiseLinear& a, const PiecewiseLinear& b);
PiecewiseLinear pointwise_min(const PiecewiseLinear& a, const PiecewiseLinear& b);

} // namespace spreadcheck

#endif
