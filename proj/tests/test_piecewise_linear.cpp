#include <doctest.h>

#include "spreadcheck/piecewise_linear.hpp"

#include <random>

using namespace spreadcheck;

namespace {

PiecewiseLinear call_of_point(const Rational& a) { return PiecewiseLinear({a}, {0}, -1, 0); }

} // namespace

TEST_CASE("evaluation and tails") {
    const PiecewiseLinear f({0, 2}, {4, 0}, -1, 0);
    CHECK(f(-1) == 5);
    CHECK(f(1) == 2);
    CHECK(f(2) == 0);
    CHECK(f(10) == 0);
    CHECK(f.slope_after(0) == -2);
    CHECK(f.is_convex() == false);
    CHECK(f.shifted(1)(3) == 0);
    CHECK(f.plus(1)(10) == 1);
}

TEST_CASE("simplify drops collinear points") {
    const PiecewiseLinear f({0, 1, 2, 3}, {3, 2, 1, 0}, -1, 0);
    const auto s = f.simplified();
    REQUIRE(s.size() == 1);
    CHECK(s.xs()[0] == 3);
    CHECK(f == s);
}

TEST_CASE("max and min insert crossings") {
    const auto a = call_of_point(2);
    const auto b = call_of_point(0).plus(1);
    const auto mx = pointwise_max(a, b);
    const auto mn = pointwise_min(a, b);
    for (int i = -8; i <= 8; ++i) {
        const Rational x = frac(i, 2);
        CHECK(mx(x) == rmax(a(x), b(x)));
        CHECK(mn(x) == rmin(a(x), b(x)));
    }
    // crossings at x = 1 (2 - x = 1) only
    CHECK(mx(1) == 1);
    CHECK(mx.is_convex());
}

TEST_CASE("tail crossings") {
    const PiecewiseLinear a({0}, {0}, -2, 0);
    const PiecewiseLinear b({0}, {3}, -1, 0);
    const auto mx = pointwise_max(a, b);
    CHECK(mx(-3) == 6);
    CHECK(mx(-4) == 8);
    CHECK(mx(-2) == 5);
    CHECK(mx.left_slope() == -2);
}

TEST_CASE("convex minorant") {
    const PiecewiseLinear f({0, 1, 2}, {2, 2, 0}, -1, 0);
    const auto h = f.convex_minorant();
    CHECK(h.is_convex());
    CHECK(h(1) == 1);
    CHECK(h(0) == 2);
    CHECK(h(5) == 0);

    std::mt19937 rng(11);
    std::uniform_int_distribution<int> pos(-6, 6), val(0, 9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Rational> xs;
        for (int i = 0; i < 5; ++i) xs.push_back(pos(rng));
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::vector<Rational> ys;
        for (std::size_t i = 0; i < xs.size(); ++i) ys.push_back(val(rng));
        const PiecewiseLinear g(xs, ys, -1, 0);
        const auto hull = g.convex_minorant();
        CHECK(hull.is_convex());
        for (int i = -20; i <= 20; ++i) CHECK(hull(frac(i, 2)) <= g(frac(i, 2)));
        // touches g at each of its own breakpoints
        for (const auto& x : hull.xs()) CHECK(hull(x) == g(x));
    }
}
