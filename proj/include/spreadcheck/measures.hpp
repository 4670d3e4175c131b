#ifndef SPREADCHECK_MEASURES_HPP
#define SPREADCHECK_MEASURES_HPP

#include "spreadcheck/piecewise_linear.hpp"
#include "spreadcheck/rational.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace spreadcheck {

struct Atom {
    Rational point;
    Rational mass;
};

class MeasureError : public std::runtime_error {
public:
    enum class Kind { InvalidMasses, NonConvex, SlopeBelowMinusOne, NegativeValue, NotCallFunction, MeanOutsideBand };
    MeasureError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Finitely supported probability measure. Atoms are sorted by point, merged,
// and carry strictly positive mass summing to exactly 1.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    explicit DiscreteMeasure(std::vector<Atom> atoms);

    static DiscreteMeasure dirac(const Rational& x);

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    Rational mean() const;
    const Rational& min_point() const { return atoms_.front().point; }
    const Rational& max_point() const { return atoms_.back().point; }

    friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b);

private:
    std::vector<Atom> atoms_;
};

// Call functions are PiecewiseLinear values with left slope -1 and right
// slope 0, vanishing at and beyond the last breakpoint.
using CallFunctionPL = PiecewiseLinear;

CallFunctionPL call_function_of(const DiscreteMeasure& mu);

// Inverse of call_function_of. Throws MeasureError when R is not the call
// function of a finitely supported probability measure.
DiscreteMeasure measure_of(const PiecewiseLinear& r);

bool convex_order_leq(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
bool is_peacock(const std::vector<DiscreteMeasure>& seq);

Rational w_inf(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct Envelopes {
    PiecewiseLinear r_min;
    PiecewiseLinear r_max;
};

// Call functions of the smallest and largest measures in convex order with
// mean m within W-infinity distance eps of mu.
Envelopes envelopes(const DiscreteMeasure& mu, const Rational& m, const Rational& eps);

// plan[i][j] is the mass moved from mu atom i to nu atom j.
using TransportPlan = std::vector<std::vector<Rational>>;

// Largest mass that can be moved between the marginals along pairs at
// distance <= eps (max flow on the bipartite support graph).
std::pair<Rational, TransportPlan> max_close_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                      const Rational& eps);

// A full coupling with P(|X - Y| > eps) <= p, if one exists.
std::optional<TransportPlan> d_p_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Rational& eps,
                                          const Rational& p);
bool d_p_feasible(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Rational& eps, const Rational& p);

DiscreteMeasure shift_measure(const DiscreteMeasure& mu, const Rational& delta);

nlohmann::json to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const nlohmann::json& j);

} // namespace spreadcheck

#endif
