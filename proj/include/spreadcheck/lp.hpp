#ifndef SPREADCHECK_LP_HPP
#define SPREADCHECK_LP_HPP

#include "spreadcheck/rational.hpp"

#include <utility>
#include <vector>

namespace spreadcheck::lp {

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Minimize, Maximize };
enum class Status { Optimal, Infeasible, Unbounded };

struct Term {
    int var;
    Rational coef;
};

struct Result {
    Status status = Status::Infeasible;
    Rational objective;
    std::vector<Rational> values;  // one per variable, empty unless Optimal

    bool feasible() const { return status != Status::Infeasible; }
};

/// Small exact linear program: variables, linear constraints, optional
/// linear objective. Solved by a two-phase tableau simplex over rationals
/// (Dantzig pricing, Bland's rule once progress stalls).
class Program {
public:
    /// Adds a variable with lower bound 0, or unrestricted when `free` is set.
    int add_variable(bool free = false);
    int variable_count() const { return static_cast<int>(free_.size()); }

    void add_constraint(std::vector<Term> terms, Relation rel, Rational rhs);
    void set_objective(std::vector<Term> terms, Sense sense);

    Result solve() const;

private:
    struct Row {
        std::vector<Term> terms;
        Relation rel;
        Rational rhs;
    };
    std::vector<bool> free_;
    std::vector<Row> rows_;
    std::vector<Term> objective_;
    Sense sense_ = Sense::Minimize;
};

} // namespace spreadcheck::lp

#endif
