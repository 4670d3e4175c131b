#ifndef SPREADCHECK_MULTI_MATURITY_HPP
#define SPREADCHECK_MULTI_MATURITY_HPP

#include "spreadcheck/measures.hpp"
#include "spreadcheck/model.hpp"
#include "spreadcheck/portfolio.hpp"
#include "spreadcheck/quotes.hpp"
#include "spreadcheck/rational.hpp"
#include "spreadcheck/single_maturity.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spreadcheck {

class MultiMaturityError : public std::runtime_error {
public:
    enum class Kind {
        InvalidSpec,
        BudgetExceeded,
        AssumptionViolated,
        MeanOutsideIntersection,
        DistanceExceeded,
        NoConsistentEpsilon,
        Infeasible
    };
    MultiMaturityError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Calendar vertical basket of maturity u. Vectors are stored 0-based:
// sigma[t-1] = sigma_t, x[t-1] = x_t, J[t-1] = j_t for t = 1..u and
// I[t-1] = i_t for t = 1..u-1 (a strike index of maturity t+1).
struct CVBSpec {
    int u = 1;
    std::vector<int> sigma;
    std::vector<Rational> x;
    std::vector<int> I;
    std::vector<int> J;
    Rational eps;
};

// Reasons the spec breaks the structural constraints; empty if valid.
// sgn(0) is accepted as either sign.
std::vector<std::string> cvb_spec_problems(const DiscountedQuoteSet& qs, const CVBSpec& spec);

struct CVBPrices {
    Rational ask;
    Rational bid;
};

// Market prices of the basket. The 2 eps term enters both prices with the
// contract's own sign (minus), see the README.
CVBPrices cvb_prices(const DiscountedQuoteSet& qs, const CVBSpec& spec);

// Short-basket strategy: sells the basket legs and trades the stock so that
// after every date t <= u either bank >= 0 and no dynamic short, or
// bank >= x_t and one unit short. Initial value is -bid.
SemiStaticPortfolio cvb_strategy(const DiscountedQuoteSet& qs, const CVBSpec& spec, int horizon);

// Every valid spec with maturity <= max_u. Throws BudgetExceeded beyond cap.
std::vector<CVBSpec> enumerate_cvbs(const DiscountedQuoteSet& qs, const Rational& eps, int max_u, std::size_t cap);

// Dynamic stock position and bank in the accounting of the basket strategy:
// open underlying legs and their time-0 premium are excluded, deposits of
// short underlying legs count once the leg has matured.
Rational cvb_dynamic_position(const SemiStaticPortfolio& p, const Ledger& ledger, int t);
Rational cvb_reference_bank(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, const Ledger& ledger, int t);
bool cvb_scenario_holds(const SemiStaticPortfolio& p, const DiscountedQuoteSet& qs, const CVBSpec& spec,
                        const Ledger& ledger, int t);

enum class NecessaryCondition { SlopeComparison, SlopeBound, Price, Degenerate };

// One violated instance. cvb is the highest-bid basket ending in
// (s, j_s, sigma_s); the conditions only depend on the basket through its
// bid, and they get harder to meet as the bid grows.
struct NecessaryViolation {
    NecessaryCondition condition;
    int s = 0;
    int t = -1;
    int i = -1;
    int u = -1;
    int l = -1;
    CVBSpec cvb;
    Rational bid;
};

const char* necessary_id(NecessaryCondition c);  // "4.3-i" ... "4.3-iv"

struct NecessaryOptions {
    int max_u = 0;                  // largest basket maturity s; 0 means T - 1
    std::size_t cap = 1000000;      // condition evaluations
};

std::vector<NecessaryViolation> check_necessary(const DiscountedQuoteSet& qs, const Rational& eps,
                                                const NecessaryOptions& opts = {});

// Static legs plus basket strategy buying back the short at the dates used
// in the hedge. Only for the first three conditions.
SemiStaticPortfolio necessary_certificate(const DiscountedQuoteSet& qs, const Rational& eps, const NecessaryViolation& v);

// Degenerate condition: in a model where the basket never ends in the
// money, selling it is an arbitrage; otherwise the zero-cost hedge of the
// price condition pays off with positive probability.
SemiStaticPortfolio necessary_weak_witness(const DiscountedQuoteSet& qs, const Rational& eps, const NecessaryViolation& v,
                                           bool basket_can_end_in_the_money);

nlohmann::json to_json(const CVBSpec& spec);
nlohmann::json to_json(const NecessaryViolation& v);

// --- complete curves -------------------------------------------------------

struct SimplifiedViolation {
    int u = 0;
    int condition = 0;              // 1..4
    std::vector<Rational> k;        // k_1..k_{u-1}
    Rational value;                 // the left-hand side, negative
    std::string id() const;         // "5.3-i" ...
};

struct SimplifiedResult {
    bool consistent = true;
    std::optional<SimplifiedViolation> violation;  // the most negative one found
};

// Left-hand side of condition `condition` (1..4) for horizon u and k_1..k_{u-1}.
// Interior signs are sgn(k_{t-1} - k_t); at a tie both choices give the same value.
Rational simplified_value(const std::vector<CallFunctionPL>& curves, const Rational& s0, const Rational& eps, int u,
                          int condition, const std::vector<Rational>& k);

// Throws AssumptionViolated unless every mu_t lives on [eps, inf). The mean
// band |E mu_t - s0| <= eps is only checked for T = 1: for T >= 2 it follows
// from the conditions themselves at far-out strikes.
void check_curve_assumption(const std::vector<DiscreteMeasure>& mus, const Rational& s0, const Rational& eps);

// Candidate grid: atoms of every mu_t shifted by 0, +-eps, +-2 eps, plus one
// point beyond each end.
std::vector<Rational> simplified_grid(const std::vector<DiscreteMeasure>& mus, const Rational& eps);

// Minimises each condition over k in grid^{u-1} by dynamic programming.
SimplifiedResult check_simplified_on_grid(const std::vector<DiscreteMeasure>& mus, const Rational& s0,
                                          const Rational& eps, const std::vector<Rational>& grid);
SimplifiedResult check_simplified(const std::vector<DiscreteMeasure>& mus, const Rational& s0, const Rational& eps);

// Peacock nu_1..nu_T with mean m and w_inf(mu_t, nu_t) <= eps, or nullopt.
// Exact: solves for a process X with marginals mu_t and a martingale
// within eps of it, on the tree of X-paths.
std::optional<std::vector<DiscreteMeasure>> peacock_construct(const std::vector<DiscreteMeasure>& mus,
                                                              const Rational& eps, const Rational& m);

// kernel[a][b]: probability of moving from atom a of nu_t to atom b of nu_{t+1}.
using Kernel = std::vector<std::vector<Rational>>;

// One martingale kernel per step t -> t+1. Throws Infeasible if nus is not a peacock.
std::vector<Kernel> martingale_from_peacock(const std::vector<DiscreteMeasure>& nus);

// Tree whose discounted S* has marginals nu_t and follows the kernels, with
// D(t) S^C_t drawn from the monotone coupling of nu_t and mu_t at each node.
// The root carries the quoted underlying band with S^C_0 = S*_0 = mean.
FiniteModel assemble_model(const std::vector<DiscreteMeasure>& mus, const std::vector<DiscreteMeasure>& nus,
                           const std::vector<Kernel>& kernels, const std::vector<Rational>& bank,
                           const BidAsk& underlying, const Rational& eps);

// --- unbounded spreads ------------------------------------------------------

struct UnboundedResult {
    Verdict tag = Verdict::Consistent;
    std::vector<std::pair<int, Violation>> violations;  // (maturity, violation)
};

// Per-maturity conditions over the quoted calls only.
UnboundedResult check_unbounded(const DiscountedQuoteSet& qs);
// Same verdict as check_unbounded for every p in (0, 1].
UnboundedResult check_p_bounded(const DiscountedQuoteSet& qs, const Rational& eps, const Rational& p);
// Coupling with P(|X - Y| > eps) <= p, the per-maturity piece of a witness.
std::optional<TransportPlan> p_bounded_witness(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                               const Rational& eps, const Rational& p);

// --- minimal epsilon --------------------------------------------------------

enum class EpsilonMode { Single, Simplified, Necessary };

struct EpsilonProbe {
    Rational eps;
    bool pass = false;
};

struct MinEpsilonResult {
    Rational value;                      // smallest passing eps found
    std::optional<Rational> failing;     // largest failing eps below it
    Rational ceiling;                    // scans stay strictly below
    std::vector<EpsilonProbe> trace;
};

bool passes_at(const DiscountedQuoteSet& qs, EpsilonMode mode, const Rational& eps,
               const std::optional<std::vector<DiscreteMeasure>>& marginals = std::nullopt);

// Geometric scan below the ceiling min(k_{t,1}, S_0 bid / 2), then bisection
// between the last failure and the first pass. No monotonicity is assumed;
// the trace lists every probe. Throws NoConsistentEpsilon.
MinEpsilonResult min_epsilon(const DiscountedQuoteSet& qs, EpsilonMode mode, const Rational& tolerance,
                             const std::optional<std::vector<DiscreteMeasure>>& marginals = std::nullopt);

} // namespace spreadcheck

#endif
