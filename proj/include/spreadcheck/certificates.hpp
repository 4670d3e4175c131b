#ifndef SPREADCHECK_CERTIFICATES_HPP
#define SPREADCHECK_CERTIFICATES_HPP

#include "spreadcheck/measures.hpp"
#include "spreadcheck/model.hpp"
#include "spreadcheck/multi_maturity.hpp"
#include "spreadcheck/portfolio.hpp"
#include "spreadcheck/quotes.hpp"
#include "spreadcheck/single_maturity.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace spreadcheck {

enum class Classification { Consistent, NecessaryPass, WeakArbitrage, ModelIndependentArbitrage };

const char* classification_name(Classification c);
// 0 consistent or necessary-pass, 2 weak, 3 model-independent.
int exit_code(Classification c);

struct ClassifyOptions {
    int max_u = 0;                   // 0: every basket maturity, -1: no basket conditions
    std::size_t cap = 1000000;       // necessary-condition evaluations
    int grid_density = 3;            // for certificate verification
    std::size_t max_certificates = 8;
    // Complete curves: D(t) S^C_t laws, one per maturity. Enables the
    // sufficient check and the model construction for T >= 2.
    std::optional<std::vector<DiscreteMeasure>> marginals;
};

// A model-independent arbitrage with its grid verification.
struct Certificate {
    std::string condition;    // "butterfly", ..., "4.3-i", ...
    int t = 0;                // maturity of a single-maturity violation, 0 otherwise
    SemiStaticPortfolio portfolio;
    VerifyResult verification;
};

// Weak arbitrage: which strategy works depends on the model, through a
// single event. `if_event` is used when the event has positive probability:
// the basket strategy ends its maturity short on some path (basket set), or
// D(t) S^C_t > strike (single maturity).
struct WeakWitness {
    std::string condition;
    int t = 0;
    std::optional<CVBSpec> basket;
    Rational strike;
    SemiStaticPortfolio if_event;
    SemiStaticPortfolio otherwise;
};

struct ClassifyReport {
    Classification verdict = Classification::Consistent;
    Rational eps;
    std::vector<std::pair<int, Violation>> single;   // (maturity, violation)
    std::vector<NecessaryViolation> necessary;
    std::optional<SimplifiedResult> simplified;
    std::vector<Certificate> certificates;
    std::vector<WeakWitness> weak;
    std::optional<FiniteModel> model;
    std::vector<std::string> notes;
};

// Throws std::invalid_argument when validate_for_epsilon fails.
ClassifyReport classify(const DiscountedQuoteSet& qs, const Rational& eps, const ClassifyOptions& opts = {});

// Per-maturity conditions over the quoted calls only; no certificates.
ClassifyReport classify_unbounded(const DiscountedQuoteSet& qs, const std::optional<Rational>& p = std::nullopt);

// Event of a necessary-condition weak witness: the basket strategy ends the
// basket maturity short on some path of the model.
bool basket_ends_short(const DiscountedQuoteSet& qs, const CVBSpec& spec, const FiniteModel& model);
// Event of a single-maturity weak witness: D(t) S^C_t > k_j with positive probability.
bool strike_in_the_money(const FiniteModel& model, int t, const Rational& k);

// The strategy a weak witness prescribes in a given model.
const SemiStaticPortfolio& select(const WeakWitness& w, const DiscountedQuoteSet& qs, const FiniteModel& model);

nlohmann::json to_json(const Certificate& c);
nlohmann::json to_json(const WeakWitness& w);
nlohmann::json to_json(const ClassifyReport& r);

} // namespace spreadcheck

#endif
