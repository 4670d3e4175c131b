#include "spreadcheck/quotes.hpp"

#include "spreadcheck/json_util.hpp"

#include <algorithm>
#include <map>

namespace spreadcheck {

Rational DiscountedQuoteSet::strike(int t, int i, const Rational& eps) const {
    return i == 0 ? eps : options[t][i - 1].strike;
}

Rational DiscountedQuoteSet::bid(int t, int i, const Rational& eps) const {
    return i == 0 ? Rational(underlying.bid - 2 * eps) : options[t][i - 1].bid;
}

Rational DiscountedQuoteSet::ask(int t, int i) const { return i == 0 ? underlying.ask : options[t][i - 1].ask; }

QuoteSet make_quotes(std::vector<Rational> bank, BidAsk underlying,
                     const std::vector<std::pair<int, OptionQuote>>& records) {
    if (bank.size() < 2) throw QuoteError("bank account needs B(0..T) with T >= 1");
    if (bank[0] != 1) throw QuoteError("B(0) must equal 1");
    for (std::size_t t = 0; t < bank.size(); ++t)
        if (sgn(bank[t]) <= 0) throw QuoteError("bank account value at t=" + std::to_string(t) + " must be positive");
    if (sgn(underlying.bid) <= 0 || sgn(underlying.ask) <= 0) throw QuoteError("underlying prices must be positive");
    if (underlying.bid > underlying.ask) throw QuoteError("underlying bid exceeds ask");

    const int horizon = static_cast<int>(bank.size()) - 1;
    std::vector<std::map<Rational, BidAsk>> merged(bank.size());
    for (const auto& [t, q] : records) {
        const std::string where = " (t=" + std::to_string(t) + ", strike " + to_string(q.strike) + ")";
        if (t < 1 || t > horizon) throw QuoteError("maturity out of range" + where);
        if (sgn(q.strike) <= 0) throw QuoteError("strike must be positive" + where);
        if (sgn(q.bid) <= 0 || sgn(q.ask) <= 0) throw QuoteError("prices must be positive" + where);
        if (q.bid > q.ask) throw QuoteError("bid exceeds ask" + where);
        auto [it, fresh] = merged[t].try_emplace(q.strike, BidAsk{q.bid, q.ask});
        if (!fresh) {
            it->second.bid = rmax(it->second.bid, q.bid);
            it->second.ask = rmin(it->second.ask, q.ask);
            if (it->second.bid > it->second.ask) throw QuoteError("duplicate quotes leave an empty band" + where);
        }
    }

    QuoteSet qs;
    qs.bank = std::move(bank);
    qs.underlying = std::move(underlying);
    qs.options.resize(qs.bank.size());
    for (int t = 1; t <= horizon; ++t)
        for (const auto& [k, band] : merged[t]) qs.options[t].push_back({k, band.bid, band.ask});
    return qs;
}

QuoteSet quotes_from_json(const nlohmann::json& doc) {
    try {
        std::vector<Rational> bank;
        for (const auto& b : doc.at("bank")) bank.push_back(rational_from_json(b));
        const auto& u = doc.at("underlying");
        BidAsk underlying{rational_from_json(u.at("bid")), rational_from_json(u.at("ask"))};
        std::vector<std::pair<int, OptionQuote>> records;
        if (doc.contains("options")) {
            for (const auto& o : doc.at("options")) {
                records.emplace_back(o.at("t").get<int>(), OptionQuote{rational_from_json(o.at("strike")),
                                                                       rational_from_json(o.at("bid")),
                                                                       rational_from_json(o.at("ask"))});
            }
        }
        return make_quotes(std::move(bank), std::move(underlying), records);
    } catch (const nlohmann::json::exception& e) {
        throw QuoteError(std::string("malformed quote document: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw QuoteError(std::string("malformed number: ") + e.what());
    }
}

QuoteSet parse_quotes(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw QuoteError(std::string("malformed quote document: ") + e.what());
    }
    return quotes_from_json(doc);
}

nlohmann::json to_json(const QuoteSet& qs) {
    nlohmann::json doc;
    doc["bank"] = nlohmann::json::array();
    for (const auto& b : qs.bank) doc["bank"].push_back(rational_to_json(b));
    doc["underlying"] = {{"bid", rational_to_json(qs.underlying.bid)}, {"ask", rational_to_json(qs.underlying.ask)}};
    doc["options"] = nlohmann::json::array();
    for (int t = 1; t <= qs.horizon(); ++t) {
        for (const auto& o : qs.options[t]) {
            doc["options"].push_back({{"t", t},
                                      {"strike", rational_to_json(o.strike)},
                                      {"bid", rational_to_json(o.bid)},
                                      {"ask", rational_to_json(o.ask)}});
        }
    }
    return doc;
}

DiscountedQuoteSet discount(const QuoteSet& qs) {
    DiscountedQuoteSet d;
    d.bank = qs.bank;
    d.underlying = qs.underlying;
    d.options = qs.options;
    for (int t = 1; t <= qs.horizon(); ++t)
        for (auto& o : d.options[t]) o.strike /= qs.bank[t];
    return d;
}

std::vector<Diagnostic> validate_for_epsilon(const DiscountedQuoteSet& qs, const Rational& eps) {
    std::vector<Diagnostic> out;
    if (sgn(eps) < 0) throw std::invalid_argument("epsilon must be nonnegative");
    for (int t = 1; t <= qs.horizon(); ++t) {
        if (qs.options[t].empty()) continue;
        if (qs.options[t].front().strike <= eps) {
            out.push_back({Diagnostic::Kind::StrikeBelowEpsilon, t, 1,
                           "discounted strike " + to_string(qs.options[t].front().strike) + " at t=" +
                               std::to_string(t) + " is not above epsilon " + to_string(eps)});
        }
    }
    if (sgn(qs.underlying.bid - 2 * eps) <= 0) {
        out.push_back({Diagnostic::Kind::PseudoBidNonpositive, 0, 0,
                       "underlying bid minus 2 epsilon is not positive"});
    }
    return out;
}

} // namespace spreadcheck
