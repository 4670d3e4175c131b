#include "spreadcheck/model.hpp"

#include "spreadcheck/json_util.hpp"

namespace spreadcheck {

std::vector<std::vector<int>> FiniteModel::children() const {
    std::vector<std::vector<int>> out(nodes.size());
    for (const auto& n : nodes)
        if (n.parent >= 0) out[n.parent].push_back(n.id);
    return out;
}

std::vector<Rational> FiniteModel::node_probabilities() const {
    std::vector<Rational> p(nodes.size());
    for (const auto& n : nodes) p[n.id] = n.parent < 0 ? n.probability : p[n.parent] * n.probability;
    return p;
}

std::vector<std::vector<int>> FiniteModel::paths() const {
    const auto kids = children();
    std::vector<std::vector<int>> out;
    std::vector<std::vector<int>> prefix{{0}};
    while (!prefix.empty()) {
        auto cur = std::move(prefix.back());
        prefix.pop_back();
        const int id = cur.back();
        if (kids[id].empty()) {
            out.push_back(std::move(cur));
            continue;
        }
        for (auto it = kids[id].rbegin(); it != kids[id].rend(); ++it) {
            auto next = cur;
            next.push_back(*it);
            prefix.push_back(std::move(next));
        }
    }
    return out;
}

std::vector<std::string> check_model(const FiniteModel& model, const Rational& eps) {
    return check_model(model, eps, eps);
}

std::vector<std::string> check_model(const FiniteModel& model, const Rational& spread_bound, const Rational& ref_floor) {
    std::vector<std::string> bad;
    const int horizon = model.horizon();
    if (horizon < 1) bad.push_back("model needs B(0..T) with T >= 1");
    if (model.nodes.empty()) {
        bad.push_back("empty tree");
        return bad;
    }
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        const auto& n = model.nodes[i];
        const std::string at = "node " + std::to_string(i) + ": ";
        if (n.id != static_cast<int>(i)) bad.push_back(at + "id does not match position");
        if (i == 0) {
            if (n.parent != -1 || n.time != 0) bad.push_back(at + "root must have no parent and time 0");
            if (n.probability != 1) bad.push_back(at + "root probability must be 1");
        } else {
            if (n.parent < 0 || n.parent >= static_cast<int>(i)) {
                bad.push_back(at + "parent must precede the node");
                return bad;
            }
            if (n.time != model.nodes[n.parent].time + 1) bad.push_back(at + "time must be parent time + 1");
            if (sgn(n.probability) <= 0) bad.push_back(at + "branch probability must be positive");
        }
        if (n.time > horizon) bad.push_back(at + "time beyond horizon");
        if (sgn(n.s_bid) <= 0) bad.push_back(at + "S bid must be positive");
        if (n.s_bid > n.s_ref || n.s_ref > n.s_ask) bad.push_back(at + "S^C outside [bid, ask]");
        if (n.s_bid > n.s_star || n.s_star > n.s_ask) bad.push_back(at + "S* outside [bid, ask]");
        if (n.time >= 1 && n.time <= horizon) {
            if (n.s_ask - n.s_bid > spread_bound * model.bank[n.time]) bad.push_back(at + "spread exceeds the bound times B(t)");
            if (n.s_ref < ref_floor * model.bank[n.time]) bad.push_back(at + "S^C below the floor times B(t)");
        }
    }
    if (!bad.empty()) return bad;

    const auto kids = model.children();
    for (const auto& n : model.nodes) {
        if (kids[n.id].empty()) {
            if (n.time != horizon) bad.push_back("node " + std::to_string(n.id) + ": leaf before the horizon");
            continue;
        }
        Rational mass = 0, expectation = 0;
        for (int c : kids[n.id]) {
            mass += model.nodes[c].probability;
            expectation += model.nodes[c].probability * model.nodes[c].s_star * model.discount(n.time + 1);
        }
        if (mass != 1) bad.push_back("node " + std::to_string(n.id) + ": branch probabilities do not sum to 1");
        if (expectation != n.s_star * model.discount(n.time))
            bad.push_back("node " + std::to_string(n.id) + ": discounted S* is not a martingale");
    }
    return bad;
}

Rational model_call_price(const FiniteModel& model, int t, const Rational& k) {
    const auto p = model.node_probabilities();
    Rational price = 0;
    for (const auto& n : model.nodes)
        if (n.time == t) price += p[n.id] * positive_part(n.s_ref * model.discount(t) - k);
    return price;
}

std::vector<std::string> check_model_prices(const FiniteModel& model, const DiscountedQuoteSet& qs) {
    std::vector<std::string> bad;
    if (model.bank != qs.bank) {
        bad.push_back("model bank account differs from the quotes");
        return bad;
    }
    const auto& root = model.nodes.front();
    if (root.s_bid != qs.underlying.bid || root.s_ask != qs.underlying.ask)
        bad.push_back("root bid/ask differ from the underlying quote");
    for (int t = 1; t <= qs.horizon(); ++t) {
        for (const auto& o : qs.options[t]) {
            const Rational price = model_call_price(model, t, o.strike);
            if (price < o.bid || price > o.ask)
                bad.push_back("t=" + std::to_string(t) + " strike " + to_string(o.strike) + ": model price " +
                              to_string(price) + " outside [" + to_string(o.bid) + ", " + to_string(o.ask) + "]");
        }
    }
    return bad;
}

FiniteModel to_arithmetic(const FiniteModel& model) {
    FiniteModel out = model;
    for (auto& n : out.nodes) {
        if (n.time == 0) continue;
        const Rational h = rabs(n.s_ref - n.s_star);
        n.s_bid = n.s_ref - h;
        n.s_ask = n.s_ref + h;
    }
    return out;
}

bool is_arithmetic(const FiniteModel& model) {
    for (const auto& n : model.nodes)
        if (n.time > 0 && 2 * n.s_ref != n.s_bid + n.s_ask) return false;
    return true;
}

nlohmann::json to_json(const FiniteModel& model) {
    nlohmann::json bank = nlohmann::json::array(), nodes = nlohmann::json::array();
    for (const auto& b : model.bank) bank.push_back(rational_to_json(b));
    for (const auto& n : model.nodes) {
        nodes.push_back({{"id", n.id},
                         {"parent", n.parent},
                         {"time", n.time},
                         {"probability", rational_to_json(n.probability)},
                         {"S_bid", rational_to_json(n.s_bid)},
                         {"S_ask", rational_to_json(n.s_ask)},
                         {"S_C", rational_to_json(n.s_ref)},
                         {"S_star", rational_to_json(n.s_star)}});
    }
    return {{"bank", bank}, {"nodes", nodes}};
}

FiniteModel model_from_json(const nlohmann::json& j) {
    FiniteModel m;
    for (const auto& b : j.at("bank")) m.bank.push_back(rational_from_json(b));
    for (const auto& n : j.at("nodes")) {
        ModelNode node;
        node.id = n.at("id").get<int>();
        node.parent = n.at("parent").get<int>();
        node.time = n.at("time").get<int>();
        node.probability = rational_from_json(n.at("probability"));
        node.s_bid = rational_from_json(n.at("S_bid"));
        node.s_ask = rational_from_json(n.at("S_ask"));
        node.s_ref = rational_from_json(n.at("S_C"));
        node.s_star = rational_from_json(n.at("S_star"));
        m.nodes.push_back(std::move(node));
    }
    return m;
}

} // namespace spreadcheck
