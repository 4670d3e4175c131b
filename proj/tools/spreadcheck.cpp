// Command-line front end: check, min-epsilon, model, verify, distance.
//
// Exit codes: 0 consistent (or necessary conditions pass), 1 input error,
// 2 weak arbitrage, 3 model-independent arbitrage, 4 no consistent epsilon
// below the scan ceiling.

#include "spreadcheck/certificates.hpp"
#include "spreadcheck/json_util.hpp"
#include "spreadcheck/measures.hpp"
#include "spreadcheck/multi_maturity.hpp"
#include "spreadcheck/quotes.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace spreadcheck;
using nlohmann::json;

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

Rational parse_number(const std::string& s, const char* flag) {
    try {
        return rational_from_json(json(s));
    } catch (const std::exception&) {
        throw InputError(std::string(flag) + ": not a number: " + s);
    }
}

// Marginals file: {"marginals": [{"atoms": ...}, ...]} or a bare array.
std::vector<DiscreteMeasure> read_marginals(const std::string& path) {
    const json doc = read_json(path);
    const json& list = doc.is_array() ? doc : doc.at("marginals");
    std::vector<DiscreteMeasure> out;
    for (const auto& m : list) out.push_back(measure_from_json(m));
    return out;
}

EpsilonMode parse_mode(const std::string& m) {
    if (m == "single") return EpsilonMode::Single;
    if (m == "simplified") return EpsilonMode::Simplified;
    if (m == "necessary") return EpsilonMode::Necessary;
    throw InputError("mode must be single, necessary or simplified for this command");
}

// Seeded eps-bounded trees used to show which branch of a weak witness
// applies: two children per node, S^C near a strike.
FiniteModel random_tree(std::mt19937_64& rng, const DiscountedQuoteSet& qs, const Rational& eps) {
    FiniteModel m;
    m.bank = qs.bank;
    const Rational s0 = qs.underlying.ask;
    m.nodes.push_back({0, -1, 0, 1, qs.underlying.bid, qs.underlying.ask, s0, s0});
    std::vector<int> frontier{0};
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int t = 1; t <= qs.horizon(); ++t) {
        std::vector<int> next;
        for (int parent : frontier) {
            for (int c = 0; c < 2; ++c) {
                const int i = pick(0, qs.count(t));
                Rational ref = qs.strike(t, i, eps) + eps * frac(pick(-2, 2), 2) + frac(pick(-1, 1), 4);
                ref = rmax(ref, rmax(eps, frac(1, 8)));
                const Rational bid = rmax(ref - eps / 2, ref / 2);
                const int id = static_cast<int>(m.nodes.size());
                m.nodes.push_back({id, parent, t, frac(1, 2), bid * qs.bank[t], (bid + eps) * qs.bank[t],
                                   ref * qs.bank[t], ref * qs.bank[t]});
                next.push_back(id);
            }
        }
        frontier = std::move(next);
    }
    return m;
}

void print(const json& j, const std::string& format, const std::function<void()>& human) {
    if (format == "json")
        std::cout << j.dump(2) << "\n";
    else
        human();
}

// Human output names conditions; ids stay in the JSON.
std::string readable(std::string text) {
    static const std::pair<const char*, const char*> names[] = {
        {"4.3-iii", "basket price"},          {"4.3-iv", "basket degenerate"},
        {"4.3-ii", "basket slope bound"},     {"4.3-i", "basket slope comparison"},
        {"5.3-iii", "complete-curve test 3"}, {"5.3-iv", "complete-curve test 4"},
        {"5.3-ii", "complete-curve test 2"},  {"5.3-i", "complete-curve test 1"}};
    for (const auto& [id, name] : names)
        for (auto at = text.find(id); at != std::string::npos; at = text.find(id, at + 1))
            text.replace(at, std::string(id).size(), name);
    return text;
}

void human_report(const ClassifyReport& r) {
    std::cout << "verdict: " << classification_name(r.verdict) << " (eps = " << to_string(r.eps) << ")\n";
    for (const auto& [t, v] : r.single) {
        std::cout << "  t=" << t << " " << condition_name(v.condition);
        if (v.i >= 0) std::cout << " i=" << v.i;
        if (v.j >= 0) std::cout << " j=" << v.j;
        if (v.l >= 0) std::cout << " l=" << v.l;
        std::cout << "\n";
    }
    for (const auto& v : r.necessary) {
        std::cout << "  " << readable(necessary_id(v.condition)) << " s=" << v.s << " j=" << v.cvb.J.back()
                  << " sigma=" << v.cvb.sigma.back() << " bid=" << to_string(v.bid);
        if (v.t >= 0) std::cout << " (t=" << v.t << ", i=" << v.i << ")";
        if (v.u >= 0) std::cout << " (u=" << v.u << ", l=" << v.l << ")";
        std::cout << "\n";
    }
    for (const auto& c : r.certificates)
        std::cout << "  certificate " << readable(c.condition) << ": cost " << to_string(c.verification.initial_value)
                  << (c.verification.is_arbitrage ? ", verified" : ", NOT verified") << "\n";
    for (const auto& w : r.weak) std::cout << "  weak witness " << readable(w.condition) << "\n";
    if (r.model) std::cout << "  model witness: " << r.model->nodes.size() << " nodes\n";
    for (const auto& n : r.notes) std::cout << "  note: " << readable(n) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consistency of call quotes with eps-bounded spread models"};
    app.require_subcommand(1);

    std::string input, format = "json", mode = "necessary", eps_s = "0", p_s, tol_s = "1/1000", marg_path, quotes_path;
    std::string second;
    int max_u = 0, grid = 3, seed = 1, demos = 0;
    std::size_t caps = 1000000, max_certs = 8;
    bool unbounded = false;

    auto common = [&](CLI::App* c) {
        c->add_option("--format", format, "json | human")->check(CLI::IsMember({"json", "human"}));
        c->add_option("--caps", caps, "cap on necessary-condition evaluations");
    };

    auto* check = app.add_subcommand("check", "classify a quote file at a spread bound");
    check->add_option("quotes", input, "quote JSON")->required();
    check->add_option("--epsilon", eps_s, "spread bound (decimal or fraction)");
    check->add_option("--p", p_s, "probability bound for p-bounded spreads");
    check->add_option("--mode", mode, "single | necessary | simplified | unbounded");
    check->add_flag("--unbounded", unbounded, "unbounded spreads");
    check->add_option("--max-u", max_u, "largest basket maturity (0: all)");
    check->add_option("--grid-density", grid, "grid points per coordinate in certificate verification");
    check->add_option("--max-certificates", max_certs, "certificates to build and verify");
    check->add_option("--marginals", marg_path, "complete curves: measures per maturity");
    check->add_option("--seed", seed, "seed for the weak-witness demonstration models");
    check->add_option("--demo-models", demos, "random models per weak witness to demonstrate on");
    common(check);

    auto* mineps = app.add_subcommand("min-epsilon", "smallest spread bound passing the chosen checks");
    mineps->add_option("quotes", input, "quote JSON")->required();
    mineps->add_option("--mode", mode, "single | necessary | simplified");
    mineps->add_option("--tolerance", tol_s, "bisection tolerance");
    mineps->add_option("--marginals", marg_path, "complete curves (simplified mode)");
    common(mineps);

    auto* model = app.add_subcommand("model", "export a witness model");
    model->add_option("quotes", input, "quote JSON")->required();
    model->add_option("--epsilon", eps_s, "spread bound");
    model->add_option("--marginals", marg_path, "complete curves");
    common(model);

    auto* verify = app.add_subcommand("verify", "replay certificates against the quotes");
    verify->add_option("certificate", input, "portfolio, certificate or check report JSON")->required();
    verify->add_option("--quotes", quotes_path, "quote JSON")->required();
    verify->add_option("--grid-density", grid, "grid points per coordinate");
    common(verify);

    auto* distance = app.add_subcommand("distance", "W-infinity distance and convex order of two measures");
    distance->add_option("mu", input, "measure JSON")->required();
    distance->add_option("nu", second, "measure JSON")->required();
    distance->add_option("--epsilon", eps_s, "threshold for the p-bounded coupling");
    distance->add_option("--p", p_s, "probability bound");
    common(distance);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const Rational eps = parse_number(eps_s, "--epsilon");
        if (sgn(eps) < 0) throw InputError("--epsilon must be >= 0");
        std::optional<Rational> p;
        if (!p_s.empty()) {
            p = parse_number(p_s, "--p");
            if (sgn(*p) <= 0 || *p > 1) throw InputError("--p must be in (0, 1]");
        }
        std::optional<std::vector<DiscreteMeasure>> marginals;
        if (!marg_path.empty()) marginals = read_marginals(marg_path);

        if (check->parsed()) {
            const auto qs = discount(quotes_from_json(read_json(input)));
            ClassifyReport r;
            if (unbounded || mode == "unbounded" || p) {
                r = classify_unbounded(qs, p);
            } else {
                if (mode != "single" && mode != "necessary" && mode != "simplified")
                    throw InputError("unknown mode " + mode);
                if (mode == "simplified" && !marginals) throw InputError("simplified mode needs --marginals");
                ClassifyOptions opts;
                opts.max_u = mode == "single" ? -1 : max_u;
                opts.cap = caps;
                opts.grid_density = grid;
                opts.max_certificates = max_certs;
                opts.marginals = marginals;
                try {
                    r = classify(qs, eps, opts);
                } catch (const std::invalid_argument& e) {
                    throw InputError(e.what());
                }
            }
            json j = to_json(r);
            if (demos > 0 && !r.weak.empty()) {
                std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
                json demo = json::array();
                for (const auto& w : r.weak) {
                    for (int n = 0; n < demos; ++n) {
                        const auto m = random_tree(rng, qs, eps);
                        const auto& strat = select(w, qs, m);
                        const auto res = check_in_model(strat, qs, m);
                        demo.push_back({{"condition", w.condition},
                                        {"branch", &strat == &w.if_event ? "if_event" : "otherwise"},
                                        {"arbitrage_in_model", res.ok}});
                    }
                }
                j["weak_demonstration"] = demo;
            }
            print(j, format, [&] { human_report(r); });
            return exit_code(r.verdict);
        }

        if (mineps->parsed()) {
            const auto qs = discount(quotes_from_json(read_json(input)));
            const Rational tol = parse_number(tol_s, "--tolerance");
            if (sgn(tol) <= 0) throw InputError("--tolerance must be > 0");
            try {
                const auto r = min_epsilon(qs, parse_mode(mode), tol, marginals);
                json trace = json::array();
                for (const auto& pr : r.trace) trace.push_back({{"eps", rational_to_json(pr.eps)}, {"pass", pr.pass}});
                json j = {{"epsilon", rational_to_json(r.value)},
                          {"epsilon_decimal", to_double(r.value)},
                          {"ceiling", rational_to_json(r.ceiling)},
                          {"mode", mode},
                          {"trace", trace}};
                if (r.failing) j["largest_failing"] = rational_to_json(*r.failing);
                print(j, format, [&] {
                    std::cout << "min epsilon: " << to_string(r.value) << " (" << to_double(r.value) << ")\n";
                    if (r.failing) std::cout << "fails at: " << to_string(*r.failing) << "\n";
                    std::cout << "probes: " << r.trace.size() << "\n";
                });
                return 0;
            } catch (const MultiMaturityError& e) {
                if (e.kind() != MultiMaturityError::Kind::NoConsistentEpsilon) throw;
                print({{"error", e.what()}, {"mode", mode}}, format, [&] { std::cout << e.what() << "\n"; });
                return 4;
            }
        }

        if (model->parsed()) {
            const auto qs = discount(quotes_from_json(read_json(input)));
            ClassifyOptions opts;
            opts.cap = caps;
            opts.marginals = marginals;
            opts.max_certificates = 1;
            ClassifyReport r;
            try {
                r = classify(qs, eps, opts);
            } catch (const std::invalid_argument& e) {
                throw InputError(e.what());
            }
            if (r.model) {
                print(to_json(*r.model), format, [&] {
                    for (const auto& n : r.model->nodes)
                        std::cout << n.id << " parent " << n.parent << " t=" << n.time << " p=" << to_string(n.probability)
                                  << " S=[" << to_string(n.s_bid) << ", " << to_string(n.s_ask)
                                  << "] S^C=" << to_string(n.s_ref) << " S*=" << to_string(n.s_star) << "\n";
                });
                return 0;
            }
            print(to_json(r), format, [&] { human_report(r); });
            return r.verdict == Classification::ModelIndependentArbitrage ? 3 : 2;
        }

        if (verify->parsed()) {
            const auto qs = discount(quotes_from_json(read_json(quotes_path)));
            const json doc = read_json(input);
            std::vector<json> items;
            if (doc.contains("certificates"))
                for (const auto& c : doc.at("certificates")) items.push_back(c);
            else
                items.push_back(doc);
            json out = json::array();
            bool all = !items.empty();
            for (const auto& item : items) {
                const auto pf = portfolio_from_json(item.contains("portfolio") ? item.at("portfolio") : item);
                const auto res = verify_model_independent(pf, qs, {grid});
                json j = {{"initial_value", rational_to_json(res.initial_value)},
                          {"is_arbitrage", res.is_arbitrage},
                          {"worst_terminal_bank", rational_to_json(res.worst_terminal_bank)},
                          {"grid_points", res.grid_points}};
                if (item.contains("initial_value"))
                    j["claimed_initial_value_matches"] = rational_from_json(item.at("initial_value")) == res.initial_value;
                if (!res.reason.empty()) j["reason"] = res.reason;
                all = all && res.is_arbitrage;
                out.push_back(j);
            }
            print({{"verdict", all ? "model_independent_arbitrage" : "not_verified"}, {"results", out}}, format, [&] {
                for (const auto& j : out) std::cout << j.dump() << "\n";
                std::cout << (all ? "verified" : "not verified") << "\n";
            });
            return all ? 3 : 0;
        }

        if (distance->parsed()) {
            const auto mu = measure_from_json(read_json(input));
            const auto nu = measure_from_json(read_json(second));
            json j = {{"w_inf", rational_to_json(w_inf(mu, nu))},
                      {"mu_leq_nu_convex", convex_order_leq(mu, nu)},
                      {"nu_leq_mu_convex", convex_order_leq(nu, mu)},
                      {"mean_mu", rational_to_json(mu.mean())},
                      {"mean_nu", rational_to_json(nu.mean())}};
            if (p) j["d_p_feasible"] = d_p_feasible(mu, nu, eps, *p);
            print(j, format, [&] {
                for (auto it = j.begin(); it != j.end(); ++it) std::cout << it.key() << ": " << it.value().dump() << "\n";
            });
            return 0;
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const QuoteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const MeasureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const PortfolioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const MultiMaturityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
