// mdid: identification of missing-data DAG models and causal effects.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdid/causal_id.hpp"
#include "mdid/graph_file.hpp"
#include "mdid/md_id.hpp"
#include "mdid/oracle.hpp"

#ifndef MDID_FIXTURE_DIR
#define MDID_FIXTURE_DIR "fixtures"
#endif

using namespace mdid;
using json = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, error = 1, not_identified = 2, unknown = 3 };

int exit_for(Verdict v) {
    switch (v) {
        case Verdict::identified: return ok;
        case Verdict::not_identified: return not_identified;
        case Verdict::unknown: return unknown;
    }
    return error;
}

struct Query {
    enum Kind { target, full, propensity, effect } kind = target;
    std::string indicator;
    InterventionQuery effect_query;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        auto b = cur.find_first_not_of(" \t");
        auto e = cur.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

// target | full | indicator:R | effect:Y1,Y2|A=a,B=b
Query parse_query(const std::string& text) {
    Query q;
    if (text == "target") return q;
    if (text == "full") {
        q.kind = Query::full;
        return q;
    }
    if (text.rfind("indicator:", 0) == 0) {
        q.kind = Query::propensity;
        q.indicator = text.substr(10);
        if (q.indicator.empty()) throw Error("indicator query needs a name, e.g. indicator:R1");
        return q;
    }
    if (text.rfind("effect:", 0) == 0) {
        q.kind = Query::effect;
        std::string body = text.substr(7);
        auto bar = body.find('|');
        for (const auto& y : split(body.substr(0, bar), ',')) q.effect_query.outcomes.insert(y);
        if (q.effect_query.outcomes.empty()) throw Error("effect query needs at least one outcome");
        if (bar != std::string::npos) {
            for (const auto& t : split(body.substr(bar + 1), ',')) {
                auto eq = t.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == t.size())
                    throw Error("treatment '" + t + "' is not of the form A=a");
                q.effect_query.treatments[t.substr(0, eq)] = t.substr(eq + 1);
            }
        }
        return q;
    }
    throw Error("unknown query '" + text + "' (target, full, indicator:R, effect:Y|A=a)");
}

std::string query_text(const Query& q) {
    switch (q.kind) {
        case Query::target: return "target";
        case Query::full: return "full";
        case Query::propensity: return "indicator:" + q.indicator;
        case Query::effect: {
            std::string s = "effect:" + join(q.effect_query.outcomes);
            std::string t;
            for (const auto& [a, v] : q.effect_query.treatments) t += (t.empty() ? "" : ",") + a + "=" + v;
            return t.empty() ? s : s + "|" + t;
        }
    }
    return "";
}

std::string trimmed(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
    return s;
}

json expr_json(const Expr& e) {
    if (!e) return nullptr;
    return {{"latex", render_latex(e)}, {"sexpr", render_sexpr(e)}};
}

json indicator_json(const IndicatorResult& r) {
    json j{{"identified", r.identified}, {"method", r.method}, {"explored", r.explored}};
    if (r.identified) {
        j["schedule"] = trimmed(r.schedule.transcript());
        j["propensity"] = expr_json(r.propensity);
    } else {
        j["failure"] = r.failure;
    }
    return j;
}

// Result of one query, in both renderings.
struct Outcome {
    Verdict verdict = Verdict::unknown;
    Expr functional;
    std::map<std::string, Expr> propensities;
    json report;
    std::string text;
};

Outcome run_md(const MdDag& m, const Query& q) {
    SearchBudget budget = SearchBudget::from_env(SearchBudget{});
    Outcome o;
    std::ostringstream t;
    if (q.kind == Query::propensity) {
        if (!m.is_indicator(q.indicator)) throw Error("'" + q.indicator + "' is not an indicator of the model");
        IndicatorResult r = identify_indicator(m, q.indicator, budget);
        o.verdict = r.identified ? Verdict::identified : Verdict::unknown;
        o.functional = r.propensity;
        o.report = indicator_json(r);
        t << "schedule: " << (r.identified ? trimmed(r.schedule.transcript()) : "none found") << "\n";
        t << "method: " << r.method << " (" << r.explored << " schedules explored)\n";
        if (!r.identified) t << "failure: " << r.failure << "\n";
        t << r.transcript;
    } else {
        IdReport rep = q.kind == Query::full ? identify_full(m, budget) : identify_target(m, budget);
        o.verdict = rep.status;
        o.functional = rep.functional;
        o.propensities = rep.propensities;
        json props = json::object();
        for (const auto& [r, res] : rep.indicators) props[r] = indicator_json(res);
        json cert = json::array();
        for (const auto& [a, b] : rep.certificate) cert.push_back({a, b});
        o.report = {{"functional_display", expr_json(rep.display)}, {"indicators", props}};
        if (!rep.certificate.empty()) o.report["certificate"] = cert;
        o.report["transcript"] = rep.transcript;
        if (!rep.certificate.empty()) {
            t << "colluders:";
            for (const auto& [a, b] : rep.certificate) t << " (" << a << "," << b << ")";
            t << "\n";
        }
        if (rep.display) t << "display: " << render_latex(rep.display) << "\n";
        for (const auto& [r, res] : rep.indicators) {
            t << r << ": ";
            if (res.identified)
                t << res.method << ", " << trimmed(res.schedule.transcript()) << "\n  " << render_latex(res.propensity) << "\n";
            else
                t << "no schedule (" << res.failure << ")\n";
        }
        t << rep.transcript;
    }
    o.text = t.str();
    return o;
}

Outcome run_effect(const Cadmg& g, const Query& q) {
    InterventionalResult r = identify_interventional(g, q.effect_query);
    Outcome o;
    o.verdict = r.identified ? Verdict::identified : Verdict::not_identified;
    o.functional = r.functional;
    json ds = json::array();
    std::ostringstream t;
    t << "Y* = {" << join(r.y_star) << "}\n";
    for (const auto& d : r.districts) {
        json order = d.fixing_order;
        ds.push_back({{"district", std::vector<std::string>(d.district.begin(), d.district.end())},
                      {"intrinsic", d.intrinsic},
                      {"fixing_order", order},
                      {"kernel", expr_json(d.kernel)}});
        t << "district {" << join(d.district) << "}: fix <";
        for (std::size_t i = 0; i < d.fixing_order.size(); ++i) t << (i ? "," : "") << d.fixing_order[i];
        t << ">" << (d.intrinsic ? "" : " (stuck)") << "\n";
    }
    if (!r.identified) t << r.failure << "\n";
    o.report = {{"y_star", std::vector<std::string>(r.y_star.begin(), r.y_star.end())}, {"districts", ds}};
    if (!r.identified) o.report["failure"] = r.failure;
    o.text = t.str();
    return o;
}

Outcome run_query(const GraphFile& f, const Query& q) {
    if (q.kind == Query::effect) return run_effect(f.graph, q);
    return run_md(f.md_dag(), q);
}

void emit(const std::string& file, const Query& q, const Outcome& o, bool as_json, json extra = {}) {
    if (as_json) {
        json j{{"file", file}, {"query", query_text(q)}, {"status", verdict_name(o.verdict)},
               {"functional", expr_json(o.functional)}};
        j.update(o.report);
        if (!extra.is_null()) j.update(extra);
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::cout << file << " [" << query_text(q) << "]: " << verdict_name(o.verdict) << "\n";
    if (o.functional) std::cout << "functional: " << render_latex(o.functional) << "\n";
    std::cout << o.text;
}

bool is_numeric(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

struct VerifyOutcome {
    VerifyReport report;
    json detail = json::object();
};

// Symbolic treatment labels are checked at every value combination.
VerifyOutcome verify_effect_query(const Cadmg& g, const InterventionQuery& q, int trials, std::uint64_t seed,
                                  int card) {
    HiddenDag h = canonical_dag(g);
    std::vector<std::string> symbolic;
    for (const auto& [a, v] : q.treatments)
        if (!is_numeric(v)) symbolic.push_back(a);
    VerifyOutcome out;
    std::size_t combos = 1;
    for (std::size_t i = 0; i < symbolic.size(); ++i) combos *= static_cast<std::size_t>(card);
    for (std::size_t c = 0; c < combos; ++c) {
        InterventionQuery cq = q;
        std::size_t rest = c;
        for (const auto& a : symbolic) {
            cq.treatments[a] = std::to_string(rest % static_cast<std::size_t>(card));
            rest /= static_cast<std::size_t>(card);
        }
        InterventionalResult r = identify_interventional(g, cq);
        if (!r.identified) throw Error("effect not identified at concrete treatment values");
        VerifyReport v = verify_effect(h, cq, r.functional, trials, seed, card);
        out.report.trials += v.trials;
        out.report.undefined_cells += v.undefined_cells;
        out.report.max_error = std::max(out.report.max_error, v.max_error);
        out.report.errors.insert(out.report.errors.end(), v.errors.begin(), v.errors.end());
    }
    return out;
}

VerifyOutcome verify_query(const GraphFile& f, const Query& q, const Outcome& o, int trials, std::uint64_t seed,
                           int card) {
    if (q.kind == Query::effect) return verify_effect_query(f.graph, q.effect_query, trials, seed, card);
    MdDag m = f.md_dag();
    VerifyOutcome out;
    switch (q.kind) {
        case Query::target:
            out.report = verify_functional(m, o.functional, VerifyTarget::target_law, trials, seed, "", card);
            break;
        case Query::full:
            out.report = verify_functional(m, o.functional, VerifyTarget::full_law, trials, seed, "", card);
            break;
        default:
            out.report = verify_functional(m, o.functional, VerifyTarget::indicator, trials, seed, q.indicator, card);
            break;
    }
    for (const auto& [r, prop] : o.propensities) {
        VerifyReport v = verify_functional(m, prop, VerifyTarget::indicator, trials, seed, r, card);
        out.detail[r] = v.max_error;
    }
    return out;
}

// ---------------------------------------------------------------------------

struct FixtureCase {
    std::string file;
    std::string query;
    Verdict expect;
};

const std::vector<FixtureCase>& fixture_cases() {
    static const std::vector<FixtureCase> cases = {
        {"fig1a.graph", "effect:Y|A=a", Verdict::identified},
        {"bow.graph", "effect:Y|A=a", Verdict::not_identified},
        {"fig2a.graph", "target", Verdict::identified},
        {"fig2d.graph", "target", Verdict::identified},
        {"fig2d.graph", "full", Verdict::identified},
        {"fig3a.graph", "target", Verdict::identified},
        {"fig4a.graph", "target", Verdict::identified},
        {"fig5a.graph", "target", Verdict::identified},
        {"fig6a.graph", "target", Verdict::identified},
        {"appendix_b.graph", "target", Verdict::identified},
        {"appendix_c.graph", "target", Verdict::identified},
        {"appendix_c.graph", "full", Verdict::not_identified},
    };
    return cases;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Identification for missing-data DAG models"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "JSON output");

    std::string file, query_arg = "target";
    auto* check = app.add_subcommand("check", "Validate a graph file and scan for colluders");
    check->add_option("file", file, "graph file")->required();

    auto* identify = app.add_subcommand("identify", "Identify a target, full law, propensity or effect");
    identify->add_option("file", file, "graph file")->required();
    identify->add_option("--query", query_arg, "target | full | indicator:R | effect:Y|A=a");

    int trials = 100;
    std::uint64_t seed = 7;
    double tol = 1e-9;
    int card = 2;
    auto* verify = app.add_subcommand("verify", "Identify, then check against random laws");
    verify->add_option("file", file, "graph file")->required();
    verify->add_option("--query", query_arg, "target | full | indicator:R | effect:Y|A=a");
    verify->add_option("--trials", trials, "random laws")->check(CLI::PositiveNumber);
    verify->add_option("--seed", seed, "base seed");
    verify->add_option("--tol", tol, "largest accepted absolute error")->check(CLI::NonNegativeNumber);
    verify->add_option("--cardinality", card, "values per variable")->check(CLI::Range(2, 8));

    std::string dir = MDID_FIXTURE_DIR;
    int fixture_trials = 10;
    auto* fixtures = app.add_subcommand("fixtures", "Run every shipped example against its expected verdict");
    fixtures->add_option("--dir", dir, "fixture directory");
    fixtures->add_option("--trials", fixture_trials, "random laws per identified example (0 skips)")
        ->check(CLI::NonNegativeNumber);
    fixtures->add_option("--seed", seed, "base seed");
    fixtures->add_option("--tol", tol, "largest accepted absolute error");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*check) {
            GraphFile f = read_graph_file(file);
            json j{{"file", file}, {"vertices", f.graph.size()}};
            if (!f.graph.bidirected_edges().empty() && f.missing.empty()) {
                j["model"] = "admg";
                j["valid"] = true;
            } else {
                auto problems = md_dag_violations(f.graph, f.roles);
                j["model"] = "missing-data dag";
                j["valid"] = problems.empty();
                j["violations"] = problems;
                if (problems.empty()) {
                    MdDag m = validate_md_dag(f.graph, f.roles);
                    json cs = json::array();
                    for (const auto& [a, b] : colluder_scan(m)) cs.push_back({a, b});
                    j["triples"] = m.triples().size();
                    j["colluders"] = cs;
                }
            }
            if (as_json) {
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << file << ": " << j["model"].get<std::string>() << ", "
                          << (j["valid"].get<bool>() ? "valid" : "invalid") << "\n";
                if (j.contains("violations"))
                    for (const auto& v : j["violations"]) std::cout << "  violation: " << v.get<std::string>() << "\n";
                if (j.contains("colluders")) {
                    std::cout << "  triples: " << j["triples"].get<std::size_t>() << "\n  colluders:";
                    if (j["colluders"].empty()) std::cout << " none";
                    for (const auto& c : j["colluders"])
                        std::cout << " (" << c[0].get<std::string>() << "," << c[1].get<std::string>() << ")";
                    std::cout << "\n";
                }
            }
            return j["valid"].get<bool>() ? ok : error;
        }

        if (*identify) {
            GraphFile f = read_graph_file(file);
            Query q = parse_query(query_arg);
            Outcome o = run_query(f, q);
            emit(file, q, o, as_json);
            return exit_for(o.verdict);
        }

        if (*verify) {
            GraphFile f = read_graph_file(file);
            Query q = parse_query(query_arg);
            Outcome o = run_query(f, q);
            if (o.verdict != Verdict::identified) {
                emit(file, q, o, as_json);
                return exit_for(o.verdict);
            }
            VerifyOutcome v = verify_query(f, q, o, trials, seed, card);
            bool pass = v.report.max_error <= tol && v.report.undefined_cells == 0;
            for (const auto& [_, e] : v.detail.items()) pass = pass && e.get<double>() <= tol;
            json extra{{"verify",
                        {{"trials", v.report.trials},
                         {"seed", seed},
                         {"tolerance", tol},
                         {"max_error", v.report.max_error},
                         {"undefined_cells", v.report.undefined_cells},
                         {"propensity_errors", v.detail},
                         {"passed", pass}}}};
            emit(file, q, o, as_json, extra);
            if (!as_json) {
                std::cout << "verify: " << v.report.trials << " trials, max error " << v.report.max_error
                          << ", undefined cells " << v.report.undefined_cells;
                for (const auto& [r, e] : v.detail.items()) std::cout << ", " << r << " " << e.get<double>();
                std::cout << " -> " << (pass ? "pass" : "FAIL") << "\n";
            }
            return pass ? ok : error;
        }

        if (*fixtures) {
            bool all = true;
            json rows = json::array();
            for (const auto& c : fixture_cases()) {
                std::string path = (std::filesystem::path(dir) / c.file).string();
                GraphFile f = read_graph_file(path);
                Query q = parse_query(c.query);
                Outcome o = run_query(f, q);
                bool pass = o.verdict == c.expect;
                json row{{"file", c.file}, {"query", c.query}, {"expected", verdict_name(c.expect)},
                         {"status", verdict_name(o.verdict)}};
                if (pass && o.verdict == Verdict::identified && fixture_trials > 0) {
                    VerifyOutcome v = verify_query(f, q, o, fixture_trials, seed, 2);
                    bool num = v.report.max_error <= tol && v.report.undefined_cells == 0;
                    for (const auto& [_, e] : v.detail.items()) num = num && e.get<double>() <= tol;
                    row["max_error"] = v.report.max_error;
                    pass = pass && num;
                }
                row["passed"] = pass;
                all = all && pass;
                if (!as_json) {
                    std::cout << (pass ? "pass " : "FAIL ") << c.file << " [" << c.query << "] "
                              << verdict_name(o.verdict);
                    if (row.contains("max_error")) std::cout << " max error " << row["max_error"].get<double>();
                    std::cout << "\n";
                }
                rows.push_back(row);
            }
            if (as_json) std::cout << json{{"fixtures", rows}, {"passed", all}}.dump(2) << "\n";
            return all ? ok : error;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& v : e.violations) std::cerr << "  " << v << "\n";
        return error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return error;
    }
    return error;
}
