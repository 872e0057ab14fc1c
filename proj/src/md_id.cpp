#include "mdid/md_id.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <queue>
#include <set>
#include <tuple>

namespace mdid {

SearchBudget SearchBudget::from_env(SearchBudget b) {
    auto read = [](const char* name, auto& field) {
        if (const char* v = std::getenv(name)) {
            try {
                field = static_cast<std::decay_t<decltype(field)>>(std::stod(v));
            } catch (const std::exception&) {
                throw Error(std::string("bad value for ") + name + ": '" + v + "'");
            }
        }
    };
    read("MDID_BUDGET_MAX_SET_SIZE", b.max_set_size);
    read("MDID_BUDGET_MAX_LATENT_SUBSETS", b.max_latent_subsets);
    read("MDID_BUDGET_MAX_SCHEDULES", b.max_schedules);
    read("MDID_BUDGET_TIME_LIMIT", b.time_limit_s);
    b.check();
    return b;
}

void SearchBudget::check() const {
    if (max_set_size <= 0 || max_latent_subsets <= 0 || max_schedules <= 0 || time_limit_s <= 0)
        throw Error("search budget fields must be positive");
}

ScheduleVerdict validate_schedule(const MdDag& m, const FixingSchedule& s, const VSet& unpinned) {
    ApplyOptions opt;
    opt.build_kernels = false;
    opt.unpinned = unpinned;
    auto run = apply_schedule(m, s, opt);
    return {run.valid, run.failed_class, run.condition, run.detail};
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::identified: return "identified";
        case Verdict::not_identified: return "not-identified";
        case Verdict::unknown: return "unknown";
    }
    return "";
}

namespace {

Assign ones(const VSet& vars) {
    Assign a;
    for (const auto& v : vars) a[v] = "1";
    return a;
}

VSet parent_indicators(const MdDag& m, const std::string& r) {
    return set_intersect(m.graph().pa(r), m.indicators());
}

// X_j^(1) whose indicator is a parent of R_i: never promoted when the full law
// is the goal.
VSet forced_hidden(const MdDag& m, const std::string& r, Mode mode) {
    if (mode == Mode::target) return {};
    VSet out;
    for (const auto& rj : parent_indicators(m, r)) out.insert(m.by_indicator(rj)->target);
    return out;
}

struct Failure {
    bool ok = false;
    std::size_t cls = 0;
    std::string condition, detail;
    VSet culprits;
};

// Prop. 1 requirements beyond class validity that only depend on the shape.
Failure shape_check(const MdDag& m, const std::string& r, const FixingSchedule& s, Mode mode) {
    Failure f;
    std::size_t top = s.class_of(r);
    if (top == s.classes.size() || s.classes[top] != VSet{r}) {
        f.condition = "top";
        f.detail = "{" + r + "} must be a class of its own";
        return f;
    }
    for (std::size_t k = 0; k < s.classes.size(); ++k)
        if (k != top && !s.precedes(k, top)) {
            f.cls = k;
            f.condition = "top";
            f.detail = s.class_label(k) + " is not fixed before " + r;
            return f;
        }
    VSet need = set_intersect(m.graph().pa(r), m.targets());
    VSet missing = set_minus(need, set_union(s.members(), s.promoted[top]));
    if (!missing.empty()) {
        f.cls = top;
        f.condition = "iv";
        f.detail = "parents {" + join(missing) + "} neither fixed nor promoted";
        return f;
    }
    VSet forced = forced_hidden(m, r, mode);
    for (std::size_t k = 0; k < s.classes.size(); ++k)
        if (!disjoint(s.promoted[k], forced)) {
            f.cls = k;
            f.condition = "full";
            f.detail = "promotes {" + join(set_intersect(s.promoted[k], forced)) +
                       "} whose indicators are parents of " + r;
            return f;
        }
    f.ok = true;
    return f;
}

}  // namespace

IndicatorResult check_indicator_schedule(const MdDag& m, const std::string& r, const FixingSchedule& s,
                                         Mode mode) {
    IndicatorResult res;
    res.indicator = r;
    res.schedule = s;
    if (!m.is_indicator(r)) throw Error("'" + r + "' is not an indicator");
    auto sh = shape_check(m, r, s, mode);
    if (!sh.ok) {
        res.failure = sh.condition + ": " + sh.detail;
        return res;
    }
    ApplyOptions opt;
    opt.build_kernels = false;
    if (mode == Mode::full) opt.unpinned = parent_indicators(m, r);
    auto run = apply_schedule(m, s, opt);
    if (!run.valid) {
        res.failure = run.condition + ": " + run.detail;
        return res;
    }
    opt.build_kernels = true;
    opt.free_member = r;
    try {
        run = apply_schedule(m, s, opt);
    } catch (const Error& e) {
        res.failure = std::string("kernel: ") + e.what();
        return res;
    }
    Expr q = run.classes.back().denominator;
    for (const auto& cr : run.classes)
        if (cr.index == s.class_of(r)) q = cr.denominator;
    if (mode == Mode::target) {
        q = canonical(at(q, ones(set_intersect(parent_indicators(m, r), q->free()))));
    } else {
        for (const auto& v : q->free()) {
            const Triple* t = m.by_proxy(v);
            if (t && !q->bound.count(t->indicator)) {
                res.failure = "full: proxy '" + v + "' appears with its indicator free";
                return res;
            }
        }
    }
    res.identified = true;
    res.propensity = q;

    std::string tr = "schedule for " + r + "\n";
    for (const auto& cr : run.classes) {
        tr += "  " + s.class_label(cr.index);
        if (!cr.spec.fixed.empty()) tr += " fixed {" + join(cr.spec.fixed) + "}";
        if (!cr.spec.selected.empty()) tr += " selected {" + join(cr.spec.selected) + "}";
        if (!cr.spec.hidden.empty()) tr += " hidden {" + join(cr.spec.hidden) + "}";
        if (!cr.r_z.empty()) tr += " R_Z {" + join(cr.r_z) + "}";
        tr += "\n    q = " + render_latex(cr.denominator) + "\n";
    }
    res.transcript = tr;
    return res;
}

namespace {

using Clock = std::chrono::steady_clock;

// Hiding policies: counterfactuals of indicators fixed later stay latent
// (variant 0); additionally those of the class itself (variant 1).
void promote(const MdDag& m, FixingSchedule& s, const VSet& forced, int variant, const VSet& extra) {
    VSet all = m.targets();
    for (std::size_t k = 0; k < s.classes.size(); ++k) {
        VSet later;
        for (auto j : s.successors(k)) later = set_union(later, s.classes[j]);
        if (variant == 1) later = set_union(later, s.classes[k]);
        VSet hidden;
        for (const auto& t : m.triples())
            if (later.count(t.indicator)) hidden.insert(t.target);
        hidden = set_minus(hidden, extra);
        hidden = set_union(hidden, forced);
        s.promoted[k] = set_minus(all, hidden);
    }
}

FixingSchedule with_class(const FixingSchedule& s, const std::string& u) {
    FixingSchedule t = s;
    t.add_class({u});
    return t;
}

bool merge_ok(const FixingSchedule& s, std::size_t a, std::size_t b) {
    for (std::size_t w = 0; w < s.classes.size(); ++w) {
        if (w == a || w == b) continue;
        if ((s.precedes(a, w) && s.precedes(w, b)) || (s.precedes(b, w) && s.precedes(w, a))) return false;
    }
    return true;
}

FixingSchedule merged(const FixingSchedule& s, std::size_t a, std::size_t b) {
    FixingSchedule t;
    std::vector<std::size_t> map(s.classes.size());
    for (std::size_t k = 0; k < s.classes.size(); ++k) {
        if (k == b) continue;
        VSet c = s.classes[k];
        if (k == a) c = set_union(c, s.classes[b]);
        map[k] = t.add_class(c);
    }
    map[b] = map[a];
    for (const auto& [x, y] : s.before) {
        auto mx = map[x], my = map[y];
        if (mx != my && !t.precedes(mx, my)) t.add_order(mx, my);
    }
    return t;
}

struct Searcher {
    const MdDag& m;
    std::string r;
    SearchBudget budget;
    Mode mode;
    VSet forced;
    Clock::time_point start;
    std::size_t explored = 0;
    std::string deepest = {};
    std::size_t deepest_size = 0;

    bool trace = std::getenv("MDID_TRACE") != nullptr;

    bool out_of_time() const {
        return std::chrono::duration<double>(Clock::now() - start).count() > budget.time_limit_s;
    }

    // Tries the hiding variants of one shape. Returns the first valid
    // result, or the variant-0 failure.
    std::pair<IndicatorResult, Failure> evaluate(const FixingSchedule& shape) {
        Failure first;
        std::vector<std::pair<int, VSet>> variants{{0, {}}, {1, {}}};
        for (std::size_t v = 0; v < variants.size() && static_cast<int>(v) < budget.max_latent_subsets; ++v) {
            FixingSchedule s = shape;
            promote(m, s, forced, variants[v].first, variants[v].second);
            ++explored;
            auto sh = shape_check(m, r, s, mode);
            Failure f;
            if (!sh.ok) {
                f = sh;
            } else {
                ApplyOptions opt;
                opt.build_kernels = false;
                if (mode == Mode::full) opt.unpinned = parent_indicators(m, r);
                auto run = apply_schedule(m, s, opt);
                if (run.valid) {
                    auto res = check_indicator_schedule(m, r, s, mode);
                    if (res.identified) return {res, f};
                    f.condition = "kernel";
                    f.detail = res.failure;
                } else {
                    f.cls = run.failed_class;
                    f.condition = run.condition;
                    f.detail = run.detail;
                    f.culprits = run.culprits;
                }
            }
            if (v == 0) {
                first = f;
                // single unhiding variants at the failing class
                if (f.cls < s.classes.size())
                    for (const auto& x : set_minus(m.targets(), set_union(s.promoted[f.cls], forced)))
                        variants.push_back({0, {x}});
            }
        }
        if (auto res = lazy_hiding(shape); res.identified) return {res, first};
        return {IndicatorResult{}, first};
    }

    // Starts with only the forced counterfactuals hidden. When a class fails
    // because an indicator was selected by earlier classes, hides that
    // indicator's counterfactual in those classes and retries.
    IndicatorResult lazy_hiding(const FixingSchedule& shape) {
        FixingSchedule s = shape;
        for (auto& p : s.promoted) p = set_minus(m.targets(), forced);
        if (!shape_check(m, r, s, mode).ok) return {};
        ApplyOptions opt;
        opt.build_kernels = false;
        if (mode == Mode::full) opt.unpinned = parent_indicators(m, r);
        for (int round = 0; round < budget.max_latent_subsets; ++round) {
            ++explored;
            auto run = apply_schedule(m, s, opt);
            if (run.valid) return check_indicator_schedule(m, r, s, mode);
            if (run.condition != "ii") return {};
            bool changed = false;
            for (const auto& sel : run.culprits) {
                const Triple* t = m.by_indicator(sel);
                if (!t) continue;
                for (auto p : s.predecessors(run.failed_class))
                    changed |= s.promoted[p].erase(t->target) > 0;
            }
            if (!changed || !shape_check(m, r, s, mode).ok) return {};
        }
        return {};
    }

    std::vector<FixingSchedule> moves(const FixingSchedule& s, const Failure& f, int tier) {
        std::vector<FixingSchedule> out;
        std::size_t top = s.class_of(r);
        std::size_t k = f.cls;
        if (k >= s.classes.size()) return out;
        VSet types = m.indicators();
        if (tier >= 5) types = set_union(set_union(types, m.observed()), m.targets());
        bool merges = tier >= 4;
        auto add = [&](auto&& build) {
            try {
                out.push_back(build());
            } catch (const Error&) {
            }
        };
        for (const auto& u : set_minus(set_intersect(f.culprits, types), {r})) {
            if (s.classes[k].count(u)) continue;
            std::size_t j = s.class_of(u);
            if (j == s.classes.size()) {
                add([&] {
                    auto t = with_class(s, u);
                    t.add_order(t.classes.size() - 1, k);
                    return t;
                });
                if (m.is_indicator(u) && k != top)
                    add([&] {
                        auto t = with_class(s, u);
                        t.add_order(k, t.classes.size() - 1);
                        t.add_order(t.classes.size() - 1, top);
                        return t;
                    });
                if (merges && k != top && static_cast<int>(s.classes[k].size()) < budget.max_set_size)
                    add([&] {
                        auto t = s;
                        t.classes[k].insert(u);
                        return t;
                    });
            } else {
                if (!s.precedes(j, k) && !s.precedes(k, j)) {
                    add([&] {
                        auto t = s;
                        t.add_order(j, k);
                        return t;
                    });
                    if (m.is_indicator(u) && j != top)
                        add([&] {
                            auto t = s;
                            t.add_order(k, j);
                            return t;
                        });
                }
                if (merges && j != top && k != top && merge_ok(s, j, k) &&
                    static_cast<int>(s.classes[j].size() + s.classes[k].size()) <= budget.max_set_size)
                    add([&] { return merged(s, std::min(j, k), std::max(j, k)); });
            }
        }
        return out;
    }

    IndicatorResult run_tier(int tier) {
        using Key = std::tuple<std::size_t, std::size_t, std::string>;
        auto key = [](const FixingSchedule& s) {
            return Key{s.members().size(), s.classes.size(), s.shape()};
        };
        std::priority_queue<std::pair<Key, std::size_t>, std::vector<std::pair<Key, std::size_t>>,
                            std::greater<>>
            open;
        std::vector<FixingSchedule> pool;
        std::set<std::string> seen;
        FixingSchedule root;
        root.add_class({r});
        pool.push_back(root);
        open.push({key(root), 0});
        seen.insert(root.shape());
        int evaluated = 0;
        while (!open.empty() && evaluated < budget.max_schedules && !out_of_time()) {
            auto idx = open.top().second;
            open.pop();
            FixingSchedule s = pool[idx];
            ++evaluated;
            auto [res, f] = evaluate(s);
            if (trace)
                std::fprintf(stderr, "[tier %d] %s -> %s %s: %s {%s}\n", tier, s.shape().c_str(),
                             res.identified ? "valid" : f.condition.c_str(),
                             f.cls < s.classes.size() ? s.class_label(f.cls).c_str() : "", f.detail.c_str(),
                             join(f.culprits).c_str());
            if (res.identified) return res;
            if (s.classes.size() >= deepest_size) {
                deepest_size = s.classes.size();
                deepest = s.shape() + " -> " + f.condition + ": " + f.detail;
            }
            for (auto& t : moves(s, f, tier)) {
                if (!seen.insert(t.shape()).second) continue;
                pool.push_back(std::move(t));
                open.push({key(pool.back()), pool.size() - 1});
            }
        }
        return {};
    }

    IndicatorResult try_shape(const FixingSchedule& t, const FixingSchedule& hint) {
        FixingSchedule h = t;
        for (std::size_t k = 0; k < h.classes.size(); ++k) {
            std::size_t j = 0;
            while (j < hint.classes.size() && hint.classes[j] != h.classes[k]) ++j;
            if (j < hint.classes.size()) h.promoted[k] = hint.promoted[j];
        }
        auto res = check_indicator_schedule(m, r, h, mode);
        if (res.identified) return res;
        return evaluate(t).first;
    }

    // Drops order pairs the schedule does not need.
    IndicatorResult slim(IndicatorResult best) {
        bool changed = true;
        while (changed && !out_of_time()) {
            changed = false;
            const FixingSchedule& s = best.schedule;
            std::vector<std::pair<std::size_t, std::size_t>> cover;
            for (const auto& [a, b] : s.before) {
                bool direct = true;
                for (std::size_t w = 0; w < s.classes.size() && direct; ++w)
                    if (s.precedes(a, w) && s.precedes(w, b)) direct = false;
                if (direct) cover.emplace_back(a, b);
            }
            for (std::size_t e = 0; e < cover.size() && !changed; ++e) {
                FixingSchedule t;
                for (std::size_t j = 0; j < s.classes.size(); ++j) t.add_class(s.classes[j], s.promoted[j]);
                auto [a, b] = cover[e];
                for (std::size_t f = 0; f < cover.size(); ++f)
                    if (f != e) t.add_order(cover[f].first, cover[f].second);
                for (std::size_t w = 0; w < s.classes.size(); ++w) {
                    if (s.precedes(w, a) && !t.precedes(w, b)) t.add_order(w, b);
                    if (s.precedes(b, w) && !t.precedes(a, w)) t.add_order(a, w);
                }
                if (t.classes.size() > 1 && t.predecessors(t.class_of(r)).size() + 1 != t.classes.size())
                    continue;
                auto res = try_shape(t, s);
                if (trace) std::fprintf(stderr, "[slim] %s -> %s\n", t.shape().c_str(), res.identified ? "valid" : res.failure.c_str());
                if (res.identified) {
                    best = std::move(res);
                    changed = true;
                }
            }
        }
        return best;
    }
};

}  // namespace

IndicatorResult identify_indicator(const MdDag& m, const std::string& r, const SearchBudget& budget,
                                   Mode mode) {
    if (!m.is_indicator(r)) throw Error("'" + r + "' is not an indicator");
    budget.check();
    Searcher se{m, r, budget, mode, forced_hidden(m, r, mode), Clock::now()};
    static const char* names[] = {"", "", "", "indicator singletons", "indicator sets",
                                  "observed and counterfactual fixes"};
    for (int tier : {3, 4, 5}) {
        auto res = se.run_tier(tier);
        if (res.identified) {
            res = se.slim(std::move(res));
            res.explored = se.explored;
            res.method = res.schedule.classes.size() == 1 ? "empty schedule" : names[tier];
            return res;
        }
        if (se.out_of_time()) break;
    }
    IndicatorResult res;
    res.indicator = r;
    res.explored = se.explored;
    res.method = "search";
    res.failure = se.deepest;
    res.transcript = "no schedule found for " + r + " after " + std::to_string(se.explored) +
                     " candidates; deepest: " + se.deepest + "\n";
    return res;
}

namespace {

std::string rename_note(const MdDag& m) {
    std::string s;
    for (const auto& t : m.triples())
        s += "rename " + t.proxy + " -> " + t.target + " (read at " + t.indicator + "=1)\n";
    return s;
}

}  // namespace

IdReport identify_target(const MdDag& m, const SearchBudget& budget) {
    IdReport rep;
    std::map<std::string, FixingSchedule> fast;
    if (auto l2 = lemma2_schedule(m)) {
        fast = *l2;
        rep.transcript += "ancestral fast path applies\n";
    } else {
        rep.transcript += "ancestral fast path not applicable (blocked at {" + join(lemma2_blockers(m)) + "})\n";
    }
    bool all = true;
    for (const auto& r : m.indicators()) {
        IndicatorResult res;
        if (fast.count(r)) {
            res = check_indicator_schedule(m, r, fast.at(r), Mode::target);
            res.method = "ancestral fast path";
            if (!res.identified) rep.transcript += "fast path rejected for " + r + ": " + res.failure + "\n";
        }
        if (!res.identified) res = identify_indicator(m, r, budget, Mode::target);
        rep.transcript += res.transcript;
        if (res.identified) rep.propensities[r] = res.propensity;
        all = all && res.identified;
        rep.indicators[r] = std::move(res);
    }
    if (!all) {
        rep.status = Verdict::unknown;
        return rep;
    }
    rep.status = Verdict::identified;
    rep.functional = assemble_target_law(m, rep.propensities);
    rep.display = rename(rep.functional, m.proxy_to_target());
    rep.transcript += rename_note(m);
    return rep;
}

IdReport identify_full(const MdDag& m, const SearchBudget& budget) {
    IdReport rep;
    rep.certificate = colluder_scan(m);
    if (!rep.certificate.empty()) {
        rep.status = Verdict::not_identified;
        for (const auto& [ri, rj] : rep.certificate)
            rep.transcript += "colluder: " + rj + " and " + m.by_indicator(rj)->target + " both point into " +
                              ri + "\n";
        return rep;
    }
    bool all = true;
    for (const auto& r : m.indicators()) {
        auto res = identify_indicator(m, r, budget, Mode::full);
        rep.transcript += res.transcript;
        if (res.identified) rep.propensities[r] = res.propensity;
        all = all && res.identified;
        rep.indicators[r] = std::move(res);
    }
    if (!all) {
        rep.status = Verdict::unknown;
        return rep;
    }
    rep.status = Verdict::identified;
    rep.functional = assemble_full_law(m, rep.propensities);
    rep.display = rep.functional;
    return rep;
}

}  // namespace mdid
