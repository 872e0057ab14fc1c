#pragma once
// Brute-force references used by the tests: path enumeration for
// m-separation, full-joint enumeration for factored laws, permutation search
// for fixing sequences.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <functional>
#include <string>
#include <vector>

#include "mdid/fixing.hpp"
#include "mdid/graph.hpp"
#include "mdid/graph_file.hpp"
#include "mdid/oracle.hpp"
#include "mdid/table.hpp"

#ifndef MDID_FIXTURE_DIR
#define MDID_FIXTURE_DIR "fixtures"
#endif

namespace brute {

using namespace mdid;

inline GraphFile fixture(const std::string& name) { return read_graph_file(std::string(MDID_FIXTURE_DIR) + "/" + name); }
inline MdDag md_fixture(const std::string& name) { return fixture(name).md_dag(); }

/// Every simple path between a and b, checked edge by edge: non-colliders
/// outside c, colliders in an(c).
inline bool m_separated(const Cadmg& g, const VSet& a, const VSet& b, const VSet& c_in) {
    VSet c = c_in;
    for (const auto& v : g.vertices())
        if (g.status(v) != Status::random && !a.count(v) && !b.count(v)) c.insert(v);
    VSet anc = ancestors(g, c);
    // edge marks at each end: arrowhead into `to`?
    struct Step {
        std::string to;
        bool head_at_from;
        bool head_at_to;
    };
    auto steps = [&](const std::string& v) {
        std::vector<Step> out;
        for (const auto& p : g.pa(v)) out.push_back({p, true, false});
        for (const auto& ch : g.ch(v)) out.push_back({ch, false, true});
        for (const auto& s : g.sib(v)) out.push_back({s, true, true});
        return out;
    };
    bool connected = false;
    std::vector<std::string> path;
    std::function<void(const std::string&, bool)> walk = [&](const std::string& v, bool head_in) {
        if (connected) return;
        for (const auto& st : steps(v)) {
            if (std::find(path.begin(), path.end(), st.to) != path.end()) continue;
            if (path.size() > 1) {
                bool collider = head_in && st.head_at_from;
                if (collider ? !anc.count(v) : c.count(v)) continue;
            }
            if (b.count(st.to)) {
                connected = true;
                return;
            }
            path.push_back(st.to);
            walk(st.to, st.head_at_to);
            path.pop_back();
        }
    };
    for (const auto& s : a) {
        if (b.count(s)) return false;
        path = {s};
        // the start vertex is never tested as a collider
        for (const auto& st : steps(s)) {
            if (connected) break;
            if (b.count(st.to)) {
                connected = true;
                break;
            }
            path = {s, st.to};
            walk(st.to, st.head_at_to);
        }
        if (connected) return false;
    }
    return true;
}

/// The joint over every variable of the spec by multiplying CPT entries cell
/// by cell.
inline DiscreteLaw joint(const CptSpec& spec) {
    DiscreteLaw law;
    std::vector<std::string> vars;
    std::vector<int> card;
    for (const auto& v : spec.variables()) {
        vars.push_back(v);
        card.push_back(spec.card(v));
        law.labels[v] = spec.labels.at(v);
    }
    law.table = make_table(vars, card);
    for_each_cell(vars, card, [&](const std::vector<int>& cell, std::size_t n) {
        std::map<std::string, int> at;
        for (std::size_t i = 0; i < vars.size(); ++i) at[vars[i]] = cell[i];
        double p = 1;
        for (const auto& [v, cpt] : spec.cpts) p *= cpt.table.get(at);
        law.table.data[n] = p;
    });
    return law;
}

/// Every ordering of s that is a valid fixing sequence in g.
inline std::vector<std::vector<std::string>> valid_sequences(const Cadmg& g, const VSet& s) {
    std::vector<std::string> order(s.begin(), s.end());
    std::vector<std::vector<std::string>> out;
    do {
        Cadmg h = g;
        bool ok = true;
        for (const auto& v : order) {
            if (h.status(v) != Status::random || !is_fixable_vertex(h, v)) {
                ok = false;
                break;
            }
            h.fix(v);
        }
        if (ok) out.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
    return out;
}

inline std::vector<VSet> subsets(const VSet& s) {
    std::vector<std::string> v(s.begin(), s.end());
    std::vector<VSet> out;
    for (std::size_t code = 0; code < (std::size_t(1) << v.size()); ++code) {
        VSet x;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (code >> i & 1) x.insert(v[i]);
        out.push_back(x);
    }
    return out;
}

/// Calls f for every assignment of promotion sets that never shrinks along
/// the schedule's order.
template <class F>
void each_promotion(FixingSchedule s, const VSet& targets, F f) {
    std::vector<std::string> t(targets.begin(), targets.end());
    std::size_t k = s.classes.size();
    std::size_t total = std::size_t(1) << (t.size() * k);
    for (std::size_t code = 0; code < total; ++code) {
        s.promoted.assign(k, {});
        for (std::size_t x = 0; x < t.size(); ++x)
            for (std::size_t c = 0; c < k; ++c)
                if (code >> (x * k + c) & 1) s.promoted[c].insert(t[x]);
        bool mono = true;
        for (auto [a, b] : s.before)
            if (!is_subset(s.promoted[a], s.promoted[b])) mono = false;
        if (mono) f(s);
    }
}

/// Largest cell gap over the union of both tables' axes, each side
/// broadcast over the axes it lacks. NaN on one side only counts as infinite.
inline double max_gap(const Table& a, const Table& b) {
    std::vector<std::string> vars = a.vars;
    std::vector<int> card = a.card;
    for (std::size_t i = 0; i < b.vars.size(); ++i) {
        int ax = a.axis(b.vars[i]);
        if (ax < 0) {
            vars.push_back(b.vars[i]);
            card.push_back(b.card[i]);
        } else if (a.card[ax] != b.card[i]) {
            return std::numeric_limits<double>::infinity();
        }
    }
    double m = 0;
    for_each_cell(vars, card, [&](const std::vector<int>& cell, std::size_t) {
        std::map<std::string, int> at;
        for (std::size_t i = 0; i < cell.size(); ++i) at[vars[i]] = cell[i];
        double x = a.get(at), y = b.get(at);
        if (std::isnan(x) != std::isnan(y)) m = std::numeric_limits<double>::infinity();
        else if (!std::isnan(x)) m = std::max(m, std::abs(x - y));
    });
    return m;
}

}  // namespace brute
