#include "mdid/separation.hpp"

#include <deque>
#include <map>

namespace mdid {

namespace {

using State = std::pair<std::string, bool>;

// Returns an m-connecting walk from a to b (empty when separated).
std::vector<std::string> connecting_walk(const Cadmg& g, const VSet& a, const VSet& b,
                                         const VSet& c_in) {
    if (!disjoint(a, b) || !disjoint(a, c_in) || !disjoint(b, c_in))
        throw Error("m-separation query with overlapping sets");
    for (const auto* s : {&a, &b, &c_in})
        for (const auto& v : *s)
            if (!g.has_vertex(v)) throw Error("unknown vertex '" + v + "'");
    if (a.empty() || b.empty()) return {};

    VSet ab = set_union(a, b);
    VSet c = set_union(c_in, set_minus(g.selected_vertices(), ab));
    c = set_union(c, set_minus(g.fixed_vertices(), ab));
    VSet anc_c = ancestors(g, c);

    // Bayes-ball over (vertex, arrived-with-arrowhead) states.
    std::map<State, State> from;
    std::deque<State> todo;
    for (const auto& x : a) {
        from[{x, false}] = {x, false};
        todo.emplace_back(x, false);
    }
    auto walk_back = [&](State s, const std::string& end) {
        std::vector<std::string> out{end};
        while (true) {
            out.push_back(s.first);
            auto prev = from.at(s);
            if (prev == s) break;
            s = prev;
        }
        return std::vector<std::string>(out.rbegin(), out.rend());
    };
    std::vector<std::string> found;
    auto visit = [&](const State& at, bool head_at_v, const std::string& w, bool head_at_w) -> bool {
        const auto& [v, head_in] = at;
        if (!a.count(v)) {
            bool collider = head_in && head_at_v;
            bool pass = collider ? anc_c.count(v) > 0 : c.count(v) == 0;
            if (!pass) return true;
        }
        if (b.count(w)) {
            found = walk_back(at, w);
            return false;
        }
        if (from.emplace(State{w, head_at_w}, at).second) todo.emplace_back(w, head_at_w);
        return true;
    };
    while (!todo.empty()) {
        State s = todo.front();
        todo.pop_front();
        for (const auto& w : g.ch(s.first))
            if (!visit(s, false, w, true)) return found;
        for (const auto& w : g.pa(s.first))
            if (!visit(s, true, w, false)) return found;
        for (const auto& w : g.sib(s.first))
            if (!visit(s, true, w, true)) return found;
    }
    return {};
}

}  // namespace

bool m_separated(const Cadmg& g, const VSet& a, const VSet& b, const VSet& c) {
    return connecting_walk(g, a, b, c).empty();
}

std::vector<std::string> m_connecting_path(const Cadmg& g, const VSet& a, const VSet& b,
                                           const VSet& c) {
    return connecting_walk(g, a, b, c);
}

}  // namespace mdid
