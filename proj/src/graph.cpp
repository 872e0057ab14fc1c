#include "mdid/graph.hpp"

#include <algorithm>
#include <iterator>
#include <queue>

namespace mdid {

VSet set_union(const VSet& a, const VSet& b) {
    VSet r = a;
    r.insert(b.begin(), b.end());
    return r;
}

VSet set_minus(const VSet& a, const VSet& b) {
    VSet r;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(r, r.end()));
    return r;
}

VSet set_intersect(const VSet& a, const VSet& b) {
    VSet r;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(r, r.end()));
    return r;
}

bool is_subset(const VSet& a, const VSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool disjoint(const VSet& a, const VSet& b) { return set_intersect(a, b).empty(); }

std::string join(const VSet& s, const std::string& sep) {
    std::string out;
    for (const auto& v : s) {
        if (!out.empty()) out += sep;
        out += v;
    }
    return out;
}

void Cadmg::require(const std::string& v) const {
    if (!has_vertex(v)) throw Error("unknown vertex '" + v + "'");
}

void Cadmg::add_vertex(const std::string& name, Status s, std::optional<std::string> value) {
    if (name.empty()) throw Error("empty vertex name");
    if (has_vertex(name)) throw Error("duplicate vertex '" + name + "'");
    if ((s == Status::selected) != value.has_value())
        throw Error("selected value must be given exactly for selected vertices");
    verts_[name] = Vertex{name, s, std::move(value)};
    pa_[name];
    ch_[name];
    sib_[name];
}

const Vertex& Cadmg::vertex(const std::string& v) const {
    auto it = verts_.find(v);
    if (it == verts_.end()) throw Error("unknown vertex '" + v + "'");
    return it->second;
}

bool Cadmg::reaches(const std::string& from, const std::string& to) const {
    std::vector<std::string> stack{from};
    VSet seen{from};
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        if (v == to) return true;
        for (const auto& c : ch_.at(v))
            if (seen.insert(c).second) stack.push_back(c);
    }
    return false;
}

void Cadmg::add_directed(const std::string& from, const std::string& to) {
    require(from);
    require(to);
    if (from == to) throw Error("self-loop at '" + from + "'");
    if (is_fixed(to)) throw Error("arrowhead into fixed vertex '" + to + "'");
    if (ch_[from].count(to)) return;
    if (reaches(to, from)) throw Error("edge " + from + " -> " + to + " creates a directed cycle");
    ch_[from].insert(to);
    pa_[to].insert(from);
}

void Cadmg::add_bidirected(const std::string& a, const std::string& b) {
    require(a);
    require(b);
    if (a == b) throw Error("self-loop at '" + a + "'");
    if (is_fixed(a) || is_fixed(b)) throw Error("bidirected edge at fixed vertex");
    sib_[a].insert(b);
    sib_[b].insert(a);
}

void Cadmg::remove_directed(const std::string& from, const std::string& to) {
    require(from);
    require(to);
    ch_[from].erase(to);
    pa_[to].erase(from);
}

void Cadmg::remove_bidirected(const std::string& a, const std::string& b) {
    require(a);
    require(b);
    sib_[a].erase(b);
    sib_[b].erase(a);
}

void Cadmg::remove_vertex(const std::string& name) {
    require(name);
    for (const auto& p : pa_[name]) ch_[p].erase(name);
    for (const auto& c : ch_[name]) pa_[c].erase(name);
    for (const auto& s : sib_[name]) sib_[s].erase(name);
    pa_.erase(name);
    ch_.erase(name);
    sib_.erase(name);
    verts_.erase(name);
}

void Cadmg::fix(const std::string& v) {
    require(v);
    for (const auto& p : VSet(pa_[v])) remove_directed(p, v);
    for (const auto& s : VSet(sib_[v])) remove_bidirected(v, s);
    verts_[v].status = Status::fixed;
    verts_[v].value.reset();
}

void Cadmg::select(const std::string& v, const std::string& value) {
    set_status(v, Status::selected, value);
}

void Cadmg::set_status(const std::string& v, Status s, std::optional<std::string> value) {
    require(v);
    if ((s == Status::selected) != value.has_value())
        throw Error("selected value must be given exactly for selected vertices");
    if (s == Status::fixed && (!pa_[v].empty() || !sib_[v].empty()))
        throw Error("vertex '" + v + "' has incoming arrowheads and cannot be marked fixed");
    verts_[v].status = s;
    verts_[v].value = std::move(value);
}

VSet Cadmg::vertices() const {
    VSet r;
    for (const auto& [n, _] : verts_) r.insert(n);
    return r;
}

VSet Cadmg::with_status(Status s) const {
    VSet r;
    for (const auto& [n, v] : verts_)
        if (v.status == s) r.insert(n);
    return r;
}

const VSet& Cadmg::pa(const std::string& v) const {
    require(v);
    return pa_.at(v);
}

const VSet& Cadmg::ch(const std::string& v) const {
    require(v);
    return ch_.at(v);
}

const VSet& Cadmg::sib(const std::string& v) const {
    require(v);
    return sib_.at(v);
}

bool Cadmg::has_directed(const std::string& a, const std::string& b) const {
    return has_vertex(a) && ch_.at(a).count(b) > 0;
}

bool Cadmg::has_bidirected(const std::string& a, const std::string& b) const {
    return has_vertex(a) && sib_.at(a).count(b) > 0;
}

std::vector<std::pair<std::string, std::string>> Cadmg::directed_edges() const {
    std::vector<std::pair<std::string, std::string>> r;
    for (const auto& [a, cs] : ch_)
        for (const auto& b : cs) r.emplace_back(a, b);
    return r;
}

std::vector<std::pair<std::string, std::string>> Cadmg::bidirected_edges() const {
    std::vector<std::pair<std::string, std::string>> r;
    for (const auto& [a, ss] : sib_)
        for (const auto& b : ss)
            if (a < b) r.emplace_back(a, b);
    return r;
}

bool Cadmg::operator==(const Cadmg& o) const {
    return verts_ == o.verts_ && ch_ == o.ch_ && sib_ == o.sib_;
}

namespace {

void require_all(const Cadmg& g, const VSet& s) {
    for (const auto& v : s)
        if (!g.has_vertex(v)) throw Error("unknown vertex '" + v + "'");
}

VSet closure(const Cadmg& g, const VSet& s, bool down) {
    require_all(g, s);
    VSet seen = s;
    std::vector<std::string> stack(s.begin(), s.end());
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (const auto& w : down ? g.ch(v) : g.pa(v))
            if (seen.insert(w).second) stack.push_back(w);
    }
    return seen;
}

}  // namespace

VSet parents(const Cadmg& g, const VSet& s) {
    require_all(g, s);
    VSet r;
    for (const auto& v : s) r.insert(g.pa(v).begin(), g.pa(v).end());
    return r;
}

VSet children(const Cadmg& g, const VSet& s) {
    require_all(g, s);
    VSet r;
    for (const auto& v : s) r.insert(g.ch(v).begin(), g.ch(v).end());
    return r;
}

VSet descendants(const Cadmg& g, const VSet& s) { return closure(g, s, true); }
VSet ancestors(const Cadmg& g, const VSet& s) { return closure(g, s, false); }
VSet nondescendants(const Cadmg& g, const VSet& s) {
    return set_minus(g.vertices(), descendants(g, s));
}

VSet genealogy(const Cadmg& g, const VertexSetQuery& q) {
    switch (q.kind) {
        case Relation::parents: return parents(g, q.targets);
        case Relation::children: return children(g, q.targets);
        case Relation::descendants: return descendants(g, q.targets);
        case Relation::ancestors: return ancestors(g, q.targets);
        case Relation::nondescendants: return nondescendants(g, q.targets);
    }
    return {};
}

std::vector<VSet> districts(const Cadmg& g) {
    std::vector<VSet> out;
    VSet seen;
    for (const auto& v : g.vertices()) {
        if (g.is_fixed(v) || seen.count(v)) continue;
        VSet d{v};
        std::vector<std::string> stack{v};
        seen.insert(v);
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            for (const auto& w : g.sib(u))
                if (seen.insert(w).second) {
                    d.insert(w);
                    stack.push_back(w);
                }
        }
        out.push_back(std::move(d));
    }
    return out;
}

VSet district_of(const Cadmg& g, const std::string& v) {
    if (g.is_fixed(v)) throw Error("fixed vertex '" + v + "' has no district");
    for (auto& d : districts(g))
        if (d.count(v)) return d;
    return {};
}

VSet markov_blanket(const Cadmg& g, const VSet& s) {
    if (s.empty()) return {};
    VSet d = district_of(g, *s.begin());
    if (!is_subset(s, d)) throw Error("vertex set {" + join(s) + "} spans more than one district");
    return set_minus(set_union(d, parents(g, d)), s);
}

Cadmg induced_subgraph(const Cadmg& g, const VSet& keep) {
    require_all(g, keep);
    Cadmg r;
    for (const auto& v : keep) {
        const auto& x = g.vertex(v);
        r.add_vertex(v, x.status, x.value);
    }
    for (const auto& [a, b] : g.directed_edges())
        if (keep.count(a) && keep.count(b)) r.add_directed(a, b);
    for (const auto& [a, b] : g.bidirected_edges())
        if (keep.count(a) && keep.count(b)) r.add_bidirected(a, b);
    return r;
}

std::vector<std::string> topological_order(const Cadmg& g) {
    std::map<std::string, std::size_t> indeg;
    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& v : g.vertices()) {
        indeg[v] = g.pa(v).size();
        if (indeg[v] == 0) ready.push(v);
    }
    std::vector<std::string> out;
    while (!ready.empty()) {
        auto v = ready.top();
        ready.pop();
        out.push_back(v);
        for (const auto& c : g.ch(v))
            if (--indeg[c] == 0) ready.push(c);
    }
    return out;
}

}  // namespace mdid
