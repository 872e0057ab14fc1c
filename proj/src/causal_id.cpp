#include "mdid/causal_id.hpp"

#include <algorithm>

#include "mdid/fixing.hpp"

namespace mdid {

VSet InterventionQuery::treated() const {
    VSet s;
    for (const auto& [v, _] : treatments) s.insert(v);
    return s;
}

namespace {

void check_query(const Cadmg& g, const InterventionQuery& q) {
    VSet a = q.treated();
    if (!disjoint(q.outcomes, a))
        throw Error("outcomes and treatments overlap on {" + join(set_intersect(q.outcomes, a)) + "}");
    for (const auto& v : set_union(q.outcomes, a)) {
        if (!g.has_vertex(v)) throw Error("query vertex '" + v + "' is not in the graph");
        if (g.status(v) != Status::random) throw Error("query vertex '" + v + "' is not random");
    }
}

std::vector<std::string> random_order(const Cadmg& g, const VSet& within) {
    std::vector<std::string> out;
    for (const auto& v : topological_order(g))
        if (within.count(v)) out.push_back(v);
    return out;
}

/// Holds the treatments that appear in e.
Expr hold(const Expr& e, const Assign& a) {
    Assign keep;
    for (const auto& [v, x] : a)
        if (e->free().count(v) || e->bound.count(v)) keep[v] = x;
    return keep.empty() ? e : at(e, keep);
}

// Kernel q over the random set `over` (topologically ordered by `order`)
// factorized along the order; each factor conditions only on the Markov
// blanket of its vertex among its predecessors.
Expr district_factor(const Cadmg& g, const Expr& q, const std::vector<std::string>& order,
                     const VSet& district) {
    VSet over(order.begin(), order.end());
    std::vector<Expr> factors;
    VSet pre;
    for (const auto& v : order) {
        if (district.count(v)) {
            VSet upto = set_union(pre, {v});
            VSet mb = set_intersect(markov_blanket(induced_subgraph(g, upto), {v}), pre);
            VSet drop = set_union(set_minus(over, upto), set_minus(pre, mb));
            Expr f = drop.empty() ? q : marginalize(q, drop);
            factors.push_back(condition(f, mb));
        }
        pre.insert(v);
    }
    return canonical(prod(std::move(factors)));
}

// Kernel of the intrinsic set d from the kernel qt of t ⊇ d (t a district of
// g restricted to t). Empty when d is not reachable.
Expr kernel_of(const Cadmg& g, const VSet& d, const VSet& t, const Expr& qt) {
    Cadmg gt = induced_subgraph(g, t);
    VSet a = set_intersect(ancestors(gt, d), t);
    if (a == d) return t == d ? qt : marginalize(qt, set_minus(t, d));
    if (a == t) return nullptr;
    Expr qa = marginalize(qt, set_minus(t, a));
    Cadmg ga = induced_subgraph(g, a);
    VSet next = district_of(ga, *d.begin());
    if (!is_subset(d, next)) return nullptr;
    return kernel_of(g, d, next, district_factor(ga, qa, random_order(ga, a), next));
}

}  // namespace

std::vector<std::string> greedy_fixing_order(const Cadmg& g, const VSet& keep) {
    Cadmg h = g;
    std::vector<std::string> order;
    for (;;) {
        VSet todo = set_minus(h.random_vertices(), keep);
        auto it = std::find_if(todo.begin(), todo.end(),
                               [&](const std::string& v) { return is_fixable_vertex(h, v); });
        if (it == todo.end()) return order;
        order.push_back(*it);
        h.fix(*it);
    }
}

Expr g_formula(const Cadmg& dag, const InterventionQuery& query) {
    if (!dag.bidirected_edges().empty()) throw Error("g-formula needs a graph without bidirected edges");
    check_query(dag, query);
    VSet v = dag.random_vertices();
    Expr p = atom("p", v, dag.fixed_vertices());
    VSet a = query.treated();
    std::vector<Expr> factors;
    for (const auto& x : set_minus(v, a)) {
        VSet pa = set_intersect(dag.pa(x), v);
        VSet out = set_minus(v, set_union(pa, {x}));
        Expr m = out.empty() ? p : marginalize(p, out);
        factors.push_back(condition(m, pa));
    }
    Expr e = hold(canonical(prod(std::move(factors))), query.treatments);
    VSet sum = set_minus(e->rand, query.outcomes);
    return canonical(sum.empty() ? e : marginalize(e, sum));
}

InterventionalResult identify_interventional(const Cadmg& g, const InterventionQuery& query) {
    check_query(g, query);
    InterventionalResult r;
    VSet v = g.random_vertices();
    VSet a = query.treated();
    Cadmg without_a = induced_subgraph(g, set_minus(g.vertices(), a));
    r.y_star = set_intersect(ancestors(without_a, query.outcomes), v);
    Cadmg gy = induced_subgraph(g, r.y_star);

    Expr p = atom("p", v, g.fixed_vertices());
    std::vector<Expr> kernels;
    for (const auto& d : districts(gy)) {
        DistrictRun run;
        run.district = d;
        run.fixing_order = greedy_fixing_order(g, d);
        run.intrinsic = run.fixing_order.size() == set_minus(v, d).size();
        if (!run.intrinsic) {
            std::string seq;
            for (const auto& x : run.fixing_order) seq += (seq.empty() ? "" : ",") + x;
            r.failure = "district {" + join(d) + "} is not intrinsic: fixing stops after <" + seq + ">";
            r.districts.push_back(std::move(run));
            return r;
        }
        VSet t = district_of(g, *d.begin());
        Expr qt = district_factor(g, p, random_order(g, v), t);
        run.kernel = kernel_of(g, d, t, qt);
        if (!run.kernel) throw Error("district {" + join(d) + "} is fixable but its kernel could not be built");
        kernels.push_back(run.kernel);
        r.districts.push_back(std::move(run));
    }
    Expr e = kernels.empty() ? unit() : hold(canonical(prod(std::move(kernels))), query.treatments);
    VSet sum = set_minus(r.y_star, query.outcomes);
    r.functional = canonical(sum.empty() ? e : marginalize(e, sum));
    r.identified = true;
    return r;
}

}  // namespace mdid
