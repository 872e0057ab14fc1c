#include "mdid/missing_data.hpp"

#include <algorithm>

namespace mdid {

Triple triple_for(const std::string& base) {
    std::string r = (base.size() > 1 && base[0] == 'X') ? "R" + base.substr(1) : "R_" + base;
    return {base + "^1", r, base};
}

std::optional<std::string> LawView::law_var(const std::string& v, const VSet& pinned) const {
    auto it = indicator_of.find(v);
    if (it == indicator_of.end()) return v;
    if (!pinned.count(it->second)) return std::nullopt;
    return proxy_of.at(v);
}

VSet LawView::indicators() const {
    VSet r;
    for (const auto& [_, ind] : indicator_of) r.insert(ind);
    return r;
}

VSet LawView::indicators_of(const VSet& vs) const {
    VSet r;
    for (const auto& v : vs) {
        auto it = indicator_of.find(v);
        if (it != indicator_of.end()) r.insert(it->second);
    }
    return r;
}

ValidationError::ValidationError(std::vector<std::string> v)
    : Error("invalid missing-data DAG: " + [&] {
          std::string s;
          for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
          return s;
      }()),
      violations(std::move(v)) {}

VSet MdDag::targets() const {
    VSet r;
    for (const auto& t : triples_) r.insert(t.target);
    return r;
}

VSet MdDag::indicators() const {
    VSet r;
    for (const auto& t : triples_) r.insert(t.indicator);
    return r;
}

VSet MdDag::proxies() const {
    VSet r;
    for (const auto& t : triples_) r.insert(t.proxy);
    return r;
}

VSet MdDag::law_vars() const { return set_union(set_union(indicators(), proxies()), observed_); }

const Triple* MdDag::by_target(const std::string& v) const {
    for (const auto& t : triples_)
        if (t.target == v) return &t;
    return nullptr;
}

const Triple* MdDag::by_indicator(const std::string& v) const {
    for (const auto& t : triples_)
        if (t.indicator == v) return &t;
    return nullptr;
}

const Triple* MdDag::by_proxy(const std::string& v) const {
    for (const auto& t : triples_)
        if (t.proxy == v) return &t;
    return nullptr;
}

std::map<std::string, std::string> MdDag::proxy_to_target() const {
    std::map<std::string, std::string> r;
    for (const auto& t : triples_) r[t.proxy] = t.target;
    return r;
}

std::vector<std::string> md_dag_violations(const Cadmg& g, const MdRoles& roles) {
    std::vector<std::string> out;
    std::map<std::string, std::string> role;
    auto claim = [&](const std::string& v, const std::string& what) {
        if (!g.has_vertex(v)) {
            out.push_back(what + " '" + v + "' is not a vertex");
            return;
        }
        auto [it, fresh] = role.emplace(v, what);
        if (!fresh) out.push_back("vertex '" + v + "' is both " + it->second + " and " + what);
    };
    for (const auto& t : roles.triples) {
        claim(t.target, "counterfactual");
        claim(t.indicator, "indicator");
        claim(t.proxy, "proxy");
    }
    for (const auto& o : roles.observed) claim(o, "observed");
    for (const auto& v : g.vertices()) {
        if (!role.count(v)) out.push_back("vertex '" + v + "' has no role");
        if (g.status(v) != Status::random) out.push_back("vertex '" + v + "' is not random");
        if (!g.sib(v).empty()) out.push_back("vertex '" + v + "' has a bidirected edge");
    }
    if (!out.empty()) return out;

    VSet cf_and_obs = roles.observed;
    for (const auto& t : roles.triples) cf_and_obs.insert(t.target);
    for (const auto& t : roles.triples) {
        VSet want{t.indicator, t.target};
        if (g.pa(t.proxy) != want)
            out.push_back("proxy '" + t.proxy + "' must have parents exactly {" + join(want) +
                          "}, has {" + join(g.pa(t.proxy)) + "}");
        if (!g.ch(t.proxy).empty())
            out.push_back("proxy '" + t.proxy + "' has children {" + join(g.ch(t.proxy)) + "}");
        VSet bad = set_intersect(descendants(g, {t.indicator}), cf_and_obs);
        if (!bad.empty())
            out.push_back("indicator '" + t.indicator + "' has descendants {" + join(bad) +
                          "} among counterfactual or observed variables");
    }
    return out;
}

MdDag validate_md_dag(const Cadmg& g, const MdRoles& roles) {
    auto v = md_dag_violations(g, roles);
    if (!v.empty()) throw ValidationError(std::move(v));
    MdDag m;
    m.graph_ = g;
    m.triples_ = roles.triples;
    std::sort(m.triples_.begin(), m.triples_.end(),
              [](const Triple& a, const Triple& b) { return a.indicator < b.indicator; });
    m.observed_ = roles.observed;
    for (const auto& t : m.triples_) {
        m.view_.indicator_of[t.target] = t.indicator;
        m.view_.proxy_of[t.target] = t.proxy;
    }
    return m;
}

namespace {

Assign ones(const VSet& vars) {
    Assign a;
    for (const auto& v : vars) a[v] = "1";
    return a;
}

Expr at_ones(const Expr& e, const VSet& inds) { return at(e, ones(set_intersect(inds, e->free()))); }

void require_all(const MdDag& m, const std::map<std::string, Expr>& props) {
    for (const auto& r : m.indicators())
        if (!props.count(r)) throw Error("missing propensity for '" + r + "'");
}

}  // namespace

Expr assemble_target_law(const MdDag& m, const std::map<std::string, Expr>& props) {
    require_all(m, props);
    VSet inds = m.indicators();
    Expr num = at(atom("p", m.law_vars()), ones(inds));
    std::vector<Expr> den;
    for (const auto& r : inds) den.push_back(at_ones(props.at(r), inds));
    return canonical(quot(num, prod(den)));
}

Expr assemble_full_law(const MdDag& m, const std::map<std::string, Expr>& props) {
    require_all(m, props);
    VSet inds = m.indicators();
    std::vector<Expr> num{at(atom("p", m.law_vars()), ones(inds))}, den;
    for (const auto& r : inds) {
        num.push_back(props.at(r));
        den.push_back(at_ones(props.at(r), inds));
    }
    return canonical(quot(prod(num), prod(den)));
}

std::vector<std::pair<std::string, std::string>> colluder_scan(const MdDag& m) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& ti : m.triples())
        for (const auto& tj : m.triples()) {
            const auto& pa = m.graph().pa(ti.indicator);
            if (pa.count(tj.indicator) && pa.count(tj.target)) out.emplace_back(ti.indicator, tj.indicator);
        }
    std::sort(out.begin(), out.end());
    return out;
}

VSet lemma2_blockers(const MdDag& m) {
    VSet out;
    for (const auto& t : m.triples()) {
        VSet an = ancestors(m.graph(), {t.indicator});
        VSet need = m.view().indicators_of(m.graph().pa(t.indicator));
        if (!disjoint(need, an)) out.insert(t.indicator);
    }
    return out;
}

std::optional<std::map<std::string, FixingSchedule>> lemma2_schedule(const MdDag& m) {
    if (!lemma2_blockers(m).empty()) return std::nullopt;
    std::map<std::string, FixingSchedule> out;
    VSet all_x = m.targets();
    for (const auto& r : m.indicators()) {
        FixingSchedule s;
        VSet below = set_intersect(descendants(m.graph(), {r}), m.indicators());
        for (const auto& v : below) s.add_class({v}, all_x);
        for (const auto& a : below)
            for (const auto& b : below)
                if (a != b && descendants(m.graph(), {b}).count(a))
                    s.add_order(s.class_of(a), s.class_of(b));
        out[r] = std::move(s);
    }
    return out;
}

}  // namespace mdid
