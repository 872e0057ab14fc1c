#include "mdid/fixing.hpp"

#include <algorithm>

#include "mdid/projection.hpp"
#include "mdid/separation.hpp"

namespace mdid {

namespace {

Assign ones(const VSet& vars) {
    Assign a;
    for (const auto& v : vars) a[v] = "1";
    return a;
}

VSet interior(const std::vector<std::string>& walk) {
    if (walk.size() < 3) return {};
    return VSet(walk.begin() + 1, walk.end() - 1);
}

}  // namespace

bool is_fixable_vertex(const Cadmg& g, const std::string& v) {
    if (g.status(v) != Status::random) return false;
    return set_intersect(descendants(g, {v}), district_of(g, v)) == VSet{v};
}

FixStepResult fix_vertex(const Cadmg& g, const Expr& q, const std::string& v) {
    if (!is_fixable_vertex(g, v)) throw Error("vertex '" + v + "' is not fixable");
    if (!q->rand.count(v)) throw Error("vertex '" + v + "' is not random in the kernel");
    VSet c = set_intersect(nondescendants(g, {v}), q->rand);
    VSet rest = set_minus(q->rand, set_union(c, {v}));
    // q / q(v | C) = q(rest | v, C) q(C)
    Expr kernel = rest.empty() ? marginalize(q, {v})
                               : canonical(prod({condition(q, set_union(c, {v})),
                                                 marginalize(q, set_union(rest, {v}))}));
    Expr den = condition(marginalize(q, rest), c);
    Cadmg h = g;
    h.fix(v);
    return {std::move(h), kernel, den};
}

FixStepResult fix_sequence(const Cadmg& g, const Expr& q, const std::vector<std::string>& order) {
    FixStepResult r{g, canonical(q), unit()};
    std::vector<Expr> dens;
    for (const auto& v : order) {
        r = fix_vertex(r.graph, r.kernel, v);
        dens.push_back(r.denominator);
    }
    r.denominator = canonical(prod(dens));
    return r;
}

std::vector<VSet> split_by_district(const Cadmg& g, const VSet& z) {
    std::vector<VSet> out;
    for (const auto& v : z)
        if (!g.has_vertex(v)) throw Error("vertex '" + v + "' is not in the graph");
    for (const auto& d : districts(g)) {
        VSet part = set_intersect(d, z);
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

SetFixCheck check_fixable_part(const Cadmg& g, const VSet& z, const VSet& whole, const LawView& view,
                               const VSet& pins, const VSet& unpinned) {
    SetFixCheck r;
    r.part = z;
    auto fail = [&](std::string cond, std::string detail, VSet culprits = {}) {
        r.ok = false;
        r.condition = std::move(cond);
        r.detail = std::move(detail);
        r.culprits = std::move(culprits);
        return r;
    };
    for (const auto& v : z) {
        if (!g.has_vertex(v)) return fail("hidden", "'" + v + "' is projected out");
        if (g.is_fixed(v)) return fail("not-random", "'" + v + "' is already fixed");
    }
    VSet sel = set_intersect(z, g.selected_vertices());
    if (!sel.empty()) return fail("ii", "selected {" + join(sel) + "}", sel);

    r.district = district_of(g, *z.begin());
    if (!is_subset(z, r.district)) throw Error("vertex set {" + join(z) + "} spans more than one district");

    VSet de = descendants(g, z);
    VSet bad = set_minus(set_intersect(de, r.district), z);
    if (!bad.empty()) {
        VSet cul = set_union(bad, set_intersect(de, ancestors(g, bad)));
        cul = set_minus(set_union(cul, r.district), z);
        return fail("i", "descendants {" + join(bad) + "} in the district", cul);
    }

    r.mb = markov_blanket(g, z);
    r.r_z = set_minus(view.indicators_of(set_union(z, r.mb)), z);

    VSet b = set_minus(set_minus(set_union(g.selected_vertices(), r.r_z), r.mb), z);
    if (!m_separated(g, z, b, r.mb)) {
        VSet cul;
        std::string which;
        for (const auto& u : b) {
            auto walk = m_connecting_path(g, z, {u}, r.mb);
            if (walk.empty()) continue;
            which += (which.empty() ? "" : ",") + u;
            cul.insert(u);
            auto in = interior(walk);
            cul.insert(in.begin(), in.end());
        }
        return fail("iii", "not separated from {" + which + "} given mb {" + join(r.mb) + "}",
                    set_minus(cul, z));
    }

    for (const auto& v : topological_order(g))
        if (z.count(v)) r.order.push_back(v);
    VSet pins_f = set_minus(set_union(set_union(pins, r.r_z), set_intersect(z, view.indicators())), unpinned);
    std::map<std::string, std::size_t> pos;
    for (std::size_t k = 0; k < r.order.size(); ++k) pos[r.order[k]] = k;

    VSet earlier;
    for (std::size_t k = 0; k < r.order.size(); ++k) {
        const auto& zk = r.order[k];
        VSet c = set_union(r.mb, earlier);
        VSet dropped;
        for (const auto& x : c) {
            auto it = view.indicator_of.find(x);
            if (it == view.indicator_of.end()) continue;
            auto p = pos.find(it->second);
            if (p != pos.end() && p->second >= k) dropped.insert(x);
        }
        c = set_minus(c, dropped);
        if (!dropped.empty()) {
            auto walk = m_connecting_path(g, {zk}, dropped, c);
            if (!walk.empty())
                return fail("self-counterfactual",
                            "'" + zk + "' depends on {" + join(dropped) + "} given {" + join(c) + "}",
                            set_minus(set_union(interior(walk), r.district), z));
        }
        for (const auto& v : set_union(c, {zk}))
            if (!view.law_var(v, pins_f))
                return fail("unobserved", "'" + v + "' is not observed in the factor for '" + zk + "'",
                            view.indicators_of({v}));
        r.conditioning[zk] = c;
        earlier.insert(zk);
    }
    (void)whole;
    return r;
}

SetFixCheck is_fixable_set(const Cadmg& g, const VSet& z, const LawView& view) {
    if (z.empty()) throw Error("empty set");
    return check_fixable_part(g, z, z, view, {});
}

Expr part_denominator(const Cadmg& g, const Expr& kernel, const SetFixCheck& chk, const LawView& view,
                      const VSet& pins, const VSet& unpinned, const std::string& free_member) {
    (void)g;
    if (!chk.ok) throw Error("part {" + join(chk.part) + "} is not fixable");
    VSet pins_f =
        set_minus(set_union(set_union(pins, chk.r_z), set_intersect(chk.part, view.indicators())), unpinned);
    VSet to_restrict = set_minus(set_minus(pins_f, pins), {free_member});
    auto law = [&](const VSet& vs) {
        VSet r;
        for (const auto& v : vs) {
            auto l = view.law_var(v, pins_f);
            if (!l) throw Error("'" + v + "' is not observed under the factor pins");
            r.insert(*l);
        }
        return r;
    };
    std::vector<Expr> factors;
    for (const auto& zk : chk.order) {
        VSet lz = law({zk});
        if (!is_subset(lz, kernel->rand))
            throw Error("'" + zk + "' is not random in the stage kernel");
        VSet keep = set_intersect(law(set_union(set_union(chk.conditioning.at(zk), chk.r_z), {zk})),
                                  kernel->rand);
        Expr f = cond(marg(kernel, set_minus(kernel->rand, keep)), set_minus(keep, lz));
        factors.push_back(at(f, ones(set_intersect(to_restrict, f->free()))));
    }
    return canonical(prod(factors));
}

FixStepResult fix_set(const Cadmg& g, const Expr& q, const std::vector<VSet>& classes, const LawView& view,
                      const VSet& pins) {
    VSet whole;
    for (const auto& c : classes) {
        if (!disjoint(whole, c)) throw Error("classes overlap");
        whole.insert(c.begin(), c.end());
    }
    Expr k = canonical(q);
    std::vector<Expr> dens;
    VSet new_pins, leftover;
    for (const auto& c : classes) {
        auto chk = check_fixable_part(g, c, whole, view, pins);
        if (!chk.ok)
            throw Error("class {" + join(c) + "} is not fixable: condition " + chk.condition + " (" +
                        chk.detail + ")");
        dens.push_back(part_denominator(g, k, chk, view, pins));
        new_pins = set_union(new_pins, set_union(chk.r_z, set_intersect(c, view.indicators())));
        leftover = set_union(leftover, set_minus(chk.r_z, whole));
    }
    Expr den = canonical(prod(dens));
    Expr ratio = canonical(quot(k, den));
    Expr kernel = at(ratio, ones(set_intersect(set_minus(new_pins, pins), ratio->free())));
    Cadmg h = g;
    for (const auto& v : whole) h.fix(v);
    for (const auto& v : leftover)
        if (h.status(v) == Status::random) h.select(v, "1");
    return {std::move(h), canonical(kernel), den};
}

Stage build_stage(const MdDag& m, const StageSpec& spec) {
    if (!disjoint(spec.fixed, spec.hidden)) throw Error("a fixed counterfactual cannot be hidden");
    if (!is_subset(spec.hidden, m.targets())) throw Error("only counterfactuals can be hidden");
    Stage st{m.graph(), {}};
    for (const auto& f : spec.fixed) st.graph.fix(f);
    for (const auto& s : spec.selected) {
        if (!m.is_indicator(s)) throw Error("only indicators can be selected");
        st.graph.select(s, "1");
    }
    st.pins = set_union(set_minus(set_intersect(spec.fixed, m.indicators()), spec.unpinned), spec.selected);
    for (const auto& t : m.triples())
        if (st.pins.count(t.indicator) && !spec.hidden.count(t.target)) st.graph.remove_vertex(t.proxy);
    for (const auto& h : spec.hidden) eliminate_vertex(st.graph, h);
    return st;
}

ScheduleRun apply_schedule(const MdDag& m, const FixingSchedule& s, const ApplyOptions& opt) {
    ScheduleRun run;
    auto fail = [&](std::size_t k, std::string cond, std::string detail, VSet culprits = {}) {
        run.valid = false;
        run.failed_class = k;
        run.condition = std::move(cond);
        run.detail = std::move(detail);
        run.culprits = std::move(culprits);
        return run;
    };
    if (s.promoted.size() != s.classes.size()) throw Error("schedule has no promotion set for some class");
    VSet seen;
    VSet allowed = set_union(set_union(m.indicators(), m.targets()), m.observed());
    for (std::size_t k = 0; k < s.classes.size(); ++k) {
        if (s.classes[k].empty()) return fail(k, "structure", "empty class");
        if (!disjoint(seen, s.classes[k])) return fail(k, "structure", "classes overlap");
        seen = set_union(seen, s.classes[k]);
        if (!is_subset(s.classes[k], allowed))
            return fail(k, "structure", "only indicators, observed and counterfactual variables can be fixed");
        if (!is_subset(s.promoted[k], m.targets()))
            return fail(k, "structure", "promotion set must hold counterfactuals only");
        for (auto p : s.predecessors(k))
            if (!is_subset(s.promoted[p], s.promoted[k]))
                return fail(k, "structure", "promotion set shrinks after " + s.class_label(p));
    }

    const VSet inds = m.indicators();
    std::map<std::size_t, VSet> rz;
    std::map<std::size_t, Expr> den;
    Expr p = atom("p", m.law_vars());
    for (auto k : s.linear_order()) {
        ClassRun cr;
        cr.index = k;
        for (auto q : s.predecessors(k)) {
            cr.spec.fixed = set_union(cr.spec.fixed, s.classes[q]);
            cr.spec.selected = set_union(cr.spec.selected, rz[q]);
        }
        cr.spec.selected = set_minus(cr.spec.selected, cr.spec.fixed);
        cr.spec.hidden = set_minus(m.targets(), s.promoted[k]);
        cr.spec.unpinned = opt.unpinned;
        VSet hid_fixed = set_intersect(cr.spec.hidden, cr.spec.fixed);
        if (!hid_fixed.empty()) return fail(k, "structure", "fixed {" + join(hid_fixed) + "} hidden");
        VSet hid_members = set_intersect(cr.spec.hidden, s.classes[k]);
        if (!hid_members.empty())
            return fail(k, "hidden", "members {" + join(hid_members) + "} are not promoted");
        VSet sel = set_intersect(cr.spec.selected, s.classes[k]);
        if (!sel.empty()) return fail(k, "ii", "selected {" + join(sel) + "}", sel);

        cr.stage = build_stage(m, cr.spec);
        for (const auto& part : split_by_district(cr.stage.graph, s.classes[k])) {
            auto chk = check_fixable_part(cr.stage.graph, part, s.classes[k], m.view(), cr.stage.pins,
                                          opt.unpinned);
            if (!chk.ok) {
                run.classes.push_back(cr);
                return fail(k, chk.condition, s.class_label(k) + ": " + chk.detail, chk.culprits);
            }
            cr.r_z = set_union(cr.r_z, chk.r_z);
            cr.parts.push_back(std::move(chk));
        }
        cr.r_z = set_minus(cr.r_z, s.classes[k]);
        rz[k] = cr.r_z;

        if (opt.build_kernels) {
            std::vector<Expr> dq;
            for (auto q : s.predecessors(k)) dq.push_back(den.at(q));
            // every factor is read at the stage's pins, earlier denominators included
            Expr ratio = canonical(quot(p, prod(dq)));
            cr.kernel = canonical(at(ratio, ones(set_intersect(cr.stage.pins, ratio->free()))));
            std::vector<Expr> fs;
            for (const auto& chk : cr.parts)
                fs.push_back(part_denominator(cr.stage.graph, cr.kernel, chk, m.view(), cr.stage.pins,
                                              opt.unpinned,
                                              chk.part.count(opt.free_member) ? opt.free_member : ""));
            cr.denominator = canonical(prod(fs));
            den[k] = cr.denominator;
        }
        run.classes.push_back(std::move(cr));
    }
    if (opt.build_kernels) {
        VSet all = s.members(), pins;
        for (const auto& [k, r] : rz) pins = set_union(pins, r);
        pins = set_union(set_minus(pins, all), set_minus(set_intersect(all, inds), opt.unpinned));
        std::vector<Expr> dq;
        for (const auto& [k, d] : den) dq.push_back(d);
        Expr ratio = canonical(quot(p, prod(dq)));
        run.final_kernel = canonical(at(ratio, ones(set_intersect(pins, ratio->free()))));
    }
    return run;
}

}  // namespace mdid
