#include "mdid/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mdid/projection.hpp"

namespace mdid {

namespace {

std::vector<std::size_t> strides(const Table& t) {
    std::vector<std::size_t> s(t.vars.size(), 1);
    for (int i = static_cast<int>(t.vars.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * t.card[i + 1];
    return s;
}

std::vector<std::string> sorted(const VSet& s) { return {s.begin(), s.end()}; }

Table table_over(const CptSpec& spec, const VSet& vars) {
    std::vector<int> card;
    for (const auto& v : vars) card.push_back(spec.card(v));
    return make_table(sorted(vars), card);
}

// Fills p(var | parents) row by row; row(parent cell) returns the distribution.
template <class F>
Table build_cpt(const CptSpec& spec, const std::string& var, const VSet& parents, F row) {
    Table t = table_over(spec, set_union(parents, {var}));
    auto st = strides(t);
    std::vector<std::string> pv = sorted(parents);
    std::vector<int> pc;
    for (const auto& p : pv) pc.push_back(spec.card(p));
    int ax = t.axis(var);
    for_each_cell(pv, pc, [&](const std::vector<int>& cell, std::size_t n) {
        std::vector<double> r = row(cell, n);
        std::size_t base = 0;
        for (std::size_t i = 0; i < pv.size(); ++i) base += cell[i] * st[t.axis(pv[i])];
        for (int x = 0; x < spec.card(var); ++x) t.data[base + x * st[ax]] = r[x];
    });
    return t;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

DiscreteLaw with_labels(Table t, const std::map<std::string, std::vector<std::string>>& labels) {
    DiscreteLaw law;
    for (const auto& v : t.vars) law.labels[v] = labels.at(v);
    law.table = std::move(t);
    return law;
}

}  // namespace

int CptSpec::card(const std::string& v) const {
    auto it = labels.find(v);
    if (it == labels.end()) throw Error("no labels for variable '" + v + "'");
    return static_cast<int>(it->second.size());
}

VSet CptSpec::variables() const {
    VSet r;
    for (const auto& [v, _] : cpts) r.insert(v);
    return r;
}

void CptSpec::set_cpt(const std::string& var, const VSet& parents, const std::vector<std::vector<double>>& rows) {
    std::size_t want = 1;
    for (const auto& p : parents) want *= card(p);
    if (rows.size() != want) throw Error("CPT for '" + var + "' needs " + std::to_string(want) + " rows");
    for (const auto& r : rows)
        if (static_cast<int>(r.size()) != card(var)) throw Error("CPT row for '" + var + "' has the wrong length");
    cpts[var] = {var, parents, build_cpt(*this, var, parents, [&](const std::vector<int>&, std::size_t n) {
                     return rows[n];
                 })};
}

std::vector<std::string> numeric_labels(int card) {
    std::vector<std::string> r;
    for (int i = 0; i < card; ++i) r.push_back(std::to_string(i));
    return r;
}

std::vector<double> random_row(int card, std::mt19937_64& rng, double floor) {
    if (floor * card >= 1.0) throw Error("positivity floor too large for cardinality");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> r(card);
    double s = 0;
    for (auto& x : r) s += (x = u(rng));
    for (auto& x : r) x = floor + (1.0 - card * floor) * x / s;
    return r;
}

CptSpec random_cpts(const Cadmg& dag, const std::map<std::string, int>& card, std::mt19937_64& rng, double floor) {
    if (!dag.bidirected_edges().empty()) throw Error("random_cpts needs a DAG");
    CptSpec spec;
    for (const auto& v : dag.vertices()) {
        auto it = card.find(v);
        spec.labels[v] = numeric_labels(it == card.end() ? 2 : it->second);
    }
    for (const auto& v : topological_order(dag)) {
        int k = spec.card(v);
        spec.cpts[v] = {v, dag.pa(v), build_cpt(spec, v, dag.pa(v), [&](const std::vector<int>&, std::size_t) {
                            return random_row(k, rng, floor);
                        })};
    }
    return spec;
}

void set_proxy_cpts(const MdDag& m, CptSpec& spec) {
    for (const auto& t : m.triples()) {
        const auto& xl = spec.labels.at(t.target);
        auto pl = xl;
        pl.push_back("?");
        spec.labels[t.proxy] = pl;
        const auto& rl = spec.labels.at(t.indicator);
        int one = static_cast<int>(std::find(rl.begin(), rl.end(), "1") - rl.begin());
        VSet parents{t.indicator, t.target};
        std::vector<std::string> pv = sorted(parents);
        int ri = pv[0] == t.indicator ? 0 : 1;
        int k = static_cast<int>(pl.size());
        spec.cpts[t.proxy] = {t.proxy, parents,
                              build_cpt(spec, t.proxy, parents, [&](const std::vector<int>& cell, std::size_t) {
                                  std::vector<double> r(k, 0.0);
                                  if (cell[ri] == one)
                                      r[cell[1 - ri]] = 1.0;
                                  else
                                      r[k - 1] = 1.0;
                                  return r;
                              })};
    }
}

CptSpec sample_full_cpts(const MdDag& m, int cardinality, std::uint64_t seed) {
    if (cardinality < 2) throw Error("cardinality must be at least 2");
    std::map<std::string, int> card;
    for (const auto& v : set_union(m.targets(), m.observed())) card[v] = cardinality;
    std::mt19937_64 rng(seed);
    Cadmg g = m.graph();
    for (const auto& p : m.proxies()) g.remove_vertex(p);
    CptSpec spec = random_cpts(g, card, rng);
    set_proxy_cpts(m, spec);
    return spec;
}

DiscreteLaw marginal_law(const CptSpec& spec, const VSet& keep) {
    for (const auto& v : keep)
        if (!spec.cpts.count(v)) throw Error("law has no variable '" + v + "'");
    std::vector<Table> factors;
    for (const auto& [_, c] : spec.cpts) factors.push_back(c.table);
    VSet elim = set_minus(spec.variables(), keep);
    while (!elim.empty()) {
        // eliminate the variable whose bucket product is smallest
        std::string best;
        double best_size = std::numeric_limits<double>::infinity();
        for (const auto& v : elim) {
            VSet scope;
            for (const auto& f : factors)
                if (f.axis(v) >= 0) scope.insert(f.vars.begin(), f.vars.end());
            double size = 1;
            for (const auto& s : scope) size *= spec.card(s);
            if (size < best_size) {
                best_size = size;
                best = v;
            }
        }
        Table bucket = scalar_table(1.0);
        std::vector<Table> rest;
        for (auto& f : factors) {
            if (f.axis(best) >= 0)
                bucket = multiply(bucket, f);
            else
                rest.push_back(std::move(f));
        }
        rest.push_back(sum_out(bucket, {best}));
        factors = std::move(rest);
        elim.erase(best);
    }
    Table joint = scalar_table(1.0);
    for (const auto& f : factors) joint = multiply(joint, f);
    return with_labels(keep_only(joint, keep), spec.labels);
}

DiscreteLaw full_law(const CptSpec& spec) { return marginal_law(spec, spec.variables()); }

DiscreteLaw sample_full_law(const MdDag& m, int cardinality, std::uint64_t seed) {
    return full_law(sample_full_cpts(m, cardinality, seed));
}

DiscreteLaw derive_observed_law(const MdDag& m, const DiscreteLaw& full) {
    return with_labels(keep_only(full.table, m.law_vars()), full.labels);
}

DiscreteLaw observed_law(const MdDag& m, const CptSpec& spec) { return marginal_law(spec, m.law_vars()); }

CptSpec intervene(const CptSpec& spec, const Assign& treat) {
    CptSpec out = spec;
    for (const auto& [v, label] : treat) {
        const auto& l = spec.labels.at(v);
        auto it = std::find(l.begin(), l.end(), label);
        if (it == l.end()) throw Error("value " + label + " outside domain of '" + v + "'");
        std::vector<double> row(l.size(), 0.0);
        row[it - l.begin()] = 1.0;
        out.set_cpt(v, {}, {row});
    }
    return out;
}

double ci_check(const DiscreteLaw& law, const VSet& a, const VSet& b, const VSet& c) {
    Table abc = keep_only(law.table, set_union(set_union(a, b), c));
    Table ac = keep_only(abc, set_union(a, c));
    Table bc = keep_only(abc, set_union(b, c));
    Table pc = keep_only(abc, c);
    double gap = 0;
    for_each_cell(abc.vars, abc.card, [&](const std::vector<int>& cell, std::size_t n) {
        std::map<std::string, int> at;
        for (std::size_t i = 0; i < cell.size(); ++i) at[abc.vars[i]] = cell[i];
        double z = pc.get(at);
        if (z <= 0) return;
        gap = std::max(gap, std::abs(abc.data[n] / z - ac.get(at) / z * (bc.get(at) / z)));
    });
    return gap;
}

double max_abs_diff(const DiscreteLaw& truth, const Table& got, const DiscreteLaw& got_law,
                    const std::map<std::string, std::string>& rename, const Assign& pinned) {
    struct Dim {
        std::vector<std::pair<int, int>> vals;  // (truth index or -1, got index or -1)
        std::size_t ts = 0, gs = 0;
    };
    auto ts = strides(truth.table);
    auto gs = strides(got);
    std::map<std::string, int> got_axis;
    for (std::size_t i = 0; i < got.vars.size(); ++i) {
        auto it = rename.find(got.vars[i]);
        got_axis[it == rename.end() ? got.vars[i] : it->second] = static_cast<int>(i);
    }
    std::vector<Dim> dims;
    VSet seen;
    for (std::size_t i = 0; i < truth.table.vars.size(); ++i) {
        const auto& v = truth.table.vars[i];
        seen.insert(v);
        Dim d;
        d.ts = ts[i];
        const auto& tl = truth.labels.at(v);
        auto ga = got_axis.find(v);
        std::vector<std::string> gl;
        if (ga != got_axis.end()) {
            d.gs = gs[ga->second];
            gl = got_law.labels.at(got.vars[ga->second]);
        }
        auto pin = pinned.find(v);
        for (int x = 0; x < static_cast<int>(tl.size()); ++x) {
            if (pin != pinned.end() && pin->second != tl[x]) continue;
            int gx = -1;
            if (ga != got_axis.end()) {
                auto it = std::find(gl.begin(), gl.end(), tl[x]);
                if (it == gl.end()) continue;
                gx = static_cast<int>(it - gl.begin());
            }
            d.vals.emplace_back(x, gx);
        }
        dims.push_back(std::move(d));
    }
    for (const auto& [v, ax] : got_axis) {
        if (seen.count(v)) continue;
        Dim d;
        d.gs = gs[ax];
        const auto& gl = got_law.labels.at(got.vars[ax]);
        for (int x = 0; x < static_cast<int>(gl.size()); ++x)
            if (gl[x] != "?") d.vals.emplace_back(-1, x);
        dims.push_back(std::move(d));
    }
    for (const auto& d : dims)
        if (d.vals.empty()) return 0.0;
    double worst = 0;
    std::vector<std::size_t> idx(dims.size(), 0);
    while (true) {
        std::size_t ti = 0, gi = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const auto& [tx, gx] = dims[k].vals[idx[k]];
            if (tx >= 0) ti += tx * dims[k].ts;
            if (gx >= 0) gi += gx * dims[k].gs;
        }
        double g = got.data[gi];
        double e = std::isnan(g) ? std::numeric_limits<double>::infinity() : std::abs(g - truth.table.data[ti]);
        worst = std::max(worst, e);
        std::size_t k = dims.size();
        while (k > 0) {
            --k;
            if (++idx[k] < dims[k].vals.size()) break;
            idx[k] = 0;
            if (k == 0) return worst;
        }
        if (dims.empty()) return worst;
    }
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t i) { return splitmix(splitmix(seed) + i); }

VerifyReport verify_functional(const MdDag& m, const Expr& f, VerifyTarget target, int trials, std::uint64_t seed,
                               const std::string& indicator, int cardinality) {
    if (target == VerifyTarget::indicator && !m.is_indicator(indicator))
        throw Error("'" + indicator + "' is not an indicator");
    VerifyReport rep;
    auto names = m.proxy_to_target();
    for (int i = 0; i < trials; ++i) {
        CptSpec spec = sample_full_cpts(m, cardinality, trial_seed(seed, static_cast<std::uint64_t>(i)));
        DiscreteLaw obs = observed_law(m, spec);
        Evaluator ev(obs);
        Table got = ev.eval(f);
        rep.undefined_cells += count_undefined(got);
        DiscreteLaw truth;
        Assign pinned;
        switch (target) {
            case VerifyTarget::target_law:
                truth = marginal_law(spec, set_union(m.targets(), m.observed()));
                break;
            case VerifyTarget::full_law:
                truth = marginal_law(spec, set_union(set_union(m.targets(), m.observed()), m.indicators()));
                break;
            case VerifyTarget::indicator: {
                truth = with_labels(spec.cpts.at(indicator).table, spec.labels);
                for (const auto& [k, v] : f->bound) {
                    auto it = names.find(k);
                    pinned[it == names.end() ? k : it->second] = v;
                }
                break;
            }
        }
        double err = max_abs_diff(truth, got, obs, names, pinned);
        rep.errors.push_back(err);
        rep.max_error = std::max(rep.max_error, err);
        ++rep.trials;
    }
    return rep;
}

std::pair<CptSpec, CptSpec> colluder_witness(const MdDag& m, const std::pair<std::string, std::string>& pair,
                                             std::uint64_t seed, int cardinality) {
    auto scan = colluder_scan(m);
    if (std::find(scan.begin(), scan.end(), pair) == scan.end())
        throw Error("(" + pair.first + ", " + pair.second + ") is not a colluder pair");
    const std::string& ri = pair.first;
    const std::string& rj = pair.second;
    const std::string xj = m.by_indicator(rj)->target;
    const std::string pj = m.by_indicator(rj)->proxy;
    const VSet iso_vars = set_union(set_union(m.targets(), m.observed()), m.indicators());

    for (int attempt = 0; attempt < 16; ++attempt) {
        CptSpec a = sample_full_cpts(m, cardinality, trial_seed(seed, static_cast<std::uint64_t>(attempt)));
        std::mt19937_64 rng(trial_seed(seed ^ 0xC011DEULL, static_cast<std::uint64_t>(attempt)));
        // X_j^(1) enters the law only through R_i and its proxy.
        a.set_cpt(xj, {}, {random_row(cardinality, rng)});
        for (const auto& c : m.graph().ch(xj)) {
            if (c == ri || c == pj) continue;
            Table t = slice(a.cpts.at(c).table, xj, 0);
            a.cpts[c].table = multiply(t, make_table({xj}, {cardinality}, 1.0));
        }
        // Move p(R_i | R_j=0, X_j^(1)) along the direction that keeps
        // sum_x p(R_i=0 | R_j=0, x, w) p(x) fixed.
        const auto& px = a.cpts.at(xj).table.data;
        CptSpec b = a;
        Table& t = b.cpts[ri].table;
        auto st = strides(t);
        int ax_i = t.axis(ri), ax_j = t.axis(rj), ax_x = t.axis(xj);
        const auto& rl = a.labels.at(rj);
        int zero_j = static_cast<int>(std::find(rl.begin(), rl.end(), "0") - rl.begin());
        const auto& il = a.labels.at(ri);
        int zero_i = static_cast<int>(std::find(il.begin(), il.end(), "0") - il.begin());
        std::vector<std::string> rest;
        std::vector<int> rest_card;
        for (const auto& v : t.vars)
            if (v != ri && v != rj && v != xj) {
                rest.push_back(v);
                rest_card.push_back(a.card(v));
            }
        const double lo = 0.01, hi = 0.99;
        for_each_cell(rest, rest_card, [&](const std::vector<int>& cell, std::size_t) {
            std::size_t base = zero_j * st[ax_j];
            for (std::size_t k = 0; k < rest.size(); ++k) base += cell[k] * st[t.axis(rest[k])];
            std::size_t c0 = base + 0 * st[ax_x], c1 = base + 1 * st[ax_x];
            double d = t.data[c0 + zero_i * st[ax_i]];
            double f = t.data[c1 + zero_i * st[ax_i]];
            // d' = d + s px[1], f' = f - s px[0]
            double up = std::min((hi - d) / px[1], (f - lo) / px[0]);
            double down = std::min((d - lo) / px[1], (hi - f) / px[0]);
            double s = up >= down ? 0.9 * up : -0.9 * down;
            double nd = d + s * px[1], nf = f - s * px[0];
            t.data[c0 + zero_i * st[ax_i]] = nd;
            t.data[c1 + zero_i * st[ax_i]] = nf;
            t.data[c0 + (1 - zero_i) * st[ax_i]] = 1.0 - nd;
            t.data[c1 + (1 - zero_i) * st[ax_i]] = 1.0 - nf;
        });
        DiscreteLaw oa = observed_law(m, a), ob = observed_law(m, b);
        double obs_gap = 0;
        for (std::size_t k = 0; k < oa.table.size(); ++k)
            obs_gap = std::max(obs_gap, std::abs(oa.table.data[k] - ob.table.data[k]));
        DiscreteLaw fa = marginal_law(a, iso_vars), fb = marginal_law(b, iso_vars);
        double full_gap = 0;
        for (std::size_t k = 0; k < fa.table.size(); ++k)
            full_gap = std::max(full_gap, std::abs(fa.table.data[k] - fb.table.data[k]));
        if (obs_gap <= 1e-12 && full_gap >= 1e-3) return {a, b};
    }
    throw Error("could not build a colluder witness for (" + ri + ", " + rj + ")");
}

// ---------------------------------------------------------------------------

Cadmg random_dag(int n, double edge_prob, std::mt19937_64& rng, const std::string& prefix) {
    std::bernoulli_distribution coin(edge_prob);
    Cadmg g;
    for (int i = 0; i < n; ++i) g.add_vertex(prefix + std::to_string(i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng)) g.add_directed(prefix + std::to_string(i), prefix + std::to_string(j));
    return g;
}

Cadmg HiddenDag::admg() const { return latent_project(dag, observed); }

HiddenDag canonical_dag(const Cadmg& admg) {
    HiddenDag h;
    for (const auto& v : admg.vertices()) {
        if (admg.status(v) != Status::random) throw Error("canonical DAG needs an ADMG, '" + v + "' is not random");
        h.dag.add_vertex(v);
        h.observed.insert(v);
    }
    for (const auto& [a, b] : admg.directed_edges()) h.dag.add_directed(a, b);
    for (const auto& [a, b] : admg.bidirected_edges()) {
        std::string u = "U_" + a + "_" + b;
        if (admg.has_vertex(u)) throw Error("hidden vertex name '" + u + "' is taken");
        h.dag.add_vertex(u);
        h.hidden.insert(u);
        h.dag.add_directed(u, a);
        h.dag.add_directed(u, b);
    }
    return h;
}

VerifyReport verify_effect(const HiddenDag& h, const InterventionQuery& q, const Expr& f, int trials,
                           std::uint64_t seed, int cardinality) {
    std::map<std::string, int> card;
    for (const auto& v : h.dag.vertices()) card[v] = cardinality;
    VerifyReport rep;
    for (int i = 0; i < trials; ++i) {
        std::mt19937_64 rng(trial_seed(seed, static_cast<std::uint64_t>(i)));
        CptSpec spec = random_cpts(h.dag, card, rng);
        DiscreteLaw obs = marginal_law(spec, h.observed);
        DiscreteLaw truth = marginal_law(intervene(spec, q.treatments), q.outcomes);
        Evaluator ev(obs);
        Table got = ev.eval(f);
        rep.undefined_cells += count_undefined(got);
        double err = max_abs_diff(truth, got, obs);
        rep.errors.push_back(err);
        rep.max_error = std::max(rep.max_error, err);
        ++rep.trials;
    }
    return rep;
}

HiddenDag random_hidden_dag(int n_obs, int n_hidden, double edge_prob, std::mt19937_64& rng) {
    if (n_obs < 2 && n_hidden > 0) throw Error("hidden variables need two observed children");
    HiddenDag h;
    h.dag = random_dag(n_obs, edge_prob, rng);
    for (const auto& v : h.dag.vertices()) h.observed.insert(v);
    std::bernoulli_distribution coin(edge_prob);
    std::uniform_int_distribution<int> pick(0, n_obs - 1);
    for (int k = 0; k < n_hidden; ++k) {
        std::string hv = "H" + std::to_string(k);
        h.dag.add_vertex(hv);
        h.hidden.insert(hv);
        int a = pick(rng), b = pick(rng);
        while (b == a) b = pick(rng);
        for (int i = 0; i < n_obs; ++i)
            if (i == a || i == b || coin(rng)) h.dag.add_directed(hv, "V" + std::to_string(i));
    }
    return h;
}

MdDag random_md_dag(int k, int n_obs, double edge_prob, std::mt19937_64& rng, bool lemma2) {
    std::bernoulli_distribution coin(edge_prob);
    MdRoles roles;
    Cadmg g;
    std::vector<std::string> base;
    for (int i = 1; i <= k; ++i) {
        roles.triples.push_back(triple_for("X" + std::to_string(i)));
        base.push_back(roles.triples.back().target);
    }
    for (int i = 1; i <= n_obs; ++i) {
        roles.observed.insert("O" + std::to_string(i));
        base.push_back("O" + std::to_string(i));
    }
    std::shuffle(base.begin(), base.end(), rng);
    for (const auto& v : base) g.add_vertex(v);
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = i + 1; j < base.size(); ++j)
            if (coin(rng)) g.add_directed(base[i], base[j]);
    std::vector<std::string> inds;
    for (const auto& t : roles.triples) {
        g.add_vertex(t.indicator);
        inds.push_back(t.indicator);
    }
    std::shuffle(inds.begin(), inds.end(), rng);
    for (std::size_t i = 0; i < inds.size(); ++i) {
        for (std::size_t j = i + 1; j < inds.size(); ++j)
            if (coin(rng)) g.add_directed(inds[i], inds[j]);
        for (const auto& v : base)
            if (coin(rng)) g.add_directed(v, inds[i]);
    }
    if (lemma2) {
        LawView view;
        for (const auto& t : roles.triples) view.indicator_of[t.target] = t.indicator;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& t : roles.triples) {
                VSet an = ancestors(g, {t.indicator});
                for (const auto& p : VSet(g.pa(t.indicator))) {
                    auto it = view.indicator_of.find(p);
                    if (it != view.indicator_of.end() && an.count(it->second)) {
                        g.remove_directed(p, t.indicator);
                        changed = true;
                    }
                }
            }
        }
    }
    for (const auto& t : roles.triples) {
        g.add_vertex(t.proxy);
        g.add_directed(t.indicator, t.proxy);
        g.add_directed(t.target, t.proxy);
    }
    return validate_md_dag(g, roles);
}

}  // namespace mdid
