#include "mdid/kernel_expr.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>
#include <unordered_set>

namespace mdid {

namespace {

std::string list_key(const VSet& s) {
    std::string out = "(";
    bool first = true;
    for (const auto& v : s) {
        if (!first) out += ' ';
        out += v;
        first = false;
    }
    return out + ")";
}

void check_label(const std::string& s) {
    if (s.empty()) throw Error("empty identifier in expression");
    for (char c : s)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')')
            throw Error("invalid identifier '" + s + "'");
}

Assign merge_bound(const Assign& a, const Assign& b) {
    Assign r = a;
    r.insert(b.begin(), b.end());
    return r;
}

Expr finish(Node n) {
    n.freev = set_union(n.rand, n.context);
    return std::make_shared<const Node>(std::move(n));
}

Expr mark(Expr e) {
    e->is_canonical = true;
    return e;
}

}  // namespace

Expr atom(std::string law, VSet vars, VSet ctx) {
    check_label(law);
    for (const auto& v : vars) check_label(v);
    for (const auto& v : ctx) check_label(v);
    if (!disjoint(vars, ctx)) throw Error("atom " + law + " has overlapping random and context variables");
    Node n;
    n.kind = Kind::atom;
    n.law = std::move(law);
    n.vars = std::move(vars);
    n.ctx = std::move(ctx);
    n.rand = n.vars;
    n.context = n.ctx;
    n.normalized = true;
    n.key = "(atom " + n.law + " " + list_key(n.vars) + " " + list_key(n.ctx) + ")";
    return finish(std::move(n));
}

Expr marg(Expr e, VSet out) {
    if (out.empty()) return e;
    if (!is_subset(out, e->rand))
        throw Error("cannot marginalize {" + join(set_minus(out, e->rand)) +
                    "}: not random in the kernel");
    Node n;
    n.kind = Kind::marginal;
    n.vars = std::move(out);
    n.rand = set_minus(e->rand, n.vars);
    n.context = e->context;
    n.bound = e->bound;
    n.normalized = e->normalized;
    n.key = "(marg " + e->key + " " + list_key(n.vars) + ")";
    n.kids = {std::move(e)};
    return finish(std::move(n));
}

Expr cond(Expr e, VSet on) {
    if (!is_subset(on, e->rand))
        throw Error("cannot condition on {" + join(set_minus(on, e->rand)) +
                    "}: not random in the kernel");
    Node n;
    n.kind = Kind::conditional;
    n.vars = std::move(on);
    n.rand = set_minus(e->rand, n.vars);
    n.context = set_union(e->context, n.vars);
    n.bound = e->bound;
    n.normalized = true;
    n.key = "(cond " + e->key + " " + list_key(n.vars) + ")";
    n.kids = {std::move(e)};
    return finish(std::move(n));
}

Expr prod(std::vector<Expr> factors) {
    Node n;
    n.kind = Kind::product;
    VSet ctx;
    n.key = "(prod";
    for (const auto& f : factors) {
        n.rand.insert(f->rand.begin(), f->rand.end());
        ctx.insert(f->context.begin(), f->context.end());
        n.bound = merge_bound(n.bound, f->bound);
        n.key += " " + f->key;
    }
    n.key += ")";
    n.context = set_minus(ctx, n.rand);
    n.normalized = factors.empty();
    n.kids = std::move(factors);
    return finish(std::move(n));
}

Expr unit() {
    static const Expr u = mark(prod({}));
    return u;
}

bool is_unit(const Expr& e) { return e->kind == Kind::product && e->kids.empty(); }

bool same(const Expr& a, const Expr& b) { return a == b || a->key == b->key; }

Expr quot(Expr num, Expr den) {
    Node n;
    n.kind = Kind::quotient;
    n.rand = set_minus(num->rand, den->rand);
    n.context = set_minus(set_union(num->free(), den->free()), n.rand);
    n.bound = merge_bound(num->bound, den->bound);
    n.key = "(quot " + num->key + " " + den->key + ")";
    n.kids = {std::move(num), std::move(den)};
    return finish(std::move(n));
}

Expr at(Expr e, Assign vals) {
    Assign keep;
    for (const auto& [k, v] : vals) {
        check_label(k);
        check_label(v);
        if (e->free().count(k)) {
            keep[k] = v;
            continue;
        }
        auto it = e->bound.find(k);
        if (it == e->bound.end())
            throw Error("restriction of '" + k + "' which does not appear in the kernel");
        if (it->second != v)
            throw Error("conflicting restriction of '" + k + "' to " + v + " (already " + it->second + ")");
    }
    if (keep.empty()) return e;
    Node n;
    n.kind = Kind::restrict;
    VSet keys;
    for (const auto& [k, _] : keep) keys.insert(k);
    n.rand = set_minus(e->rand, keys);
    n.context = set_minus(e->context, keys);
    n.bound = merge_bound(e->bound, keep);
    n.normalized = e->normalized && disjoint(keys, e->rand);
    n.key = "(at " + e->key + " (";
    bool first = true;
    for (const auto& [k, v] : keep) {
        if (!first) n.key += ' ';
        n.key += "(" + k + " " + v + ")";
        first = false;
    }
    n.key += "))";
    n.vals = std::move(keep);
    n.kids = {std::move(e)};
    return finish(std::move(n));
}

// ---------------------------------------------------------------------------
// canonical form

namespace {

struct AtomView {
    const Node* atom = nullptr;
    Assign vals;
};

bool atom_view(const Expr& e, AtomView& out) {
    if (e->kind == Kind::atom) {
        out = {e.get(), {}};
        return true;
    }
    if (e->kind == Kind::restrict && e->kids[0]->kind == Kind::atom) {
        out = {e->kids[0].get(), e->vals};
        return true;
    }
    return false;
}

Assign restrict_to(const Assign& a, const VSet& vars) {
    Assign r;
    for (const auto& [k, v] : a)
        if (vars.count(k)) r[k] = v;
    return r;
}

Expr make_atom(const std::string& law, const VSet& vars, const VSet& ctx, const Assign& vals) {
    Expr a = mark(atom(law, vars, ctx));
    Assign v = restrict_to(vals, set_union(vars, ctx));
    return v.empty() ? a : mark(at(a, v));
}

// Marginal node for rewrites: the structural split of a rewritten operand can
// list a summed variable as context, so no randomness check here.
Expr marg_node(const Expr& e, const VSet& out) {
    Node n;
    n.kind = Kind::marginal;
    n.vars = out;
    n.rand = set_minus(e->rand, out);
    n.context = set_minus(e->context, out);
    n.bound = e->bound;
    n.normalized = e->normalized;
    n.key = "(marg " + e->key + " " + list_key(n.vars) + ")";
    n.kids = {e};
    return finish(std::move(n));
}

Expr cond_node(const Expr& e, const VSet& on) {
    Node n;
    n.kind = Kind::conditional;
    n.vars = on;
    n.rand = set_minus(e->rand, on);
    n.context = set_union(e->context, on);
    n.bound = e->bound;
    n.normalized = true;
    n.key = "(cond " + e->key + " " + list_key(n.vars) + ")";
    n.kids = {e};
    return finish(std::move(n));
}

Expr do_prod(const std::vector<Expr>& factors);
Expr do_quot(const Expr& num, const Expr& den);
Expr do_marg(const Expr& c, const VSet& s);
Expr do_cond(const Expr& c, const VSet& s);
Expr push_restrict(const Expr& c, const Assign& vals);

std::vector<Expr> factors_of(const Expr& e) {
    if (e->kind == Kind::product) return e->kids;
    return {e};
}

Expr do_prod(const std::vector<Expr>& in) {
    std::vector<Expr> flat;
    bool has_quot = false;
    for (const auto& f : in) {
        if (f->kind == Kind::product) {
            flat.insert(flat.end(), f->kids.begin(), f->kids.end());
        } else {
            flat.push_back(f);
            has_quot |= f->kind == Kind::quotient;
        }
    }
    if (has_quot) {
        std::vector<Expr> nums, dens;
        for (const auto& f : flat) {
            if (f->kind == Kind::quotient) {
                nums.push_back(f->kids[0]);
                dens.push_back(f->kids[1]);
            } else {
                nums.push_back(f);
            }
        }
        return do_quot(do_prod(nums), do_prod(dens));
    }
    // chain rule: p(X|C) p(Y|X,C) = p(X,Y|C), restrictions on X ∪ C agreeing
    for (bool merged = true; merged;) {
        merged = false;
        for (std::size_t i = 0; i < flat.size() && !merged; ++i) {
            AtomView a;
            if (!atom_view(flat[i], a)) continue;
            VSet head = set_union(a.atom->vars, a.atom->ctx);
            for (std::size_t j = 0; j < flat.size() && !merged; ++j) {
                AtomView b;
                if (i == j || !atom_view(flat[j], b) || b.atom->law != a.atom->law || b.atom->ctx != head ||
                    restrict_to(b.vals, head) != a.vals)
                    continue;
                Assign vals = a.vals;
                vals.insert(b.vals.begin(), b.vals.end());
                flat[i] = make_atom(a.atom->law, set_union(a.atom->vars, b.atom->vars), a.atom->ctx, vals);
                flat.erase(flat.begin() + static_cast<std::ptrdiff_t>(j));
                merged = true;
            }
        }
    }
    if (flat.empty()) return unit();
    if (flat.size() == 1) return flat[0];
    std::stable_sort(flat.begin(), flat.end(),
                     [](const Expr& a, const Expr& b) { return a->key < b->key; });
    return mark(prod(std::move(flat)));
}

Expr do_quot(const Expr& num, const Expr& den) {
    if (is_unit(den)) return num;
    if (num->kind == Kind::quotient) return do_quot(num->kids[0], do_prod({num->kids[1], den}));
    if (den->kind == Kind::quotient) return do_quot(do_prod({num, den->kids[1]}), den->kids[0]);

    auto nf = factors_of(num);
    auto df = factors_of(den);
    bool cancelled = false;
    for (auto it = df.begin(); it != df.end();) {
        auto jt = std::find_if(nf.begin(), nf.end(), [&](const Expr& x) { return same(x, *it); });
        if (jt != nf.end()) {
            nf.erase(jt);
            it = df.erase(it);
            cancelled = true;
        } else {
            ++it;
        }
    }
    if (cancelled) return do_quot(do_prod(nf), do_prod(df));

    // p(X|C) / p(Y|C) = p(X\Y|Y,C) and p(X|C) / p(Y|X\Y,C) = p(X\Y|C) for Y ⊆ X
    for (auto it = df.begin(); it != df.end(); ++it) {
        AtomView b;
        if (!atom_view(*it, b)) continue;
        for (auto& n : nf) {
            AtomView a;
            if (!atom_view(n, a) || a.atom->law != b.atom->law || !is_subset(b.atom->vars, a.atom->vars) ||
                b.atom->vars == a.atom->vars || b.vals != restrict_to(a.vals, set_union(b.atom->vars, b.atom->ctx)))
                continue;
            VSet rest = set_minus(a.atom->vars, b.atom->vars);
            if (b.atom->ctx == a.atom->ctx)
                n = make_atom(a.atom->law, rest, set_union(a.atom->ctx, b.atom->vars), a.vals);
            else if (b.atom->ctx == set_union(a.atom->ctx, rest))
                n = make_atom(a.atom->law, rest, a.atom->ctx, a.vals);
            else
                continue;
            df.erase(it);
            return do_quot(do_prod(nf), do_prod(df));
        }
    }
    return mark(quot(num, den));
}

Expr do_marg(const Expr& c, const VSet& s) {
    if (s.empty()) return c;
    if (c->kind == Kind::marginal) return do_marg(c->kids[0], set_union(c->vars, s));

    AtomView a;
    if (atom_view(c, a)) {
        VSet rest = set_minus(a.atom->vars, s);
        if (rest.empty()) return unit();
        return make_atom(a.atom->law, rest, a.atom->ctx, a.vals);
    }

    if (c->kind == Kind::product) {
        std::vector<Expr> fs = c->kids;
        VSet remaining = s;
        while (true) {
            std::map<std::size_t, VSet> groups;
            for (const auto& v : remaining) {
                std::size_t hits = 0, where = 0;
                for (std::size_t k = 0; k < fs.size(); ++k)
                    if (fs[k]->free().count(v)) {
                        ++hits;
                        where = k;
                    }
                if (hits == 1) groups[where].insert(v);
            }
            if (groups.empty()) break;
            for (auto& [k, g] : groups) {
                fs[k] = do_marg(fs[k], g);
                remaining = set_minus(remaining, g);
            }
            Expr p = do_prod(fs);
            if (p->kind != Kind::product) return do_marg(p, remaining);
            fs = p->kids;
        }
        Expr p = do_prod(fs);
        if (remaining.empty()) return p;
        if (p->kind != Kind::product) return do_marg(p, remaining);
        return mark(marg_node(p, remaining));
    }

    if (c->kind == Kind::quotient) {
        const Expr& n = c->kids[0];
        const Expr& d = c->kids[1];
        VSet into_num = set_minus(s, d->free());
        if (!into_num.empty()) {
            Expr q = do_quot(do_marg(n, into_num), d);
            return do_marg(q, set_minus(s, into_num));
        }
    }
    return mark(marg_node(c, s));
}

Expr do_cond(const Expr& c, const VSet& s) {
    if (s.empty() && c->normalized) return c;
    AtomView a;
    if (atom_view(c, a)) {
        VSet pinned;
        for (const auto& [k, _] : a.vals)
            if (a.atom->vars.count(k)) pinned.insert(k);
        VSet moved = set_union(s, pinned);
        return make_atom(a.atom->law, set_minus(a.atom->vars, moved), set_union(a.atom->ctx, moved),
                         a.vals);
    }
    Expr r = do_quot(c, do_marg(c, set_minus(c->rand, s)));
    if (r->normalized) return r;
    Node n = *r;
    n.normalized = true;
    n.canonical_form.reset();
    return std::make_shared<const Node>(std::move(n));
}

Expr push_restrict(const Expr& c, const Assign& vals_in) {
    Assign vals;
    for (const auto& [k, v] : vals_in) {
        if (c->free().count(k)) {
            vals[k] = v;
            continue;
        }
        auto it = c->bound.find(k);
        if (it != c->bound.end() && it->second != v)
            throw Error("conflicting restriction of '" + k + "'");
    }
    if (vals.empty()) return c;
    switch (c->kind) {
        case Kind::atom: return mark(at(c, vals));
        case Kind::restrict: {
            Assign all = c->vals;
            for (const auto& [k, v] : vals) all[k] = v;
            return push_restrict(c->kids[0], all);
        }
        case Kind::product: {
            std::vector<Expr> fs;
            for (const auto& f : c->kids) fs.push_back(push_restrict(f, restrict_to(vals, f->free())));
            return do_prod(fs);
        }
        case Kind::quotient:
            return do_quot(push_restrict(c->kids[0], restrict_to(vals, c->kids[0]->free())),
                           push_restrict(c->kids[1], restrict_to(vals, c->kids[1]->free())));
        case Kind::marginal: return do_marg(push_restrict(c->kids[0], vals), c->vars);
        case Kind::conditional:
            return push_restrict(do_cond(c->kids[0], c->vars), vals);
    }
    return c;
}

}  // namespace

namespace {

// Rewrites can move a variable between the random and context parts of the
// structural bookkeeping (a flattened quotient cannot tell them apart), so the
// canonical form keeps the kernel's own split.
Expr with_split(const Expr& r, const VSet& rand) {
    VSet rr = set_intersect(rand, r->freev);
    if (rr == r->rand) return r;
    Node n = *r;
    n.rand = rr;
    n.context = set_minus(r->freev, rr);
    n.canonical_form.reset();
    return std::make_shared<const Node>(std::move(n));
}

}  // namespace

Expr canonical(const Expr& e) {
    if (e->is_canonical) return e;
    if (e->canonical_form) return e->canonical_form;
    Expr r;
    switch (e->kind) {
        case Kind::atom: r = mark(atom(e->law, e->vars, e->ctx)); break;
        case Kind::restrict: r = push_restrict(canonical(e->kids[0]), e->vals); break;
        case Kind::marginal: r = do_marg(canonical(e->kids[0]), e->vars); break;
        case Kind::conditional: r = do_cond(canonical(e->kids[0]), e->vars); break;
        case Kind::product: {
            std::vector<Expr> fs;
            for (const auto& f : e->kids) fs.push_back(canonical(f));
            r = do_prod(fs);
            break;
        }
        case Kind::quotient: r = do_quot(canonical(e->kids[0]), canonical(e->kids[1])); break;
    }
    r = with_split(r, e->rand);
    e->canonical_form = r;
    return r;
}

Expr marginalize(const Expr& e, const VSet& out) {
    if (!is_subset(out, e->rand))
        throw Error("cannot marginalize {" + join(set_minus(out, e->rand)) +
                    "}: not random in the kernel");
    return with_split(do_marg(canonical(e), out), set_minus(e->rand, out));
}

Expr condition(const Expr& e, const VSet& on) {
    if (!is_subset(on, e->rand))
        throw Error("cannot condition on {" + join(set_minus(on, e->rand)) +
                    "}: not random in the kernel");
    return with_split(do_cond(canonical(e), on), set_minus(e->rand, on));
}

Expr restrict_values(const Expr& e, const Assign& vals) { return canonical(at(e, vals)); }

Expr rename(const Expr& e, const std::map<std::string, std::string>& names) {
    auto rn = [&](const std::string& v) {
        auto it = names.find(v);
        return it == names.end() ? v : it->second;
    };
    auto rs = [&](const VSet& s) {
        VSet r;
        for (const auto& v : s) r.insert(rn(v));
        return r;
    };
    std::vector<Expr> kids;
    for (const auto& k : e->kids) kids.push_back(rename(k, names));
    Expr r = e;
    switch (e->kind) {
        case Kind::atom: r = atom(e->law, rs(e->vars), rs(e->ctx)); break;
        case Kind::marginal: r = marg_node(kids[0], rs(e->vars)); break;
        case Kind::conditional: r = cond_node(kids[0], rs(e->vars)); break;
        case Kind::product: r = prod(kids); break;
        case Kind::quotient: r = quot(kids[0], kids[1]); break;
        case Kind::restrict: {
            Assign v;
            for (const auto& [k, x] : e->vals) v[rn(k)] = x;
            r = at(kids[0], v);
            break;
        }
    }
    if (e->is_canonical) r = mark(r);
    return with_split(r, rs(e->rand));
}

std::size_t node_count(const Expr& e) {
    std::unordered_set<const Node*> seen;
    std::vector<const Node*> stack{e.get()};
    while (!stack.empty()) {
        auto n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        for (const auto& k : n->kids) stack.push_back(k.get());
    }
    return seen.size();
}

// ---------------------------------------------------------------------------
// rendering and parsing

std::string render_sexpr(const Expr& e) { return e->key; }

namespace {

std::string latex_vars(const VSet& vars, const Assign& vals) {
    std::string out;
    for (const auto& v : vars) {
        if (!out.empty()) out += ",";
        out += v;
        auto it = vals.find(v);
        if (it != vals.end()) out += "=" + it->second;
    }
    return out;
}

std::string latex(const Expr& e, bool in_product) {
    switch (e->kind) {
        case Kind::atom: {
            std::string s = e->law + "(" + latex_vars(e->vars, {});
            if (!e->ctx.empty()) s += "|" + latex_vars(e->ctx, {});
            return s + ")";
        }
        case Kind::restrict: {
            if (e->kids[0]->kind == Kind::atom) {
                const auto& a = *e->kids[0];
                std::string s = a.law + "(" + latex_vars(a.vars, e->vals);
                if (!a.ctx.empty()) s += "|" + latex_vars(a.ctx, e->vals);
                return s + ")";
            }
            std::string s = "\\left." + latex(e->kids[0], false) + "\\right|_{";
            bool first = true;
            for (const auto& [k, v] : e->vals) {
                if (!first) s += ",";
                s += k + "=" + v;
                first = false;
            }
            return s + "}";
        }
        case Kind::marginal: {
            std::string s = "\\sum_{" + join(e->vars) + "} " + latex(e->kids[0], false);
            return in_product ? "\\left[" + s + "\\right]" : s;
        }
        case Kind::conditional:
            return "\\left[" + latex(e->kids[0], false) + "\\right]_{\\mid " + join(e->vars) + "}";
        case Kind::product: {
            if (e->kids.empty()) return "1";
            std::string s;
            for (const auto& f : e->kids) {
                if (!s.empty()) s += "\\,";
                s += latex(f, true);
            }
            return s;
        }
        case Kind::quotient:
            return "\\frac{" + latex(e->kids[0], false) + "}{" + latex(e->kids[1], false) + "}";
    }
    return "";
}

struct Parser {
    std::vector<std::string> toks;
    std::size_t pos = 0;

    explicit Parser(const std::string& text) {
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) toks.push_back(cur);
            cur.clear();
        };
        for (char c : text) {
            if (c == '(' || c == ')') {
                flush();
                toks.emplace_back(1, c);
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                flush();
            } else {
                cur += c;
            }
        }
        flush();
    }

    const std::string& peek() const {
        if (pos >= toks.size()) throw Error("unexpected end of expression");
        return toks[pos];
    }
    std::string next() {
        auto t = peek();
        ++pos;
        return t;
    }
    void expect(const std::string& t) {
        auto got = next();
        if (got != t) throw Error("expected '" + t + "' but found '" + got + "'");
    }
    std::string ident() {
        auto t = next();
        if (t == "(" || t == ")") throw Error("expected identifier but found '" + t + "'");
        return t;
    }
    VSet list() {
        expect("(");
        VSet r;
        while (peek() != ")") r.insert(ident());
        expect(")");
        return r;
    }
    Expr expr() {
        expect("(");
        auto head = ident();
        Expr r;
        if (head == "atom") {
            auto name = ident();
            auto vars = list();
            auto ctx = list();
            r = atom(name, vars, ctx);
        } else if (head == "marg" || head == "cond") {
            // rendered canonical trees may sum a variable the quotient split
            // lists as context, so only require that it appears
            auto e = expr();
            auto vs = list();
            if (!is_subset(vs, e->free()))
                throw Error("'" + head + "' over {" + join(set_minus(vs, e->free())) + "} which does not appear");
            r = vs.empty() ? e : head == "marg" ? marg_node(e, vs) : cond_node(e, vs);
        } else if (head == "prod") {
            std::vector<Expr> fs;
            while (peek() != ")") fs.push_back(expr());
            r = prod(fs);
        } else if (head == "quot") {
            auto n = expr();
            auto d = expr();
            r = quot(n, d);
        } else if (head == "at") {
            auto e = expr();
            expect("(");
            Assign vals;
            while (peek() != ")") {
                expect("(");
                auto k = ident();
                vals[k] = ident();
                expect(")");
            }
            expect(")");
            r = at(e, vals);
        } else {
            throw Error("unknown expression head '" + head + "'");
        }
        expect(")");
        return r;
    }
};

}  // namespace

std::string render_latex(const Expr& e) { return latex(e, false); }

Expr parse_sexpr(const std::string& text) {
    Parser p(text);
    Expr e = p.expr();
    if (p.pos != p.toks.size()) throw Error("trailing tokens after expression");
    return e;
}

}  // namespace mdid
