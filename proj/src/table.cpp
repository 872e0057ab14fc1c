#include "mdid/table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mdid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> strides_of(const Table& t) {
    std::vector<std::size_t> s(t.vars.size(), 1);
    for (int i = static_cast<int>(t.vars.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * t.card[i + 1];
    return s;
}

// Stride of each output axis inside t (0 when t lacks the axis).
std::vector<std::size_t> map_strides(const Table& t, const std::vector<std::string>& out) {
    auto s = strides_of(t);
    std::vector<std::size_t> r(out.size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int ax = t.axis(out[i]);
        if (ax >= 0) r[i] = s[ax];
    }
    return r;
}

template <class F>
Table combine(const Table& a, const Table& b, F op) {
    std::vector<std::string> vars;
    std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(), std::back_inserter(vars));
    std::vector<int> card;
    for (const auto& v : vars) {
        int ia = a.axis(v), ib = b.axis(v);
        if (ia >= 0 && ib >= 0 && a.card[ia] != b.card[ib])
            throw Error("cardinality mismatch for variable '" + v + "'");
        card.push_back(ia >= 0 ? a.card[ia] : b.card[ib]);
    }
    Table out = make_table(vars, card);
    auto sa = map_strides(a, vars), sb = map_strides(b, vars);
    std::vector<int> idx(vars.size(), 0);
    std::size_t oa = 0, ob = 0;
    const std::size_t n = out.data.size();
    for (std::size_t cell = 0; cell < n; ++cell) {
        out.data[cell] = op(a.data[oa], b.data[ob]);
        for (int k = static_cast<int>(vars.size()) - 1; k >= 0; --k) {
            ++idx[k];
            oa += sa[k];
            ob += sb[k];
            if (idx[k] < card[k]) break;
            oa -= sa[k] * card[k];
            ob -= sb[k] * card[k];
            idx[k] = 0;
        }
    }
    return out;
}

}  // namespace

int Table::axis(const std::string& v) const {
    auto it = std::lower_bound(vars.begin(), vars.end(), v);
    if (it == vars.end() || *it != v) return -1;
    return static_cast<int>(it - vars.begin());
}

double Table::get(const std::map<std::string, int>& cell) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        auto it = cell.find(vars[i]);
        if (it == cell.end()) throw Error("cell lacks variable '" + vars[i] + "'");
        off = off * card[i] + it->second;
    }
    return data[off];
}

Table scalar_table(double x) { return Table{{}, {}, {x}}; }

Table make_table(std::vector<std::string> vars, std::vector<int> card, double fill) {
    if (!std::is_sorted(vars.begin(), vars.end())) throw Error("table axes must be sorted");
    std::size_t n = 1;
    for (int c : card) n *= static_cast<std::size_t>(c);
    return Table{std::move(vars), std::move(card), std::vector<double>(n, fill)};
}

double mul_cell(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b;
}

double div_cell(double a, double b) {
    if (std::isnan(a)) return kNaN;
    if (std::isnan(b)) return a == 0.0 ? 0.0 : kNaN;
    if (b == 0.0) return a == 0.0 ? 0.0 : kNaN;
    return a / b;
}

Table multiply(const Table& a, const Table& b) { return combine(a, b, mul_cell); }
Table divide(const Table& a, const Table& b) { return combine(a, b, div_cell); }

Table sum_out(const Table& t, const VSet& out) {
    std::vector<std::string> vars;
    std::vector<int> card;
    for (std::size_t i = 0; i < t.vars.size(); ++i)
        if (!out.count(t.vars[i])) {
            vars.push_back(t.vars[i]);
            card.push_back(t.card[i]);
        }
    if (vars.size() == t.vars.size()) return t;
    Table r = make_table(vars, card);
    auto s = map_strides(r, t.vars);
    std::vector<int> idx(t.vars.size(), 0);
    std::size_t o = 0;
    for (std::size_t cell = 0; cell < t.data.size(); ++cell) {
        r.data[o] += t.data[cell];
        for (int k = static_cast<int>(t.vars.size()) - 1; k >= 0; --k) {
            ++idx[k];
            o += s[k];
            if (idx[k] < t.card[k]) break;
            o -= s[k] * t.card[k];
            idx[k] = 0;
        }
    }
    return r;
}

Table keep_only(const Table& t, const VSet& keep) {
    VSet drop;
    for (const auto& v : t.vars)
        if (!keep.count(v)) drop.insert(v);
    return sum_out(t, drop);
}

Table slice(const Table& t, const std::string& var, int index) {
    int ax = t.axis(var);
    if (ax < 0) throw Error("cannot slice missing axis '" + var + "'");
    if (index < 0 || index >= t.card[ax]) throw Error("value outside domain of '" + var + "'");
    std::vector<std::string> vars = t.vars;
    std::vector<int> card = t.card;
    vars.erase(vars.begin() + ax);
    card.erase(card.begin() + ax);
    Table r = make_table(vars, card);
    std::size_t inner = 1;
    for (std::size_t i = ax + 1; i < t.card.size(); ++i) inner *= t.card[i];
    std::size_t outer = t.data.size() / (inner * t.card[ax]);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i)
            r.data[o * inner + i] = t.data[(o * t.card[ax] + index) * inner + i];
    return r;
}

std::size_t count_undefined(const Table& t) {
    return static_cast<std::size_t>(
        std::count_if(t.data.begin(), t.data.end(), [](double x) { return std::isnan(x); }));
}

void for_each_cell(const std::vector<std::string>& vars, const std::vector<int>& card,
                   const std::function<void(const std::vector<int>&, std::size_t)>& f) {
    std::size_t n = 1;
    for (int c : card) n *= static_cast<std::size_t>(c);
    std::vector<int> idx(vars.size(), 0);
    for (std::size_t cell = 0; cell < n; ++cell) {
        f(idx, cell);
        for (int k = static_cast<int>(vars.size()) - 1; k >= 0; --k) {
            if (++idx[k] < card[k]) break;
            idx[k] = 0;
        }
    }
}

std::optional<int> DiscreteLaw::index_of(const std::string& var, const std::string& label) const {
    auto it = labels.find(var);
    if (it == labels.end()) return std::nullopt;
    auto jt = std::find(it->second.begin(), it->second.end(), label);
    if (jt == it->second.end()) return std::nullopt;
    return static_cast<int>(jt - it->second.begin());
}

int DiscreteLaw::card(const std::string& var) const {
    int ax = table.axis(var);
    if (ax < 0) throw Error("law has no variable '" + var + "'");
    return table.card[ax];
}

double DiscreteLaw::total() const { return std::accumulate(table.data.begin(), table.data.end(), 0.0); }

Evaluator::Evaluator(const DiscreteLaw& law, std::string law_name)
    : law_(law), law_name_(std::move(law_name)) {}

const Table& Evaluator::marginal(const VSet& vars) {
    auto it = marginals_.find(vars);
    if (it != marginals_.end()) return it->second;
    // Marginalize from the smallest cached superset.
    const Table* src = &law_.table;
    for (const auto& [k, t] : marginals_)
        if (is_subset(vars, k) && t.size() < src->size()) src = &t;
    return marginals_[vars] = keep_only(*src, vars);
}

Table Evaluator::eval_atom(const Node& n) {
    if (n.law != law_name_) throw Error("unresolvable atom law '" + n.law + "'");
    for (const auto* s : {&n.vars, &n.ctx})
        for (const auto& v : *s)
            if (law_.table.axis(v) < 0) throw Error("unresolvable atom variable '" + v + "'");
    Table joint = marginal(set_union(n.vars, n.ctx));
    if (n.ctx.empty()) return joint;
    return divide(joint, marginal(n.ctx));
}

Table Evaluator::eval(const Expr& e) {
    auto it = memo_.find(e->key);
    if (it != memo_.end()) return it->second;
    Table r;
    switch (e->kind) {
        case Kind::atom: r = eval_atom(*e); break;
        case Kind::marginal: r = sum_out(eval(e->kids[0]), e->vars); break;
        case Kind::conditional: {
            Table t = eval(e->kids[0]);
            r = divide(t, sum_out(t, set_minus(e->kids[0]->rand, e->vars)));
            break;
        }
        case Kind::product: {
            r = scalar_table(1.0);
            for (const auto& f : e->kids) r = multiply(r, eval(f));
            break;
        }
        case Kind::quotient: r = divide(eval(e->kids[0]), eval(e->kids[1])); break;
        case Kind::restrict: {
            r = eval(e->kids[0]);
            for (const auto& [var, label] : e->vals) {
                auto idx = law_.index_of(var, label);
                if (idx) {
                    r = slice(r, var, *idx);
                    continue;
                }
                bool numeric = !label.empty() && std::all_of(label.begin(), label.end(), ::isdigit);
                if (numeric || law_.table.axis(var) < 0)
                    throw Error("value " + label + " outside domain of '" + var + "'");
                // symbolic value: the axis stays and is shared by every factor
            }
            break;
        }
    }
    memo_[e->key] = r;
    return r;
}

}  // namespace mdid
