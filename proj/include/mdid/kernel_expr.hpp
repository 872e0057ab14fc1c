#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mdid/graph.hpp"

namespace mdid {

/// Variable -> value label. Labels that are not values of the variable's
/// domain (e.g. "a") stay symbolic.
using Assign = std::map<std::string, std::string>;

enum class Kind { atom, marginal, conditional, product, quotient, restrict };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    std::string law;         // atom
    VSet vars;               // atom: random vars; marginal: summed out; conditional: conditioned on
    VSet ctx;                // atom context
    std::vector<Expr> kids;  // product factors; quotient {num, den}; single child otherwise
    Assign vals;             // restrict

    // derived at construction
    VSet rand;
    VSet context;
    VSet freev;  // rand ∪ context
    Assign bound;  // every restriction applied anywhere below
    std::string key;
    bool normalized = false;

    mutable bool is_canonical = false;
    mutable Expr canonical_form;  // memo for non-canonical nodes

    const VSet& free() const { return freev; }
};

// Raw constructors: check variable bookkeeping, no simplification.
Expr atom(std::string law, VSet vars, VSet ctx = {});
Expr marg(Expr e, VSet out);
Expr cond(Expr e, VSet on);
Expr prod(std::vector<Expr> factors);
Expr quot(Expr num, Expr den);
Expr at(Expr e, Assign vals);
Expr unit();

bool is_unit(const Expr& e);
bool same(const Expr& a, const Expr& b);

/// Canonical form: conditionals expanded to quotients, restrictions pushed onto
/// atoms, products flattened and sorted, nested quotients merged, sums folded
/// into the unique factor that mentions them, normalized leaves peeled,
/// identical factors cancelled across a quotient.
Expr canonical(const Expr& e);

Expr marginalize(const Expr& e, const VSet& out);
Expr condition(const Expr& e, const VSet& on);
Expr restrict_values(const Expr& e, const Assign& vals);

Expr rename(const Expr& e, const std::map<std::string, std::string>& names);

std::string render_sexpr(const Expr& e);
std::string render_latex(const Expr& e);
Expr parse_sexpr(const std::string& text);

/// Number of distinct nodes reachable from e.
std::size_t node_count(const Expr& e);

}  // namespace mdid
