#pragma once

#include <string>
#include <vector>

#include "mdid/graph.hpp"
#include "mdid/kernel_expr.hpp"

namespace mdid {

/// p(Y(a)): outcomes Y under the intervention A = a.
struct InterventionQuery {
    VSet outcomes;
    Assign treatments;

    VSet treated() const;
};

/// Product of p(V | pa(V)) over V \ A, held at A = a and summed down to Y.
/// Throws on bidirected edges.
Expr g_formula(const Cadmg& dag, const InterventionQuery& query);

struct DistrictRun {
    VSet district;
    bool intrinsic = false;
    std::vector<std::string> fixing_order;  // V \ D, or the prefix reached
    Expr kernel;                            // φ_{V\D}(p), empty if not intrinsic
};

struct InterventionalResult {
    bool identified = false;
    VSet y_star;
    std::vector<DistrictRun> districts;
    Expr functional;
    std::string failure;  // names the first district that is not intrinsic
};

/// Sum over Y* \ Y of the district kernels of G_{Y*}, each held at A = a,
/// where Y* = an(Y) in G with A removed. Atoms read the law "p" over the
/// random vertices of g.
InterventionalResult identify_interventional(const Cadmg& g, const InterventionQuery& query);

/// Greedy fixing of random vertices outside `keep`, lexicographically first
/// fixable vertex each round. Returns the order reached; it covers every
/// random vertex outside `keep` iff that set is fixable.
std::vector<std::string> greedy_fixing_order(const Cadmg& g, const VSet& keep);

}  // namespace mdid
