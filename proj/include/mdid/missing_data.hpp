#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdid/graph.hpp"
#include "mdid/kernel_expr.hpp"
#include "mdid/schedule.hpp"

namespace mdid {

/// Counterfactual X^(1), its missingness indicator R and its proxy X.
struct Triple {
    std::string target;
    std::string indicator;
    std::string proxy;

    bool operator==(const Triple&) const = default;
};

/// Naming convention for a missing variable called `base`: X1 gives
/// (X1^1, R1, X1); other names get R_<base>.
Triple triple_for(const std::string& base);

struct MdRoles {
    std::vector<Triple> triples;
    VSet observed;
};

/// How graph vertices map to variables of the observed law. X_j^(1) is only
/// observed (as X_j) where R_j is held at 1.
struct LawView {
    std::map<std::string, std::string> indicator_of;  // X^(1) -> R
    std::map<std::string, std::string> proxy_of;      // X^(1) -> X

    std::optional<std::string> law_var(const std::string& v, const VSet& pinned) const;
    bool is_target(const std::string& v) const { return indicator_of.count(v) > 0; }
    VSet indicators() const;
    /// {R_j | X_j^(1) ∈ vs}
    VSet indicators_of(const VSet& vs) const;
};

struct ValidationError : Error {
    std::vector<std::string> violations;
    explicit ValidationError(std::vector<std::string> v);
};

/// A DAG over X^(1) ∪ O ∪ R ∪ X with the missing-data structure checked.
class MdDag {
public:
    const Cadmg& graph() const { return graph_; }
    const std::vector<Triple>& triples() const { return triples_; }
    const VSet& observed() const { return observed_; }
    const LawView& view() const { return view_; }

    VSet targets() const;
    VSet indicators() const;
    VSet proxies() const;
    /// R ∪ O ∪ X, the variables of the observed law.
    VSet law_vars() const;

    const Triple* by_target(const std::string& v) const;
    const Triple* by_indicator(const std::string& v) const;
    const Triple* by_proxy(const std::string& v) const;
    bool is_indicator(const std::string& v) const { return by_indicator(v) != nullptr; }
    bool is_target(const std::string& v) const { return by_target(v) != nullptr; }
    bool is_proxy(const std::string& v) const { return by_proxy(v) != nullptr; }

    /// X_j -> X_j^(1) for every triple.
    std::map<std::string, std::string> proxy_to_target() const;

private:
    friend MdDag validate_md_dag(const Cadmg& g, const MdRoles& roles);
    Cadmg graph_;
    std::vector<Triple> triples_;
    VSet observed_;
    LawView view_;
};

std::vector<std::string> md_dag_violations(const Cadmg& g, const MdRoles& roles);
/// Throws ValidationError listing every violated constraint.
MdDag validate_md_dag(const Cadmg& g, const MdRoles& roles);

/// p(X, O, R=1) / prod_i q_i|_{R=1}, over law variables. Each propensity is a
/// kernel for R_i in law variables.
Expr assemble_target_law(const MdDag& m, const std::map<std::string, Expr>& propensities);

/// prod_i q_i * p(R=1, O, X) / prod_i q_i|_{R=1}.
Expr assemble_full_law(const MdDag& m, const std::map<std::string, Expr>& propensities);

/// Pairs (R_i, R_j) with R_j and X_j^(1) both parents of R_i.
std::vector<std::pair<std::string, std::string>> colluder_scan(const MdDag& m);

/// Indicators R_i for which {R_j | X_j^(1) ∈ pa(R_i)} meets an(R_i).
VSet lemma2_blockers(const MdDag& m);

/// Singleton classes over R ∩ de(R_i), descendants fixed first, every class
/// seeing all of X^(1). nullopt when the ancestral precondition fails.
std::optional<std::map<std::string, FixingSchedule>> lemma2_schedule(const MdDag& m);

}  // namespace mdid
