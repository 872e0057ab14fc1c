#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mdid/causal_id.hpp"
#include "mdid/graph.hpp"
#include "mdid/kernel_expr.hpp"
#include "mdid/missing_data.hpp"
#include "mdid/table.hpp"

namespace mdid {

/// p(var | parents) as a table over parents ∪ {var}.
struct Cpt {
    std::string var;
    VSet parents;
    Table table;
};

/// A law given by its DAG factorization, evaluated without building the joint.
struct CptSpec {
    std::map<std::string, std::vector<std::string>> labels;
    std::map<std::string, Cpt> cpts;

    int card(const std::string& v) const;
    VSet variables() const;
    /// Sets p(var | parents) from rows listed in parent-cell order (table
    /// order of the parents), each row over the var's labels.
    void set_cpt(const std::string& var, const VSet& parents, const std::vector<std::vector<double>>& rows);
};

std::vector<std::string> numeric_labels(int card);

/// Every row drawn uniformly then mixed so each entry is at least `floor`.
std::vector<double> random_row(int card, std::mt19937_64& rng, double floor = 0.01);

/// Random CPTs for every vertex of a DAG, parents from the graph.
CptSpec random_cpts(const Cadmg& dag, const std::map<std::string, int>& card, std::mt19937_64& rng,
                    double floor = 0.01);

/// Full-law parameters of a missing-data DAG: random CPTs for X^(1), O and R
/// (indicators binary, labels "0","1"), proxies deterministic with the extra
/// label "?".
CptSpec sample_full_cpts(const MdDag& m, int cardinality, std::uint64_t seed);

/// Replaces each proxy's table with its deterministic one.
void set_proxy_cpts(const MdDag& m, CptSpec& spec);

/// Marginal over `keep` by variable elimination.
DiscreteLaw marginal_law(const CptSpec& spec, const VSet& keep);

/// Joint over all variables (proxies included). Small models only.
DiscreteLaw sample_full_law(const MdDag& m, int cardinality, std::uint64_t seed);
DiscreteLaw full_law(const CptSpec& spec);

/// Sums out the counterfactuals.
DiscreteLaw derive_observed_law(const MdDag& m, const DiscreteLaw& full);
DiscreteLaw observed_law(const MdDag& m, const CptSpec& spec);

/// Truncated factorization: each treated variable is held at its value.
CptSpec intervene(const CptSpec& spec, const Assign& treat);

/// max over cells of |p(a,b|c) - p(a|c)p(b|c)| (cells with p(c) = 0 skipped).
double ci_check(const DiscreteLaw& law, const VSet& a, const VSet& b, const VSet& c);

/// Largest absolute difference between `got` and `truth` over the cells of
/// both. Variables are matched by name after applying `rename` to got's axes;
/// a variable on one side only is broadcast. Cells of got whose label is not
/// in truth's domain (the proxy value "?") are skipped. `pinned` restricts
/// truth cells to the given labels.
double max_abs_diff(const DiscreteLaw& truth, const Table& got, const DiscreteLaw& got_law,
                    const std::map<std::string, std::string>& rename = {}, const Assign& pinned = {});

enum class VerifyTarget { target_law, full_law, indicator };

struct VerifyReport {
    int trials = 0;
    double max_error = 0;
    std::size_t undefined_cells = 0;
    std::vector<double> errors;  // per trial
};

/// Samples a full law per trial, evaluates the functional on its observed law
/// and compares with the truth: p(X^(1), O), p(X^(1), O, R), or for an
/// indicator its CPT with parents at the values the functional fixes.
VerifyReport verify_functional(const MdDag& m, const Expr& f, VerifyTarget target, int trials,
                               std::uint64_t seed, const std::string& indicator = "", int cardinality = 2);

/// Seed for trial i, by a counter-based mix of the base seed.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t i);

/// Two full laws with equal observed laws and different full laws, for a
/// colluder pair (R_i, R_j) with R_j -> R_i <- X_j^(1).
std::pair<CptSpec, CptSpec> colluder_witness(const MdDag& m, const std::pair<std::string, std::string>& pair,
                                             std::uint64_t seed, int cardinality = 2);

// ---------------------------------------------------------------------------
// random models

/// DAG over V0..V{n-1} (topological in index order), each edge kept with prob.
Cadmg random_dag(int n, double edge_prob, std::mt19937_64& rng, const std::string& prefix = "V");

struct HiddenDag {
    Cadmg dag;       // over observed and hidden vertices
    VSet observed;
    VSet hidden;
    Cadmg admg() const;  // latent projection onto the observed vertices
};

/// One hidden parent U_a_b per bidirected edge a <-> b; its latent
/// projection is the input ADMG.
HiddenDag canonical_dag(const Cadmg& admg);

/// Per trial: random CPTs on h.dag, the functional evaluated on the observed
/// margin against p(Y(a)) from the truncated factorization. Treatment labels
/// must be values ("0".."card-1").
VerifyReport verify_effect(const HiddenDag& h, const InterventionQuery& q, const Expr& f, int trials,
                           std::uint64_t seed, int cardinality = 2);

/// Observed vertices V0.., hidden H0.. each with two or more observed children.
HiddenDag random_hidden_dag(int n_obs, int n_hidden, double edge_prob, std::mt19937_64& rng);

/// Random missing-data DAG with k missing variables and n_obs observed ones.
/// With `lemma2` set, no indicator has the indicator of one of its
/// counterfactual parents among its ancestors.
MdDag random_md_dag(int k, int n_obs, double edge_prob, std::mt19937_64& rng, bool lemma2 = false);

}  // namespace mdid
