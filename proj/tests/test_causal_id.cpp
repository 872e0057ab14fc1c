#include <gtest/gtest.h>

#include <random>

#include "brute.hpp"
#include "mdid/causal_id.hpp"
#include "mdid/oracle.hpp"

using namespace mdid;

namespace {

Cadmg chain(std::initializer_list<const char*> vs) {
    Cadmg g;
    const char* prev = nullptr;
    for (auto v : vs) {
        g.add_vertex(v);
        if (prev) g.add_directed(prev, v);
        prev = v;
    }
    return g;
}

}  // namespace

TEST(GFormula, ChainIsConditional) {
    Expr e = g_formula(chain({"A", "Y"}), {{"Y"}, {{"A", "a"}}});
    EXPECT_EQ(render_sexpr(e), "(at (atom p (Y) (A)) ((A a)))");
}

TEST(GFormula, AdjustsForConfounder) {
    Cadmg g = chain({"B", "A", "Y"});
    g.add_directed("B", "Y");
    Expr e = g_formula(g, {{"Y"}, {{"A", "a"}}});
    Expr want = canonical(marg(prod({at(atom("p", {"Y"}, {"A", "B"}), {{"A", "a"}}), atom("p", {"B"})}), {"B"}));
    EXPECT_TRUE(same(e, want)) << render_sexpr(e);
}

TEST(GFormula, NoTreatmentIsMarginal) {
    Expr e = g_formula(chain({"B", "A", "Y"}), {{"Y"}, {}});
    EXPECT_EQ(render_sexpr(e), "(atom p (Y) ())");
}

TEST(GFormula, RejectsBidirected) {
    Cadmg g = chain({"A", "Y"});
    g.add_bidirected("A", "Y");
    EXPECT_THROW(g_formula(g, {{"Y"}, {{"A", "a"}}}), Error);
}

TEST(GFormula, MatchesTruncatedFactorization) {
    Cadmg g = chain({"B", "A", "Y"});
    g.add_directed("B", "Y");
    InterventionQuery q{{"Y"}, {{"A", "1"}}};
    HiddenDag h{g, g.vertices(), {}};
    auto rep = verify_effect(h, q, g_formula(g, q), 20, 3);
    EXPECT_LE(rep.max_error, 1e-12);
}

TEST(CausalId, QueryValidation) {
    Cadmg g = chain({"A", "Y"});
    EXPECT_THROW(identify_interventional(g, {{"Y"}, {{"Y", "1"}}}), Error);
    EXPECT_THROW(identify_interventional(g, {{"Z"}, {}}), Error);
}

TEST(CausalId, FrontDoor) {
    Cadmg g = brute::fixture("fig1a.graph").graph;
    auto r = identify_interventional(g, {{"Y"}, {{"A", "a"}}});
    ASSERT_TRUE(r.identified);
    EXPECT_EQ(r.y_star, (VSet{"Y"}));
    ASSERT_EQ(r.districts.size(), 1u);
    EXPECT_EQ(r.districts[0].fixing_order, (std::vector<std::string>{"M", "B", "A"}));
    EXPECT_EQ(render_latex(r.functional),
              "\\frac{\\sum_{B} p(A=a,Y|B,M)\\,p(B)}{\\sum_{B} p(A=a|B,M)\\,p(B)}");
}

TEST(CausalId, BowIsNotIdentified) {
    Cadmg g = brute::fixture("bow.graph").graph;
    auto r = identify_interventional(g, {{"Y"}, {{"A", "a"}}});
    EXPECT_FALSE(r.identified);
    EXPECT_FALSE(r.functional);
    EXPECT_NE(r.failure.find("{Y}"), std::string::npos);
}

// Two hidden-variable laws for the bow graph with equal observed margins and
// different p(Y(a)) show the verdict is right.
TEST(CausalId, BowWitness) {
    Cadmg g = brute::fixture("bow.graph").graph;
    HiddenDag h = canonical_dag(g);
    CptSpec a;
    a.labels = {{"A", numeric_labels(2)}, {"Y", numeric_labels(2)}, {"U_A_Y", numeric_labels(2)}};
    a.set_cpt("U_A_Y", {}, {{0.5, 0.5}});
    a.set_cpt("A", {"U_A_Y"}, {{1.0, 0.0}, {0.0, 1.0}});  // A = U
    a.set_cpt("Y", {"A", "U_A_Y"}, {{0.8, 0.2}, {0.2, 0.8}, {0.8, 0.2}, {0.2, 0.8}});  // Y copies U
    CptSpec b = a;
    b.set_cpt("Y", {"A", "U_A_Y"}, {{0.8, 0.2}, {0.8, 0.2}, {0.2, 0.8}, {0.2, 0.8}});  // Y copies A
    DiscreteLaw oa = marginal_law(a, h.observed), ob = marginal_law(b, h.observed);
    for (std::size_t i = 0; i < oa.table.size(); ++i) EXPECT_NEAR(oa.table.data[i], ob.table.data[i], 1e-12);
    DiscreteLaw ya = marginal_law(intervene(a, {{"A", "1"}}), {"Y"});
    DiscreteLaw yb = marginal_law(intervene(b, {{"A", "1"}}), {"Y"});
    EXPECT_NEAR(std::abs(ya.table.data[1] - yb.table.data[1]), 0.3, 1e-12);
}

TEST(CausalId, DagsMatchGFormula) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 60; ++i) {
        Cadmg g = random_dag(6, 0.4, rng);
        InterventionQuery q{{"V5", "V4"}, {{"V1", "1"}, {"V2", "0"}}};
        auto r = identify_interventional(g, q);
        ASSERT_TRUE(r.identified);
        EXPECT_TRUE(same(r.functional, g_formula(g, q)))
            << render_sexpr(r.functional) << "\n" << render_sexpr(g_formula(g, q));
    }
}

TEST(CausalId, GreedyAgreesWithExhaustiveFixing) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 30; ++i) {
        HiddenDag h = random_hidden_dag(5, 2, 0.4, rng);
        Cadmg g = h.admg();
        for (const auto& keep : brute::subsets(g.vertices())) {
            if (keep.empty()) continue;
            bool greedy = greedy_fixing_order(g, keep).size() == g.size() - keep.size();
            bool any = !brute::valid_sequences(g, set_minus(g.vertices(), keep)).empty();
            EXPECT_EQ(greedy, any) << "keep {" << join(keep) << "}";
        }
    }
}

// Identified effects on random hidden-variable DAGs match enumeration.
TEST(CausalId, NumericSoundness) {
    std::mt19937_64 rng(17);
    int identified = 0;
    for (int i = 0; i < 120; ++i) {
        HiddenDag h = random_hidden_dag(6, 2, 0.4, rng);
        InterventionQuery q{{"V5", "V4"}, {{"V0", "1"}, {"V2", "0"}}};
        auto r = identify_interventional(h.admg(), q);
        if (!r.identified) continue;
        ++identified;
        auto rep = verify_effect(h, q, r.functional, 3, static_cast<std::uint64_t>(i));
        EXPECT_LE(rep.max_error, 1e-9) << render_sexpr(r.functional);
        EXPECT_EQ(rep.undefined_cells, 0u);
    }
    EXPECT_GT(identified, 20);
}
