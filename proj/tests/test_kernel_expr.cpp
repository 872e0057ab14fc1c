#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "brute.hpp"
#include "mdid/kernel_expr.hpp"
#include "mdid/md_id.hpp"
#include "mdid/oracle.hpp"
#include "mdid/table.hpp"

using namespace mdid;

namespace {

Expr p3() { return atom("p", {"A", "B", "C"}); }

DiscreteLaw random_law(const VSet& vars, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Cadmg g;
    for (const auto& v : vars) g.add_vertex(v);
    std::vector<std::string> vs(vars.begin(), vars.end());
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j) g.add_directed(vs[i], vs[j]);
    std::map<std::string, int> card;
    for (const auto& v : vars) card[v] = 2;
    return full_law(random_cpts(g, card, rng));
}

}  // namespace

TEST(KernelExpr, ConditionalOfAtomIsAtom) {
    Expr e = canonical(cond(p3(), {"C"}));
    EXPECT_EQ(render_sexpr(e), "(atom p (A B) (C))");
    EXPECT_EQ(e->rand, (VSet{"A", "B"}));
    EXPECT_EQ(e->context, (VSet{"C"}));
}

TEST(KernelExpr, MarginalOfAtomIsAtom) {
    EXPECT_EQ(render_sexpr(canonical(marg(p3(), {"B"}))), "(atom p (A C) ())");
}

TEST(KernelExpr, ChainRuleMergesFactors) {
    Expr a = canonical(cond(marg(p3(), {"C"}), {"B"}));  // p(A|B)
    Expr b = canonical(marg(p3(), {"A", "C"}));          // p(B)
    EXPECT_TRUE(same(canonical(prod({a, b})), canonical(marg(p3(), {"C"}))));
}

TEST(KernelExpr, QuotientCancelsIdenticalFactors) {
    Expr a = atom("p", {"A"});
    Expr b = atom("p", {"B"}, {"A"});
    EXPECT_TRUE(same(canonical(quot(prod({a, b}), b)), a));
    EXPECT_TRUE(is_unit(canonical(quot(a, a))));
}

TEST(KernelExpr, SumOfNormalizedFactorDrops) {
    Expr a = atom("p", {"A"});
    Expr b = atom("q", {"B"}, {"A"});
    EXPECT_TRUE(same(canonical(marg(prod({a, b}), {"B"})), a));
}

TEST(KernelExpr, RestrictionPushesOntoAtoms) {
    Expr e = canonical(at(prod({atom("p", {"A"}), atom("q", {"B"}, {"A"})}), {{"A", "1"}}));
    EXPECT_EQ(e->bound, (Assign{{"A", "1"}}));
    EXPECT_FALSE(e->free().count("A"));
    EXPECT_EQ(render_sexpr(e), "(prod (at (atom p (A) ()) ((A 1))) (at (atom q (B) (A)) ((A 1))))");
}

TEST(KernelExpr, CanonicalIsIdempotent) {
    auto m = brute::md_fixture("fig5a.graph");
    auto r = identify_indicator(m, "R4", SearchBudget{});
    ASSERT_TRUE(r.identified);
    EXPECT_TRUE(same(canonical(r.propensity), r.propensity));
}

TEST(KernelExpr, BookkeepingErrors) {
    EXPECT_THROW(marginalize(p3(), {"D"}), Error);
    EXPECT_THROW(condition(atom("p", {"A"}, {"B"}), {"B"}), Error);
    EXPECT_THROW(at(at(p3(), {{"A", "1"}}), {{"A", "0"}}), Error);
    EXPECT_THROW(at(p3(), {{"Z", "1"}}), Error);
    EXPECT_THROW(atom("p", {"A"}, {"A"}), Error);
}

TEST(KernelExpr, SexprRoundTrip) {
    for (const char* f : {"fig2a.graph", "fig3a.graph", "fig5a.graph", "fig6a.graph"}) {
        auto rep = identify_target(brute::md_fixture(f), SearchBudget{});
        ASSERT_EQ(rep.status, Verdict::identified) << f;
        for (const auto& e : {rep.functional, rep.display}) {
            Expr back = parse_sexpr(render_sexpr(e));
            EXPECT_EQ(render_sexpr(back), render_sexpr(e)) << f;
            EXPECT_TRUE(same(canonical(back), canonical(e))) << f;
        }
    }
}

TEST(KernelExpr, ParseRejectsMalformed) {
    EXPECT_THROW(parse_sexpr("(atom p (A)"), Error);
    EXPECT_THROW(parse_sexpr("(frob p (A) ())"), Error);
    EXPECT_THROW(parse_sexpr(""), Error);
}

TEST(KernelExpr, RenameKeepsSplit) {
    Expr e = canonical(cond(p3(), {"C"}));
    Expr r = rename(e, {{"A", "X"}, {"C", "Z"}});
    EXPECT_EQ(r->rand, (VSet{"B", "X"}));
    EXPECT_EQ(r->context, (VSet{"Z"}));
}

TEST(KernelExpr, LatexRendering) {
    Expr e = canonical(at(cond(p3(), {"C"}), {{"C", "1"}}));
    EXPECT_EQ(render_latex(e), "p(A,B|C=1)");
    Expr s = canonical(marg(prod({atom("p", {"A"}, {"B"}), atom("q", {"B"})}), {"B"}));
    EXPECT_NE(render_latex(s).find("\\sum"), std::string::npos);
}

TEST(KernelExpr, NodeCountSharesSubtrees) {
    Expr a = atom("p", {"A"});
    EXPECT_EQ(node_count(prod({a, a})), 2u);
}

// Canonicalization must not change the value of an expression.
TEST(KernelExpr, CanonicalPreservesValue) {
    VSet vars{"A", "B", "C", "D"};
    Expr p = atom("p", vars);
    std::vector<Expr> cases = {
        quot(marg(prod({cond(p, {"B", "C", "D"}), marg(p, {"A"})}), {"B"}), marg(p, {"A", "C"})),
        at(cond(marg(p, {"D"}), {"B"}), {{"B", "1"}}),
        prod({cond(marg(p, {"C", "D"}), {"B"}), marg(p, {"A", "C", "D"}), cond(p, {"A", "B"})}),
        marg(quot(p, cond(marg(p, {"D"}), {"A", "C"})), {"D"}),
        quot(prod({atom("p", {"A"}), cond(marg(p, {"C", "D"}), {"A"})}), cond(marg(p, {"C", "D"}), {"A"})),
    };
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        DiscreteLaw law = random_law(vars, seed);
        for (const auto& e : cases) {
            Evaluator ev(law);
            Table raw = ev.eval(e);
            Table can = ev.eval(canonical(e));
            EXPECT_LE(brute::max_gap(raw, can), 1e-12) << render_sexpr(e);
        }
    }
}

TEST(Table, DivisionConventions) {
    EXPECT_EQ(div_cell(0.0, 0.0), 0.0);
    EXPECT_EQ(div_cell(0.0, std::nan("")), 0.0);
    EXPECT_TRUE(std::isnan(div_cell(1.0, 0.0)));
    EXPECT_TRUE(std::isnan(div_cell(1.0, std::nan(""))));
    EXPECT_EQ(mul_cell(0.0, std::nan("")), 0.0);
    EXPECT_DOUBLE_EQ(div_cell(1.0, 4.0), 0.25);
}

TEST(Table, SumSliceKeep) {
    Table t = make_table({"A", "B"}, {2, 3});
    for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = static_cast<double>(i);
    Table a = sum_out(t, {"B"});
    EXPECT_EQ(a.vars, (std::vector<std::string>{"A"}));
    EXPECT_DOUBLE_EQ(a.data[0], 0 + 1 + 2);
    EXPECT_DOUBLE_EQ(a.data[1], 3 + 4 + 5);
    Table s = slice(t, "B", 2);
    EXPECT_DOUBLE_EQ(s.data[1], 5);
    Table k = keep_only(t, {"B"});
    EXPECT_DOUBLE_EQ(k.data[0], 3);
    EXPECT_EQ(count_undefined(divide(t, sum_out(t, {"A", "B"}))), 0u);
}

TEST(Table, MultiplyBroadcasts) {
    Table a = make_table({"A"}, {2}, 2.0);
    Table b = make_table({"B"}, {3}, 0.5);
    Table c = multiply(a, b);
    EXPECT_EQ(c.vars, (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(c.size(), 6u);
    for (double x : c.data) EXPECT_DOUBLE_EQ(x, 1.0);
}
