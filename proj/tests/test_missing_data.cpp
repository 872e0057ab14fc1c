#include <gtest/gtest.h>

#include "brute.hpp"
#include "mdid/md_id.hpp"
#include "mdid/missing_data.hpp"
#include "mdid/oracle.hpp"

using namespace mdid;

namespace {

GraphFile parse(const std::string& text) { return parse_graph_file(text); }

}  // namespace

TEST(MissingData, TripleNaming) {
    EXPECT_EQ(triple_for("X1"), (Triple{"X1^1", "R1", "X1"}));
    EXPECT_EQ(triple_for("Age"), (Triple{"Age^1", "R_Age", "Age"}));
}

TEST(MissingData, FixtureIsValid) {
    GraphFile f = brute::fixture("fig2a.graph");
    EXPECT_TRUE(md_dag_violations(f.graph, f.roles).empty());
    MdDag m = f.md_dag();
    EXPECT_EQ(m.targets(), (VSet{"X1^1", "X2^1", "X3^1"}));
    EXPECT_EQ(m.indicators(), (VSet{"R1", "R2", "R3"}));
    EXPECT_EQ(m.law_vars(), (VSet{"R1", "R2", "R3", "X1", "X2", "X3"}));
}

TEST(MissingData, IndicatorMayNotCauseCounterfactual) {
    GraphFile f = parse("var X1 missing\nvar X2 missing\nedge R1 -> X2^1\n");
    EXPECT_FALSE(md_dag_violations(f.graph, f.roles).empty());
    EXPECT_THROW(f.md_dag(), ValidationError);
}

TEST(MissingData, ProxyNeedsBothParents) {
    GraphFile f = parse("var X1 missing\n");
    Cadmg g;
    for (const auto& v : f.graph.vertices()) g.add_vertex(v);
    g.add_directed("X1^1", "X1");  // R1 -> X1 missing
    auto v = md_dag_violations(g, f.roles);
    ASSERT_FALSE(v.empty());
}

TEST(MissingData, ProxyHasNoChildren) {
    GraphFile f = parse("var X1 missing\nvar X2 missing\n");
    f.graph.add_directed("X1", "R2");
    EXPECT_FALSE(md_dag_violations(f.graph, f.roles).empty());
}

TEST(MissingData, LawViewReadsTargetsOnlyWhenPinned) {
    MdDag m = brute::md_fixture("fig2a.graph");
    EXPECT_EQ(m.view().law_var("X1^1", {"R1"}), std::optional<std::string>("X1"));
    EXPECT_EQ(m.view().law_var("X1^1", {}), std::nullopt);
    EXPECT_EQ(m.view().law_var("R2", {}), std::optional<std::string>("R2"));
}

TEST(MissingData, ColluderScan) {
    using P = std::pair<std::string, std::string>;
    EXPECT_EQ(colluder_scan(brute::md_fixture("appendix_c.graph")), (std::vector<P>{{"R2", "R1"}}));
    EXPECT_TRUE(colluder_scan(brute::md_fixture("fig3a.graph")).empty());
    EXPECT_EQ(colluder_scan(brute::md_fixture("fig2a.graph")),
              (std::vector<P>{{"R2", "R1"}, {"R3", "R1"}, {"R3", "R2"}}));
}

// With the true propensities the assembled target law is exact.
TEST(MissingData, AssembleTargetLawUnderMcar) {
    MdDag m = parse("var X1 missing\nvar X2 missing\nedge X1^1 -> X2^1\n").md_dag();
    std::map<std::string, Expr> q{{"R1", atom("p", {"R1"})}, {"R2", atom("p", {"R2"})}};
    Expr f = assemble_target_law(m, q);
    auto rep = verify_functional(m, f, VerifyTarget::target_law, 20, 4);
    EXPECT_LE(rep.max_error, 1e-12);
}

TEST(MissingData, AssembleWithoutIndicators) {
    MdDag m = parse("var A observed\nvar B observed\nedge A -> B\n").md_dag();
    EXPECT_TRUE(same(assemble_target_law(m, {}), atom("p", {"A", "B"})))
        << render_sexpr(assemble_target_law(m, {}));
}

TEST(MissingData, AssembleRejectsMissingPropensity) {
    MdDag m = brute::md_fixture("appendix_c.graph");
    EXPECT_THROW(assemble_target_law(m, {{"R1", atom("p", {"R1"})}}), Error);
}

TEST(MissingData, FastPathBlockers) {
    EXPECT_EQ(lemma2_blockers(brute::md_fixture("fig2a.graph")), (VSet{"R2", "R3"}));
    EXPECT_TRUE(lemma2_blockers(brute::md_fixture("fig3a.graph")).empty());
    EXPECT_FALSE(lemma2_schedule(brute::md_fixture("fig2a.graph")).has_value());
}

TEST(MissingData, FastPathWithoutIndicatorEdges) {
    MdDag m = brute::md_fixture("fig2d.graph");
    auto s = lemma2_schedule(m);
    ASSERT_TRUE(s.has_value());
    for (const auto& [r, sched] : *s) {
        ASSERT_EQ(sched.classes.size(), 1u) << r;
        EXPECT_EQ(sched.classes[0], VSet{r});
        EXPECT_EQ(sched.promoted[0], m.targets());
    }
}

// R3 -> R2 puts R2 below R3: fixed first, then R3.
TEST(MissingData, FastPathOrdersDescendantsFirst) {
    MdDag m = brute::md_fixture("fig3a.graph");
    auto s = lemma2_schedule(m);
    ASSERT_TRUE(s.has_value());
    const FixingSchedule& r3 = s->at("R3");
    ASSERT_EQ(r3.classes.size(), 2u);
    std::size_t a = r3.class_of("R2"), b = r3.class_of("R3");
    EXPECT_TRUE(r3.precedes(a, b));
    for (const auto& [r, sched] : *s) {
        EXPECT_TRUE(validate_schedule(m, sched).valid) << r << "\n" << sched.transcript();
        EXPECT_TRUE(check_indicator_schedule(m, r, sched).identified) << r;
    }
}
