#include <gtest/gtest.h>

#include <random>

#include "brute.hpp"
#include "mdid/graph.hpp"
#include "mdid/oracle.hpp"

using namespace mdid;

namespace {

// B -> M -> A -> Y, B <-> A, B <-> Y
Cadmg front_door() { return brute::fixture("fig1a.graph").graph; }

}  // namespace

TEST(GraphCore, FixDropsArrowheadsIntoVertex) {
    Cadmg g = front_door();
    g.fix("A");
    EXPECT_TRUE(g.is_fixed("A"));
    EXPECT_FALSE(g.has_directed("M", "A"));
    EXPECT_FALSE(g.has_bidirected("B", "A"));
    EXPECT_TRUE(g.has_directed("A", "Y"));
    EXPECT_TRUE(g.has_bidirected("B", "Y"));
}

TEST(GraphCore, FixIsIdempotentOnTheGraph) {
    Cadmg g = front_door();
    g.fix("M");
    Cadmg h = g;
    h.fix("M");
    EXPECT_EQ(g, h);
}

TEST(GraphCore, CycleRejected) {
    Cadmg g;
    g.add_vertex("A");
    g.add_vertex("B");
    g.add_directed("A", "B");
    EXPECT_THROW(g.add_directed("B", "A"), Error);
    EXPECT_THROW(g.add_directed("A", "A"), Error);
}

TEST(GraphCore, UnknownVertexThrows) {
    Cadmg g = front_door();
    EXPECT_THROW(g.pa("Q"), Error);
    EXPECT_THROW(g.add_directed("Q", "A"), Error);
}

TEST(GraphCore, Genealogy) {
    Cadmg g = front_door();
    EXPECT_EQ(parents(g, {"A"}), (VSet{"M"}));
    EXPECT_EQ(children(g, {"B"}), (VSet{"M"}));
    EXPECT_EQ(descendants(g, {"M"}), (VSet{"M", "A", "Y"}));
    EXPECT_EQ(ancestors(g, {"A"}), (VSet{"A", "M", "B"}));
    EXPECT_EQ(nondescendants(g, {"A"}), (VSet{"B", "M"}));
    EXPECT_EQ(genealogy(g, {Relation::ancestors, {"Y"}}), (VSet{"A", "B", "M", "Y"}));
}

TEST(GraphCore, Districts) {
    Cadmg g = front_door();
    auto d = districts(g);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(district_of(g, "Y"), (VSet{"A", "B", "Y"}));
    EXPECT_EQ(district_of(g, "M"), (VSet{"M"}));
    g.fix("B");
    // fixed vertices drop out of districts and take their bidirected edges along
    EXPECT_EQ(district_of(g, "Y"), (VSet{"Y"}));
    EXPECT_EQ(district_of(g, "A"), (VSet{"A"}));
}

TEST(GraphCore, MarkovBlanket) {
    Cadmg g = front_door();
    EXPECT_EQ(markov_blanket(g, {"Y"}), (VSet{"A", "B", "M"}));
    EXPECT_EQ(markov_blanket(g, {"M"}), (VSet{"B"}));
}

TEST(GraphCore, TopologicalOrderRespectsEdges) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 30; ++i) {
        Cadmg g = random_dag(7, 0.4, rng);
        auto order = topological_order(g);
        ASSERT_EQ(order.size(), g.size());
        std::map<std::string, std::size_t> pos;
        for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
        for (const auto& [a, b] : g.directed_edges()) EXPECT_LT(pos[a], pos[b]);
    }
}

TEST(GraphCore, InducedSubgraphKeepsStatusAndEdges) {
    Cadmg g = front_door();
    g.fix("M");
    Cadmg h = induced_subgraph(g, {"M", "A", "Y"});
    EXPECT_TRUE(h.is_fixed("M"));
    EXPECT_TRUE(h.has_directed("M", "A"));
    EXPECT_FALSE(h.has_vertex("B"));
    EXPECT_TRUE(h.bidirected_edges().empty());
}

TEST(GraphCore, SelectedVertexKeepsValue) {
    Cadmg g = front_door();
    g.select("B", "1");
    EXPECT_TRUE(g.is_selected("B"));
    EXPECT_EQ(g.vertex("B").value, std::optional<std::string>("1"));
    EXPECT_EQ(g.selected_vertices(), (VSet{"B"}));
}

TEST(GraphCore, EqualityIgnoresInsertionOrder) {
    Cadmg a, b;
    for (auto v : {"X", "Y", "Z"}) a.add_vertex(v);
    for (auto v : {"Z", "X", "Y"}) b.add_vertex(v);
    a.add_directed("X", "Y");
    a.add_bidirected("Y", "Z");
    b.add_bidirected("Z", "Y");
    b.add_directed("X", "Y");
    EXPECT_EQ(a, b);
    b.fix("X");
    EXPECT_FALSE(a == b);
}
