#include "common.hpp"

using namespace pagcid;
using namespace fixtures;

namespace {

std::string edge_of(const MixedGraph& g, const char* a, const char* b) { return format_edge(g, g.index(a), g.index(b)); }

}  // namespace

TEST_CASE("edge visibility") {
    MixedGraph m_sel = graph("selected_chain.mag");
    CHECK_FALSE(is_visible(m_sel, m_sel.index("a"), m_sel.index("b")));

    MixedGraph g = parse_graph("node a output\nnode b output\nnode c output\nedge c --> a\nedge a --> b\n");
    CHECK(is_visible(g, g.index("a"), g.index("b")));

    ManipulatedGraph h = manipulate(graph("hard_target.pag"), {}, S("t"));
    // t is an input after the hard manipulation; edges out of inputs are visible.
    MixedGraph in = parse_graph("node t input\nnode c output\nedge t --> c\n");
    CHECK(is_visible(in, in.index("t"), in.index("c")));

    // Collider path c*→v↔a→b with v a parent of b and c not adjacent to b.
    MixedGraph col = parse_graph(
        "node a output\nnode b output\nnode c output\nnode v output\n"
        "edge c --> v\nedge v <-> a\nedge v --> b\nedge a --> b\n");
    CHECK(is_visible(col, col.index("a"), col.index("b")));
}

TEST_CASE("soft manipulation of MAGs") {
    ManipulatedGraph h_fork = manipulate(graph("fork.mag"), S("a"), {});
    const MixedGraph& g_fork = h_fork.graph;
    CHECK(g_fork.kind(g_fork.index("I__a")) == NodeKind::Input);
    CHECK(edge_of(g_fork, "I__a", "a") == "I__a --o a");
    CHECK(edge_of(g_fork, "I__a", "b") == "I__a --> b");
    CHECK(edge_of(g_fork, "I__a", "c") == "I__a --> c");

    ManipulatedGraph h_sel = manipulate(graph("selected_chain.mag"), S("a"), {});
    const MixedGraph& g_sel = h_sel.graph;
    CHECK(edge_of(g_sel, "I__a", "a") == "I__a --- a");
    CHECK(edge_of(g_sel, "I__a", "b") == "I__a --> b");
    CHECK(edge_of(g_sel, "I__a", "c") == "I__a --- c");
    CHECK_FALSE(g_sel.adjacent(g_sel.index("I__a"), g_sel.index("d")));

    MixedGraph m = graph("two_chains.mag");
    CHECK(manipulate(m, {}, {}).graph == m);
}

TEST_CASE("hard manipulation") {
    ManipulatedGraph h_hard = manipulate(graph("hard_target.pag"), {}, S("t"));
    const MixedGraph& g_hard = h_hard.graph;
    CHECK(g_hard.kind(g_hard.index("t")) == NodeKind::Input);
    CHECK(edge_of(g_hard, "t", "c1") == "t --o c1");
    CHECK_FALSE(g_hard.adjacent(g_hard.index("t"), g_hard.index("a")));
    CHECK_FALSE(g_hard.adjacent(g_hard.index("t"), g_hard.index("c2")));
    CHECK(edge_of(g_hard, "a", "c1") == "a o-> c1");

    ManipulatedGraph h_hedge = manipulate(graph("selection_hedge.admg"), {}, S("b2"));
    const MixedGraph& g_hedge = h_hedge.graph;
    CHECK(g_hedge.kind(g_hedge.index("b2")) == NodeKind::Input);
    CHECK_FALSE(g_hedge.adjacent(g_hedge.index("b2"), g_hedge.index("c")));
    CHECK(edge_of(g_hedge, "b2", "a") == "b2 --> a");
    CHECK(edge_of(g_hedge, "b2", "s") == "b2 --> s");

    CHECK_THROWS_AS(manipulate(graph("selection_hedge.admg"), {}, S("s")), GraphError);
    CHECK_THROWS_AS(manipulate(graph("two_chains.mag"), S("a"), S("a")), GraphError);
}

TEST_CASE("manipulations need not commute across kinds") {
    MixedGraph m = graph("mixed_order.mag");
    ManipulatedGraph hard_first = soft_manipulate(hard_manipulate(as_manipulated(m), S("a"), GraphClass::MAG), S("b"), GraphClass::MAG);
    ManipulatedGraph soft_first = hard_manipulate(soft_manipulate(as_manipulated(m), S("b"), GraphClass::MAG), S("a"), GraphClass::MAG);
    CHECK(edge_of(hard_first.graph, "I__b", "b") == "I__b --o b");
    CHECK(edge_of(hard_first.graph, "I__b", "c") == "I__b --> c");
    CHECK(edge_of(soft_first.graph, "I__b", "b") == "I__b --> b");
    CHECK_FALSE(soft_first.graph.adjacent(soft_first.graph.index("I__b"), soft_first.graph.index("c")));
    CHECK_FALSE(hard_first.graph == soft_first.graph);
}

TEST_CASE("manipulations of one kind commute") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 40; ++k) {
        RandomGraphOptions opt;
        opt.outputs = 4;
        opt.selections = k % 2;
        MixedGraph m = random_mag(rng, opt);
        Bits V = m.outputs();
        Bits A = V & (rng() | 1), B = V & rng() & ~A;
        NodeSet a = m.to_set(A), b = m.to_set(B), ab = m.to_set(A | B);
        CAPTURE(format_graph(m));
        auto base = as_manipulated(m);
        CHECK(hard_manipulate(hard_manipulate(base, a, GraphClass::MAG), b, GraphClass::MAG).graph ==
              hard_manipulate(base, ab, GraphClass::MAG).graph);
        CHECK(soft_manipulate(soft_manipulate(base, a, GraphClass::MAG), b, GraphClass::MAG).graph ==
              soft_manipulate(base, ab, GraphClass::MAG).graph);
    }
}

TEST_CASE("soft manipulation preserves visibility and hard manipulation adds no arrowheads at targets") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 40; ++k) {
        RandomGraphOptions opt;
        opt.outputs = 5;
        opt.selections = k % 2;
        MixedGraph m = random_mag(rng, opt);
        NodeSet D = m.to_set(m.outputs() & rng());
        ManipulatedGraph h = manipulate(m, D, {}, GraphClass::MAG);
        for (const auto& e : m.edges()) {
            if (e.mark_a != Mark::Tail || e.mark_b != Mark::Arrow) continue;
            int a = m.index(e.a), b = m.index(e.b);
            CHECK(is_visible(m, a, b) == is_visible(h.graph, h.graph.index(e.a), h.graph.index(e.b)));
        }
        CHECK(h.graph.edge_count() >= m.edge_count());
        NodeSet T = m.to_set(m.outputs() & rng());
        ManipulatedGraph t = manipulate(m, {}, T, GraphClass::MAG);
        for (const auto& x : T)
            for (const auto& adj : t.graph.adj(t.graph.index(x))) CHECK(adj.near != Mark::Arrow);
    }
}

TEST_CASE("manipulated graphs serialize with headers") {
    ManipulatedGraph h = manipulate(graph("selected_chain.mag"), S("a"), S("d"));
    std::string text = format_manipulated(h);
    CHECK(text.rfind("soft a\nhard d", 0) == 0);
    ManipulatedGraph back = parse_manipulated(text);
    CHECK(back == h);
    CHECK(back.soft == S("a"));
    CHECK(back.hard == S("d"));
    CHECK_THROWS_AS(parse_plain_graph("node I__x output\n"), GraphError);
}
