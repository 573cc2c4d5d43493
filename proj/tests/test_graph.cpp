#include "common.hpp"

using namespace pagcid;
using namespace fixtures;

TEST_CASE("graph text round-trips and normalizes edge direction") {
    const char* text =
        "# comment\n"
        "node b output\n"
        "node a input   # trailing\n"
        "node s selection\n"
        "node u latent\n"
        "  edge a   --> b\n"
        "edge s <-o b\n"
        "edge u o-- b\n";
    MixedGraph g = parse_graph(text);
    CHECK(g.size() == 4);
    CHECK(g.kind(g.index("a")) == NodeKind::Input);
    CHECK(directed(g, g.index("a"), g.index("b")));
    CHECK(is_mark(g, g.index("s"), g.index("b"), Mark::Arrow));
    CHECK(is_mark(g, g.index("b"), g.index("s"), Mark::Circle));
    CHECK(is_mark(g, g.index("b"), g.index("u"), Mark::Tail));
    CHECK(parse_graph(format_graph(g)) == g);
}

TEST_CASE("every edge token parses to its marks") {
    struct Case {
        const char* tok;
        Mark at_a, at_b;
    };
    for (auto c : {Case{"-->", Mark::Tail, Mark::Arrow}, Case{"<->", Mark::Arrow, Mark::Arrow},
                   Case{"o->", Mark::Circle, Mark::Arrow}, Case{"o-o", Mark::Circle, Mark::Circle},
                   Case{"---", Mark::Tail, Mark::Tail}, Case{"o--", Mark::Circle, Mark::Tail}}) {
        MixedGraph g = parse_graph(std::string("node a output\nnode b output\nedge a ") + c.tok + " b\n");
        CHECK(*g.mark(0, 1) == c.at_a);
        CHECK(*g.mark(1, 0) == c.at_b);
        CHECK(edge_token(c.at_a, c.at_b) == c.tok);
    }
}

TEST_CASE("malformed graph text is rejected") {
    CHECK_THROWS_AS(parse_graph("node a output\nnode b output\nedge a --> b\nedge b <-- a\n"), GraphError);
    CHECK_THROWS_AS(parse_graph("node a output\nnode b output\nedge a ~~> b\n"), GraphError);
    CHECK_THROWS_AS(parse_graph("node a output\nedge a --> z\n"), GraphError);
    CHECK_THROWS_AS(parse_graph("node a weird\n"), GraphError);
    CHECK_THROWS_AS(parse_graph("node a output\nnode a output\n"), GraphError);
    CHECK_THROWS_AS(parse_graph("node a output\nedge a --> a\n"), GraphError);
}

TEST_CASE("set flags are normalized ascending") {
    CHECK(parse_set("c, a,b,a") == NodeSet{"a", "b", "c"});
    CHECK(parse_set("").empty());
    CHECK(format_set(NodeSet{"c1", "a", "c2"}) == "{a,c1,c2}");
}

TEST_CASE("validate reports class violations") {
    CHECK(validate(graph("empty.g"), GraphClass::MAG).empty());
    MixedGraph cyc = parse_graph("node a output\nnode b output\nnode c output\nedge a --> b\nedge b --> c\nedge c --> a\n");
    CHECK_FALSE(validate(cyc, GraphClass::ADMG).empty());
    MixedGraph almost = parse_graph("node a output\nnode b output\nedge a --> b\nnode c output\nedge b --> c\nedge a <-> c\n");
    CHECK_FALSE(validate(almost, GraphClass::MAG).empty());
    CHECK(validate(almost, GraphClass::ADMG).empty());
    MixedGraph arrow_into_undirected =
        parse_graph("node a output\nnode b output\nnode c output\nedge a --> b\nedge b --- c\n");
    CHECK_FALSE(validate(arrow_into_undirected, GraphClass::MAG).empty());
    CHECK(validate(graph("square.mag"), GraphClass::MAG).empty());
    CHECK(validate(graph("hard_target.pag"), GraphClass::PAG).empty());
}

TEST_CASE("ancestral closures") {
    MixedGraph g = graph("confounded_chain.admg");
    Bits observed = g.all() & ~g.latents();
    CHECK(set(g, ancestors(g, bits(g, "c"), observed)) == S("a,b,c"));
    CHECK(ancestors(g, 0) == 0);
    MixedGraph lone = parse_graph("node a output\nnode b output\n");
    CHECK(set(lone, ancestors(lone, bits(lone, "a"))) == S("a"));

    MixedGraph chain = parse_graph("node a output\nnode b output\nnode c output\nedge a o-o b\nedge b o-o c\n");
    CHECK(set(chain, possible_ancestors(chain, bits(chain, "c"))) == S("a,b,c"));
    CHECK(possible_anteriors(chain, 0) == 0);

    MixedGraph p = graph("hard_target.pag");
    // Every path from a, t or c1 towards b passes an arrowhead at c1.
    CHECK(set(p, possible_anteriors(p, bits(p, "b"))) == S("b,c2"));
    CHECK(set(p, possible_anteriors(p, bits(p, "c1"))) == S("a,b,c1,c2,t"));
}

TEST_CASE("buckets, pc-components and regions") {
    MixedGraph m = graph("square.mag");
    auto bk = buckets(m, m.all());
    REQUIRE(bk.size() == 1);
    CHECK(bk[0] == m.all());
    CHECK(region(m, m.all(), bits(m, "a")) == m.all());
    CHECK(region(m, m.all(), 0) == 0);
    CHECK(buckets(m, 0).empty());

    MixedGraph dag = graph("two_chains.mag");
    CHECK(buckets(dag, dag.all()).size() == 5);
    CHECK(region(dag, dag.all(), bits(dag, "b")) == bits(dag, "b,a"));

    MixedGraph nine = graph("selection_hedge.admg");
    Bits D = bits(nine, "a,b2,c");
    CHECK(subset(bits(nine, "b2,c"), pc_component(nine, D, nine.index("a"))));

    MixedGraph iso = parse_graph("node b output\nnode x output\n");
    CHECK(pc_component(iso, iso.all(), iso.index("b")) == bits(iso, "b"));

    // d*→a→b with d not adjacent to b: the edge is visible and does not join a to Pc(b).
    MixedGraph vis = parse_graph("node a output\nnode b output\nnode d output\nedge d --> a\nedge a --> b\n");
    CHECK_FALSE(has(pc_component(vis, vis.all(), vis.index("b")), vis.index("a")));
}

TEST_CASE("region is monotone and contains its seed") {
    MixedGraph p = graph("hard_target.pag");
    Bits V = p.all();
    for (Bits b1 = 0; b1 <= V; ++b1)
        for (Bits b2 = b1;; b2 = (b2 + 1) | b1) {
            CHECK(subset(region(p, V, b1), region(p, V, b2)));
            CHECK(subset(b1, region(p, V, b1)));
            if (b2 == V) break;
        }
}

TEST_CASE("bucket topological order never points backwards") {
    MixedGraph p = graph("hard_target.pag");
    auto order = bucket_topological_order(p, p.all());
    Bits seen = 0;
    for (Bits bk : order) seen |= bk;
    CHECK(seen == p.all());
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j)
            for (int x : members(order[j]))
                for (int y : members(order[i])) CHECK_FALSE(potentially_directed_edge(p, x, y));
    CHECK(bucket_topological_order(p, 0).empty());
    CHECK(bucket_topological_order(p, bits(p, "a")).size() == 1);
}

TEST_CASE("inducing paths") {
    MixedGraph a2 = graph("selection_berkson.admg");
    CHECK(inducing_path_exists(a2, a2.index("a"), a2.index("b"), 0, a2.selections()));
    MixedGraph two = parse_graph("node a output\nnode b output\n");
    CHECK_FALSE(inducing_path_exists(two, 0, 1, 0, 0));
    MixedGraph edge = parse_graph("node a output\nnode b output\nedge a --> b\n");
    CHECK(inducing_path_exists(edge, 0, 1, 0, 0));
}

TEST_CASE("circle components partition the nodes") {
    MixedGraph p = graph("hard_target.pag");
    auto comps = circle_components(p, p.all());
    Bits seen = 0;
    for (Bits c : comps) {
        CHECK((seen & c) == 0);
        seen |= c;
    }
    CHECK(seen == p.all());
    CHECK(circle_components(p, 0).empty());
    MixedGraph dag = graph("two_chains.mag");
    CHECK(circle_components(dag, dag.all()).size() == 5);
}

TEST_CASE("discriminating paths") {
    MixedGraph g = parse_graph(
        "node x output\nnode v output\nnode y output\nnode z output\n"
        "edge x --> v\nedge v <-> y\nedge v --> z\nedge y o-o z\n");
    auto paths = discriminating_paths(g, g.index("y"), g.index("z"));
    REQUIRE(paths.size() == 1);
    CHECK(paths[0] == std::vector<int>{g.index("x"), g.index("v"), g.index("y"), g.index("z")});

    MixedGraph tri = parse_graph("node a output\nnode b output\nnode c output\nedge a --> b\nedge b --> c\nedge a --> c\n");
    CHECK(discriminating_paths(tri, tri.index("b"), tri.index("c")).empty());
}

TEST_CASE("DOT export names every node and edge") {
    std::string dot = to_dot(graph("hard_target.pag"));
    CHECK(dot.find("digraph") != std::string::npos);
    for (const char* id : {"a", "b", "c1", "c2", "t"}) CHECK(dot.find(id) != std::string::npos);
}
