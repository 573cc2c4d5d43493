#include "common.hpp"

using namespace pagcid;
using namespace fixtures;

namespace {

// Non-circle marks of p agree with m, and both share a skeleton.
bool marks_extend(const MixedGraph& p, const MixedGraph& m) {
    if (p.edge_count() != m.edge_count()) return false;
    for (const auto& e : p.edges()) {
        auto a = m.find(e.a), b = m.find(e.b);
        if (!a || !b || !m.adjacent(*a, *b)) return false;
        if (e.mark_a != Mark::Circle && *m.mark(*a, *b) != e.mark_a) return false;
        if (e.mark_b != Mark::Circle && *m.mark(*b, *a) != e.mark_b) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("graph oracle answers d-separation given the selection nodes") {
    auto o = graph_oracle(graph("confounded_chain.admg"));
    CHECK_FALSE(o->query(S("a"), S("c"), S("b")));
    CHECK_FALSE(o->query(S("a"), S("a"), {}));
    auto two = graph_oracle(parse_graph("node a output\nnode b output\n"));
    CHECK(two->query(S("a"), S("b"), {}));
    auto sel = graph_oracle(graph("selection_berkson.admg"));
    CHECK_FALSE(sel->query(S("a"), S("b"), {}));
    CHECK(sel->outputs() == S("a,b"));
}

TEST_CASE("skeleton search") {
    Skeleton sk = skeleton(*graph_oracle(graph("confounded_chain.admg")));
    CHECK(sk.graph.edge_count() == 3);
    Skeleton none = skeleton(*graph_oracle(parse_graph("node a output\nnode b output\nnode c output\n")));
    CHECK(none.graph.edge_count() == 0);
    REQUIRE(none.sepsets.find("a", "b"));
    CHECK(none.sepsets.find("a", "b")->empty());
    Skeleton two = skeleton(*graph_oracle(parse_graph("node a output\nnode b output\nedge a --> b\n")));
    CHECK(format_graph(two.graph) == "node a output\nnode b output\nedge a o-o b\n");
}

TEST_CASE("orientation rules") {
    MixedGraph chain = parse_graph("node a output\nnode b output\nnode c output\nedge a --> b\nedge b --> c\n");
    MixedGraph pc = fci(*graph_oracle(chain));
    CHECK(format_edge(pc, pc.index("a"), pc.index("b")) == "a o-o b");
    CHECK(format_edge(pc, pc.index("b"), pc.index("c")) == "b o-o c");

    MixedGraph collider = parse_graph("node a output\nnode b output\nnode c output\nedge a --> b\nedge c --> b\n");
    MixedGraph pk = fci(*graph_oracle(collider));
    CHECK(format_edge(pk, pk.index("a"), pk.index("b")) == "a o-> b");
    CHECK(format_edge(pk, pk.index("c"), pk.index("b")) == "c o-> b");

    SepsetTable empty;
    MixedGraph lone = parse_graph("node a output\nnode b output\n");
    CHECK(orient(lone, empty) == lone);
}

TEST_CASE("FCI on the worked examples") {
    // The uncovered circle 4-cycle is turned into tails.
    CHECK(fci(*graph_oracle(canonical_isadmg(graph("square.mag")))) == graph("square.mag"));
    CHECK(fci(*graph_oracle(graph("square.admg"))) == graph("square.mag"));

    MixedGraph a_hedge = graph("selection_hedge.admg");
    MixedGraph p_hedge = fci(*graph_oracle(a_hedge));
    CHECK(validate(p_hedge, GraphClass::PAG).empty());
    CHECK(marks_extend(p_hedge, mag_of(a_hedge)));
    Skeleton sk = skeleton(*graph_oracle(a_hedge));
    CHECK(orientation_closed(p_hedge, sk.sepsets));

    MixedGraph one = fci(*graph_oracle(parse_graph("node x output\n")));
    CHECK(one.size() == 1);
    CHECK(one.edge_count() == 0);

    OrientLog log;
    fci(*graph_oracle(graph("hard_target.admg")), &log);
    REQUIRE_FALSE(log.lines.empty());
    for (const auto& l : log.lines) CHECK(l[0] == 'R');
}

TEST_CASE("FCI output represents its source") {
    std::mt19937_64 rng(13);
    for (int k = 0; k < 40; ++k) {
        RandomGraphOptions opt;
        opt.outputs = 4 + k % 2;
        opt.selections = k % 3 == 0 ? 1 : 0;
        opt.inputs = k % 4 == 1 ? 1 : 0;
        MixedGraph a = random_admg(rng, opt);
        CAPTURE(format_graph(a));
        MixedGraph p = fci(*graph_oracle(a));
        MixedGraph m = mag_of(a);
        CHECK(marks_extend(p, m));
        Skeleton sk = skeleton(*graph_oracle(a));
        CHECK(orientation_closed(p, sk.sepsets));
        CHECK(fci(*graph_oracle(canonical_isadmg(m))) == p);
    }
}

TEST_CASE("distribution oracle agrees with the graph on a faithful model") {
    DiscreteSCM scm = parse_scm(read("backdoor.scm"));
    CHECK(fci(*distribution_oracle(scm)) == fci(*graph_oracle(graph_of(scm))));
}
