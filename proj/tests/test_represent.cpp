#include "common.hpp"

using namespace pagcid;
using namespace fixtures;

namespace {

bool has_edge(const MixedGraph& g, const NodeId& a, const char* tok, const NodeId& b) {
    auto ia = g.find(a), ib = g.find(b);
    if (!ia || !ib || !g.adjacent(*ia, *ib)) return false;
    return format_edge(g, *ia, *ib) == a + " " + tok + " " + b || format_edge(g, *ib, *ia) == a + " " + tok + " " + b;
}

bool confounded(const MixedGraph& g, const NodeId& a, const NodeId& b) {
    if (has_edge(g, a, "<->", b)) return true;
    NodeId u = confounder_id(std::min(a, b), std::max(a, b));
    return g.contains(u) && g.kind(g.index(u)) == NodeKind::Latent;
}

}  // namespace

TEST_CASE("MAG of the selection examples") {
    MixedGraph m1 = mag_of(graph("selection_apart.admg"));
    CHECK(m1.edge_count() == 0);
    CHECK(m1.size() == 2);
    MixedGraph m2 = mag_of(graph("selection_berkson.admg"));
    CHECK(m2.edge_count() == 1);
    CHECK(undirected(m2, m2.index("a"), m2.index("b")));
    CHECK(mag_of(parse_graph("node a output\nnode b output\n")).edge_count() == 0);
}

TEST_CASE("MAG marks follow ancestry") {
    MixedGraph a = graph("fork_a1.admg");
    MixedGraph m = mag_of(a);
    CHECK(m == graph("fork.mag"));
    CHECK(mag_of(graph("fork_a2.admg")) == graph("fork.mag"));
    CHECK(mag_of(graph("selected_chain_a1.admg")) == graph("selected_chain.mag"));
    CHECK(mag_of(graph("selected_chain_a2.admg")) == graph("selected_chain.mag"));
    CHECK(mag_of(graph("square.admg")) == graph("square.mag"));
}

TEST_CASE("canonical isADMG") {
    MixedGraph c = canonical_isadmg(graph("square.mag"));
    CHECK(count(c.selections()) == 4);
    CHECK(c.edge_count() == 8);
    for (const auto& e : c.edges()) CHECK((e.mark_a == Mark::Tail && e.mark_b == Mark::Arrow));
    CHECK(c.contains("s__a__c1"));
    CHECK(mag_of(c) == graph("square.mag"));

    MixedGraph plain = graph("two_chains.mag");
    MixedGraph cp = canonical_isadmg(plain);
    CHECK(cp.selections() == 0);
    CHECK(cp.edge_count() == plain.edge_count());

    MixedGraph one = canonical_isadmg(parse_graph("node a output\nnode b output\nedge a --- b\n"));
    CHECK(has_edge(one, "a", "-->", "s__a__b"));
    CHECK(has_edge(one, "b", "-->", "s__a__b"));
}

TEST_CASE("latent marginalization") {
    MixedGraph chain = parse_graph("node a output\nnode b output\nnode l latent\nedge a --> l\nedge l --> b\n");
    MixedGraph m = marginalize_latents(chain);
    CHECK(m.size() == 2);
    CHECK(directed(m, m.index("a"), m.index("b")));

    MixedGraph fork = parse_graph("node a output\nnode b output\nnode l latent\nedge l --> a\nedge l --> b\n");
    MixedGraph f = marginalize_latents(fork);
    CHECK(bidirected(f, f.index("a"), f.index("b")));

    MixedGraph none = graph("two_chains.mag");
    CHECK(marginalize_latents(none) == none);
}

TEST_CASE("random representation round-trips") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 60; ++k) {
        RandomGraphOptions opt;
        opt.outputs = 3 + k % 3;
        opt.selections = k % 2;
        opt.latents = k % 3 == 0 ? 1 : 0;
        opt.inputs = k % 4 == 0 ? 1 : 0;
        MixedGraph a = random_admg(rng, opt);
        MixedGraph m = mag_of(a);
        CAPTURE(format_graph(a));
        CHECK(validate(m, GraphClass::MAG).empty());
        CHECK(mag_of(canonical_isadmg(m)) == m);
        CHECK(mag_of(marginalize_latents(a)) == m);
        MixedGraph pert = perturb_isadmg(m, rng);
        CHECK(mag_of(pert) == m);
    }
}

TEST_CASE("MAG enumeration") {
    MixedGraph m_sq = graph("square.mag");
    auto r = enumerate_mags(m_sq);
    REQUIRE(r.mags.size() == 1);
    CHECK(r.mags[0] == m_sq);

    MixedGraph plain = graph("two_chains.mag");
    EnumerateOptions unfiltered;
    unfiltered.filter_by_fci = false;
    auto rp = enumerate_mags(plain, unfiltered);
    REQUIRE(rp.mags.size() == 1);
    CHECK(rp.mags[0] == plain);
    // The directed tree is not an FCI fixpoint, so no member of its class reproduces it.
    CHECK(enumerate_mags(plain).mags.empty());

    MixedGraph p = graph("hard_target.pag");
    EnumerateOptions raw;
    raw.filter_by_fci = false;
    auto all = enumerate_mags(p, raw);
    int circles = 0;
    for (const auto& e : p.edges()) circles += (e.mark_a == Mark::Circle) + (e.mark_b == Mark::Circle);
    CHECK(all.mags.size() <= (std::size_t{1} << circles));
    for (const auto& m : all.mags) {
        CHECK(validate(m, GraphClass::MAG).empty());
        CHECK(m.edge_count() == p.edge_count());
        for (const auto& e : p.edges()) {
            int a = m.index(e.a), b = m.index(e.b);
            if (e.mark_a != Mark::Circle) CHECK(*m.mark(a, b) == e.mark_a);
            if (e.mark_b != Mark::Circle) CHECK(*m.mark(b, a) == e.mark_b);
        }
    }
}

TEST_CASE("orienting a COPAG into a member MAG") {
    MixedGraph m_sq = graph("square.mag");
    CHECK(orient_to_mag(m_sq, 0) == m_sq);

    MixedGraph m_hedge = mag_of(graph("selection_hedge.admg"));
    MixedGraph p_hedge = fci(*graph_oracle(graph("selection_hedge.admg")));
    MixedGraph o = orient_to_mag(p_hedge, 0);
    CHECK(validate(o, GraphClass::MAG).empty());
    auto members = enumerate_mags(p_hedge).mags;
    CHECK(std::find(members.begin(), members.end(), o) != members.end());
    CHECK(std::find(members.begin(), members.end(), m_hedge) != members.end());

    // A protected source with an o→ edge keeps it as an invisible directed edge.
    MixedGraph p = parse_graph("node a output\nnode b output\nnode c output\nedge a o-> b\nedge c o-> b\nedge a o-o c\n");
    MixedGraph q = orient_to_mag(p, bits(p, "a"));
    CHECK(directed(q, q.index("a"), q.index("b")));
    CHECK_FALSE(is_visible(q, q.index("a"), q.index("b")));
}

TEST_CASE("bidirected witness for an invisible edge") {
    MixedGraph m_fork = graph("fork.mag");
    MixedGraph w = bidirected_witness(m_fork, m_fork.index("a"), m_fork.index("b"));
    CHECK(mag_of(w) == m_fork);
    CHECK(confounded(w, "a", "b"));

    MixedGraph m_sel = graph("selected_chain.mag");
    MixedGraph w_sel = bidirected_witness(m_sel, m_sel.index("a"), m_sel.index("b"));
    CHECK(mag_of(w_sel) == m_sel);
    CHECK(confounded(w_sel, "a", "b"));

    MixedGraph vis = parse_graph("node t input\nnode c output\nedge t --> c\n");
    CHECK_THROWS_AS(bidirected_witness(vis, vis.index("t"), vis.index("c")), GraphError);
}

TEST_CASE("separation failure witnesses") {
    MixedGraph m_fork = graph("fork.mag");
    MixedGraph w_fork = separation_failure_witness(m_fork, S("a"), {}, S("b"), S("I__a"), S("a"));
    CHECK(mag_of(w_fork) == m_fork);
    CHECK(confounded(w_fork, "a", "b"));
    ManipulatedGraph h_fork = manipulate(w_fork, S("a"), {});
    Bits sel_fork = h_fork.graph.selections();
    CHECK_FALSE(id_separated(h_fork, bits(h_fork.graph, "b"), bits(h_fork.graph, "I__a"), bits(h_fork.graph, "a") | sel_fork));

    MixedGraph m_chains = graph("two_chains.mag");
    MixedGraph w_chains = separation_failure_witness(m_chains, S("a"), {}, S("d"), S("I__a"), S("a"));
    CHECK(mag_of(w_chains) == m_chains);
    CHECK(confounded(w_chains, "a", "b"));
    ManipulatedGraph h_chains = manipulate(w_chains, S("a"), {});
    CHECK_FALSE(id_separated(h_chains, bits(h_chains.graph, "d"), bits(h_chains.graph, "I__a"), bits(h_chains.graph, "a") | h_chains.graph.selections()));

    // An open path made of MAG edges only: the canonical isADMG already witnesses it.
    MixedGraph chain = parse_graph("node a output\nnode b output\nedge a --> b\n");
    CHECK(separation_failure_witness(chain, {}, {}, S("b"), S("a"), {}) == canonical_isadmg(chain));
}
