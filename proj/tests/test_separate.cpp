#include "common.hpp"

using namespace pagcid;
using namespace fixtures;

namespace {

bool id_sep(const ManipulatedGraph& h, const char* a, const char* b, const char* c) {
    const MixedGraph& g = h.graph;
    return id_separated(h, bits(g, a), bits(g, b), bits(g, c));
}

}  // namespace

TEST_CASE("id-separation in the worked examples") {
    ManipulatedGraph m_fork = manipulate(graph("fork.mag"), S("a"), {});
    CHECK_FALSE(id_sep(m_fork, "b", "c", "a"));

    ManipulatedGraph p_hard = manipulate(graph("hard_target.pag"), {}, S("t"));
    CHECK(id_sep(p_hard, "a", "b", "c1,c2"));
    ManipulatedGraph a_hard = manipulate(graph("hard_target.admg"), {}, S("t"));
    CHECK_FALSE(id_sep(a_hard, "a", "b", "c1,c2,s"));
    auto walk = open_walk(a_hard, bits(a_hard.graph, "a"), bits(a_hard.graph, "b"), bits(a_hard.graph, "c1,c2,s"));
    REQUIRE(walk);
    CHECK(format_walk(a_hard.graph, *walk) == "a --> c1 <-- t");

    ManipulatedGraph m_chains = manipulate(graph("two_chains.mag"), S("a"), {});
    CHECK_FALSE(id_sep(m_chains, "d", "I__a", "a"));
    CHECK_FALSE(id_sep(m_chains, "e", "I__a", "a"));

    ManipulatedGraph m_sq = manipulate(graph("square.mag"), S("b"), {});
    CHECK(id_sep(m_sq, "a", "I__b", "b,c1,c2"));
    CHECK(id_sep(m_sq, "a", "I__b", "c1,c2"));
}

TEST_CASE("d-separation baseline") {
    ManipulatedGraph m_sel = manipulate(graph("selected_chain.mag"), S("a"), {});
    const MixedGraph& g_sel = m_sel.graph;
    CHECK_FALSE(d_separated(g_sel, bits(g_sel, "d"), bits(g_sel, "c"), bits(g_sel, "a")));
    // Every represented isADMG separates d from c given a and its selection nodes.
    std::mt19937_64 rng(1);
    std::vector<MixedGraph> reps{graph("selected_chain_a1.admg"), graph("selected_chain_a2.admg")};
    for (int k = 0; k < 20; ++k) reps.push_back(perturb_isadmg(graph("selected_chain.mag"), rng));
    for (const auto& a : reps) {
        REQUIRE(mag_of(a) == graph("selected_chain.mag"));
        ManipulatedGraph h = manipulate(a, S("a"), {});
        const MixedGraph& g = h.graph;
        CHECK(d_separated(g, bits(g, "d"), bits(g, "c"), bits(g, "a") | g.selections()));
    }

    ManipulatedGraph a1 = manipulate(graph("confounded_chain.admg"), S("a"), {});
    const MixedGraph& g1 = a1.graph;
    CHECK_FALSE(d_separated(g1, bits(g1, "c"), bits(g1, "I__a"), 0));

    MixedGraph two = parse_graph("node a output\nnode b output\n");
    CHECK_FALSE(d_separated(two, bits(two, "a"), bits(two, "a"), 0));
    CHECK(d_separated(two, bits(two, "a"), bits(two, "b"), 0));
}

TEST_CASE("open walks") {
    MixedGraph g = parse_graph("node a output\nnode b output\nedge a --> b\n");
    auto w = d_open_walk(g, bits(g, "a"), bits(g, "b"), 0);
    REQUIRE(w);
    CHECK(w->size() == 2);
    CHECK_FALSE(d_open_walk(parse_graph("node a output\nnode b output\n"), 1, 2, 0));
    ManipulatedGraph p_hard = manipulate(graph("hard_target.pag"), {}, S("t"));
    CHECK_FALSE(open_walk(p_hard, bits(p_hard.graph, "a"), bits(p_hard.graph, "b"), bits(p_hard.graph, "c1,c2")));
}

TEST_CASE("id-separation equals d-separation without inputs") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 60; ++k) {
        RandomGraphOptions opt;
        opt.outputs = 5;
        opt.selections = k % 2;
        MixedGraph a = random_admg(rng, opt);
        ManipulatedGraph h = as_manipulated(a);
        Bits V = a.outputs();
        for (int q = 0; q < 10; ++q) {
            Bits A = V & rng(), B = V & rng() & ~A, C = V & rng() & ~A & ~B;
            if (!A || !B) continue;
            Bits Cs = C | a.selections();
            CHECK(id_separated(h, A, B, Cs) == d_separated(a, A, B, Cs));
        }
    }
}

TEST_CASE("global Markov property on random models") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 10; ++k) {
        RandomGraphOptions opt;
        opt.outputs = 4;
        opt.selections = k % 2;
        MixedGraph a = random_admg(rng, opt);
        RandomScmOptions so;
        so.seed = k + 1;
        DiscreteSCM scm = random_scm(a, so);
        Kernel q = interventional_kernel(scm, {});
        Bits V = a.outputs();
        for (Bits A = 1; A <= V; ++A) {
            if (!subset(A, V) || count(A) != 1) continue;
            for (Bits B = 1; B <= V; ++B) {
                if (!subset(B, V) || (A & B) || count(B) != 1) continue;
                for (Bits C = 0; C <= V; ++C) {
                    if (!subset(C, V) || (C & (A | B))) continue;
                    if (d_separated(a, A, B, C | a.selections()))
                        CHECK(ci_test(q, a.to_set(A), a.to_set(B), a.to_set(C)));
                }
            }
        }
    }
}
