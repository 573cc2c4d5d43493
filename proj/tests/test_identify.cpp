#include "common.hpp"

using namespace pagcid;
using namespace fixtures;

namespace {

Kernel qv_of(const DiscreteSCM& scm) { return interventional_kernel(scm, {}); }

}  // namespace

TEST_CASE("initial sets of the undirected example") {
    MixedGraph m = graph("square.mag");
    L0Sets l0 = l0_sets(m, S("a"), S("b"));
    CHECK(l0.D == S("a,c1,c2"));
    CHECK(l0.Dtilde.empty());
    CHECK(l0.H.empty());
    AssemblyTree t = build_tree(m, l0.D);
    CHECK(t.leaf());
    CHECK(t.label == S("a,c1,c2"));
}

TEST_CASE("identification fails on the undirected example with the expected certificate") {
    MixedGraph m = graph("square.mag");
    IdResult r = sidp(m, S("a"), S("b"));
    CHECK_FALSE(r.ok());
    REQUIRE(r.fail);
    CHECK(r.fail->C == S("a,c1,c2"));
    CHECK(r.fail->T == S("a,b,c1,c2"));
    CHECK(format_certificate(*r.fail).rfind("FAIL C={a,c1,c2} T={a,b,c1,c2}", 0) == 0);
    CHECK_FALSE(s_recoverability_check(m, S("a"), S("b")));
}

TEST_CASE("conditional identification on the undirected example") {
    MixedGraph m = graph("square.mag");
    IdResult r = scidp(m, S("a"), S("b"), S("c1,c2"));
    REQUIRE(r.ok());
    DiscreteSCM scm = parse_scm(read("square.scm"));
    REQUIRE(mag_of(graph_of(scm)) == m);
    CHECK(agree(eval_estimand(*r.estimand, qv_of(scm)), effect(scm, S("a"), S("b"), S("c1,c2"))));

    CHECK(calculus_check(m, CalculusRule::Exchange, S("a"), S("b"), S("c1,c2"), {}));
    CHECK(calculus_check(m, CalculusRule::Action, S("a"), S("b"), S("c1,c2"), {}));
    CHECK_FALSE(calculus_check(m, CalculusRule::Action, S("a"), S("b"), {}, {}));
    CHECK_THROWS_AS(calculus_check(m, CalculusRule::Observation, S("a"), S("a"), {}, {}), GraphError);
}

TEST_CASE("back-door identification agrees with the model") {
    MixedGraph m = graph("backdoor.mag");
    DiscreteSCM scm = parse_scm(read("backdoor.scm"));
    REQUIRE(mag_of(graph_of(scm)) == m);
    Kernel truth = effect(scm, S("b"), S("a"));

    IdResult r = sidp(m, S("b"), S("a"));
    REQUIRE(r.ok());
    CHECK(agree(eval_estimand(*r.estimand, qv_of(scm)), truth));
    IdResult rp = sidp(fci(*graph_oracle(graph_of(scm))), S("b"), S("a"));
    REQUIRE(rp.ok());
    CHECK(agree(eval_estimand(*rp.estimand, qv_of(scm)), truth));

    AdjustmentResult adj = adjustment_check(m, S("b"), S("a"), {}, {}, S("c"), {}, {});
    REQUIRE(adj.holds);
    CHECK(agree(eval_estimand(*adj.estimand, qv_of(scm)), truth));
    CHECK_FALSE(adjustment_check(m, S("b"), S("a"), {}, {}, {}, {}, {}).holds);
    CHECK(s_recoverability_check(parse_graph("node a output\nnode b output\nedge a <-> b\n"), S("a"), S("b")));
    CHECK_FALSE(s_recoverability_check(parse_graph("node a output\nnode b output\nedge a --- b\n"), S("a"), {}));
}

TEST_CASE("causal relations on the chain with a confounded tail") {
    MixedGraph g = graph("confounded_chain.admg");
    CHECK(causal_relation(g, "a", "c", RelationKind::Direct) == Relation::AllNo);
    CHECK(causal_relation(g, "a", "c", RelationKind::Total) == Relation::SomeYes);
    CHECK(causal_relation(g, "a", "b", RelationKind::Confounding) == Relation::AllNo);
    CHECK(causal_relation(g, "b", "c", RelationKind::Confounding) == Relation::SomeYes);
    CHECK(std::string(relation_name(Relation::AllNo)) != relation_name(Relation::SomeYes));
    CHECK_THROWS_AS(causal_relation(g, "a", "a", RelationKind::Total), GraphError);
}

TEST_CASE("hedges in the worked examples") {
    MixedGraph a_sq = graph("square.admg");
    NodeSet A7 = a_sq.to_set(bits(a_sq, "a") | a_sq.selections());
    auto h_sq = find_hedge(a_sq, A7, S("b"));
    REQUIRE(h_sq);
    CHECK(h_sq->H == S("b,c2"));
    CHECK(h_sq->Hprime == S("c2"));
    CHECK(verify_hedge(a_sq, A7, S("b"), *h_sq));
    CHECK(regime_separated_selections(a_sq, S("a"), S("b")).empty());

    MixedGraph a_hedge = graph("selection_hedge.admg");
    for (const char* b : {"b2", "b1,b2"}) {
        CAPTURE(b);
        auto h = find_hedge(a_hedge, S("a,s"), S(b));
        REQUIRE(h);
        CHECK(h->H == S("a,b2,c"));
        CHECK(h->Hprime == S("a,c"));
        CHECK(verify_hedge(a_hedge, S("a,s"), S(b), *h));
    }
    CHECK(regime_separated_selections(a_hedge, S("a"), S("b2")).empty());
    CHECK(regime_separation_maximal(a_hedge, S("a"), S("b2"), {}));

    Hedge h = *find_hedge(a_hedge, S("a,s"), S("b2"));
    MixedGraph free = graph("selection_free_hedge.admg");
    CHECK_FALSE(verify_hedge(free, S("a"), S("b1,b2"), h));
    CHECK_FALSE(find_hedge(free, S("a"), S("b1,b2")));

    Hedge same = h;
    same.Hprime = same.H;
    same.forest_prime = same.forest;
    CHECK_FALSE(verify_hedge(a_hedge, S("a,s"), S("b2"), same));
    Hedge split = h;
    split.forest.bidirected.clear();
    CHECK_FALSE(verify_hedge(a_hedge, S("a,s"), S("b2"), split));
}

TEST_CASE("failure witnesses from certificates") {
    MixedGraph m = graph("square.mag");
    IdResult r = sidp(m, S("a"), S("b"));
    REQUIRE(r.fail);
    HedgeWitness w = hedge_witness(m, S("a"), S("b"), *r.fail);
    CHECK(mag_of(w.admg) == w.mag);
    CHECK(verify_hedge(w.admg, w.A, w.B, w.hedge));
    CHECK(regime_separation_maximal(w.admg, S("a"), S("b"), w.D));
    // Paths out of b start with undirected edges.
    std::pair<NodeId, NodeId> first;
    CHECK_FALSE(first_edges_visible(m, S("a"), S("b"), &first));
    CHECK(first.first == "b");
    CHECK(w.direct);

    MixedGraph pair = parse_graph("node a output\nnode b output\nedge a o-o b\n");
    CHECK_FALSE(first_edges_visible(pair, S("b"), S("a"), &first));
    CHECK(first == std::pair<NodeId, NodeId>{"a", "b"});
    IdResult rb = sidp(pair, S("b"), S("a"));
    REQUIRE(rb.fail);
    HedgeWitness wb = hedge_witness(pair, S("b"), S("a"), *rb.fail);
    CHECK(verify_hedge(wb.admg, wb.A, wb.B, wb.hedge));
    CHECK(wb.hedge.H == S("a,b"));
    CHECK(wb.hedge.Hprime == S("b"));

    MixedGraph visible = parse_graph("node a output\nnode b output\nnode c output\nedge c --> a\nedge a --> b\n");
    CHECK(first_edges_visible(visible, S("b"), S("a")));
    CHECK_THROWS_AS(hedge_witness(pair, S("b"), S("a"), FailCertificate{S("a,b"), S("a,b"), {}}), GraphError);
}

TEST_CASE("district identification on ADMGs") {
    MixedGraph bow = parse_graph(
        "node a output\nnode b output\nnode U__a__b latent\nedge a --> b\nedge U__a__b --> a\nedge U__a__b --> b\n");
    CHECK_FALSE(district_id(bow, S("b"), S("a")).ok);
    MixedGraph front = parse_graph(
        "node a output\nnode m output\nnode y output\nedge a --> m\nedge m --> y\nedge a <-> y\n");
    DistrictId id = district_id(front, S("y"), S("a"));
    REQUIRE(id.ok);
    CHECK(id.D == S("m,y"));
    DiscreteSCM scm = random_scm(front, {});
    Kernel truth = effect(scm, S("y"), S("a"));
    CHECK(agree(district_kernel(id, S("y"), qv_of(scm)), truth));
    // Every directed edge of the MAG is invisible, so its class admits a confounded m and y.
    CHECK_FALSE(sidp(mag_of(front), S("y"), S("a")).ok());

    DistrictId free = district_id(graph("selection_free_hedge.admg"), S("a"), S("b1,b2"));
    CHECK(free.ok);
    CHECK_FALSE(district_id(graph("selection_free_hedge.admg"), S("a"), S("b2")).ok);
    CHECK_THROWS_AS(district_id(graph("selection_hedge.admg"), S("a"), S("b2")), GraphError);
}
