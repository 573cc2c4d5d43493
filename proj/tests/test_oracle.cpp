#include "common.hpp"

using namespace pagcid;
using namespace fixtures;

namespace {

const char* kBerkson =
    "var a kind=output domain=2 parents=\n"
    "var b kind=output domain=2 parents=\n"
    "var s kind=selection domain=2 parents=a,b\n"
    "cpt a - 1/2 1/2\n"
    "cpt b - 1/3 2/3\n"
    "cpt s 0,0 9/10 1/10\n"
    "cpt s 0,1 1/5 4/5\n"
    "cpt s 1,0 1/5 4/5\n"
    "cpt s 1,1 1/2 1/2\n";

const char* kCopy =
    "var a kind=output domain=2 parents=\n"
    "var b kind=output domain=2 parents=a\n"
    "cpt a - 1/4 3/4\n"
    "cpt b 0 1 0\n"
    "cpt b 1 0 1\n";

const char* kCoins =
    "var a kind=output domain=2 parents=\n"
    "var b kind=output domain=3 parents=\n"
    "cpt a - 1/2 1/2\n"
    "cpt b - 1/6 1/3 1/2\n";

Rational at(const Kernel& k, std::size_t row, std::size_t col) { return k.p[row * k.out_states() + col]; }

}  // namespace

TEST_CASE("model text round-trips and is validated") {
    DiscreteSCM scm = parse_scm(kBerkson);
    CHECK(scm.selections() == S("s"));
    CHECK(scm.outputs() == S("a,b"));
    DiscreteSCM back = parse_scm(format_scm(scm));
    CHECK(format_scm(back) == format_scm(scm));
    CHECK_THROWS_AS(parse_scm("var a kind=output domain=2 parents=\ncpt a - 1/2 1/3\n"), GraphError);
    CHECK_THROWS_AS(parse_scm("var a kind=output domain=2 parents=z\ncpt a - 1/2 1/2\n"), GraphError);
    CHECK_THROWS_AS(parse_scm("var a kind=output domain=2 parents=\n"), GraphError);
    CHECK_THROWS_AS(parse_scm("var a kind=output domain=2 parents=b\nvar b kind=output domain=2 parents=a\n"
                              "cpt a 0 1/2 1/2\ncpt a 1 1/2 1/2\ncpt b 0 1/2 1/2\ncpt b 1 1/2 1/2\n"),
                    GraphError);
}

TEST_CASE("graph of a model") {
    CHECK(graph_of(parse_scm(kBerkson)) == graph("selection_berkson.admg"));
    MixedGraph copy = graph_of(parse_scm(kCopy));
    CHECK(directed(copy, copy.index("a"), copy.index("b")));
    DiscreteSCM shared = parse_scm(
        "var w kind=exogenous domain=2 parents=\nvar a kind=output domain=2 parents=w\n"
        "var b kind=output domain=2 parents=w\ncpt w - 1/2 1/2\ncpt a 0 1/3 2/3\ncpt a 1 2/3 1/3\n"
        "cpt b 0 1/4 3/4\ncpt b 1 3/4 1/4\n");
    MixedGraph g = graph_of(shared);
    CHECK(g.size() == 2);
    CHECK(bidirected(g, g.index("a"), g.index("b")));
}

TEST_CASE("interventional kernels") {
    Kernel coin = interventional_kernel(parse_scm("var x kind=output domain=2 parents=\ncpt x - 1/2 1/2\n"), {});
    CHECK(at(coin, 0, 0) == Rational(1, 2));
    CHECK(at(coin, 0, 1) == Rational(1, 2));

    DiscreteSCM copy = parse_scm(kCopy);
    Kernel doa = interventional_kernel(copy, S("a"));
    CHECK(doa.context() == S("a"));
    CHECK(doa.outputs() == S("b"));
    CHECK(at(doa, 0, 0) == 1);
    CHECK(at(doa, 1, 1) == 1);

    DiscreteSCM berkson = parse_scm(kBerkson);
    Kernel sel = marginal(interventional_kernel(berkson, {}), S("a"));
    Kernel raw = marginal(interventional_kernel(berkson, {}, false), S("a"));
    CHECK(at(raw, 0, 0) == Rational(1, 2));
    CHECK(at(sel, 0, 0) != Rational(1, 2));
    CHECK(rows_sum_to_one(sel));
}

TEST_CASE("incremental and full-joint enumeration agree") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 25; ++k) {
        RandomGraphOptions opt;
        opt.outputs = 4;
        opt.selections = k % 2;
        opt.inputs = k % 3 == 0 ? 1 : 0;
        MixedGraph g = random_admg(rng, opt);
        RandomScmOptions so;
        so.seed = 100 + k;
        so.domains["v0"] = 3;
        DiscreteSCM scm = random_scm(g, so);
        NodeSet B = g.to_set(g.outputs() & rng());
        CHECK(interventional_kernel(scm, B, true, Enumeration::Incremental) ==
              interventional_kernel(scm, B, true, Enumeration::FullJoint));
    }
}

TEST_CASE("conditional independence tests") {
    Kernel coins = interventional_kernel(parse_scm(kCoins), {});
    CHECK(ci_test(coins, S("a"), S("b"), {}));
    Kernel copy = interventional_kernel(parse_scm(kCopy), {});
    CHECK_FALSE(ci_test(copy, S("a"), S("b"), {}));
    Kernel berkson = interventional_kernel(parse_scm(kBerkson), {});
    CHECK_FALSE(ci_test(berkson, S("a"), S("b"), {}));
    CHECK(distribution_oracle(parse_scm(kCoins))->query(S("a"), S("b"), {}));
    CHECK_FALSE(distribution_oracle(parse_scm(kBerkson))->query(S("a"), S("b"), {}));
}

TEST_CASE("random models") {
    MixedGraph g = graph("selection_hedge.admg");
    RandomScmOptions opt;
    opt.seed = 4;
    DiscreteSCM a = random_scm(g, opt), b = random_scm(g, opt);
    CHECK(format_scm(a) == format_scm(b));
    CHECK(graph_of(a) == g);
    for (const auto& [id, v] : a.vars)
        for (const auto& p : v.cpt) CHECK(p >= Rational(1, 64));
    opt.seed = 5;
    CHECK(format_scm(random_scm(g, opt)) != format_scm(a));

    MixedGraph edgeless = parse_graph("node x output\nnode y output\n");
    DiscreteSCM e = random_scm(edgeless, opt);
    CHECK(ci_test(interventional_kernel(e, {}), S("x"), S("y"), {}));
}

TEST_CASE("estimand text round-trips") {
    const char* text = "(marg (c1 c2) (cond (c1 c2) (box ((a c1 c2)) (Q (a c1 c2)) (Q (b)))))";
    EstimandPtr e = parse_estimand(text);
    CHECK(format_estimand(*e) == text);
    CHECK(format_estimand(*parse_estimand("(comp (j) (cond (a j) (Q (a b j))) (marg (a b) (Q (a b j))))")) ==
          "(comp (j) (cond (a j) (Q (a b j))) (marg (a b) (Q (a b j))))");
    CHECK_THROWS_AS(parse_estimand("(marg (a)"), GraphError);
    CHECK_THROWS_AS(parse_estimand("(nope (a) (Q (a)))"), GraphError);
}

TEST_CASE("estimand evaluation follows the kernel calculus") {
    DiscreteSCM scm = random_scm(graph("two_chains.mag"), {});
    Kernel qv = interventional_kernel(scm, {});
    NodeSet V = scm.outputs();
    auto base = Estimand::base(V);
    CHECK(eval_estimand(*Estimand::marg(base, {}), qv) == qv);
    auto chain = Estimand::prod({Estimand::marg(base, S("b,c,d,e")), Estimand::cond(base, S("a"))});
    CHECK(agree(eval_estimand(*chain, qv), qv));
    Kernel ma = eval_estimand(*Estimand::marg(base, S("b,c,d,e")), qv);
    CHECK(ma.outputs() == S("a"));
    CHECK(rows_sum_to_one(ma));
    CHECK_THROWS_AS(eval_estimand(*Estimand::base(S("a")), qv), GraphError);
    EvalOptions opt;
    opt.provider = [&](const NodeSet& c) { return c_factor(scm, c); };
    CHECK(agree(eval_estimand(*Estimand::base(S("b")), qv, opt), c_factor(scm, S("b"))));
}

TEST_CASE("zero-probability conditioning") {
    DiscreteSCM copy = parse_scm(kCopy);
    Kernel qv = interventional_kernel(copy, {});
    CHECK(rows_sum_to_one(eval_estimand(*Estimand::cond(Estimand::base(S("a,b")), S("b")), qv)));
    // a=0, b=1 never happens.
    auto e = Estimand::cond(Estimand::base(S("a,b")), S("a,b"));
    CHECK_THROWS_AS(eval_estimand(*e, qv), GraphError);
    EvalOptions uniform;
    uniform.zero = ZeroRows::Uniform;
    CHECK(rows_sum_to_one(eval_estimand(*e, qv, uniform)));
}

TEST_CASE("kernel TSV round-trips") {
    Kernel k = interventional_kernel(parse_scm(kCopy), S("a"));
    std::string text = format_kernel(k);
    CHECK(text.rfind("context\toutputs\tp\n", 0) == 0);
    CHECK(parse_kernel(text) == k);
}

TEST_CASE("Markov combination of overlapping factors") {
    // Chain a → b → c: the marginals over {a,b} and {b,c} share b.
    MixedGraph g = parse_graph("node a output\nnode b output\nnode c output\nedge a --> b\nedge b --> c\n");
    DiscreteSCM scm = random_scm(g, {});
    Kernel qv = interventional_kernel(scm, {});
    auto base = Estimand::base(S("a,b,c"));
    auto r1 = Estimand::marg(base, S("c"));
    auto r2 = Estimand::marg(base, S("a"));
    auto box = Estimand::box(r1, r2, {S("a"), S("b"), S("c")});
    CHECK(agree(eval_estimand(*box, qv), qv));
}

TEST_CASE("fixing reproduces district factors") {
    MixedGraph g = parse_graph("node a output\nnode b output\nnode c output\nedge a --> b\nedge b --> c\nedge a <-> c\n");
    DiscreteSCM scm = random_scm(g, {});
    Kernel qv = interventional_kernel(scm, {});
    Kernel fb = fix(qv, "b", S("a"));
    CHECK(fb.context() == S("b"));
    CHECK(agree(fb, c_factor(scm, S("a,c"))));
    DistrictId id = district_id(g, S("c"), S("b"));
    REQUIRE(id.ok);
    CHECK(agree(district_kernel(id, S("c"), qv), effect(scm, S("c"), S("b"))));
}
