#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pagcid/estimand.hpp"
#include "pagcid/fci.hpp"
#include "pagcid/graph.hpp"
#include "pagcid/identify.hpp"
#include "pagcid/manipulate.hpp"
#include "pagcid/oracle.hpp"
#include "pagcid/represent.hpp"
#include "pagcid/separate.hpp"
#include "pagcid/structure.hpp"

using namespace pagcid;
using json = nlohmann::ordered_json;

namespace {

// Domain failure (exit 1) as opposed to usage or parse errors (exit 2).
struct DomainFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

MixedGraph load_graph(const std::string& path) { return parse_graph(slurp(path)); }

// Accepts plain graphs and the output of `manipulate`; further targets are applied soft first.
ManipulatedGraph load_and_manipulate(const std::string& path, const NodeSet& soft, const NodeSet& hard,
                                     GraphClass cls = GraphClass::Raw) {
    ManipulatedGraph m = parse_manipulated(slurp(path));
    if (m.soft.empty() && m.hard.empty()) return manipulate(m.graph, soft, hard, cls);
    if (!soft.empty()) m = soft_manipulate(m, soft, cls);
    if (!hard.empty()) m = hard_manipulate(m, hard, cls);
    return m;
}

json set_json(const NodeSet& s) { return json(std::vector<std::string>(s.begin(), s.end())); }

json graph_json(const MixedGraph& g) {
    json nodes = json::array(), edges = json::array();
    for (int i = 0; i < g.size(); ++i) nodes.push_back({{"id", g.name(i)}, {"kind", kind_name(g.kind(i))}});
    for (const auto& e : g.edges()) edges.push_back(e.a + " " + edge_token(e.mark_a, e.mark_b) + " " + e.b);
    return {{"nodes", nodes}, {"edges", edges}};
}

GraphClass parse_class(const std::string& s) {
    if (s == "raw") return GraphClass::Raw;
    if (s == "admg") return GraphClass::ADMG;
    if (s == "mag") return GraphClass::MAG;
    if (s == "pag") return GraphClass::PAG;
    throw GraphError("unknown graph class '" + s + "'");
}

struct Output {
    bool as_json = false;
    bool dot = false;

    void emit(json j) const {
        json out = {{"schema", 1}};
        for (auto& [k, v] : j.items()) out[k] = v;
        std::cout << out.dump(2) << "\n";
    }
    void graph(const MixedGraph& g, const char* key = "graph") const {
        if (as_json) {
            emit({{key, graph_json(g)}});
        } else if (dot) {
            std::cout << to_dot(g);
        } else {
            std::cout << format_graph(g);
        }
    }
};

std::uint64_t seed_or_env(std::uint64_t seed) {
    if (const char* s = std::getenv("PAGC_SEED")) return std::stoull(s);
    return seed;
}

std::map<NodeId, int> parse_domains(const std::string& spec) {
    std::map<NodeId, int> out;
    for (const auto& item : parse_set(spec)) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw GraphError("bad domain entry '" + item + "'");
        out[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
    }
    return out;
}

void print_hedge_witness(const Output& out, const HedgeWitness& w) {
    if (out.as_json) {
        out.emit({{"mag", graph_json(w.mag)},
                  {"admg", graph_json(w.admg)},
                  {"D", set_json(w.D)},
                  {"A", set_json(w.A)},
                  {"B", set_json(w.B)},
                  {"H", set_json(w.hedge.H)},
                  {"Hprime", set_json(w.hedge.Hprime)},
                  {"R", set_json(w.hedge.R)},
                  {"direct", w.direct},
                  {"mags_tried", w.mags_tried}});
        return;
    }
    std::cout << "# mag\n" << format_graph(w.mag);
    std::cout << "# admg\n" << format_graph(w.admg);
    std::cout << "D=" << format_set(w.D) << "\n";
    std::cout << "A=" << format_set(w.A) << " B=" << format_set(w.B) << "\n";
    std::cout << format_hedge(w.hedge);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pagc: causal identification from ancestral graphs under selection bias"};
    app.require_subcommand(1);
    Output out;
    app.add_flag("--json", out.as_json, "structured output");
    app.add_flag("--dot", out.dot, "graph output in DOT format");

    std::string graph_file, cls = "raw", soft, hard, A, B, C, D, mode = "id", oracle_spec, scm_file, estimand_arg;
    std::string J0, J1, H, kind, domains, zero = "error", out_file;
    bool explain = false, trace = false, tree = false, no_filter = false, nonpositive = false, true_factors = false;
    int rule = 1;
    std::uint64_t cap = 1u << 16, seed = 1;
    std::function<int()> run;

    auto graph_opt = [&](CLI::App* s) { s->add_option("--graph", graph_file, "graph file")->required(); };

    auto* validate_cmd = app.add_subcommand("validate", "check graph-class invariants");
    graph_opt(validate_cmd);
    validate_cmd->add_option("--class", cls, "raw|admg|mag|pag");
    validate_cmd->callback([&] {
        run = [&] {
            MixedGraph g = load_graph(graph_file);
            auto v = validate(g, parse_class(cls));
            if (out.as_json) {
                out.emit({{"valid", v.empty()}, {"violations", v}});
            } else if (v.empty()) {
                std::cout << "valid\n";
            } else {
                for (const auto& x : v) std::cout << x << "\n";
            }
            return v.empty() ? 0 : 1;
        };
    });

    auto* mag_cmd = app.add_subcommand("mag", "MAG of an ADMG with latent and selection nodes");
    graph_opt(mag_cmd);
    mag_cmd->callback([&] { run = [&] { out.graph(mag_of(load_graph(graph_file))); return 0; }; });

    auto* canon_cmd = app.add_subcommand("canonical", "canonical ADMG of a MAG");
    graph_opt(canon_cmd);
    canon_cmd->callback([&] { run = [&] { out.graph(canonical_isadmg(load_graph(graph_file))); return 0; }; });

    auto* marg_cmd = app.add_subcommand("marginalize", "project out latent nodes");
    graph_opt(marg_cmd);
    marg_cmd->callback([&] { run = [&] { out.graph(marginalize_latents(load_graph(graph_file))); return 0; }; });

    auto* manip_cmd = app.add_subcommand("manipulate", "soft then hard manipulation");
    graph_opt(manip_cmd);
    manip_cmd->add_option("--soft", soft, "soft targets");
    manip_cmd->add_option("--hard", hard, "hard targets");
    manip_cmd->add_option("--class", cls, "raw|admg|mag|pag");
    manip_cmd->callback([&] {
        run = [&] {
            ManipulatedGraph m = load_and_manipulate(graph_file, parse_set(soft), parse_set(hard), parse_class(cls));
            if (out.as_json) {
                out.emit({{"soft", set_json(m.soft)}, {"hard", set_json(m.hard)}, {"graph", graph_json(m.graph)}});
            } else if (out.dot) {
                std::cout << to_dot(m.graph);
            } else {
                std::cout << format_manipulated(m);
            }
            return 0;
        };
    });

    auto* sep_cmd = app.add_subcommand("sep", "id- or d-separation in a manipulated graph");
    graph_opt(sep_cmd);
    sep_cmd->add_option("--soft", soft);
    sep_cmd->add_option("--hard", hard);
    sep_cmd->add_option("--a", A)->required();
    sep_cmd->add_option("--b", B)->required();
    sep_cmd->add_option("--c", C);
    sep_cmd->add_option("--mode", mode, "id|d")->check(CLI::IsMember({"id", "d"}));
    sep_cmd->add_flag("--explain", explain, "print an open walk");
    sep_cmd->callback([&] {
        run = [&] {
            ManipulatedGraph h = load_and_manipulate(graph_file, parse_set(soft), parse_set(hard));
            const MixedGraph& g = h.graph;
            Bits a = g.to_bits(parse_set(A)), b = g.to_bits(parse_set(B)), c = g.to_bits(parse_set(C));
            auto walk = mode == "id" ? open_walk(h, a, b, c) : d_open_walk(g, a, b, c);
            std::string verdict = walk ? "not separated" : "separated";
            if (out.as_json) {
                json j = {{"separated", !walk}, {"mode", mode}};
                if (walk && explain) j["walk"] = format_walk(g, *walk);
                out.emit(j);
            } else {
                std::cout << verdict << "\n";
                if (walk && explain) std::cout << format_walk(g, *walk) << "\n";
            }
            return 0;
        };
    });

    auto* fci_cmd = app.add_subcommand("fci", "extended FCI against an independence oracle");
    fci_cmd->add_option("--oracle", oracle_spec, "graph:FILE or scm:FILE")->required();
    fci_cmd->add_flag("--trace", trace, "log each orientation");
    fci_cmd->add_option("--out", out_file, "also write the PAG to this file");
    fci_cmd->callback([&] {
        run = [&] {
            auto colon = oracle_spec.find(':');
            if (colon == std::string::npos) throw GraphError("--oracle expects graph:FILE or scm:FILE");
            std::string what = oracle_spec.substr(0, colon), file = oracle_spec.substr(colon + 1);
            std::unique_ptr<IndependenceOracle> o;
            if (what == "graph")
                o = graph_oracle(load_graph(file));
            else if (what == "scm")
                o = distribution_oracle(parse_scm(slurp(file)));
            else
                throw GraphError("unknown oracle kind '" + what + "'");
            OrientLog log;
            MixedGraph p = fci(*o, trace ? &log : nullptr);
            if (!out_file.empty()) {
                std::ofstream f(out_file);
                if (!(f << format_graph(p))) throw GraphError("cannot write '" + out_file + "'");
            }
            if (out.as_json) {
                json j = {{"pag", graph_json(p)}};
                if (trace) j["trace"] = log.lines;
                out.emit(j);
            } else {
                if (trace)
                    for (const auto& l : log.lines) std::cerr << l << "\n";
                out.graph(p);
            }
            return 0;
        };
    });

    auto id_opts = [&](CLI::App* s) {
        graph_opt(s);
        s->add_option("--a", A)->required();
        s->add_option("--b", B);
    };
    auto print_id = [&](const IdResult& r) {
        if (out.as_json) {
            json j = {{"identified", r.ok()}, {"D", set_json(r.D)}};
            if (r.tree) j["tree"] = format_tree(*r.tree);
            if (r.ok()) j["estimand"] = format_estimand(*r.estimand);
            if (r.fail) {
                j["C"] = set_json(r.fail->C);
                j["T"] = set_json(r.fail->T);
                json tr = json::array();
                for (const auto& t : r.fail->trace) tr.push_back(set_json(t));
                j["trace"] = tr;
            }
            if (!r.ok() && !r.reason.empty()) j["reason"] = r.reason;
            out.emit(j);
        } else {
            if (tree && r.tree) std::cout << "# tree " << format_tree(*r.tree) << "\n";
            if (r.ok())
                std::cout << format_estimand(*r.estimand) << "\n";
            else if (r.fail)
                std::cout << format_certificate(*r.fail) << "\n";
            else
                std::cout << "FAIL " << r.reason << "\n";
        }
        return r.ok() ? 0 : 1;
    };

    auto* sidp_cmd = app.add_subcommand("sidp", "identify P(A | S || do B)");
    id_opts(sidp_cmd);
    sidp_cmd->add_flag("--tree", tree, "print the assembly tree");
    sidp_cmd->callback([&] {
        run = [&] { return print_id(sidp(load_graph(graph_file), parse_set(A), parse_set(B))); };
    });

    auto* scidp_cmd = app.add_subcommand("scidp", "identify P(A | C, S || do B)");
    id_opts(scidp_cmd);
    scidp_cmd->add_option("--c", C);
    scidp_cmd->callback([&] {
        run = [&] { return print_id(scidp(load_graph(graph_file), parse_set(A), parse_set(B), parse_set(C))); };
    });

    auto* calc_cmd = app.add_subcommand("calculus", "check the premise of a calculus rule");
    graph_opt(calc_cmd);
    calc_cmd->add_option("--rule", rule, "1|2|3")->required()->check(CLI::Range(1, 3));
    calc_cmd->add_option("--a", A)->required();
    calc_cmd->add_option("--b", B);
    calc_cmd->add_option("--c", C);
    calc_cmd->add_option("--d", D);
    calc_cmd->callback([&] {
        run = [&] {
            bool ok = calculus_check(load_graph(graph_file), static_cast<CalculusRule>(rule), parse_set(A),
                                     parse_set(B), parse_set(C), parse_set(D));
            if (out.as_json)
                out.emit({{"rule", rule}, {"applicable", ok}});
            else
                std::cout << (ok ? "applicable" : "not applicable") << "\n";
            return 0;
        };
    });

    auto* adj_cmd = app.add_subcommand("adjust", "general adjustment criterion");
    graph_opt(adj_cmd);
    adj_cmd->add_option("--a", A)->required();
    adj_cmd->add_option("--b", B);
    adj_cmd->add_option("--c", C);
    adj_cmd->add_option("--d", D);
    adj_cmd->add_option("--j0", J0);
    adj_cmd->add_option("--j1", J1);
    adj_cmd->add_option("--hset", H, "the H set of the criterion");
    adj_cmd->callback([&] {
        run = [&] {
            auto r = adjustment_check(load_graph(graph_file), parse_set(A), parse_set(B), parse_set(C), parse_set(D),
                                      parse_set(J0), parse_set(J1), parse_set(H));
            if (out.as_json) {
                json j = {{"holds", r.holds}};
                if (r.estimand) j["estimand"] = format_estimand(*r.estimand);
                out.emit(j);
            } else {
                std::cout << (r.holds ? "holds" : "does not hold") << "\n";
                if (r.estimand) std::cout << format_estimand(*r.estimand) << "\n";
            }
            return r.holds ? 0 : 1;
        };
    });

    auto* rel_cmd = app.add_subcommand("relation", "causal relation between two nodes");
    graph_opt(rel_cmd);
    rel_cmd->add_option("--a", A)->required();
    rel_cmd->add_option("--b", B)->required();
    rel_cmd->add_option("--kind", kind, "direct|total|confounding|selection-ancestor")->required();
    rel_cmd->callback([&] {
        run = [&] {
            Relation r = causal_relation(load_graph(graph_file), A, B, parse_relation_kind(kind));
            if (out.as_json)
                out.emit({{"kind", kind}, {"relation", relation_name(r)}});
            else
                std::cout << relation_name(r) << "\n";
            return 0;
        };
    });

    auto* hedge_cmd = app.add_subcommand("hedge-witness", "hedge certifying an sIDP failure");
    id_opts(hedge_cmd);
    hedge_cmd->callback([&] {
        run = [&] {
            MixedGraph p = load_graph(graph_file);
            IdResult r = sidp(p, parse_set(A), parse_set(B));
            if (r.ok()) throw DomainFailure("sidp succeeded; there is no failure to certify");
            if (!r.fail) throw DomainFailure("sidp failed without a certificate");
            print_hedge_witness(out, hedge_witness(p, parse_set(A), parse_set(B), *r.fail));
            return 0;
        };
    });

    auto* eval_cmd = app.add_subcommand("eval", "evaluate an estimand against a discrete model");
    eval_cmd->add_option("--estimand", estimand_arg, "expression text or file")->required();
    eval_cmd->add_option("--scm", scm_file, "model file")->required();
    eval_cmd->add_option("--zero", zero, "error|uniform")->check(CLI::IsMember({"error", "uniform"}));
    eval_cmd->add_flag("--true-factors", true_factors, "answer Q[C] for any C from the model");
    eval_cmd->callback([&] {
        run = [&] {
            DiscreteSCM scm = parse_scm(slurp(scm_file));
            std::string text = estimand_arg;
            if (!text.empty() && text[0] != '(') text = slurp(text);
            EstimandPtr e = parse_estimand(text);
            EvalOptions opt;
            opt.zero = zero == "uniform" ? ZeroRows::Uniform : ZeroRows::Error;
            if (true_factors) opt.provider = [&](const NodeSet& c) { return c_factor(scm, c); };
            Kernel k = eval_estimand(*e, interventional_kernel(scm, {}), opt);
            if (out.as_json)
                out.emit({{"kernel", format_kernel(k)}});
            else
                std::cout << format_kernel(k);
            return 0;
        };
    });

    auto* enum_cmd = app.add_subcommand("enumerate-mags", "MAGs represented by a PAG");
    graph_opt(enum_cmd);
    enum_cmd->add_option("--cap", cap, "candidate limit");
    enum_cmd->add_flag("--no-filter", no_filter, "skip the FCI membership filter");
    enum_cmd->callback([&] {
        run = [&] {
            EnumerateOptions opt;
            opt.cap = cap;
            opt.filter_by_fci = !no_filter;
            auto r = enumerate_mags(load_graph(graph_file), opt);
            if (out.as_json) {
                json ms = json::array();
                for (const auto& m : r.mags) ms.push_back(graph_json(m));
                out.emit({{"filtered", r.filtered}, {"mags", ms}});
            } else {
                for (std::size_t i = 0; i < r.mags.size(); ++i)
                    std::cout << "# mag " << i << "\n" << (out.dot ? to_dot(r.mags[i]) : format_graph(r.mags[i]));
            }
            return 0;
        };
    });

    auto* rnd_cmd = app.add_subcommand("random-scm", "random discrete model over an ADMG");
    graph_opt(rnd_cmd);
    rnd_cmd->add_option("--seed", seed);
    rnd_cmd->add_option("--domains", domains, "v=k,...");
    rnd_cmd->add_flag("--nonpositive", nonpositive, "allow zero CPT entries");
    rnd_cmd->callback([&] {
        run = [&] {
            RandomScmOptions opt;
            opt.seed = seed_or_env(seed);
            opt.positive = !nonpositive;
            opt.domains = parse_domains(domains);
            std::cout << format_scm(random_scm(load_graph(graph_file), opt));
            return 0;
        };
    });

    auto* pipe_cmd = app.add_subcommand("pipeline", "model -> FCI -> sIDP -> evaluation against brute force");
    pipe_cmd->add_option("--scm", scm_file)->required();
    pipe_cmd->add_option("--a", A)->required();
    pipe_cmd->add_option("--b", B);
    pipe_cmd->callback([&] {
        run = [&] {
            DiscreteSCM scm = parse_scm(slurp(scm_file));
            NodeSet a = parse_set(A), b = parse_set(B);
            MixedGraph p = fci(*distribution_oracle(scm));
            IdResult r = sidp(p, a, b);
            std::string verdict;
            json j = {{"pag", graph_json(p)}};
            std::ostringstream text;
            text << "# pag\n" << format_graph(p);
            if (r.ok()) {
                Kernel got = eval_estimand(*r.estimand, interventional_kernel(scm, {}));
                Kernel want = effect(scm, a, b);
                verdict = agree(got, want) ? "MATCH" : "MISMATCH";
                j["estimand"] = format_estimand(*r.estimand);
                text << "estimand " << format_estimand(*r.estimand) << "\n";
            } else if (r.fail) {
                j["certificate"] = format_certificate(*r.fail);
                text << format_certificate(*r.fail) << "\n";
                HedgeWitness w = hedge_witness(p, a, b, *r.fail);
                bool ok = verify_hedge(w.admg, w.A, w.B, w.hedge);
                verdict = ok ? "FAIL-CERTIFIED" : "FAIL-UNCERTIFIED";
                j["hedge"] = {{"H", set_json(w.hedge.H)}, {"Hprime", set_json(w.hedge.Hprime)}};
                text << format_hedge(w.hedge);
            } else {
                verdict = "FAIL-UNCERTIFIED";
                text << "FAIL " << r.reason << "\n";
            }
            j["verdict"] = verdict;
            text << "verdict " << verdict << "\n";
            if (out.as_json)
                out.emit(j);
            else
                std::cout << text.str();
            return verdict == "MATCH" ? 0 : 1;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return run ? run() : 2;
    } catch (const DomainFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
