#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pagcid/estimand.hpp"
#include "pagcid/fci.hpp"
#include "pagcid/graph.hpp"
#include "pagcid/identify.hpp"
#include "pagcid/manipulate.hpp"
#include "pagcid/oracle.hpp"
#include "pagcid/represent.hpp"
#include "pagcid/separate.hpp"
#include "pagcid/structure.hpp"

namespace py = pybind11;
using namespace pagcid;

namespace {

GraphClass class_of(const std::string& s) {
    if (s == "raw") return GraphClass::Raw;
    if (s == "admg") return GraphClass::ADMG;
    if (s == "mag") return GraphClass::MAG;
    if (s == "pag") return GraphClass::PAG;
    throw GraphError("unknown graph class '" + s + "'");
}

std::string text(const MixedGraph& g) { return format_graph(g); }

py::dict id_result(const IdResult& r) {
    py::dict d;
    d["ok"] = r.ok();
    d["estimand"] = r.ok() ? py::object(py::str(format_estimand(*r.estimand))) : py::object(py::none());
    if (r.fail) {
        d["C"] = r.fail->C;
        d["T"] = r.fail->T;
        d["certificate"] = format_certificate(*r.fail);
    } else {
        d["certificate"] = py::none();
    }
    d["reason"] = r.reason;
    return d;
}

py::dict hedge_dict(const Hedge& h) {
    py::dict d;
    d["H"] = h.H;
    d["H_prime"] = h.Hprime;
    d["R"] = h.R;
    d["text"] = format_hedge(h);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Causal identification from partial ancestral graphs under selection bias";
    py::register_exception<GraphError>(m, "GraphError", PyExc_ValueError);

    m.def("normalize", [](const std::string& g) { return text(parse_graph(g)); }, py::arg("graph"),
          "Parse a graph and print it in canonical form.");
    m.def("to_dot", [](const std::string& g) { return to_dot(parse_graph(g)); }, py::arg("graph"));
    m.def("validate", [](const std::string& g, const std::string& cls) { return validate(parse_graph(g), class_of(cls)); },
          py::arg("graph"), py::arg("cls") = "raw", "Violations of the graph class; empty when valid.");

    m.def("mag_of", [](const std::string& g) { return text(mag_of(parse_graph(g))); }, py::arg("graph"));
    m.def("canonical_isadmg", [](const std::string& g) { return text(canonical_isadmg(parse_graph(g))); },
          py::arg("mag"));
    m.def("marginalize_latents", [](const std::string& g) { return text(marginalize_latents(parse_graph(g))); },
          py::arg("graph"));

    m.def(
        "manipulate",
        [](const std::string& g, const NodeSet& soft, const NodeSet& hard, const std::string& cls) {
            return format_manipulated(manipulate(parse_graph(g), soft, hard, class_of(cls)));
        },
        py::arg("graph"), py::arg("soft") = NodeSet{}, py::arg("hard") = NodeSet{}, py::arg("cls") = "raw");
    m.def(
        "id_separated",
        [](const std::string& g, const NodeSet& A, const NodeSet& B, const NodeSet& C, const NodeSet& soft,
           const NodeSet& hard) {
            ManipulatedGraph h = manipulate(parse_graph(g), soft, hard);
            const MixedGraph& hg = h.graph;
            return id_separated(h, hg.to_bits(A), hg.to_bits(B), hg.to_bits(C));
        },
        py::arg("graph"), py::arg("A"), py::arg("B"), py::arg("C") = NodeSet{}, py::arg("soft") = NodeSet{},
        py::arg("hard") = NodeSet{});
    m.def(
        "d_separated",
        [](const std::string& g, const NodeSet& A, const NodeSet& B, const NodeSet& C) {
            MixedGraph x = parse_graph(g);
            return d_separated(x, x.to_bits(A), x.to_bits(B), x.to_bits(C));
        },
        py::arg("graph"), py::arg("A"), py::arg("B"), py::arg("C") = NodeSet{});

    m.def("fci_from_graph", [](const std::string& g) { return text(fci(*graph_oracle(parse_graph(g)))); },
          py::arg("graph"), "FCI with the d-separation oracle of an isADMG.");
    m.def("fci_from_scm", [](const std::string& s) { return text(fci(*distribution_oracle(parse_scm(s)))); },
          py::arg("scm"), "FCI with exact independence tests on a discrete model.");

    m.def("sidp", [](const std::string& g, const NodeSet& A, const NodeSet& B) { return id_result(sidp(parse_graph(g), A, B)); },
          py::arg("graph"), py::arg("A"), py::arg("B") = NodeSet{});
    m.def(
        "scidp",
        [](const std::string& g, const NodeSet& A, const NodeSet& B, const NodeSet& C) {
            return id_result(scidp(parse_graph(g), A, B, C));
        },
        py::arg("graph"), py::arg("A"), py::arg("B"), py::arg("C"));
    m.def(
        "find_hedge",
        [](const std::string& g, const NodeSet& A, const NodeSet& B) -> py::object {
            auto h = find_hedge(parse_graph(g), A, B);
            if (!h) return py::none();
            return hedge_dict(*h);
        },
        py::arg("admg"), py::arg("A"), py::arg("B"));
    m.def(
        "hedge_witness",
        [](const std::string& g, const NodeSet& A, const NodeSet& B) {
            MixedGraph p = parse_graph(g);
            IdResult r = sidp(p, A, B);
            if (!r.fail) throw GraphError("identification did not fail with a certificate");
            HedgeWitness w = hedge_witness(p, A, B, *r.fail);
            py::dict d = hedge_dict(w.hedge);
            d["mag"] = text(w.mag);
            d["admg"] = text(w.admg);
            d["D"] = w.D;
            d["verified"] = verify_hedge(w.admg, w.A, w.B, w.hedge);
            return d;
        },
        py::arg("copag"), py::arg("A"), py::arg("B"));

    m.def("normalize_scm", [](const std::string& s) { return format_scm(parse_scm(s)); }, py::arg("scm"));
    m.def("graph_of", [](const std::string& s) { return text(graph_of(parse_scm(s))); }, py::arg("scm"));
    m.def(
        "effect",
        [](const std::string& s, const NodeSet& A, const NodeSet& B, const NodeSet& C) {
            return format_kernel(effect(parse_scm(s), A, B, C));
        },
        py::arg("scm"), py::arg("A"), py::arg("B") = NodeSet{}, py::arg("C") = NodeSet{},
        "Brute-force P(A | C, selection || do B) as kernel TSV.");
    m.def(
        "eval_estimand",
        [](const std::string& e, const std::string& s) {
            DiscreteSCM scm = parse_scm(s);
            EvalOptions opt;
            opt.provider = [&](const NodeSet& c) { return c_factor(scm, c); };
            return format_kernel(eval_estimand(*parse_estimand(e), interventional_kernel(scm, {}), opt));
        },
        py::arg("estimand"), py::arg("scm"));
    m.def("kernels_agree", [](const std::string& a, const std::string& b) { return agree(parse_kernel(a), parse_kernel(b)); },
          py::arg("a"), py::arg("b"));
}
