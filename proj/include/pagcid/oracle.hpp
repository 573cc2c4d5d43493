#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "pagcid/estimand.hpp"
#include "pagcid/graph.hpp"
#include "pagcid/identify.hpp"

namespace pagcid {

using Rational = mpq_class;

struct Variable {
    NodeKind kind = NodeKind::Output;
    // Exogenous noise shared by its children; graph_of turns it into ↔ edges.
    bool exogenous = false;
    int domain = 2;
    std::vector<NodeId> parents;
    // Row-major: row = parent assignment (first parent most significant), column = value.
    std::vector<Rational> cpt;
};

class DiscreteSCM {
  public:
    std::map<NodeId, Variable> vars;

    NodeSet of_kind(NodeKind k) const;
    NodeSet inputs() const { return of_kind(NodeKind::Input); }
    NodeSet outputs() const;  // observed outputs (not exogenous, latent or selection)
    NodeSet selections() const { return of_kind(NodeKind::Selection); }
    int domain(const NodeId& v) const;

    // Non-input variables, parents first, ties by id.
    std::vector<NodeId> topological_order() const;
    const Rational& prob(const NodeId& v, const std::map<NodeId, int>& assignment, int value) const;

    // Throws GraphError on malformed parents, CPT sizes, row sums or cycles.
    void check() const;
};

DiscreteSCM parse_scm(const std::string& text);
std::string format_scm(const DiscreteSCM& scm);
MixedGraph graph_of(const DiscreteSCM& scm);

struct RandomScmOptions {
    std::map<NodeId, int> domains;  // default 2
    bool positive = true;
    std::uint64_t seed = 1;
};

// Realizes every ↔ of `g` by an exogenous binary parent W__a__b.
DiscreteSCM random_scm(const MixedGraph& g, const RandomScmOptions& opt = {});

// Conditional table P(out | ctx). Variables are kept in ascending id order.
struct Kernel {
    std::vector<NodeId> ctx, out;
    std::vector<int> ctx_dom, out_dom;
    std::vector<Rational> p;  // index = ctx_index * out_states + out_index

    std::size_t ctx_states() const;
    std::size_t out_states() const;
    NodeSet outputs() const { return NodeSet(out.begin(), out.end()); }
    NodeSet context() const { return NodeSet(ctx.begin(), ctx.end()); }
    bool operator==(const Kernel& o) const = default;
};

enum class ZeroRows { Error, Uniform };

Kernel marginalize(const Kernel& k, const NodeSet& over);
Kernel condition(const Kernel& k, const NodeSet& on, ZeroRows zero = ZeroRows::Error);
Kernel product(const Kernel& a, const Kernel& b);
// Keeps only `keep` of the outputs.
Kernel marginal(const Kernel& k, const NodeSet& keep);

// Same outputs, and equal values on every joint assignment of both contexts.
bool agree(const Kernel& a, const Kernel& b);
bool rows_sum_to_one(const Kernel& k);

enum class Enumeration { Incremental, FullJoint };

// P(X_{O∖B} | X_S = 1 || do(X_B), X_I) as a kernel with context I ∪ B.
Kernel interventional_kernel(const DiscreteSCM& scm, const NodeSet& B, bool condition_selection = true,
                             Enumeration how = Enumeration::Incremental);
// Q[C] = P(X_C | X_S = 1 || do(X_{O∖C}), X_I).
Kernel c_factor(const DiscreteSCM& scm, const NodeSet& C);
// P(X_A | X_C, X_S = 1 || do(X_B), X_I).
Kernel effect(const DiscreteSCM& scm, const NodeSet& A, const NodeSet& B, const NodeSet& C = {},
              ZeroRows zero = ZeroRows::Error);

// q / q(r | blanket): r moves from the outputs into the context.
Kernel fix(const Kernel& q, const NodeId& r, const NodeSet& blanket, ZeroRows zero = ZeroRows::Error);
// Σ_{D∖A} Π_districts Q[district], each Q obtained from qv by fixing.
Kernel district_kernel(const DistrictId& id, const NodeSet& A, const Kernel& qv);

bool ci_test(const Kernel& k, const NodeSet& A, const NodeSet& B, const NodeSet& C);

using CFactorProvider = std::function<Kernel(const NodeSet&)>;

struct EvalOptions {
    ZeroRows zero = ZeroRows::Error;
    // Supplies Q[C] for Base nodes with C other than the outputs of qv.
    CFactorProvider provider;
};

Kernel eval_estimand(const Estimand& e, const Kernel& qv, const EvalOptions& opt = {});

std::string format_kernel(const Kernel& k);
Kernel parse_kernel(const std::string& text);

}  // namespace pagcid
