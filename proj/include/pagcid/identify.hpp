#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pagcid/estimand.hpp"
#include "pagcid/graph.hpp"
#include "pagcid/manipulate.hpp"

namespace pagcid {

struct L0Sets {
    NodeSet D;       // PoAnt of A in the graph restricted to V∖B
    NodeSet Dtilde;  // inputs with a potentially anterior path into A through V∖B
    NodeSet H;       // (V∖(D∪B)) ∪ (I∖Dtilde)
};

L0Sets l0_sets(const MixedGraph& p, const NodeSet& A, const NodeSet& B);

struct AssemblyTree {
    NodeSet label;
    std::shared_ptr<AssemblyTree> left, right;
    bool leaf() const { return !left; }
};

AssemblyTree build_tree(const MixedGraph& p, const NodeSet& C);
std::string format_tree(const AssemblyTree& t);

struct FailCertificate {
    NodeSet C, T;
    std::vector<NodeSet> trace;  // buckets removed from T before the leaf got stuck
};

std::string format_certificate(const FailCertificate& f);

struct AttachResult {
    EstimandPtr estimand;  // null on failure
    std::optional<FailCertificate> fail;
};

// Rule L2 fixing at the leaves and box products at internal nodes.
AttachResult attach_kernel(const MixedGraph& p, const AssemblyTree& t, const NodeSet& V);

struct IdResult {
    EstimandPtr estimand;                 // null on failure
    std::optional<FailCertificate> fail;  // set when a leaf got stuck
    std::string reason;                   // failure reason when no certificate exists
    NodeSet D;
    std::optional<AssemblyTree> tree;
    bool ok() const { return estimand != nullptr; }
};

IdResult sidp(const MixedGraph& p, const NodeSet& A, const NodeSet& B);
IdResult scidp(const MixedGraph& p, const NodeSet& A, const NodeSet& B, const NodeSet& C);

// Observed outputs of p (everything that is not input, latent or selection).
NodeSet observed(const MixedGraph& p);

enum class CalculusRule { Observation = 1, Exchange = 2, Action = 3 };

bool calculus_check(const MixedGraph& g, CalculusRule rule, const NodeSet& A, const NodeSet& B, const NodeSet& C,
                    const NodeSet& D);

struct AdjustmentResult {
    bool holds = false;
    EstimandPtr estimand;  // Σ_J P(A | B, C, J || do D) · P(J | C || do D), set when holds
};

AdjustmentResult adjustment_check(const MixedGraph& g, const NodeSet& A, const NodeSet& B, const NodeSet& C,
                                  const NodeSet& D, const NodeSet& J0, const NodeSet& J1, const NodeSet& H);

enum class RelationKind { Direct, Total, Confounding, SelectionAncestor };
enum class Relation { AllNo, SomeYes };

Relation causal_relation(const MixedGraph& g, const NodeId& a, const NodeId& b, RelationKind kind);
const char* relation_name(Relation r);
RelationKind parse_relation_kind(const std::string& s);

bool s_recoverability_check(const MixedGraph& g, const NodeSet& A, const NodeSet& B);

// ---- hedges -------------------------------------------------------------------

struct Forest {
    std::vector<std::pair<NodeId, NodeId>> directed;    // parent → child
    std::vector<std::pair<NodeId, NodeId>> bidirected;  // unordered, smaller id first
};

struct Hedge {
    NodeSet H, Hprime, R;
    Forest forest, forest_prime;
};

std::string format_hedge(const Hedge& h);

// Every proper potentially anterior path from B to A starts with a visible
// directed edge. On failure `first_edge` receives the offending (b, v1).
bool first_edges_visible(const MixedGraph& p, const NodeSet& A, const NodeSet& B,
                         std::pair<NodeId, NodeId>* first_edge = nullptr);

// Largest D ⊆ S with A ⊥ I_D | B ∪ S in g_do(I_D, B), built element-wise.
NodeSet regime_separated_selections(const MixedGraph& g, const NodeSet& A, const NodeSet& B);
// Checks the joint separation for D and that no s ∉ D can be added.
bool regime_separation_maximal(const MixedGraph& g, const NodeSet& A, const NodeSet& B, const NodeSet& D);

std::optional<Hedge> find_hedge(const MixedGraph& g, const NodeSet& A, const NodeSet& B);
bool verify_hedge(const MixedGraph& g, const NodeSet& A, const NodeSet& B, const Hedge& h);

struct HedgeWitness {
    MixedGraph mag;
    MixedGraph admg;
    NodeSet D;            // regime-separated selection nodes
    NodeSet A, B;         // the hedge is for (A ∪ (S∖D), B ∪ D); these hold the enlarged sets
    Hedge hedge;
    bool direct = false;  // built from a first edge that is not visible
    int mags_tried = 0;
};

HedgeWitness hedge_witness(const MixedGraph& p, const NodeSet& A, const NodeSet& B, const FailCertificate& cert);

// ---- classical identification on ADMGs --------------------------------------------

struct DistrictId {
    bool ok = false;
    NodeSet D;                       // Anc of A in the graph restricted to V∖B
    std::vector<NodeSet> districts;  // districts of the graph restricted to D
    // Per district, the fixing order with each node's Markov blanket among the unfixed nodes.
    std::vector<std::vector<std::pair<NodeId, NodeSet>>> fixing;
};

// Fixing-based district identification on an ADMG without selection nodes.
DistrictId district_id(const MixedGraph& g, const NodeSet& A, const NodeSet& B);

}  // namespace pagcid
