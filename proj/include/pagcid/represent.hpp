#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "pagcid/graph.hpp"

namespace pagcid {

class IndependenceOracle;

std::string selection_id(const NodeId& a, const NodeId& b);
std::string confounder_id(const NodeId& a, const NodeId& b);

// Adds a↔b; when a and b are already adjacent the confounding is carried by
// a dedicated latent node U__a__b with U→a, U→b.
void add_bidirected(MixedGraph& g, int a, int b);

MixedGraph mag_of(const MixedGraph& a);
MixedGraph canonical_isadmg(const MixedGraph& m);
MixedGraph marginalize_latents(const MixedGraph& a);

struct EnumerateOptions {
    std::uint64_t cap = 1u << 16;  // candidate orientations explored before giving up
    bool filter_by_fci = true;      // keep only MAGs whose FCI fixpoint reproduces p
    // When set, membership is decided by equality with this independence model
    // instead of rerunning FCI per candidate.
    const IndependenceOracle* oracle = nullptr;
};

struct EnumerateResult {
    std::vector<MixedGraph> mags;
    bool filtered = false;
};

EnumerateResult enumerate_mags(const MixedGraph& p, const EnumerateOptions& opt = {});

// Orients a COPAG into a MAG: o→ to →, o-- to --, o-o between arrowhead-free
// nodes to --, then every remaining circle component into a DAG without
// unshielded colliders with the designated node of that component as a source.
MixedGraph orient_to_mag(const MixedGraph& p, Bits sources);

// First step of the above: o→ to →, --o to --, and o-o to -- when neither end has an arrowhead in p.
MixedGraph tag_orient(const MixedGraph& p);
// Orients the o-o edges inside `nodes` along a maximum cardinality search order
// started at `source` (earlier → later); `source` keeps only tails on those edges.
void orient_circle_component(MixedGraph& g, Bits nodes, int source);

MixedGraph bidirected_witness(const MixedGraph& m, int a, int b);

MixedGraph separation_failure_witness(const MixedGraph& m, const NodeSet& D, const NodeSet& T,
                                      const NodeSet& A, const NodeSet& B, const NodeSet& C);

// Random isADMG represented by m: canonical plus random confounding or
// selection additions that keep mag_of unchanged.
MixedGraph perturb_isadmg(const MixedGraph& m, std::mt19937_64& rng, int attempts = 8);

}  // namespace pagcid
