#pragma once

#include <map>
#include <string>

#include "pagcid/graph.hpp"
#include "pagcid/structure.hpp"

namespace pagcid {

struct ManipulatedGraph {
    MixedGraph graph;
    std::map<NodeId, NodeId> regime;  // d -> I__d
    NodeSet soft;                     // D
    NodeSet hard;                     // T
    NodeSet hard_outputs;             // members of T that were outputs before manipulation

    Bits regime_bits() const;
    // Nodes of the unmanipulated graph that were not inputs (O ∪ L ∪ S).
    Bits original_outputs() const;
    bool operator==(const ManipulatedGraph& o) const { return graph == o.graph; }
};

std::string regime_id(const NodeId& d);

bool is_visible(const MixedGraph& g, int a, int b, Bits within = kAll);

// Class Raw is inferred: circles -> PAG, latent/selection nodes -> ADMG, else MAG.
GraphClass infer_class(const MixedGraph& g);

ManipulatedGraph as_manipulated(const MixedGraph& g);
ManipulatedGraph hard_manipulate(const ManipulatedGraph& g, const NodeSet& T, GraphClass cls);
ManipulatedGraph soft_manipulate(const ManipulatedGraph& g, const NodeSet& D, GraphClass cls);
ManipulatedGraph manipulate(const MixedGraph& g, const NodeSet& D, const NodeSet& T,
                            GraphClass cls = GraphClass::Raw);

std::string format_manipulated(const ManipulatedGraph& m);
ManipulatedGraph parse_manipulated(const std::string& text);
// Plain graph parse that rejects regime-style ids.
MixedGraph parse_plain_graph(const std::string& text);

}  // namespace pagcid
