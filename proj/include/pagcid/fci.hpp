#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pagcid/graph.hpp"

namespace pagcid {

class DiscreteSCM;

// Independence model over outputs given inputs. query(A, B, C) answers
// X_A ⊥ X_B | X_C (inputs and the selection event are always conditioned on).
class IndependenceOracle {
  public:
    virtual ~IndependenceOracle() = default;
    virtual bool query(const NodeSet& A, const NodeSet& B, const NodeSet& C) const = 0;
    virtual NodeSet inputs() const = 0;
    virtual NodeSet outputs() const = 0;
};

std::unique_ptr<IndependenceOracle> graph_oracle(const MixedGraph& a);
std::unique_ptr<IndependenceOracle> distribution_oracle(const DiscreteSCM& scm);

struct SepsetTable {
    std::map<std::pair<NodeId, NodeId>, NodeSet> sets;
    const NodeSet* find(const NodeId& a, const NodeId& b) const;
    void put(const NodeId& a, const NodeId& b, NodeSet s);
};

struct Skeleton {
    MixedGraph graph;
    SepsetTable sepsets;
};

Skeleton skeleton(const IndependenceOracle& oracle);

struct OrientLog {
    std::vector<std::string> lines;
};

// Orientation rules R0-R10 in staged order; `log` collects one line per orientation.
MixedGraph orient(MixedGraph g, const SepsetTable& sepsets, OrientLog* log = nullptr);
MixedGraph fci(const IndependenceOracle& oracle, OrientLog* log = nullptr);

// Runs every rule stage once more on g (treated as already skeleton-complete)
// and reports whether every mark stays unchanged.
bool orientation_closed(const MixedGraph& g, const SepsetTable& sepsets);

}  // namespace pagcid
