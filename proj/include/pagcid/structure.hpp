#pragma once

#include <vector>

#include "pagcid/graph.hpp"

namespace pagcid {

inline constexpr Bits kAll = ~Bits{0};

// Reachability closures. All are reflexive on X ∩ within and only use
// nodes in `within` (so they compute the closure in the induced subgraph).
Bits ancestors(const MixedGraph& g, Bits X, Bits within = kAll);
Bits descendants(const MixedGraph& g, Bits X, Bits within = kAll);
// Along a→b and a--b edges.
Bits anteriors(const MixedGraph& g, Bits X, Bits within = kAll);
// Potentially directed: no arrowhead at the near node, no tail at the far node.
Bits possible_ancestors(const MixedGraph& g, Bits X, Bits within = kAll);
Bits possible_descendants(const MixedGraph& g, Bits X, Bits within = kAll);
// Potentially anterior: no arrowhead at the near node.
Bits possible_anteriors(const MixedGraph& g, Bits X, Bits within = kAll);

bool potentially_directed_edge(const MixedGraph& g, int from, int to);

std::vector<Bits> buckets(const MixedGraph& g, Bits D);
Bits bucket_of(const MixedGraph& g, Bits D, int v);
Bits pc_component(const MixedGraph& g, Bits D, int b);
Bits pc_set(const MixedGraph& g, Bits D, Bits B);
Bits region(const MixedGraph& g, Bits D, Bits B);
// Throws GraphError when the bucket quotient has a cycle.
std::vector<Bits> bucket_topological_order(const MixedGraph& g, Bits D);
std::vector<Bits> circle_components(const MixedGraph& g, Bits D);

bool inducing_path_exists(const MixedGraph& g, int a, int b, Bits L, Bits S);

// Each path is listed as [a, v1, ..., vk, y, z].
std::vector<std::vector<int>> discriminating_paths(const MixedGraph& g, int y, int z);

// Directed cycle, almost directed cycle, or a∗→b--c violations.
std::vector<std::string> validate(const MixedGraph& g, GraphClass cls);

bool has_circles(const MixedGraph& g);
bool is_ancestral(const MixedGraph& g);

}  // namespace pagcid
