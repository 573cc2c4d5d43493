#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pagcid/graph.hpp"

namespace pagcid {

struct Estimand;
using EstimandPtr = std::shared_ptr<const Estimand>;

// Expression over Markov kernels. Subtrees may be shared.
struct Estimand {
    enum class Kind { Base, Marg, Cond, Prod, Box, Comp };

    Kind kind = Kind::Base;
    NodeSet vars;                 // Base: C of Q[C]; Marg/Comp: summed out; Cond: conditioned on
    std::vector<NodeSet> order;   // Box: bucket order of the joint label
    std::vector<EstimandPtr> kids;

    static EstimandPtr base(NodeSet c);
    static EstimandPtr marg(EstimandPtr child, NodeSet over);
    static EstimandPtr cond(EstimandPtr child, NodeSet on);
    static EstimandPtr prod(std::vector<EstimandPtr> factors);
    static EstimandPtr box(EstimandPtr left, EstimandPtr right, std::vector<NodeSet> order);
    // Σ_J left · right, the composition used by adjustment formulas.
    static EstimandPtr comp(EstimandPtr left, EstimandPtr right, NodeSet over);

    // Variables the kernel is a distribution over (needs the full V for Base).
    NodeSet outputs() const;
};

std::string format_estimand(const Estimand& e);
EstimandPtr parse_estimand(const std::string& text);

}  // namespace pagcid
