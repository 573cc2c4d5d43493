#pragma once

#include <optional>
#include <vector>

#include "pagcid/manipulate.hpp"

namespace pagcid {

using Walk = std::vector<int>;

// A ⊥_id B | C in the manipulated graph h (targets B ∪ inputs of h).
bool id_separated(const ManipulatedGraph& h, Bits A, Bits B, Bits C);
std::optional<Walk> open_walk(const ManipulatedGraph& h, Bits A, Bits B, Bits C);

// Classical m-separation; circle marks count as non-collider marks.
bool d_separated(const MixedGraph& g, Bits A, Bits B, Bits C);
std::optional<Walk> d_open_walk(const MixedGraph& g, Bits A, Bits B, Bits C);

std::string format_walk(const MixedGraph& g, const Walk& w);

}  // namespace pagcid
