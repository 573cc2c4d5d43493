#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pagcid/estimand.hpp"
#include "pagcid/fci.hpp"
#include "pagcid/graph.hpp"
#include "pagcid/identify.hpp"
#include "pagcid/manipulate.hpp"
#include "pagcid/oracle.hpp"
#include "pagcid/random.hpp"
#include "pagcid/represent.hpp"
#include "pagcid/separate.hpp"
#include "pagcid/structure.hpp"

namespace fixtures {

inline std::string read(const std::string& name) {
    std::ifstream in(std::string(PAGCID_DATA_DIR) + "/" + name);
    REQUIRE_MESSAGE(in.good(), "missing data file " << name);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline pagcid::MixedGraph graph(const std::string& name) { return pagcid::parse_graph(read(name)); }

inline pagcid::Bits bits(const pagcid::MixedGraph& g, const std::string& csv) { return g.to_bits(pagcid::parse_set(csv)); }

inline pagcid::NodeSet set(const pagcid::MixedGraph& g, pagcid::Bits b) { return g.to_set(b); }

inline pagcid::NodeSet S(const std::string& csv) { return pagcid::parse_set(csv); }

}  // namespace fixtures
