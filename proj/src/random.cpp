#include "pagcid/random.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "pagcid/represent.hpp"

namespace pagcid {

MixedGraph random_admg(std::mt19937_64& rng, const RandomGraphOptions& opt) {
    std::bernoulli_distribution edge(opt.edge_p), conf(opt.bidirected_p), half(0.5);
    MixedGraph g;
    g.tag = GraphClass::ADMG;
    std::vector<NodeId> outs, ins;
    for (int i = 0; i < opt.outputs; ++i) outs.push_back("v" + std::to_string(i));
    for (int i = 0; i < opt.inputs; ++i) ins.push_back("i" + std::to_string(i));
    for (const auto& v : outs) g.add_node(v, NodeKind::Output);
    for (const auto& v : ins) g.add_node(v, NodeKind::Input);
    std::vector<NodeId> order = outs;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j)
            if (edge(rng)) g.add_edge(order[i], Mark::Tail, order[j], Mark::Arrow);
    for (const auto& i : ins)
        for (const auto& v : outs)
            if (edge(rng)) g.add_edge(i, Mark::Tail, v, Mark::Arrow);
    for (std::size_t i = 0; i < outs.size(); ++i)
        for (std::size_t j = i + 1; j < outs.size(); ++j)
            if (conf(rng)) add_bidirected(g, g.index(outs[i]), g.index(outs[j]));
    for (int k = 0; k < opt.latents; ++k) {
        NodeId u = "u" + std::to_string(k);
        g.add_node(u, NodeKind::Latent);
        int kids = 0;
        for (const auto& v : outs)
            if (half(rng)) {
                g.add_edge(u, Mark::Tail, v, Mark::Arrow);
                ++kids;
            }
        if (kids < 2 && outs.size() >= 2) {
            for (const auto& v : outs)
                if (!g.adjacent(g.index(u), g.index(v)) && kids < 2) {
                    g.add_edge(u, Mark::Tail, v, Mark::Arrow);
                    ++kids;
                }
        }
    }
    for (int k = 0; k < opt.selections; ++k) {
        NodeId s = "s" + std::to_string(k);
        g.add_node(s, NodeKind::Selection);
        std::vector<NodeId> pool = outs;
        pool.insert(pool.end(), ins.begin(), ins.end());
        int parents = 0;
        for (const auto& v : pool)
            if (half(rng)) {
                g.add_edge(v, Mark::Tail, s, Mark::Arrow);
                ++parents;
            }
        if (parents == 0 && !outs.empty())
            g.add_edge(outs[std::uniform_int_distribution<std::size_t>(0, outs.size() - 1)(rng)], Mark::Tail, s,
                       Mark::Arrow);
    }
    return g;
}

MixedGraph random_mag(std::mt19937_64& rng, const RandomGraphOptions& opt) { return mag_of(random_admg(rng, opt)); }

}  // namespace pagcid
