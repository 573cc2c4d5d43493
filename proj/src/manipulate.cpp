#include "pagcid/manipulate.hpp"

#include <sstream>

namespace pagcid {

std::string regime_id(const NodeId& d) { return "I__" + d; }

Bits ManipulatedGraph::regime_bits() const {
    Bits s = 0;
    for (const auto& [d, r] : regime) s |= bit(graph.index(r));
    return s;
}

Bits ManipulatedGraph::original_outputs() const {
    Bits s = graph.all() & ~graph.inputs();
    for (const auto& t : hard_outputs) s |= bit(graph.index(t));
    return s;
}

bool is_visible(const MixedGraph& g, int a, int b, Bits within) {
    if (!directed(g, a, b)) throw GraphError("not a directed edge: " + g.name(a) + " " + g.name(b));
    if (g.kind(a) == NodeKind::Input) return true;
    within &= g.all();
    Bits pa_b = parents(g, b) & within;
    Bits nb_b = g.neighbors(b);
    // Nodes z reachable from a by ↔ edges through Pa(b); a itself included.
    Bits chain = bit(a);
    std::vector<int> stack{a};
    while (!stack.empty()) {
        int z = stack.back();
        stack.pop_back();
        for (const auto& e : g.adj(z)) {
            if (!has(pa_b, e.nb) || has(chain, e.nb)) continue;
            if (e.near == Mark::Arrow && e.far == Mark::Arrow) {
                chain |= bit(e.nb);
                stack.push_back(e.nb);
            }
        }
    }
    bool found = false;
    each(chain, [&](int z) {
        if (found) return;
        for (const auto& e : g.adj(z)) {
            int c = e.nb;
            if (!has(within, c) || c == b || has(nb_b, c) || e.near != Mark::Arrow) continue;
            found = true;
            return;
        }
    });
    return found;
}

GraphClass infer_class(const MixedGraph& g) {
    if (g.tag != GraphClass::Raw) return g.tag;
    if (has_circles(g)) return GraphClass::PAG;
    if (g.latents() | g.selections()) return GraphClass::ADMG;
    return GraphClass::MAG;
}

ManipulatedGraph as_manipulated(const MixedGraph& g) {
    ManipulatedGraph m;
    m.graph = g;
    return m;
}

ManipulatedGraph hard_manipulate(const ManipulatedGraph& mg, const NodeSet& T, GraphClass cls) {
    ManipulatedGraph out = mg;
    MixedGraph& g = out.graph;
    if (cls == GraphClass::Raw) cls = infer_class(g);
    Bits tb = g.to_bits(T);
    Bits regime = mg.regime_bits();
    each(tb, [&](int t) {
        NodeKind k = g.kind(t);
        if (k == NodeKind::Latent || k == NodeKind::Selection)
            throw GraphError("hard target " + g.name(t) + " is not an input or output node");
        if (has(regime, t)) throw GraphError("hard target " + g.name(t) + " is a regime node");
    });
    const MixedGraph orig = g;
    Bits orig_inputs = orig.inputs();
    each(tb & ~orig_inputs, [&](int t) {
        for (const auto& e : orig.adj(t)) {
            if (e.near == Mark::Arrow) {
                g.remove_edge(t, e.nb);
            } else if (cls == GraphClass::PAG && e.near == Mark::Circle && !has(tb, e.nb) &&
                       !has(orig_inputs, e.nb)) {
                g.set_mark(t, e.nb, Mark::Tail);
            }
        }
        g.set_kind(t, NodeKind::Input);
        out.hard_outputs.insert(g.name(t));
    });
    if (cls != GraphClass::ADMG) {
        Bits in = g.inputs();
        each(in, [&](int a) {
            for (const auto& e : std::vector<Adj>(g.adj(a)))
                if (has(in, e.nb)) g.remove_edge(a, e.nb);
        });
    }
    for (const auto& t : T) out.hard.insert(t);
    return out;
}

ManipulatedGraph soft_manipulate(const ManipulatedGraph& mg, const NodeSet& D, GraphClass cls) {
    ManipulatedGraph out = mg;
    if (cls == GraphClass::Raw) cls = infer_class(mg.graph);
    // Reading view: circles at regime-incident edges count as tails.
    MixedGraph view = mg.graph;
    Bits regime = mg.regime_bits();
    each(regime, [&](int r) {
        for (const auto& e : mg.graph.adj(r))
            if (e.far == Mark::Circle) view.set_mark(e.nb, r, Mark::Tail);
    });
    std::vector<NodeId> todo;
    for (const auto& d : D) {
        int i = view.index(d);
        if (view.kind(i) != NodeKind::Output)
            throw GraphError("soft target " + d + " is not an output node");
        if (mg.regime.count(d)) continue;
        if (view.contains(regime_id(d))) throw GraphError("regime id collision for " + d);
        todo.push_back(d);
    }
    struct NewEdge {
        NodeId r;
        NodeId v;
        Mark at_v;
    };
    std::vector<NewEdge> add;
    for (const auto& d : todo) {
        int a = view.index(d);
        std::string r = regime_id(d);
        if (cls == GraphClass::ADMG) {
            add.push_back({r, d, Mark::Arrow});
            continue;
        }
        bool head = false, undirected_edge = false;
        for (const auto& e : view.adj(a)) {
            if (e.near == Mark::Arrow) head = true;
            if (e.near == Mark::Tail && e.far == Mark::Tail) undirected_edge = true;
        }
        if (head)
            add.push_back({r, d, Mark::Arrow});
        else if (undirected_edge)
            add.push_back({r, d, Mark::Tail});
        else
            add.push_back({r, d, Mark::Circle});
        Bits in = view.inputs();
        for (const auto& e : view.adj(a)) {
            int b = e.nb;
            if (has(in, b)) continue;
            Mark ma = e.near, mb = e.far;
            const NodeId& bn = view.name(b);
            if (ma == Mark::Tail && mb == Mark::Arrow) {
                if (!is_visible(view, a, b)) add.push_back({r, bn, Mark::Arrow});
            } else if (ma == Mark::Circle && mb == Mark::Arrow) {
                add.push_back({r, bn, Mark::Arrow});
            } else if (ma == Mark::Tail && mb == Mark::Tail) {
                add.push_back({r, bn, Mark::Tail});
            } else if (ma == Mark::Circle && mb == Mark::Tail) {
                bool other_undirected = false;
                for (const auto& f : view.adj(b))
                    if (f.near == Mark::Tail && f.far == Mark::Tail) other_undirected = true;
                add.push_back({r, bn, other_undirected ? Mark::Tail : Mark::Circle});
            } else if ((ma == Mark::Tail && mb == Mark::Circle) || (ma == Mark::Circle && mb == Mark::Circle)) {
                add.push_back({r, bn, Mark::Circle});
            }
        }
    }
    MixedGraph& g = out.graph;
    for (const auto& d : todo) {
        g.add_node(regime_id(d), NodeKind::Input);
        out.regime[d] = regime_id(d);
        out.soft.insert(d);
    }
    for (const auto& e : add) g.add_edge(e.r, Mark::Tail, e.v, e.at_v);
    return out;
}

ManipulatedGraph manipulate(const MixedGraph& g, const NodeSet& D, const NodeSet& T, GraphClass cls) {
    for (const auto& d : D)
        if (T.count(d)) throw GraphError("soft and hard targets overlap at " + d);
    if (cls == GraphClass::Raw) cls = infer_class(g);
    ManipulatedGraph m = as_manipulated(g);
    if (!D.empty()) m = soft_manipulate(m, D, cls);
    if (!T.empty()) m = hard_manipulate(m, T, cls);
    return m;
}

std::string format_manipulated(const ManipulatedGraph& m) {
    std::ostringstream out;
    for (const auto& d : m.soft) out << "soft " << d << "\n";
    for (const auto& t : m.hard) out << "hard " << t << (m.hard_outputs.count(t) ? "" : " input") << "\n";
    out << format_graph(m.graph);
    return out.str();
}

static bool is_regime_like(const NodeId& id) { return id.rfind("I__", 0) == 0; }

ManipulatedGraph parse_manipulated(const std::string& text) {
    ManipulatedGraph m;
    std::istringstream in(text);
    std::string line, body;
    while (std::getline(in, line)) {
        std::istringstream ls(line.substr(0, line.find('#')));
        std::string head, id, extra;
        ls >> head;
        if (head == "soft") {
            ls >> id;
            m.soft.insert(id);
            m.regime[id] = regime_id(id);
        } else if (head == "hard") {
            ls >> id >> extra;
            m.hard.insert(id);
            if (extra != "input") m.hard_outputs.insert(id);
        } else {
            body += line + "\n";
        }
    }
    m.graph = parse_graph(body);
    for (int i = 0; i < m.graph.size(); ++i) {
        const NodeId& id = m.graph.name(i);
        if (is_regime_like(id) && !m.soft.count(id.substr(3)))
            throw GraphError("node id '" + id + "' collides with regime naming");
    }
    for (const auto& [d, r] : m.regime)
        if (!m.graph.contains(r)) throw GraphError("missing regime node " + r);
    return m;
}

MixedGraph parse_plain_graph(const std::string& text) {
    MixedGraph g = parse_graph(text);
    for (int i = 0; i < g.size(); ++i)
        if (is_regime_like(g.name(i)))
            throw GraphError("node id '" + g.name(i) + "' collides with regime naming");
    return g;
}

}  // namespace pagcid
