#include "pagcid/represent.hpp"

#include <algorithm>
#include <functional>

#include "pagcid/fci.hpp"
#include "pagcid/manipulate.hpp"
#include "pagcid/separate.hpp"
#include "pagcid/structure.hpp"

namespace pagcid {

std::string selection_id(const NodeId& a, const NodeId& b) {
    return a < b ? "s__" + a + "__" + b : "s__" + b + "__" + a;
}

std::string confounder_id(const NodeId& a, const NodeId& b) {
    return a < b ? "U__" + a + "__" + b : "U__" + b + "__" + a;
}

void add_bidirected(MixedGraph& g, int a, int b) {
    if (!g.adjacent(a, b)) {
        g.add_edge(a, Mark::Arrow, b, Mark::Arrow);
        return;
    }
    if (bidirected(g, a, b)) return;
    NodeId na = g.name(a), nb = g.name(b);
    std::string u = confounder_id(na, nb);
    if (g.contains(u)) return;
    g.add_node(u, NodeKind::Latent);
    g.add_edge(u, Mark::Tail, na, Mark::Arrow);
    g.add_edge(u, Mark::Tail, nb, Mark::Arrow);
}

static void require_valid(const MixedGraph& g, GraphClass cls, const char* what) {
    auto v = validate(g, cls);
    if (!v.empty()) throw GraphError(std::string(what) + ": " + v.front());
}

MixedGraph mag_of(const MixedGraph& a) {
    require_valid(a, GraphClass::ADMG, "mag_of expects an ADMG");
    Bits L = a.latents(), S = a.selections();
    Bits observed = a.all() & ~L & ~S;
    MixedGraph m;
    m.tag = GraphClass::MAG;
    each(observed, [&](int v) { m.add_node(a.name(v), a.kind(v)); });
    Bits in = a.inputs();
    std::vector<Bits> anc(a.size());
    each(observed, [&](int v) { anc[v] = ancestors(a, bit(v) | S); });
    for (int x : members(observed))
        for (int y : members(observed)) {
            if (y <= x || (has(in, x) && has(in, y))) continue;
            if (!inducing_path_exists(a, x, y, L, S)) continue;
            Mark mx = has(anc[y], x) ? Mark::Tail : Mark::Arrow;
            Mark my = has(anc[x], y) ? Mark::Tail : Mark::Arrow;
            m.add_edge(a.name(x), mx, a.name(y), my);
        }
    return m;
}

MixedGraph canonical_isadmg(const MixedGraph& m) {
    MixedGraph a;
    a.tag = GraphClass::ADMG;
    for (int i = 0; i < m.size(); ++i) a.add_node(m.name(i), m.kind(i));
    for (const auto& e : m.edges()) {
        if (e.mark_a == Mark::Tail && e.mark_b == Mark::Tail) {
            std::string s = selection_id(e.a, e.b);
            a.add_node(s, NodeKind::Selection);
            a.add_edge(e.a, Mark::Tail, s, Mark::Arrow);
            a.add_edge(e.b, Mark::Tail, s, Mark::Arrow);
        } else {
            if (e.mark_a == Mark::Circle || e.mark_b == Mark::Circle)
                throw GraphError("canonical_isadmg expects a MAG, found circle on " + e.a + "," + e.b);
            a.add_edge(e.a, e.mark_a, e.b, e.mark_b);
        }
    }
    return a;
}

MixedGraph marginalize_latents(const MixedGraph& a) {
    require_valid(a, GraphClass::ADMG, "marginalize_latents expects an ADMG");
    Bits L = a.latents();
    Bits keep = a.all() & ~L;
    int n = a.size();
    // down[u]: kept nodes reached from u by a directed path whose interior is latent.
    std::vector<Bits> down(n, 0);
    for (int u = 0; u < n; ++u) {
        Bits seen = 0;
        std::vector<int> stack{u};
        while (!stack.empty()) {
            int c = stack.back();
            stack.pop_back();
            for (const auto& e : a.adj(c)) {
                if (!(e.near == Mark::Tail && e.far == Mark::Arrow) || has(seen, e.nb)) continue;
                seen |= bit(e.nb);
                if (has(L, e.nb)) stack.push_back(e.nb);
            }
        }
        down[u] = seen & keep;
    }
    // up[x]: x plus latents with a latent-interior directed path into x.
    std::vector<Bits> up(n, 0);
    for (int x : members(keep)) {
        up[x] = bit(x);
        each(L, [&](int l) {
            if (has(down[l], x)) up[x] |= bit(l);
        });
    }
    MixedGraph out;
    out.tag = GraphClass::ADMG;
    each(keep, [&](int v) { out.add_node(a.name(v), a.kind(v)); });
    std::vector<std::pair<int, int>> confounded;
    for (int x : members(keep))
        for (int y : members(keep)) {
            if (x == y) continue;
            if (has(down[x], y)) out.add_edge(a.name(x), Mark::Tail, a.name(y), Mark::Arrow);
            if (y < x) continue;
            bool bi = (up[x] & up[y] & L) != 0;
            each(up[x], [&](int u) {
                for (const auto& e : a.adj(u))
                    if (e.near == Mark::Arrow && e.far == Mark::Arrow && has(up[y], e.nb)) bi = true;
            });
            if (bi) confounded.push_back({x, y});
        }
    for (auto [x, y] : confounded) add_bidirected(out, out.index(a.name(x)), out.index(a.name(y)));
    return out;
}

namespace {

bool same_independence_model(const MixedGraph& m, const IndependenceOracle& ref) {
    auto mine = graph_oracle(canonical_isadmg(m));
    NodeSet outs = ref.outputs();
    NodeSet ins = ref.inputs();
    std::vector<NodeId> all(outs.begin(), outs.end());
    all.insert(all.end(), ins.begin(), ins.end());
    std::vector<NodeId> ov(outs.begin(), outs.end());
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            if (ins.count(all[i]) && ins.count(all[j])) continue;
            std::vector<NodeId> rest;
            for (const auto& v : ov)
                if (v != all[i] && v != all[j]) rest.push_back(v);
            for (std::uint32_t mask = 0; mask < (1u << rest.size()); ++mask) {
                NodeSet C;
                for (std::size_t k = 0; k < rest.size(); ++k)
                    if (mask >> k & 1u) C.insert(rest[k]);
                if (mine->query({all[i]}, {all[j]}, C) != ref.query({all[i]}, {all[j]}, C)) return false;
            }
        }
    return true;
}

struct Slot {
    int a, b;        // edge endpoints
    bool ca, cb;     // circle at a / at b
};

}  // namespace

EnumerateResult enumerate_mags(const MixedGraph& p, const EnumerateOptions& opt) {
    require_valid(p, GraphClass::PAG, "enumerate_mags expects a PAG");
    std::vector<Slot> slots;
    for (int a = 0; a < p.size(); ++a)
        for (const auto& e : p.adj(a))
            if (a < e.nb && (e.near == Mark::Circle || e.far == Mark::Circle))
                slots.push_back({a, e.nb, e.near == Mark::Circle, e.far == Mark::Circle});
    EnumerateResult res;
    res.filtered = opt.filter_by_fci || opt.oracle;
    MixedGraph g = p;
    g.tag = GraphClass::MAG;
    Bits in = p.inputs();
    std::uint64_t explored = 0;
    // When filtering, prune on what every member of [p]_M satisfies: no new
    // unshielded collider.
    auto new_collider = [&](int mid) {
        if (!res.filtered) return false;
        const auto& adj = g.adj(mid);
        for (std::size_t i = 0; i < adj.size(); ++i)
            for (std::size_t j = i + 1; j < adj.size(); ++j) {
                int x = adj[i].nb, y = adj[j].nb;
                if (adj[i].near != Mark::Arrow || adj[j].near != Mark::Arrow) continue;
                if (g.adjacent(x, y)) continue;
                if (!(is_mark(p, mid, x, Mark::Arrow) && is_mark(p, mid, y, Mark::Arrow))) return true;
            }
        return false;
    };
    std::vector<MixedGraph> found;
    std::function<void(std::size_t)> go = [&](std::size_t k) {
        if (++explored > opt.cap) throw GraphError("enumerate_mags: candidate cap exceeded");
        if (k == slots.size()) {
            if (validate(g, GraphClass::MAG).empty()) found.push_back(g);
            return;
        }
        const Slot& s = slots[k];
        Mark pa = *p.mark(s.a, s.b), pb = *p.mark(s.b, s.a);
        for (int ma = 0; ma < (s.ca ? 2 : 1); ++ma)
            for (int mb = 0; mb < (s.cb ? 2 : 1); ++mb) {
                Mark xa = s.ca ? (ma ? Mark::Arrow : Mark::Tail) : pa;
                Mark xb = s.cb ? (mb ? Mark::Arrow : Mark::Tail) : pb;
                if ((xa == Mark::Arrow && has(in, s.a)) || (xb == Mark::Arrow && has(in, s.b))) continue;
                g.set_mark(s.a, s.b, xa);
                g.set_mark(s.b, s.a, xb);
                // is_ancestral only reads definite marks, so it is a sound partial check.
                bool ok = !(xa == Mark::Arrow && new_collider(s.a)) && !(xb == Mark::Arrow && new_collider(s.b)) &&
                          is_ancestral(g);
                if (ok) go(k + 1);
            }
        g.set_mark(s.a, s.b, pa);
        g.set_mark(s.b, s.a, pb);
    };
    go(0);
    if (!res.filtered) {
        res.mags = std::move(found);
        return res;
    }
    for (auto& m : found) {
        bool keep;
        if (opt.oracle) {
            keep = same_independence_model(m, *opt.oracle);
        } else {
            MixedGraph back = fci(*graph_oracle(canonical_isadmg(m)));
            keep = back == p;
        }
        if (keep) res.mags.push_back(std::move(m));
    }
    return res;
}

MixedGraph tag_orient(const MixedGraph& p) {
    MixedGraph g = p;
    auto head_into = [&](int v) {
        for (const auto& e : p.adj(v))
            if (e.near == Mark::Arrow) return true;
        return false;
    };
    for (int a = 0; a < p.size(); ++a)
        for (const auto& e : p.adj(a)) {
            if (a > e.nb) continue;
            int b = e.nb;
            if (e.near == Mark::Circle && e.far == Mark::Arrow) g.set_mark(a, b, Mark::Tail);
            if (e.near == Mark::Arrow && e.far == Mark::Circle) g.set_mark(b, a, Mark::Tail);
            if (e.near == Mark::Tail && e.far == Mark::Circle) g.set_mark(b, a, Mark::Tail);
            if (e.near == Mark::Circle && e.far == Mark::Tail) g.set_mark(a, b, Mark::Tail);
            if (e.near == Mark::Circle && e.far == Mark::Circle && !head_into(a) && !head_into(b)) {
                g.set_mark(a, b, Mark::Tail);
                g.set_mark(b, a, Mark::Tail);
            }
        }
    return g;
}

void orient_circle_component(MixedGraph& g, Bits nodes, int source) {
    auto circle = [&](int x, int y) { return is_mark(g, x, y, Mark::Circle) && is_mark(g, y, x, Mark::Circle); };
    std::vector<int> order(g.size(), -1);
    std::vector<int> weight(g.size(), 0);
    Bits left = nodes;
    int pos = 0;
    int next = has(nodes, source) ? source : lowest(nodes);
    while (left) {
        if (next < 0) {
            int best = -1;
            each(left, [&](int v) {
                if (best < 0 || weight[v] > weight[best]) best = v;
            });
            next = best;
        }
        order[next] = pos++;
        left &= ~bit(next);
        for (const auto& e : g.adj(next))
            if (has(left, e.nb) && circle(next, e.nb)) ++weight[e.nb];
        next = -1;
    }
    for (int a : members(nodes))
        for (const auto& e : std::vector<Adj>(g.adj(a))) {
            int b = e.nb;
            if (!has(nodes, b) || a > b || !circle(a, b)) continue;
            int from = order[a] < order[b] ? a : b, to = from == a ? b : a;
            g.set_mark(from, to, Mark::Tail);
            g.set_mark(to, from, Mark::Arrow);
        }
}

MixedGraph orient_to_mag(const MixedGraph& p, Bits sources) {
    MixedGraph g = tag_orient(p);
    for (Bits comp : circle_components(g, g.all())) {
        Bits src = comp & sources;
        if (count(src) > 1) throw GraphError("protected nodes share a circle component: " + format_set(g, src));
        if (count(comp) > 1) orient_circle_component(g, comp, src ? lowest(src) : lowest(comp));
    }
    g.tag = GraphClass::MAG;
    return g;
}

MixedGraph bidirected_witness(const MixedGraph& m, int a, int b) {
    if (!directed(m, a, b)) throw GraphError("bidirected_witness needs a directed edge");
    if (is_visible(m, a, b)) throw GraphError("edge " + m.name(a) + " --> " + m.name(b) + " is visible");
    MixedGraph w = canonical_isadmg(m);
    add_bidirected(w, w.index(m.name(a)), w.index(m.name(b)));
    if (!(mag_of(w) == m)) throw GraphError("bidirected witness does not represent the MAG");
    return w;
}

namespace {

// Single additions tried on top of the canonical isADMG.
std::vector<std::pair<NodeId, NodeId>> witness_additions(const MixedGraph& m) {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (const auto& e : m.edges()) {
        int a = m.index(e.a), b = m.index(e.b);
        if (directed(m, a, b) && !is_visible(m, a, b)) out.push_back({e.a, e.b});
        if (directed(m, b, a) && !is_visible(m, b, a)) out.push_back({e.b, e.a});
        if (undirected(m, a, b)) {
            // Inputs take no arrowheads.
            if (m.kind(a) != NodeKind::Input) out.push_back({selection_id(e.a, e.b), e.a});
            if (m.kind(b) != NodeKind::Input) out.push_back({selection_id(e.a, e.b), e.b});
        }
    }
    return out;
}

}  // namespace

MixedGraph separation_failure_witness(const MixedGraph& m, const NodeSet& D, const NodeSet& T, const NodeSet& A,
                                      const NodeSet& B, const NodeSet& C) {
    NodeSet CT = C;
    CT.insert(T.begin(), T.end());
    ManipulatedGraph hm = manipulate(m, D, T, GraphClass::MAG);
    const MixedGraph& hg = hm.graph;
    if (id_separated(hm, hg.to_bits(A), hg.to_bits(B), hg.to_bits(CT)))
        throw GraphError("separation holds; no witness needed");
    MixedGraph base = canonical_isadmg(m);
    auto opens = [&](const MixedGraph& cand) {
        if (!(mag_of(cand) == m)) return false;
        ManipulatedGraph h = manipulate(cand, D, T, GraphClass::ADMG);
        Bits c = h.graph.to_bits(CT) | h.graph.selections();
        return !id_separated(h, h.graph.to_bits(A), h.graph.to_bits(B), c);
    };
    if (opens(base)) return base;
    auto adds = witness_additions(m);
    auto apply = [&](MixedGraph& g, const std::pair<NodeId, NodeId>& x) {
        add_bidirected(g, g.index(x.first), g.index(x.second));
    };
    for (std::size_t i = 0; i < adds.size(); ++i) {
        MixedGraph c = base;
        apply(c, adds[i]);
        if (opens(c)) return c;
    }
    for (std::size_t i = 0; i < adds.size(); ++i)
        for (std::size_t j = i + 1; j < adds.size(); ++j) {
            MixedGraph c = base;
            apply(c, adds[i]);
            apply(c, adds[j]);
            if (opens(c)) return c;
        }
    throw GraphError("no separation-failure witness found among candidate isADMGs");
}

MixedGraph perturb_isadmg(const MixedGraph& m, std::mt19937_64& rng, int attempts) {
    MixedGraph a = canonical_isadmg(m);
    int extra = 0;
    for (int k = 0; k < attempts; ++k) {
        MixedGraph c = a;
        std::vector<int> pool = members(c.all() & ~c.latents());
        if (pool.size() < 2) break;
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        int op = static_cast<int>(rng() % 2);
        if (op == 0) {
            int x = pool[pick(rng)], y = pool[pick(rng)];
            if (x == y || c.kind(x) == NodeKind::Input || c.kind(y) == NodeKind::Input) continue;
            add_bidirected(c, x, y);
        } else {
            std::vector<NodeId> parents;
            for (int i = 0; i < c.size(); ++i)
                if (c.kind(i) != NodeKind::Latent && c.kind(i) != NodeKind::Selection && rng() % 3 == 0)
                    parents.push_back(c.name(i));
            if (parents.empty()) continue;
            std::string s = "s__x" + std::to_string(extra);
            while (c.contains(s)) s += "_";
            c.add_node(s, NodeKind::Selection);
            for (const auto& p : parents) c.add_edge(p, Mark::Tail, s, Mark::Arrow);
        }
        if (mag_of(c) == m) {
            a = std::move(c);
            ++extra;
        }
    }
    return a;
}

}  // namespace pagcid
