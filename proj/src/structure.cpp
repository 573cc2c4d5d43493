#include "pagcid/structure.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include "pagcid/manipulate.hpp"

namespace pagcid {

namespace {

// Backward/forward closure; `step(e)` says whether neighbor e.nb joins,
// with e seen from the node already in the set.
template <class Step>
Bits reach(const MixedGraph& g, Bits X, Bits within, Step step) {
    within &= g.all();
    Bits seen = X & within;
    std::vector<int> stack = members(seen);
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        for (const auto& e : g.adj(c)) {
            if (!has(within, e.nb) || has(seen, e.nb)) continue;
            if (!step(e)) continue;
            seen |= bit(e.nb);
            stack.push_back(e.nb);
        }
    }
    return seen;
}

std::vector<Bits> components(const MixedGraph& g, Bits D, const std::function<bool(const Adj&)>& link) {
    std::vector<Bits> out;
    Bits left = D & g.all();
    while (left) {
        int s = lowest(left);
        Bits comp = reach(g, bit(s), D, link);
        out.push_back(comp);
        left &= ~comp;
    }
    return out;
}

}  // namespace

Bits ancestors(const MixedGraph& g, Bits X, Bits within) {
    return reach(g, X, within, [](const Adj& e) { return e.near == Mark::Arrow && e.far == Mark::Tail; });
}

Bits descendants(const MixedGraph& g, Bits X, Bits within) {
    return reach(g, X, within, [](const Adj& e) { return e.near == Mark::Tail && e.far == Mark::Arrow; });
}

Bits anteriors(const MixedGraph& g, Bits X, Bits within) {
    return reach(g, X, within, [](const Adj& e) {
        return e.far == Mark::Tail && (e.near == Mark::Arrow || e.near == Mark::Tail);
    });
}

Bits possible_ancestors(const MixedGraph& g, Bits X, Bits within) {
    return reach(g, X, within, [](const Adj& e) { return e.far != Mark::Arrow && e.near != Mark::Tail; });
}

Bits possible_descendants(const MixedGraph& g, Bits X, Bits within) {
    return reach(g, X, within, [](const Adj& e) { return e.near != Mark::Arrow && e.far != Mark::Tail; });
}

Bits possible_anteriors(const MixedGraph& g, Bits X, Bits within) {
    return reach(g, X, within, [](const Adj& e) { return e.far != Mark::Arrow; });
}

bool potentially_directed_edge(const MixedGraph& g, int from, int to) {
    auto mf = g.mark(from, to);
    auto mt = g.mark(to, from);
    return mf && *mf != Mark::Arrow && *mt != Mark::Tail;
}

std::vector<Bits> buckets(const MixedGraph& g, Bits D) {
    return components(g, D, [](const Adj& e) { return e.near != Mark::Arrow && e.far != Mark::Arrow; });
}

Bits bucket_of(const MixedGraph& g, Bits D, int v) {
    return reach(g, bit(v), D, [](const Adj& e) { return e.near != Mark::Arrow && e.far != Mark::Arrow; });
}

std::vector<Bits> circle_components(const MixedGraph& g, Bits D) {
    return components(g, D, [](const Adj& e) { return e.near == Mark::Circle && e.far == Mark::Circle; });
}

static bool visible_edge(const MixedGraph& g, int x, int y, Bits D) {
    if (directed(g, x, y)) return is_visible(g, x, y, D);
    if (directed(g, y, x)) return is_visible(g, y, x, D);
    return false;
}

Bits pc_component(const MixedGraph& g, Bits D, int b) {
    Bits out = bit(b);
    // Form (i): single non-visible edge.
    for (const auto& e : g.adj(b))
        if (has(D, e.nb) && !visible_edge(g, b, e.nb, D)) out |= bit(e.nb);
    // Form (ii): b ∗→ z ↔ ... ↔ z' ←∗ a, no visible edge.
    Bits start = 0;
    for (const auto& e : g.adj(b))
        if (has(D, e.nb) && e.far == Mark::Arrow && !visible_edge(g, b, e.nb, D)) start |= bit(e.nb);
    Bits chain = reach(g, start, D, [](const Adj& e) { return e.near == Mark::Arrow && e.far == Mark::Arrow; });
    each(chain, [&](int z) {
        for (const auto& e : g.adj(z)) {
            if (!has(D, e.nb) || e.near != Mark::Arrow) continue;
            if (visible_edge(g, e.nb, z, D)) continue;
            out |= bit(e.nb);
        }
    });
    return out;
}

Bits pc_set(const MixedGraph& g, Bits D, Bits B) {
    Bits out = 0;
    each(B & D, [&](int b) { out |= pc_component(g, D, b); });
    return out;
}

Bits region(const MixedGraph& g, Bits D, Bits B) {
    Bits pc = pc_set(g, D, B);
    Bits out = 0;
    each(pc, [&](int c) {
        if (!has(out, c)) out |= bucket_of(g, D, c);
    });
    return out;
}

std::vector<Bits> bucket_topological_order(const MixedGraph& g, Bits D) {
    std::vector<Bits> bs = buckets(g, D);
    int n = static_cast<int>(bs.size());
    std::vector<int> owner(g.size(), -1);
    for (int i = 0; i < n; ++i) each(bs[i], [&](int v) { owner[v] = i; });
    std::vector<std::vector<int>> succ(n);
    std::vector<int> indeg(n, 0);
    for (int i = 0; i < n; ++i) {
        Bits targets = 0;
        each(bs[i], [&](int x) {
            for (const auto& e : g.adj(x)) {
                if (!has(D, e.nb) || owner[e.nb] == i) continue;
                if (e.near != Mark::Arrow && e.far != Mark::Tail) targets |= bit(owner[e.nb]);
            }
        });
        each(targets, [&](int j) {
            succ[i].push_back(j);
            ++indeg[j];
        });
    }
    auto key = [&](int i) { return lowest(bs[i]); };
    auto cmp = [&](int x, int y) { return key(x) > key(y); };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> ready(cmp);
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push(i);
    std::vector<Bits> out;
    while (!ready.empty()) {
        int i = ready.top();
        ready.pop();
        out.push_back(bs[i]);
        for (int j : succ[i])
            if (--indeg[j] == 0) ready.push(j);
    }
    if (static_cast<int>(out.size()) != n) throw GraphError("cycle among buckets");
    return out;
}

bool inducing_path_exists(const MixedGraph& g, int a, int b, Bits L, Bits S) {
    Bits anc = ancestors(g, bit(a) | bit(b) | S);
    // state: node * 2 + (arrowhead at node on the incoming edge)
    std::vector<char> seen(2 * g.size(), 0);
    std::vector<int> stack;
    for (const auto& e : g.adj(a)) {
        if (e.nb == b) return true;
        int s = 2 * e.nb + (e.far == Mark::Arrow ? 1 : 0);
        if (!seen[s]) {
            seen[s] = 1;
            stack.push_back(s);
        }
    }
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        int v = s / 2;
        bool head_in = s % 2;
        for (const auto& e : g.adj(v)) {
            bool collider = head_in && e.near == Mark::Arrow;
            if (collider) {
                if (!has(anc, v)) continue;
            } else if (!has(L, v)) {
                continue;
            }
            if (e.nb == b) return true;
            int t = 2 * e.nb + (e.far == Mark::Arrow ? 1 : 0);
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
        }
    }
    return false;
}

std::vector<std::vector<int>> discriminating_paths(const MixedGraph& g, int y, int z) {
    std::vector<std::vector<int>> out;
    if (!g.adjacent(y, z)) return out;
    Bits pa_z = parents(g, z);
    std::vector<int> path;  // v_k, v_{k-1}, ... (from y outward)
    Bits used = bit(y) | bit(z);
    std::function<void(int)> extend = [&](int v) {
        // v is a collider in Pa(z); try to close with an endpoint a.
        for (const auto& e : g.adj(v)) {
            int w = e.nb;
            if (has(used, w) || e.near != Mark::Arrow) continue;
            if (!g.adjacent(w, z)) {
                std::vector<int> p{w};
                for (auto it = path.rbegin(); it != path.rend(); ++it) p.push_back(*it);
                p.push_back(y);
                p.push_back(z);
                out.push_back(std::move(p));
            }
        }
        for (const auto& e : g.adj(v)) {
            int w = e.nb;
            if (has(used, w) || !has(pa_z, w)) continue;
            if (e.near != Mark::Arrow || e.far != Mark::Arrow) continue;
            used |= bit(w);
            path.push_back(w);
            extend(w);
            path.pop_back();
            used &= ~bit(w);
        }
    };
    for (const auto& e : g.adj(y)) {
        int v = e.nb;
        if (!has(pa_z, v) || e.far != Mark::Arrow) continue;
        used |= bit(v);
        path.push_back(v);
        extend(v);
        path.pop_back();
        used &= ~bit(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool has_circles(const MixedGraph& g) {
    for (int i = 0; i < g.size(); ++i)
        for (const auto& e : g.adj(i))
            if (e.near == Mark::Circle) return true;
    return false;
}

namespace {

void check_ancestral(const MixedGraph& g, std::vector<std::string>& out) {
    for (int a = 0; a < g.size(); ++a) {
        for (const auto& e : g.adj(a)) {
            int b = e.nb;
            if (e.near == Mark::Tail && e.far == Mark::Arrow) {
                if (has(descendants(g, bit(b)), a))
                    out.push_back("directed cycle through " + g.name(a) + "," + g.name(b));
                else if (has(anteriors(g, bit(a)), b))
                    out.push_back("partially directed cycle through " + g.name(a) + "," + g.name(b));
            }
            if (a < b && e.near == Mark::Arrow && e.far == Mark::Arrow) {
                if (has(ancestors(g, bit(b)), a) || has(ancestors(g, bit(a)), b))
                    out.push_back("almost directed cycle through " + g.name(a) + "," + g.name(b));
            }
        }
    }
    for (int b = 0; b < g.size(); ++b) {
        bool head = false, tail_tail = false;
        for (const auto& e : g.adj(b)) {
            if (e.near == Mark::Arrow) head = true;
            if (e.near == Mark::Tail && e.far == Mark::Tail) tail_tail = true;
        }
        if (head && tail_tail) out.push_back("arrowhead into " + g.name(b) + " which has an undirected edge");
    }
}

void check_maximal(const MixedGraph& g, std::vector<std::string>& out) {
    Bits in = g.inputs();
    for (int a = 0; a < g.size(); ++a)
        for (int b = a + 1; b < g.size(); ++b) {
            if (g.adjacent(a, b) || (has(in, a) && has(in, b))) continue;
            if (inducing_path_exists(g, a, b, 0, 0))
                out.push_back("inducing path between non-adjacent " + g.name(a) + "," + g.name(b));
        }
}

}  // namespace

bool is_ancestral(const MixedGraph& g) {
    std::vector<std::string> v;
    check_ancestral(g, v);
    return v.empty();
}

std::vector<std::string> validate(const MixedGraph& g, GraphClass cls) {
    std::vector<std::string> out;
    Bits in = g.inputs();
    for (int a = 0; a < g.size(); ++a)
        for (const auto& e : g.adj(a)) {
            if (has(in, a) && e.near == Mark::Arrow)
                out.push_back("arrowhead at input " + g.name(a) + " on edge " + format_edge(g, a, e.nb));
            if (a < e.nb && has(in, a) && has(in, e.nb))
                out.push_back("edge between inputs " + format_edge(g, a, e.nb));
        }
    if (cls == GraphClass::Raw) return out;
    if (cls == GraphClass::ADMG) {
        for (int a = 0; a < g.size(); ++a)
            for (const auto& e : g.adj(a)) {
                if (a > e.nb) continue;
                bool ok = (e.near == Mark::Tail && e.far == Mark::Arrow) ||
                          (e.near == Mark::Arrow && e.far == Mark::Tail) ||
                          (e.near == Mark::Arrow && e.far == Mark::Arrow);
                if (!ok) out.push_back("edge not directed or bidirected: " + format_edge(g, a, e.nb));
                if (e.near == Mark::Tail && e.far == Mark::Arrow && has(descendants(g, bit(e.nb)), a))
                    out.push_back("cycle " + g.name(a) + "," + g.name(e.nb));
                if (e.near == Mark::Arrow && e.far == Mark::Tail && has(descendants(g, bit(a)), e.nb))
                    out.push_back("cycle " + g.name(e.nb) + "," + g.name(a));
            }
        return out;
    }
    if (g.latents() | g.selections()) out.push_back("latent or selection node in an ancestral graph");
    if (cls == GraphClass::MAG && has_circles(g)) out.push_back("circle mark in a MAG");
    check_ancestral(g, out);
    check_maximal(g, out);
    return out;
}

}  // namespace pagcid
