#include "pagcid/fci.hpp"

#include <algorithm>
#include <functional>

#include "pagcid/separate.hpp"
#include "pagcid/structure.hpp"

namespace pagcid {

namespace {

class GraphOracle : public IndependenceOracle {
  public:
    explicit GraphOracle(MixedGraph a) : a_(std::move(a)) {
        auto v = validate(a_, GraphClass::ADMG);
        if (!v.empty()) throw GraphError("graph_oracle expects an ADMG: " + v.front());
        sel_ = a_.selections();
        in_ = a_.inputs();
    }
    bool query(const NodeSet& A, const NodeSet& B, const NodeSet& C) const override {
        Bits x = a_.to_bits(A), y = a_.to_bits(B);
        Bits c = a_.to_bits(C) | sel_ | (in_ & ~x & ~y);
        return d_separated(a_, x, y, c);
    }
    NodeSet inputs() const override { return a_.to_set(in_); }
    NodeSet outputs() const override { return a_.to_set(a_.outputs()); }

  private:
    MixedGraph a_;
    Bits sel_ = 0, in_ = 0;
};

std::pair<NodeId, NodeId> key(const NodeId& a, const NodeId& b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

// Subsets of `pool` of size k, in lexicographic order of indices.
template <class F>
bool for_subsets(Bits pool, int k, F&& f) {
    std::vector<int> items = members(pool);
    int n = static_cast<int>(items.size());
    if (k > n) return false;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        Bits s = 0;
        for (int i : idx) s |= bit(items[i]);
        if (f(s)) return true;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return false;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

std::unique_ptr<IndependenceOracle> graph_oracle(const MixedGraph& a) { return std::make_unique<GraphOracle>(a); }

const NodeSet* SepsetTable::find(const NodeId& a, const NodeId& b) const {
    auto it = sets.find(key(a, b));
    return it == sets.end() ? nullptr : &it->second;
}

void SepsetTable::put(const NodeId& a, const NodeId& b, NodeSet s) { sets[key(a, b)] = std::move(s); }

Skeleton skeleton(const IndependenceOracle& oracle) {
    Skeleton sk;
    MixedGraph& g = sk.graph;
    for (const auto& v : oracle.outputs()) g.add_node(v, NodeKind::Output);
    for (const auto& v : oracle.inputs()) g.add_node(v, NodeKind::Input);
    Bits in = g.inputs();
    for (int a = 0; a < g.size(); ++a)
        for (int b = a + 1; b < g.size(); ++b)
            if (!(has(in, a) && has(in, b))) g.add_edge(a, Mark::Circle, b, Mark::Circle);
    auto test = [&](int x, int y, Bits pool, int k) {
        return for_subsets(pool, k, [&](Bits c) {
            if (!oracle.query({g.name(x)}, {g.name(y)}, g.to_set(c))) return false;
            g.remove_edge(x, y);
            sk.sepsets.put(g.name(x), g.name(y), g.to_set(c));
            return true;
        });
    };
    // Stage 1: conditioning sets drawn from current adjacencies.
    for (int k = 0;; ++k) {
        bool any = false;
        for (int x = 0; x < g.size(); ++x)
            for (int y = 0; y < g.size(); ++y) {
                if (x == y || !g.adjacent(x, y)) continue;
                Bits pool = g.neighbors(x) & ~bit(y) & ~in;
                if (count(pool) < k) continue;
                any = true;
                test(x, y, pool, k);
            }
        if (!any) break;
    }
    // Stage 2: Possible-D-SEP with colliders oriented from the stage-1 sepsets.
    MixedGraph o = g;
    for (int j = 0; j < o.size(); ++j) {
        const auto adj = g.adj(j);
        for (std::size_t p = 0; p < adj.size(); ++p)
            for (std::size_t q = p + 1; q < adj.size(); ++q) {
                int i = adj[p].nb, k = adj[q].nb;
                if (g.adjacent(i, k) || has(in, j) || (has(in, i) && has(in, k))) continue;
                const NodeSet* s = sk.sepsets.find(g.name(i), g.name(k));
                if (s && s->count(g.name(j))) continue;
                o.set_mark(j, i, Mark::Arrow);
                o.set_mark(j, k, Mark::Arrow);
            }
    }
    auto pds = [&](int x) {
        int n = o.size();
        std::vector<char> seen(n * n, 0);
        std::vector<std::pair<int, int>> stack;
        Bits out = 0;
        for (const auto& e : o.adj(x)) {
            seen[x * n + e.nb] = 1;
            stack.push_back({x, e.nb});
            out |= bit(e.nb);
        }
        while (!stack.empty()) {
            auto [u, w] = stack.back();
            stack.pop_back();
            for (const auto& e : o.adj(w)) {
                int v = e.nb;
                if (v == u || v == x || seen[w * n + v]) continue;
                bool collider = is_mark(o, w, u, Mark::Arrow) && e.near == Mark::Arrow;
                if (!collider && !o.adjacent(u, v)) continue;
                seen[w * n + v] = 1;
                out |= bit(v);
                stack.push_back({w, v});
            }
        }
        return out & ~bit(x);
    };
    std::vector<Bits> sets(g.size());
    for (int x = 0; x < g.size(); ++x) sets[x] = pds(x);
    for (int x = 0; x < g.size(); ++x)
        for (int y = 0; y < g.size(); ++y) {
            if (x == y || !g.adjacent(x, y)) continue;
            Bits pool = sets[x] & ~bit(y) & ~in;
            for (int k = 0; k <= count(pool); ++k)
                if (test(x, y, pool, k)) break;
        }
    return sk;
}

namespace {

struct Orienter {
    MixedGraph& g;
    const SepsetTable& sep;
    OrientLog* log;
    Bits in;

    bool put(int at, int other, Mark m, const std::string& rule) {
        Mark cur = *g.mark(at, other);
        if (cur == m) return false;
        if (cur != Mark::Circle)
            throw GraphError(rule + ": orientation conflict on " + format_edge(g, other, at) + " at " + g.name(at));
        g.set_mark(at, other, m);
        if (log) log->lines.push_back(rule + " " + format_edge(g, std::min(at, other), std::max(at, other)));
        return true;
    }

    bool in_sepset(int i, int k, int j) const {
        if (has(in, j)) return true;
        const NodeSet* s = sep.find(g.name(i), g.name(k));
        if (!s) throw GraphError("no separating set recorded for non-adjacent " + g.name(i) + "," + g.name(k));
        return s->count(g.name(j)) > 0;
    }

    Mark at(int x, int y) const { return *g.mark(x, y); }

    // Triples i - j - k with i, k distinct neighbors of j.
    template <class F>
    bool triples(F&& f) {
        bool changed = false;
        for (int j = 0; j < g.size(); ++j) {
            std::vector<int> nb = members(g.neighbors(j));
            for (int i : nb)
                for (int k : nb)
                    if (i != k && f(i, j, k)) changed = true;
        }
        return changed;
    }

    bool r0() {
        return triples([&](int i, int j, int k) {
            if (has(in, i) || g.adjacent(i, k)) return false;
            if (in_sepset(i, k, j)) return false;
            bool c = put(j, i, Mark::Arrow, "R0");
            return put(j, k, Mark::Arrow, "R0") || c;
        });
    }

    bool r1() {
        return triples([&](int i, int j, int k) {
            if (has(in, i) || g.adjacent(i, k)) return false;
            if (at(j, i) != Mark::Circle || at(j, k) != Mark::Arrow) return false;
            bool c = put(j, i, Mark::Tail, "R1");
            return put(i, j, Mark::Arrow, "R1") || c;
        });
    }

    bool r2() {
        return triples([&](int i, int j, int k) {
            if (!g.adjacent(i, k) || at(k, i) != Mark::Circle) return false;
            bool a = directed(g, i, j) && at(k, j) == Mark::Arrow;
            bool b = at(j, i) == Mark::Arrow && directed(g, j, k);
            if (!a && !b) return false;
            return put(k, i, Mark::Arrow, "R2");
        });
    }

    bool r3() {
        return triples([&](int i, int j, int k) {
            if (has(in, i) || g.adjacent(i, k)) return false;
            if (at(j, i) != Mark::Arrow || at(j, k) != Mark::Arrow) return false;
            bool changed = false;
            for (int l : members(g.neighbors(j) & g.neighbors(i) & g.neighbors(k))) {
                if (at(l, i) != Mark::Circle || at(l, k) != Mark::Circle || at(j, l) != Mark::Circle) continue;
                if (put(j, l, Mark::Arrow, "R3")) changed = true;
            }
            return changed;
        });
    }

    bool r4() {
        bool changed = false;
        for (int j = 0; j < g.size(); ++j)
            for (int i : members(g.neighbors(j))) {
                if (at(j, i) != Mark::Circle) continue;
                for (const auto& p : discriminating_paths(g, j, i)) {
                    if (at(j, i) != Mark::Circle) break;
                    int k = p.front();
                    int q1 = p[p.size() - 3];
                    if (in_sepset(i, k, j)) {
                        bool c = put(j, i, Mark::Tail, "R4");
                        if (put(i, j, Mark::Arrow, "R4") || c) changed = true;
                    } else {
                        bool c = put(i, j, Mark::Arrow, "R4");
                        c = put(j, i, Mark::Arrow, "R4") || c;
                        c = put(j, q1, Mark::Arrow, "R4") || c;
                        c = put(q1, j, Mark::Arrow, "R4") || c;
                        if (c) changed = true;
                    }
                }
            }
        return changed;
    }

    bool circle_edge(int x, int y) const { return at(x, y) == Mark::Circle && at(y, x) == Mark::Circle; }

    bool r5() {
        for (int i = 0; i < g.size(); ++i)
            for (int j : members(g.neighbors(i))) {
                if (i > j || !circle_edge(i, j)) continue;
                std::vector<int> path{i};
                Bits used = bit(i) | bit(j);
                bool hit = false;
                std::function<void(int)> dfs = [&](int v) {
                    if (hit) return;
                    for (int w : members(g.neighbors(v))) {
                        if (hit) return;
                        if (!circle_edge(v, w)) continue;
                        int prev = path.size() >= 2 ? path[path.size() - 2] : -1;
                        if (prev >= 0 && g.adjacent(prev, w)) continue;
                        if (w == j) {
                            // v is l; need path length >= 3 edges, i !~ l, j !~ k.
                            if (path.size() < 3) continue;
                            if (g.adjacent(i, v) || g.adjacent(j, path[1])) continue;
                            path.push_back(j);
                            hit = true;
                            return;
                        }
                        if (has(used, w)) continue;
                        used |= bit(w);
                        path.push_back(w);
                        dfs(w);
                        if (hit) return;
                        path.pop_back();
                        used &= ~bit(w);
                    }
                };
                dfs(i);
                if (!hit) continue;
                // path: i, k, ..., l, j
                for (std::size_t s = 0; s + 1 < path.size(); ++s) {
                    put(path[s], path[s + 1], Mark::Tail, "R5");
                    put(path[s + 1], path[s], Mark::Tail, "R5");
                }
                put(i, j, Mark::Tail, "R5");
                put(j, i, Mark::Tail, "R5");
                return true;
            }
        return false;
    }

    bool r6() {
        return triples([&](int i, int j, int k) {
            if (!undirected(g, i, j) || at(j, k) != Mark::Circle) return false;
            return put(j, k, Mark::Tail, "R6");
        });
    }

    bool r7() {
        return triples([&](int i, int j, int k) {
            if (has(in, i) || g.adjacent(i, k)) return false;
            if (at(j, i) != Mark::Circle || at(j, k) != Mark::Circle || at(k, j) != Mark::Tail) return false;
            return put(j, i, Mark::Tail, "R7");
        });
    }

    bool pd_edge(int x, int y) const { return at(x, y) != Mark::Arrow && at(y, x) != Mark::Tail; }

    // Visits uncovered potentially directed paths from i avoiding `avoid`;
    // f(second node, endpoint, path length in edges).
    template <class F>
    void uncovered_pd_paths(int i, Bits avoid, F&& f) {
        std::vector<int> path{i};
        Bits used = bit(i) | avoid;
        std::function<void(int)> dfs = [&](int v) {
            for (int w : members(g.neighbors(v))) {
                if (has(used, w) || !pd_edge(v, w)) continue;
                if (path.size() >= 2 && g.adjacent(path[path.size() - 2], w)) continue;
                path.push_back(w);
                used |= bit(w);
                f(path);
                dfs(w);
                used &= ~bit(w);
                path.pop_back();
            }
        };
        dfs(i);
    }

    bool r8() {
        return triples([&](int i, int j, int k) {
            if (!g.adjacent(i, k) || at(i, k) != Mark::Circle || at(k, i) != Mark::Arrow) return false;
            if (!directed(g, j, k)) return false;
            bool a = directed(g, i, j);
            bool b = at(i, j) == Mark::Tail && at(j, i) == Mark::Circle;
            if (!a && !b) return false;
            return put(i, k, Mark::Tail, "R8");
        });
    }

    bool r9() {
        bool changed = false;
        for (int i = 0; i < g.size(); ++i)
            for (int k : members(g.neighbors(i))) {
                if (at(i, k) != Mark::Circle || at(k, i) != Mark::Arrow) continue;
                bool hit = false;
                uncovered_pd_paths(i, 0, [&](const std::vector<int>& p) {
                    if (hit || p.back() != k || p.size() < 4) return;
                    if (p[1] == k || g.adjacent(p[1], k)) return;
                    hit = true;
                });
                if (hit && put(i, k, Mark::Tail, "R9")) changed = true;
            }
        return changed;
    }

    bool r10() {
        bool changed = false;
        for (int i = 0; i < g.size(); ++i)
            for (int k : members(g.neighbors(i))) {
                if (at(i, k) != Mark::Circle || at(k, i) != Mark::Arrow) continue;
                Bits pa = parents(g, k) & ~bit(i);
                if (count(pa) < 2) continue;
                // first[v]: second nodes of uncovered pd paths from i ending at v.
                std::vector<Bits> first(g.size(), 0);
                uncovered_pd_paths(i, bit(k), [&](const std::vector<int>& p) {
                    if (has(pa, p.back())) first[p.back()] |= bit(p[1]);
                });
                bool hit = false;
                for (int j : members(pa))
                    for (int l : members(pa)) {
                        if (j >= l || hit) continue;
                        each(first[j], [&](int u1) {
                            each(first[l], [&](int u2) {
                                if (u1 != u2 && !g.adjacent(u1, u2)) hit = true;
                            });
                        });
                    }
                if (hit && put(i, k, Mark::Tail, "R10")) changed = true;
            }
        return changed;
    }

    void run() {
        for (int j = 0; j < g.size(); ++j) {
            if (!has(in, j)) continue;
            for (const auto& e : std::vector<Adj>(g.adj(j)))
                if (e.near == Mark::Circle && e.far == Mark::Circle) put(j, e.nb, Mark::Tail, "input");
        }
        while (r0()) {
        }
        while (r1() | r2() | r3() | r4()) {
        }
        while (r5()) {
        }
        while (r6() | r7()) {
        }
        while (r8() | r9() | r10()) {
        }
    }
};

}  // namespace

MixedGraph orient(MixedGraph g, const SepsetTable& sepsets, OrientLog* log) {
    Orienter o{g, sepsets, log, g.inputs()};
    o.run();
    g.tag = GraphClass::PAG;
    return g;
}

MixedGraph fci(const IndependenceOracle& oracle, OrientLog* log) {
    Skeleton sk = skeleton(oracle);
    return orient(std::move(sk.graph), sk.sepsets, log);
}

bool orientation_closed(const MixedGraph& g, const SepsetTable& sepsets) {
    MixedGraph again = orient(g, sepsets);
    return again == g;
}

}  // namespace pagcid
