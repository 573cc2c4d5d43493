#include "pagcid/separate.hpp"

#include <algorithm>
#include <deque>

namespace pagcid {

namespace {

template <class Triple>
std::optional<Walk> search(const MixedGraph& g, Bits A, Bits targets, Bits C, Triple ok) {
    int n = g.size();
    A &= g.all();
    for (int a : members(A & ~C))
        if (has(targets, a)) return Walk{a};
    std::vector<int> from(n * n, -2);  // parent state, -1 for a start state
    std::deque<int> queue;
    auto finish = [&](int s) {
        Walk w;
        while (s >= 0) {
            w.push_back(s % n);
            int p = from[s];
            if (p == -1) w.push_back(s / n);
            s = p;
        }
        std::reverse(w.begin(), w.end());
        return w;
    };
    for (int a : members(A & ~C)) {
        for (const auto& e : g.adj(a)) {
            int s = a * n + e.nb;
            if (from[s] != -2) continue;
            from[s] = -1;
            if (has(targets, e.nb) && !has(C, e.nb)) return finish(s);
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        int p = s / n, c = s % n;
        for (const auto& e : g.adj(c)) {
            int t = c * n + e.nb;
            if (from[t] != -2) continue;
            if (!ok(p, c, e.nb)) continue;
            from[t] = s;
            if (has(targets, e.nb) && !has(C, e.nb)) return finish(t);
            queue.push_back(t);
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<Walk> open_walk(const ManipulatedGraph& h, Bits A, Bits B, Bits C) {
    const MixedGraph& g = h.graph;
    Bits regime = h.regime_bits();
    Bits targets = B | g.inputs();
    Bits anc = ancestors(g, C);
    Bits poan = possible_ancestors(g, C & h.original_outputs());
    auto ok = [&](int p, int c, int n) {
        Mark mp = *g.mark(c, p);
        Mark mn = *g.mark(c, n);
        bool in_c = has(C, c);
        if (!in_c && (mp == Mark::Tail || mn == Mark::Tail)) return true;
        if (!in_c && mp == Mark::Circle && mn == Mark::Circle) return p != n && !g.adjacent(p, n);
        if (mp == Mark::Arrow && mn == Mark::Arrow) {
            bool regime_incident = has(regime, p) || has(regime, c) || has(regime, n);
            return regime_incident ? has(poan, c) : has(anc, c);
        }
        if (mp == Mark::Circle && mn == Mark::Arrow && has(regime, p)) return has(poan, c);
        if (mp == Mark::Arrow && mn == Mark::Circle && has(regime, n)) return has(poan, c);
        return false;
    };
    return search(g, A, targets, C, ok);
}

bool id_separated(const ManipulatedGraph& h, Bits A, Bits B, Bits C) { return !open_walk(h, A, B, C); }

std::optional<Walk> d_open_walk(const MixedGraph& g, Bits A, Bits B, Bits C) {
    Bits anc = ancestors(g, C);
    auto ok = [&](int p, int c, int n) {
        bool collider = *g.mark(c, p) == Mark::Arrow && *g.mark(c, n) == Mark::Arrow;
        return collider ? has(anc, c) : !has(C, c);
    };
    return search(g, A, B, C, ok);
}

bool d_separated(const MixedGraph& g, Bits A, Bits B, Bits C) { return !d_open_walk(g, A, B, C); }

std::string format_walk(const MixedGraph& g, const Walk& w) {
    std::string out = g.name(w[0]);
    for (std::size_t i = 1; i < w.size(); ++i) {
        out += " " + edge_token(*g.mark(w[i - 1], w[i]), *g.mark(w[i], w[i - 1])) + " ";
        out += g.name(w[i]);
    }
    return out;
}

}  // namespace pagcid
