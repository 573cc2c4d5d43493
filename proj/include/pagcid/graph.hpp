#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pagcid {

enum class NodeKind { Input, Output, Latent, Selection };
enum class Mark { Tail, Arrow, Circle };
enum class GraphClass { Raw, ADMG, MAG, PAG };

using NodeId = std::string;
using NodeSet = std::set<NodeId>;

// Node-index set. Index order equals ascending NodeId order.
using Bits = std::uint64_t;

inline constexpr int kMaxNodes = 64;

inline Bits bit(int i) { return Bits{1} << i; }
inline bool has(Bits s, int i) { return (s >> i) & 1u; }
inline int count(Bits s) { return std::popcount(s); }
inline int lowest(Bits s) { return s ? std::countr_zero(s) : -1; }
inline bool subset(Bits a, Bits b) { return (a & ~b) == 0; }

template <class F>
void each(Bits s, F&& f) {
    while (s) {
        int i = std::countr_zero(s);
        f(i);
        s &= s - 1;
    }
}

inline std::vector<int> members(Bits s) {
    std::vector<int> out;
    each(s, [&](int i) { out.push_back(i); });
    return out;
}

class GraphError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Edge {
    NodeId a;
    Mark mark_a;
    NodeId b;
    Mark mark_b;
    auto operator<=>(const Edge&) const = default;
};

struct Adj {
    int nb;
    Mark near;  // mark at the owning node
    Mark far;   // mark at nb
};

class MixedGraph {
  public:
    GraphClass tag = GraphClass::Raw;

    int add_node(const NodeId& id, NodeKind kind);
    void add_edge(const NodeId& a, Mark ma, const NodeId& b, Mark mb);
    void add_edge(int a, Mark ma, int b, Mark mb);
    void remove_edge(int a, int b);
    // Mark stored at `at` on the edge at-other.
    void set_mark(int at, int other, Mark m);
    void set_kind(int i, NodeKind k) { kinds_[i] = k; }

    int size() const { return static_cast<int>(names_.size()); }
    const NodeId& name(int i) const { return names_[i]; }
    NodeKind kind(int i) const { return kinds_[i]; }
    int index(const NodeId& id) const;
    std::optional<int> find(const NodeId& id) const;
    bool contains(const NodeId& id) const { return find(id).has_value(); }

    bool adjacent(int a, int b) const { return find_adj(a, b) != nullptr; }
    std::optional<Mark> mark(int at, int other) const;
    const std::vector<Adj>& adj(int i) const { return adj_[i]; }
    Bits neighbors(int i) const;

    Bits all() const { return size() == 64 ? ~Bits{0} : bit(size()) - 1; }
    Bits of_kind(NodeKind k) const;
    Bits inputs() const { return of_kind(NodeKind::Input); }
    Bits outputs() const { return of_kind(NodeKind::Output); }
    Bits latents() const { return of_kind(NodeKind::Latent); }
    Bits selections() const { return of_kind(NodeKind::Selection); }

    Bits to_bits(const NodeSet& s) const;
    NodeSet to_set(Bits s) const;

    std::vector<Edge> edges() const;
    int edge_count() const;

    // Subgraph on `keep` (kinds and edges among kept nodes).
    MixedGraph induced(Bits keep) const;

    bool operator==(const MixedGraph& o) const;

  private:
    const Adj* find_adj(int a, int b) const;
    Adj* find_adj(int a, int b);

    std::vector<NodeId> names_;
    std::vector<NodeKind> kinds_;
    std::vector<std::vector<Adj>> adj_;
};

// Edge-shape predicates, all reading marks at the named endpoints.
inline bool is_mark(const MixedGraph& g, int at, int other, Mark m) {
    auto x = g.mark(at, other);
    return x && *x == m;
}
inline bool directed(const MixedGraph& g, int a, int b) {
    return is_mark(g, a, b, Mark::Tail) && is_mark(g, b, a, Mark::Arrow);
}
inline bool bidirected(const MixedGraph& g, int a, int b) {
    return is_mark(g, a, b, Mark::Arrow) && is_mark(g, b, a, Mark::Arrow);
}
inline bool undirected(const MixedGraph& g, int a, int b) {
    return is_mark(g, a, b, Mark::Tail) && is_mark(g, b, a, Mark::Tail);
}
inline bool into(const MixedGraph& g, int a, int b) { return is_mark(g, b, a, Mark::Arrow); }

Bits parents(const MixedGraph& g, int v);
Bits children(const MixedGraph& g, int v);

const char* kind_name(NodeKind k);
NodeKind parse_kind(const std::string& s);
std::string edge_token(Mark at_a, Mark at_b);
std::string format_edge(const MixedGraph& g, int a, int b);

MixedGraph parse_graph(const std::string& text);
std::string format_graph(const MixedGraph& g);
std::string to_dot(const MixedGraph& g);
std::string format_set(const NodeSet& s);
std::string format_set(const MixedGraph& g, Bits s);
NodeSet parse_set(const std::string& csv);

}  // namespace pagcid
