#include "pagcid/graph.hpp"

#include <algorithm>
#include <sstream>

namespace pagcid {

int MixedGraph::add_node(const NodeId& id, NodeKind kind) {
    if (id.empty()) throw GraphError("empty node id");
    auto it = std::lower_bound(names_.begin(), names_.end(), id);
    if (it != names_.end() && *it == id) throw GraphError("duplicate node '" + id + "'");
    if (size() >= kMaxNodes) throw GraphError("graph exceeds 64 nodes");
    int pos = static_cast<int>(it - names_.begin());
    names_.insert(it, id);
    kinds_.insert(kinds_.begin() + pos, kind);
    adj_.insert(adj_.begin() + pos, std::vector<Adj>{});
    for (auto& list : adj_)
        for (auto& e : list)
            if (e.nb >= pos) ++e.nb;
    return pos;
}

int MixedGraph::index(const NodeId& id) const {
    auto i = find(id);
    if (!i) throw GraphError("unknown node '" + id + "'");
    return *i;
}

std::optional<int> MixedGraph::find(const NodeId& id) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), id);
    if (it == names_.end() || *it != id) return std::nullopt;
    return static_cast<int>(it - names_.begin());
}

const Adj* MixedGraph::find_adj(int a, int b) const {
    for (const auto& e : adj_[a])
        if (e.nb == b) return &e;
    return nullptr;
}

Adj* MixedGraph::find_adj(int a, int b) {
    for (auto& e : adj_[a])
        if (e.nb == b) return &e;
    return nullptr;
}

void MixedGraph::add_edge(const NodeId& a, Mark ma, const NodeId& b, Mark mb) {
    add_edge(index(a), ma, index(b), mb);
}

void MixedGraph::add_edge(int a, Mark ma, int b, Mark mb) {
    if (a == b) throw GraphError("self-loop at '" + names_[a] + "'");
    if (find_adj(a, b)) throw GraphError("duplicate edge " + names_[a] + " " + names_[b]);
    auto ins = [](std::vector<Adj>& list, Adj e) {
        auto it = std::lower_bound(list.begin(), list.end(), e.nb,
                                   [](const Adj& x, int v) { return x.nb < v; });
        list.insert(it, e);
    };
    ins(adj_[a], Adj{b, ma, mb});
    ins(adj_[b], Adj{a, mb, ma});
}

void MixedGraph::remove_edge(int a, int b) {
    auto drop = [](std::vector<Adj>& list, int v) {
        list.erase(std::remove_if(list.begin(), list.end(), [v](const Adj& x) { return x.nb == v; }),
                   list.end());
    };
    drop(adj_[a], b);
    drop(adj_[b], a);
}

void MixedGraph::set_mark(int at, int other, Mark m) {
    Adj* x = find_adj(at, other);
    Adj* y = find_adj(other, at);
    if (!x || !y) throw GraphError("no edge " + names_[at] + " " + names_[other]);
    x->near = m;
    y->far = m;
}

std::optional<Mark> MixedGraph::mark(int at, int other) const {
    const Adj* x = find_adj(at, other);
    if (!x) return std::nullopt;
    return x->near;
}

Bits MixedGraph::neighbors(int i) const {
    Bits s = 0;
    for (const auto& e : adj_[i]) s |= bit(e.nb);
    return s;
}

Bits MixedGraph::of_kind(NodeKind k) const {
    Bits s = 0;
    for (int i = 0; i < size(); ++i)
        if (kinds_[i] == k) s |= bit(i);
    return s;
}

Bits MixedGraph::to_bits(const NodeSet& s) const {
    Bits out = 0;
    for (const auto& id : s) out |= bit(index(id));
    return out;
}

NodeSet MixedGraph::to_set(Bits s) const {
    NodeSet out;
    each(s, [&](int i) { out.insert(names_[i]); });
    return out;
}

std::vector<Edge> MixedGraph::edges() const {
    std::vector<Edge> out;
    for (int a = 0; a < size(); ++a)
        for (const auto& e : adj_[a])
            if (a < e.nb) out.push_back(Edge{names_[a], e.near, names_[e.nb], e.far});
    return out;
}

int MixedGraph::edge_count() const {
    int n = 0;
    for (const auto& list : adj_) n += static_cast<int>(list.size());
    return n / 2;
}

MixedGraph MixedGraph::induced(Bits keep) const {
    MixedGraph h;
    h.tag = tag;
    each(keep, [&](int i) { h.add_node(names_[i], kinds_[i]); });
    for (int a = 0; a < size(); ++a) {
        if (!has(keep, a)) continue;
        for (const auto& e : adj_[a])
            if (a < e.nb && has(keep, e.nb)) h.add_edge(names_[a], e.near, names_[e.nb], e.far);
    }
    return h;
}

bool MixedGraph::operator==(const MixedGraph& o) const {
    if (names_ != o.names_ || kinds_ != o.kinds_) return false;
    for (int i = 0; i < size(); ++i) {
        if (adj_[i].size() != o.adj_[i].size()) return false;
        for (std::size_t k = 0; k < adj_[i].size(); ++k) {
            const Adj& x = adj_[i][k];
            const Adj& y = o.adj_[i][k];
            if (x.nb != y.nb || x.near != y.near || x.far != y.far) return false;
        }
    }
    return true;
}

Bits parents(const MixedGraph& g, int v) {
    Bits s = 0;
    for (const auto& e : g.adj(v))
        if (e.near == Mark::Arrow && e.far == Mark::Tail) s |= bit(e.nb);
    return s;
}

Bits children(const MixedGraph& g, int v) {
    Bits s = 0;
    for (const auto& e : g.adj(v))
        if (e.near == Mark::Tail && e.far == Mark::Arrow) s |= bit(e.nb);
    return s;
}

const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Input: return "input";
        case NodeKind::Output: return "output";
        case NodeKind::Latent: return "latent";
        case NodeKind::Selection: return "selection";
    }
    return "?";
}

NodeKind parse_kind(const std::string& s) {
    if (s == "input") return NodeKind::Input;
    if (s == "output") return NodeKind::Output;
    if (s == "latent") return NodeKind::Latent;
    if (s == "selection") return NodeKind::Selection;
    throw GraphError("unknown node kind '" + s + "'");
}

std::string edge_token(Mark at_a, Mark at_b) {
    std::string t = "---";
    t[0] = at_a == Mark::Arrow ? '<' : at_a == Mark::Circle ? 'o' : '-';
    t[2] = at_b == Mark::Arrow ? '>' : at_b == Mark::Circle ? 'o' : '-';
    return t;
}

std::string format_edge(const MixedGraph& g, int a, int b) {
    auto ma = g.mark(a, b);
    auto mb = g.mark(b, a);
    if (!ma || !mb) throw GraphError("no edge " + g.name(a) + " " + g.name(b));
    return g.name(a) + " " + edge_token(*ma, *mb) + " " + g.name(b);
}

static std::string strip_comment(const std::string& line) {
    auto p = line.find('#');
    return p == std::string::npos ? line : line.substr(0, p);
}

MixedGraph parse_graph(const std::string& text) {
    MixedGraph g;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw GraphError("line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(strip_comment(line));
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok[0] == "node") {
            if (tok.size() != 3) fail("expected 'node <id> <kind>'");
            try {
                g.add_node(tok[1], parse_kind(tok[2]));
            } catch (const GraphError& e) {
                fail(e.what());
            }
        } else if (tok[0] == "edge") {
            if (tok.size() != 4) fail("expected 'edge <id> <tok> <id>'");
            const std::string& t = tok[2];
            if (t.size() != 3 || t[1] != '-') fail("bad edge token '" + t + "'");
            Mark ma = Mark::Tail, mb = Mark::Tail;
            switch (t[0]) {
                case '<': ma = Mark::Arrow; break;
                case 'o': ma = Mark::Circle; break;
                case '-': ma = Mark::Tail; break;
                default: fail("bad edge token '" + t + "'");
            }
            switch (t[2]) {
                case '>': mb = Mark::Arrow; break;
                case 'o': mb = Mark::Circle; break;
                case '-': mb = Mark::Tail; break;
                default: fail("bad edge token '" + t + "'");
            }
            try {
                g.add_edge(tok[1], ma, tok[3], mb);
            } catch (const GraphError& e) {
                fail(e.what());
            }
        } else {
            fail("unknown statement '" + tok[0] + "'");
        }
    }
    return g;
}

std::string format_graph(const MixedGraph& g) {
    std::ostringstream out;
    for (int i = 0; i < g.size(); ++i) out << "node " << g.name(i) << " " << kind_name(g.kind(i)) << "\n";
    for (const auto& e : g.edges())
        out << "edge " << e.a << " " << edge_token(e.mark_a, e.mark_b) << " " << e.b << "\n";
    return out.str();
}

std::string to_dot(const MixedGraph& g) {
    auto head = [](Mark m) {
        switch (m) {
            case Mark::Arrow: return "normal";
            case Mark::Circle: return "odot";
            case Mark::Tail: return "none";
        }
        return "none";
    };
    std::ostringstream out;
    out << "digraph G {\n";
    for (int i = 0; i < g.size(); ++i) {
        const char* shape = "ellipse";
        if (g.kind(i) == NodeKind::Input) shape = "box";
        if (g.kind(i) == NodeKind::Selection) shape = "doublecircle";
        if (g.kind(i) == NodeKind::Latent) shape = "diamond";
        out << "  \"" << g.name(i) << "\" [shape=" << shape << "];\n";
    }
    for (const auto& e : g.edges())
        out << "  \"" << e.a << "\" -> \"" << e.b << "\" [dir=both, arrowtail=" << head(e.mark_a)
            << ", arrowhead=" << head(e.mark_b) << "];\n";
    out << "}\n";
    return out.str();
}

std::string format_set(const NodeSet& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& id : s) {
        if (!first) out += ",";
        out += id;
        first = false;
    }
    return out + "}";
}

std::string format_set(const MixedGraph& g, Bits s) { return format_set(g.to_set(s)); }

NodeSet parse_set(const std::string& csv) {
    NodeSet out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.insert(cur);
            cur.clear();
        } else if (c != ' ' && c != '{' && c != '}') {
            cur += c;
        }
    }
    return out;
}

}  // namespace pagcid
