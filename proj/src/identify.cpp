#include "pagcid/identify.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

#include "pagcid/fci.hpp"
#include "pagcid/represent.hpp"
#include "pagcid/separate.hpp"
#include "pagcid/structure.hpp"

namespace pagcid {

namespace {

NodeSet unite(NodeSet a, const NodeSet& b) {
    a.insert(b.begin(), b.end());
    return a;
}

NodeSet minus(NodeSet a, const NodeSet& b) {
    for (const auto& x : b) a.erase(x);
    return a;
}

bool disjoint(const NodeSet& a, const NodeSet& b) {
    for (const auto& x : a)
        if (b.count(x)) return false;
    return true;
}

Bits observed_bits(const MixedGraph& g) { return g.all() & ~g.inputs() & ~g.latents() & ~g.selections(); }

void require_observed(const MixedGraph& g, const NodeSet& s, const char* what) {
    Bits obs = observed_bits(g);
    for (const auto& x : s) {
        auto i = g.find(x);
        if (!i) throw GraphError(std::string(what) + ": unknown node '" + x + "'");
        if (!has(obs, *i)) throw GraphError(std::string(what) + ": '" + x + "' is not an observed output");
    }
}

// Bucket list sorted by the smallest member.
std::vector<Bits> sorted_buckets(const MixedGraph& p, Bits D) {
    auto out = buckets(p, D);
    std::sort(out.begin(), out.end(), [](Bits a, Bits b) { return lowest(a) < lowest(b); });
    return out;
}

Bits regime_of(const ManipulatedGraph& h, const NodeSet& targets) {
    Bits out = 0;
    for (const auto& t : targets) out |= bit(h.graph.index(h.regime.at(t)));
    return out;
}

AssemblyTree tree_of(const MixedGraph& p, Bits C) {
    AssemblyTree t;
    t.label = p.to_set(C);
    for (Bits bk : sorted_buckets(p, C)) {
        if (bk == C) continue;
        Bits c1 = region(p, C, bk);
        if (c1 == C) continue;
        Bits c2 = region(p, C, C & ~c1);
        t.left = std::make_shared<AssemblyTree>(tree_of(p, c1));
        t.right = std::make_shared<AssemblyTree>(tree_of(p, c2));
        return t;
    }
    return t;
}

void write_tree(const AssemblyTree& t, std::string& out) {
    if (t.leaf()) {
        out += format_set(t.label);
        return;
    }
    out += "(" + format_set(t.label) + " ";
    write_tree(*t.left, out);
    out += " ";
    write_tree(*t.right, out);
    out += ")";
}

AttachResult attach_leaf(const MixedGraph& p, Bits R, Bits V) {
    Bits T = V;
    EstimandPtr q = Estimand::base(p.to_set(V));
    std::vector<NodeSet> trace;
    for (;;) {
        bool moved = false;
        for (Bits bk : sorted_buckets(p, T)) {
            if (!subset(bk, T & ~R)) continue;
            Bits pd = possible_descendants(p, bk, T);
            if (!subset(pc_set(p, T, bk) & pd, bk)) continue;
            if (pd == bk) {
                q = Estimand::marg(q, p.to_set(bk));
            } else {
                Bits dminus = (T & ~pd) | bk;
                q = Estimand::prod({Estimand::cond(q, p.to_set(dminus)), Estimand::marg(q, p.to_set(pd))});
            }
            T &= ~bk;
            trace.push_back(p.to_set(bk));
            moved = true;
            break;
        }
        if (!moved) break;
    }
    AttachResult out;
    if (T == R) {
        out.estimand = q;
    } else {
        out.fail = FailCertificate{p.to_set(R), p.to_set(T), trace};
    }
    return out;
}

AttachResult attach(const MixedGraph& p, const AssemblyTree& t, Bits V,
                    std::map<const AssemblyTree*, AttachResult>& memo) {
    auto it = memo.find(&t);
    if (it != memo.end()) return it->second;
    AttachResult out;
    Bits label = p.to_bits(t.label);
    if (t.leaf()) {
        out = attach_leaf(p, label, V);
    } else {
        AttachResult l = attach(p, *t.left, V, memo);
        if (!l.estimand) return memo[&t] = l;
        AttachResult r = attach(p, *t.right, V, memo);
        if (!r.estimand) return memo[&t] = r;
        std::vector<NodeSet> order;
        for (Bits bk : bucket_topological_order(p, label)) order.push_back(p.to_set(bk));
        out.estimand = Estimand::box(l.estimand, r.estimand, order);
    }
    return memo[&t] = out;
}

}  // namespace

NodeSet observed(const MixedGraph& p) { return p.to_set(observed_bits(p)); }

L0Sets l0_sets(const MixedGraph& p, const NodeSet& A, const NodeSet& B) {
    Bits V = observed_bits(p), I = p.inputs();
    Bits a = p.to_bits(A), b = p.to_bits(B);
    Bits D = possible_anteriors(p, a, V & ~b);
    Bits Dt = 0;
    each(I, [&](int i) {
        if (has(possible_anteriors(p, a, (V & ~b) | bit(i)), i)) Dt |= bit(i);
    });
    Bits H = (V & ~(D | b)) | (I & ~Dt);
    return {p.to_set(D), p.to_set(Dt), p.to_set(H)};
}

AssemblyTree build_tree(const MixedGraph& p, const NodeSet& C) { return tree_of(p, p.to_bits(C)); }

std::string format_tree(const AssemblyTree& t) {
    std::string out;
    write_tree(t, out);
    return out;
}

std::string format_certificate(const FailCertificate& f) {
    return "FAIL C=" + format_set(f.C) + " T=" + format_set(f.T);
}

AttachResult attach_kernel(const MixedGraph& p, const AssemblyTree& t, const NodeSet& V) {
    std::map<const AssemblyTree*, AttachResult> memo;
    return attach(p, t, p.to_bits(V), memo);
}

IdResult sidp(const MixedGraph& p, const NodeSet& A, const NodeSet& B) {
    if (p.latents() || p.selections()) throw GraphError("sidp expects a MAG or PAG without latent or selection nodes");
    if (A.empty()) throw GraphError("sidp: A is empty");
    require_observed(p, A, "sidp");
    require_observed(p, B, "sidp");
    if (!disjoint(A, B)) throw GraphError("sidp: A and B overlap");
    Bits V = observed_bits(p);
    Bits D = possible_anteriors(p, p.to_bits(A), V & ~p.to_bits(B));
    IdResult out;
    out.D = p.to_set(D);
    out.tree = tree_of(p, D);
    AttachResult r = attach_kernel(p, *out.tree, p.to_set(V));
    if (!r.estimand) {
        out.fail = r.fail;
        out.reason = "no rule applies at leaf " + format_set(r.fail->C);
        return out;
    }
    NodeSet drop = minus(out.D, A);
    out.estimand = drop.empty() ? r.estimand : Estimand::marg(r.estimand, drop);
    return out;
}

IdResult scidp(const MixedGraph& p, const NodeSet& A, const NodeSet& B, const NodeSet& C) {
    if (p.latents() || p.selections()) throw GraphError("scidp expects a MAG or PAG without latent or selection nodes");
    if (A.empty()) throw GraphError("scidp: A is empty");
    for (const auto* s : {&A, &B, &C}) require_observed(p, *s, "scidp");
    if (!disjoint(A, B) || !disjoint(A, C) || !disjoint(B, C)) throw GraphError("scidp: A, B, C must be disjoint");
    Bits V = observed_bits(p);
    Bits a = p.to_bits(A);
    NodeSet Bs = B, Cs = C;
    auto anteriors_of = [&] { return possible_anteriors(p, a | p.to_bits(Cs), V & ~p.to_bits(Bs)); };
    auto separated = [&](const NodeSet& targets, const NodeSet& hard) {
        ManipulatedGraph h = manipulate(p, targets, hard);
        Bits cond = h.graph.to_bits(unite(Bs, Cs));
        return id_separated(h, h.graph.to_bits(A), regime_of(h, targets), cond);
    };
    Bits D = anteriors_of();
    const std::vector<Bits> all = sorted_buckets(p, V);
    for (;;) {
        bool moved = false;
        for (Bits bk : all) {
            Bits bb = bk & p.to_bits(Bs);
            if (!(bk & D) || subset(bk, D) || !bb) continue;
            NodeSet Bt = p.to_set(bb);
            if (!separated(Bt, minus(Bs, Bt))) {
                IdResult out;
                out.reason = "bucket " + format_set(p, bk) + " straddles the anteriors and " + format_set(Bt) +
                             " cannot be moved to the conditioning set";
                return out;
            }
            Bs = minus(Bs, Bt);
            Cs = unite(Cs, Bt);
            D = anteriors_of();
            moved = true;
            break;
        }
        if (!moved) break;
    }
    for (;;) {
        bool moved = false;
        for (Bits bk : all) {
            Bits cc = bk & p.to_bits(Cs);
            if (!cc) continue;
            NodeSet Ci = p.to_set(cc);
            if (!separated(Ci, Bs)) continue;
            Cs = minus(Cs, Ci);
            Bs = unite(Bs, Ci);
            moved = true;
            break;
        }
        if (!moved) break;
    }
    IdResult out = sidp(p, unite(A, Cs), Bs);
    if (out.ok() && !Cs.empty()) out.estimand = Estimand::cond(out.estimand, Cs);
    return out;
}

bool calculus_check(const MixedGraph& g, CalculusRule rule, const NodeSet& A, const NodeSet& B, const NodeSet& C,
                    const NodeSet& D) {
    const NodeSet* sets[] = {&A, &B, &C, &D};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (!disjoint(*sets[i], *sets[j])) throw GraphError("calculus: A, B, C, D must be disjoint");
    switch (rule) {
        case CalculusRule::Observation: {
            ManipulatedGraph h = manipulate(g, {}, D);
            return id_separated(h, h.graph.to_bits(A), h.graph.to_bits(B), h.graph.to_bits(unite(C, D)));
        }
        case CalculusRule::Exchange: {
            ManipulatedGraph h = manipulate(g, B, D);
            return id_separated(h, h.graph.to_bits(A), regime_of(h, B), h.graph.to_bits(unite(unite(B, C), D)));
        }
        case CalculusRule::Action: {
            ManipulatedGraph h = manipulate(g, B, D);
            return id_separated(h, h.graph.to_bits(A), regime_of(h, B), h.graph.to_bits(unite(C, D)));
        }
    }
    return false;
}

AdjustmentResult adjustment_check(const MixedGraph& g, const NodeSet& A, const NodeSet& B, const NodeSet& C,
                                  const NodeSet& D, const NodeSet& J0, const NodeSet& J1, const NodeSet& H) {
    const NodeSet* sets[] = {&A, &B, &C, &D, &J0, &J1, &H};
    for (int i = 0; i < 7; ++i)
        for (int j = i + 1; j < 7; ++j)
            if (!disjoint(*sets[i], *sets[j])) throw GraphError("adjust: the sets must be pairwise disjoint");
    NodeSet J = unite(J0, J1);
    ManipulatedGraph h = manipulate(g, B, D);
    auto bits = [&](const NodeSet& s) { return h.graph.to_bits(s); };
    Bits IB = regime_of(h, B);
    Bits cd = bits(unite(C, D));
    AdjustmentResult out;
    out.holds = id_separated(h, bits(unite(J0, H)), IB, cd) &&
                id_separated(h, bits(A), bits(J1) | IB, cd | bits(B) | bits(J0) | bits(H)) &&
                id_separated(h, bits(H), bits(B), IB | cd | bits(J));
    if (!out.holds) return out;
    NodeSet V = observed(g);
    NodeSet VD = minus(V, D);
    EstimandPtr q = Estimand::base(VD);
    NodeSet keep = unite(unite(unite(A, B), C), J);
    EstimandPtr left = Estimand::cond(Estimand::marg(q, minus(VD, keep)), unite(unite(B, C), J));
    if (J.empty()) {
        out.estimand = left;
        return out;
    }
    EstimandPtr right = Estimand::cond(Estimand::marg(q, minus(VD, unite(J, C))), C);
    out.estimand = Estimand::comp(left, right, J);
    return out;
}

Relation causal_relation(const MixedGraph& g, const NodeId& a, const NodeId& b, RelationKind kind) {
    if (a == b) throw GraphError("relation: a and b must differ");
    require_observed(g, {a, b}, "relation");
    int ia = g.index(a);
    bool none = false;
    switch (kind) {
        case RelationKind::Direct: {
            NodeSet rest = minus(observed(g), {a, b});
            ManipulatedGraph h = manipulate(g, {a}, rest);
            none = id_separated(h, bit(h.graph.index(b)), regime_of(h, {a}), h.graph.to_bits(rest));
            break;
        }
        case RelationKind::Total: {
            ManipulatedGraph h = manipulate(g, {a}, {});
            none = id_separated(h, bit(h.graph.index(b)), regime_of(h, {a}), 0);
            break;
        }
        case RelationKind::Confounding: {
            ManipulatedGraph h = manipulate(g, {a}, {});
            none = id_separated(h, bit(h.graph.index(b)), regime_of(h, {a}), bit(h.graph.index(a)));
            break;
        }
        case RelationKind::SelectionAncestor: {
            none = false;
            for (const auto& e : g.adj(ia))
                if (e.near == Mark::Arrow) none = true;
            break;
        }
    }
    return none ? Relation::AllNo : Relation::SomeYes;
}

const char* relation_name(Relation r) { return r == Relation::AllNo ? "all-no" : "some-yes"; }

RelationKind parse_relation_kind(const std::string& s) {
    if (s == "direct") return RelationKind::Direct;
    if (s == "total") return RelationKind::Total;
    if (s == "confounding") return RelationKind::Confounding;
    if (s == "selection-ancestor") return RelationKind::SelectionAncestor;
    throw GraphError("unknown relation kind '" + s + "'");
}

bool s_recoverability_check(const MixedGraph& g, const NodeSet& A, const NodeSet& B) {
    if (!sidp(g, A, B).ok()) return false;
    Bits V = observed_bits(g);
    Bits D = 0;
    each(V, [&](int v) {
        for (const auto& e : g.adj(v))
            if (e.near == Mark::Arrow) return;
        D |= bit(v);
    });
    if (!D) return true;
    NodeSet Ds = g.to_set(D);
    ManipulatedGraph h = manipulate(g, {}, B);
    return id_separated(h, h.graph.to_bits(A), h.graph.to_bits(Ds), h.graph.to_bits(B));
}

// ---- hedges -------------------------------------------------------------------

namespace {

// Latent-free ADMG view: directed parents and bidirected neighbors per node.
struct View {
    MixedGraph g;
    std::vector<Bits> pa, bi;
    Bits nodes = 0;
};

View make_view(const MixedGraph& in) {
    View v;
    v.g = in.latents() ? marginalize_latents(in) : in;
    int n = v.g.size();
    v.pa.assign(n, 0);
    v.bi.assign(n, 0);
    Bits L = v.g.latents();
    v.nodes = v.g.all() & ~L;
    for (int x = 0; x < n; ++x)
        for (const auto& e : v.g.adj(x)) {
            if (e.near == Mark::Arrow && e.far == Mark::Tail && !has(L, e.nb)) v.pa[x] |= bit(e.nb);
            if (e.near == Mark::Arrow && e.far == Mark::Arrow) v.bi[x] |= bit(e.nb);
            if (e.near == Mark::Circle || e.far == Mark::Circle || (e.near == Mark::Tail && e.far == Mark::Tail))
                throw GraphError("expected an ADMG, found " + format_edge(v.g, x, e.nb));
        }
    each(L, [&](int u) {
        Bits kids = 0;
        for (const auto& e : v.g.adj(u))
            if (e.near == Mark::Tail && e.far == Mark::Arrow) kids |= bit(e.nb);
        each(kids, [&](int x) { v.bi[x] |= kids & ~bit(x); });
    });
    return v;
}

Bits anc_in(const View& v, Bits X, Bits within, Bits blocked = 0) {
    Bits seen = X & within;
    std::vector<int> stack = members(seen);
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        if (has(blocked, x)) continue;
        each(v.pa[x] & within & ~seen, [&](int p) {
            seen |= bit(p);
            stack.push_back(p);
        });
    }
    return seen;
}

Bits bi_component(const View& v, int start, Bits within) {
    Bits seen = bit(start);
    std::vector<int> stack{start};
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        each(v.bi[x] & within & ~seen, [&](int y) {
            seen |= bit(y);
            stack.push_back(y);
        });
    }
    return seen;
}

bool bi_connected(const View& v, Bits S) { return S && bi_component(v, lowest(S), S) == S; }

bool all_reach(const View& v, Bits S, Bits R) { return anc_in(v, R, S) == S; }

Forest grow_forest(const View& v, Bits S, std::map<int, int>& child, Bits seed) {
    std::deque<int> q;
    each(seed, [&](int x) { q.push_back(x); });
    Bits done = seed;
    while (!q.empty()) {
        int x = q.front();
        q.pop_front();
        each(v.pa[x] & S & ~done, [&](int p) {
            done |= bit(p);
            child[p] = x;
            q.push_back(p);
        });
    }
    Forest f;
    for (const auto& [p, c] : child)
        if (has(S, p)) f.directed.push_back({v.g.name(p), v.g.name(c)});
    each(S, [&](int x) {
        each(v.bi[x] & S, [&](int y) {
            if (x < y) f.bidirected.push_back({v.g.name(x), v.g.name(y)});
        });
    });
    return f;
}

bool valid_outer(const View& v, Bits H, Bits Hp, Bits R, Bits B) {
    return subset(Hp, H) && (H & B) && bi_connected(v, H) && all_reach(v, H, R);
}

}  // namespace

std::string format_hedge(const Hedge& h) {
    auto forest = [](const Forest& f) {
        std::string out;
        for (const auto& [a, b] : f.directed) out += (out.empty() ? "" : " ") + a + "->" + b;
        for (const auto& [a, b] : f.bidirected) out += (out.empty() ? "" : " ") + a + "<->" + b;
        return out;
    };
    std::ostringstream o;
    o << "H=" << format_set(h.H) << "\n";
    o << "H'=" << format_set(h.Hprime) << "\n";
    o << "R=" << format_set(h.R) << "\n";
    o << "F: " << forest(h.forest) << "\n";
    o << "F': " << forest(h.forest_prime) << "\n";
    return o.str();
}

std::optional<Hedge> find_hedge(const MixedGraph& g, const NodeSet& A, const NodeSet& B) {
    View v = make_view(g);
    Bits a = v.g.to_bits(A), b = v.g.to_bits(B);
    Bits X0 = anc_in(v, a, v.nodes);
    Bits ancdo = anc_in(v, a, v.nodes, b);
    std::vector<int> pool = members(X0 & ~b);
    int n = static_cast<int>(pool.size());
    if (n > 20) throw GraphError("hedge search: too many candidate nodes");
    std::vector<Bits> subsets;
    for (std::uint32_t m = 1; m < (1u << n); ++m) {
        Bits s = 0;
        for (int i = 0; i < n; ++i)
            if (m >> i & 1u) s |= bit(pool[i]);
        subsets.push_back(s);
    }
    std::sort(subsets.begin(), subsets.end(), [](Bits x, Bits y) {
        if (count(x) != count(y)) return count(x) < count(y);
        return members(x) < members(y);
    });
    for (Bits Hp : subsets) {
        Bits R = Hp & ancdo;
        if (!R || !bi_connected(v, Hp) || !all_reach(v, Hp, R)) continue;
        Bits X = X0;
        bool lost = false;
        for (;;) {
            Bits Y = anc_in(v, R, X);
            Y = bi_component(v, lowest(Hp), Y);
            if (!subset(Hp, Y)) {
                lost = true;
                break;
            }
            if (Y == X) break;
            X = Y;
        }
        if (lost || !(X & b)) continue;
        Bits H = X;
        for (bool changed = true; changed;) {
            changed = false;
            std::vector<int> extra = members(H & ~Hp);
            for (auto it = extra.rbegin(); it != extra.rend(); ++it) {
                Bits cand = H & ~bit(*it);
                if (valid_outer(v, cand, Hp, R, b)) {
                    H = cand;
                    changed = true;
                }
            }
        }
        Hedge h;
        h.H = v.g.to_set(H);
        h.Hprime = v.g.to_set(Hp);
        h.R = v.g.to_set(R);
        std::map<int, int> child;
        h.forest_prime = grow_forest(v, Hp, child, R);
        h.forest = grow_forest(v, H, child, Hp);
        return h;
    }
    return std::nullopt;
}

bool verify_hedge(const MixedGraph& g, const NodeSet& A, const NodeSet& B, const Hedge& h) {
    View v = make_view(g);
    for (const auto* s : {&h.H, &h.Hprime, &h.R})
        for (const auto& x : *s)
            if (!v.g.contains(x)) return false;
    Bits a = v.g.to_bits(A), b = v.g.to_bits(B);
    Bits H = v.g.to_bits(h.H), Hp = v.g.to_bits(h.Hprime), R = v.g.to_bits(h.R);
    if (!R || !subset(R, Hp) || !subset(Hp, H) || (Hp & b) || !(H & b)) return false;
    if (!subset(R, anc_in(v, a, v.nodes, b))) return false;
    auto check = [&](const Forest& f, Bits S) {
        std::map<int, int> child;
        for (const auto& [p, c] : f.directed) {
            auto ip = v.g.find(p), ic = v.g.find(c);
            if (!ip || !ic || !has(S, *ip) || !has(S, *ic) || !has(v.pa[*ic], *ip)) return false;
            if (child.count(*ip)) return false;
            child[*ip] = *ic;
        }
        std::vector<Bits> bi(v.g.size(), 0);
        for (const auto& [x, y] : f.bidirected) {
            auto ix = v.g.find(x), iy = v.g.find(y);
            if (!ix || !iy || !has(S, *ix) || !has(S, *iy) || !has(v.bi[*ix], *iy)) return false;
            bi[*ix] |= bit(*iy);
            bi[*iy] |= bit(*ix);
        }
        for (int x : members(S)) {
            int cur = x, steps = 0;
            while (!has(R, cur)) {
                auto it = child.find(cur);
                if (it == child.end() || ++steps > 64) return false;
                cur = it->second;
            }
        }
        Bits comp = bit(lowest(S));
        for (bool grew = true; grew;) {
            grew = false;
            each(comp, [&](int x) {
                if (bi[x] & ~comp) {
                    comp |= bi[x];
                    grew = true;
                }
            });
        }
        return comp == S;
    };
    if (!check(h.forest, H) || !check(h.forest_prime, Hp)) return false;
    for (const auto& e : h.forest_prime.directed)
        if (std::find(h.forest.directed.begin(), h.forest.directed.end(), e) == h.forest.directed.end()) return false;
    for (const auto& e : h.forest_prime.bidirected)
        if (std::find(h.forest.bidirected.begin(), h.forest.bidirected.end(), e) == h.forest.bidirected.end())
            return false;
    return true;
}

bool first_edges_visible(const MixedGraph& p, const NodeSet& A, const NodeSet& B,
                         std::pair<NodeId, NodeId>* first_edge) {
    Bits V = observed_bits(p);
    Bits b = p.to_bits(B);
    Bits reach = possible_anteriors(p, p.to_bits(A), V & ~b);
    for (int x : members(b))
        for (const auto& e : p.adj(x)) {
            if (has(b, e.nb) || !has(reach, e.nb) || e.near == Mark::Arrow) continue;
            bool visible = e.near == Mark::Tail && e.far == Mark::Arrow && is_visible(p, x, e.nb);
            if (!visible) {
                if (first_edge) *first_edge = {p.name(x), p.name(e.nb)};
                return false;
            }
        }
    return true;
}

namespace {

bool selections_separated(const MixedGraph& g, const NodeSet& A, const NodeSet& B, const NodeSet& D) {
    MixedGraph g2 = g;
    for (const auto& s : D) g2.set_kind(g2.index(s), NodeKind::Output);
    ManipulatedGraph h = manipulate(g2, D, B, GraphClass::ADMG);
    NodeSet cond = unite(B, g.to_set(g.selections()));
    return id_separated(h, h.graph.to_bits(A), regime_of(h, D), h.graph.to_bits(cond));
}

}  // namespace

NodeSet regime_separated_selections(const MixedGraph& g, const NodeSet& A, const NodeSet& B) {
    NodeSet out;
    for (const auto& s : g.to_set(g.selections()))
        if (selections_separated(g, A, B, {s})) out.insert(s);
    return out;
}

bool regime_separation_maximal(const MixedGraph& g, const NodeSet& A, const NodeSet& B, const NodeSet& D) {
    if (!D.empty() && !selections_separated(g, A, B, D)) return false;
    for (const auto& s : g.to_set(g.selections())) {
        if (D.count(s)) continue;
        if (selections_separated(g, A, B, unite(D, {s}))) return false;
    }
    return true;
}

namespace {

bool in_class(const MixedGraph& p, const MixedGraph& m) {
    if (!validate(m, GraphClass::MAG).empty()) return false;
    return fci(*graph_oracle(canonical_isadmg(m))) == p;
}

// ADMG for a MAG whose first edge b→v1 is not visible, or b--v1.
std::optional<MixedGraph> direct_admg(const MixedGraph& m, const NodeSet& A, const NodeSet& B) {
    Bits V = observed_bits(m);
    Bits b = m.to_bits(B);
    Bits a = m.to_bits(A);
    Bits reach = anteriors(m, a, V & ~b);
    for (int x : members(b))
        for (const auto& e : m.adj(x)) {
            int v1 = e.nb;
            if (has(b, v1) || !has(reach, v1) || e.near != Mark::Tail) continue;
            bool undirected_first = e.far == Mark::Tail;
            if (!undirected_first && is_visible(m, x, v1)) continue;
            // Anterior path v1 ... a inside V∖B.
            std::map<int, int> prev;
            std::deque<int> q{v1};
            Bits seen = bit(v1);
            int hit = has(a, v1) ? v1 : -1;
            while (!q.empty() && hit < 0) {
                int c = q.front();
                q.pop_front();
                for (const auto& f : m.adj(c)) {
                    if (f.near != Mark::Tail || !has(V & ~b, f.nb) || has(seen, f.nb)) continue;
                    seen |= bit(f.nb);
                    prev[f.nb] = c;
                    if (has(a, f.nb)) {
                        hit = f.nb;
                        break;
                    }
                    q.push_back(f.nb);
                }
            }
            if (hit < 0) continue;
            std::vector<int> path{hit};
            while (path.back() != v1) path.push_back(prev[path.back()]);
            std::reverse(path.begin(), path.end());
            MixedGraph g;
            g.tag = GraphClass::ADMG;
            for (int i = 0; i < m.size(); ++i) g.add_node(m.name(i), m.kind(i));
            std::set<std::pair<int, int>> done;
            auto oriented = [&](int from, int to) {
                g.add_edge(m.name(from), Mark::Tail, m.name(to), Mark::Arrow);
                done.insert({std::min(from, to), std::max(from, to)});
            };
            auto select = [&](int u, int w) {
                std::string s = selection_id(m.name(u), m.name(w));
                if (!g.contains(s)) g.add_node(s, NodeKind::Selection);
                return s;
            };
            oriented(x, v1);
            if (undirected_first) g.add_edge(m.name(v1), Mark::Tail, select(x, v1), Mark::Arrow);
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                int u = path[i], w = path[i + 1];
                if (undirected(m, u, w)) {
                    oriented(u, w);
                    g.add_edge(m.name(w), Mark::Tail, select(u, w), Mark::Arrow);
                }
            }
            for (const auto& ed : m.edges()) {
                int u = m.index(ed.a), w = m.index(ed.b);
                if (done.count({std::min(u, w), std::max(u, w)})) continue;
                if (ed.mark_a == Mark::Tail && ed.mark_b == Mark::Tail) {
                    std::string s = select(u, w);
                    g.add_edge(ed.a, Mark::Tail, s, Mark::Arrow);
                    g.add_edge(ed.b, Mark::Tail, s, Mark::Arrow);
                } else {
                    g.add_edge(ed.a, ed.mark_a, ed.b, ed.mark_b);
                }
            }
            add_bidirected(g, g.index(m.name(x)), g.index(m.name(v1)));
            try {
                if (mag_of(g) == m) return g;
            } catch (const GraphError&) {
            }
        }
    return std::nullopt;
}

// MAG of the class chosen so that the stuck leaf T ⊋ C survives as a hedge.
MixedGraph certificate_mag(const MixedGraph& p, const FailCertificate& cert) {
    MixedGraph g = tag_orient(p);
    Bits T = p.to_bits(cert.T), C = p.to_bits(cert.C);
    auto comps = circle_components(g, g.all());
    std::vector<int> source(comps.size(), -1);
    auto assign = [&](int v) {
        for (std::size_t i = 0; i < comps.size(); ++i)
            if (has(comps[i], v) && source[i] < 0) source[i] = v;
    };
    for (Bits bk : sorted_buckets(p, T)) {
        if (!subset(bk, T & ~C)) continue;
        bool placed = false;
        for (int t : members(bk)) {
            for (int z : members(T & ~bk)) {
                if (potentially_directed_edge(p, t, z) && has(pc_component(p, T, z), t)) {
                    assign(t);
                    placed = true;
                    break;
                }
            }
            if (placed) break;
        }
    }
    auto order = bucket_topological_order(p, C);
    if (!order.empty()) {
        int top = lowest(order.back());
        assign(top);
        Bits pc = pc_component(p, C, top);
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            Bits pick = order[i] & pc;
            if (pick) assign(lowest(pick));
        }
    }
    for (std::size_t i = 0; i < comps.size(); ++i)
        if (count(comps[i]) > 1) orient_circle_component(g, comps[i], source[i] >= 0 ? source[i] : lowest(comps[i]));
    g.tag = GraphClass::MAG;
    return g;
}

std::optional<HedgeWitness> try_mag(const MixedGraph& p, const MixedGraph& m, const NodeSet& A, const NodeSet& B,
                                    bool direct) {
    if (!in_class(p, m)) return std::nullopt;
    std::optional<MixedGraph> admg;
    if (direct) {
        admg = direct_admg(m, A, B);
        if (!admg) return std::nullopt;
    } else {
        admg = canonical_isadmg(m);
    }
    HedgeWitness w;
    w.mag = m;
    w.admg = *admg;
    w.direct = direct;
    w.D = regime_separated_selections(w.admg, A, B);
    NodeSet S = w.admg.to_set(w.admg.selections());
    w.A = unite(A, minus(S, w.D));
    w.B = unite(B, w.D);
    auto h = find_hedge(w.admg, w.A, w.B);
    if (!h || !verify_hedge(w.admg, w.A, w.B, *h)) return std::nullopt;
    if (!regime_separation_maximal(w.admg, A, B, w.D)) return std::nullopt;
    w.hedge = *h;
    return w;
}

}  // namespace

HedgeWitness hedge_witness(const MixedGraph& p, const NodeSet& A, const NodeSet& B, const FailCertificate& cert) {
    if (p.inputs() || p.latents() || p.selections())
        throw GraphError("hedge witness expects a graph without input, latent or selection nodes");
    Bits V = observed_bits(p);
    Bits C = p.to_bits(cert.C), T = p.to_bits(cert.T);
    if (!C || !subset(C, T) || C == T || !subset(T, V)) throw GraphError("malformed failure certificate");
    int tried = 0;
    std::pair<NodeId, NodeId> first;
    bool direct = !first_edges_visible(p, A, B, &first);
    std::vector<MixedGraph> candidates;
    try {
        if (direct)
            candidates.push_back(orient_to_mag(p, bit(p.index(first.first))));
        else
            candidates.push_back(certificate_mag(p, cert));
    } catch (const GraphError&) {
    }
    for (const auto& m : candidates) {
        ++tried;
        if (auto w = try_mag(p, m, A, B, direct)) {
            w->mags_tried = tried;
            return *w;
        }
    }
    for (const auto& m : enumerate_mags(p).mags) {
        ++tried;
        if (auto w = try_mag(p, m, A, B, direct)) {
            w->mags_tried = tried;
            return *w;
        }
    }
    throw GraphError("no hedge witness found in " + std::to_string(tried) + " MAGs");
}

// ---- classical identification ------------------------------------------------

DistrictId district_id(const MixedGraph& g, const NodeSet& A, const NodeSet& B) {
    View v = make_view(g);
    if (v.g.selections()) throw GraphError("district identification expects no selection nodes");
    Bits V = v.nodes & ~v.g.inputs();
    Bits a = v.g.to_bits(A), b = v.g.to_bits(B);
    DistrictId out;
    Bits D = anc_in(v, a, V & ~b);
    out.D = v.g.to_set(D);
    Bits left = D;
    while (left) {
        Bits dist = bi_component(v, lowest(left), D);
        left &= ~dist;
        out.districts.push_back(v.g.to_set(dist));
        std::vector<std::pair<NodeId, NodeSet>> steps;
        Bits random = V;
        while (random != dist) {
            int pick = -1;
            Bits blanket = 0;
            for (int r : members(random & ~dist)) {
                Bits dr = bi_component(v, r, random);
                // Descendants of r among random nodes (fixed nodes have no parents).
                Bits stack = bit(r), de = bit(r);
                while (stack) {
                    int x = lowest(stack);
                    stack &= ~bit(x);
                    each(random & ~de, [&](int y) {
                        if (has(v.pa[y], x)) {
                            de |= bit(y);
                            stack |= bit(y);
                        }
                    });
                }
                if ((dr & de) != bit(r)) continue;
                Bits pa = 0;
                each(dr, [&](int x) { pa |= v.pa[x]; });
                pick = r;
                blanket = ((dr | pa) & random) & ~bit(r);
                break;
            }
            if (pick < 0) return out;
            steps.push_back({v.g.name(pick), v.g.to_set(blanket)});
            random &= ~bit(pick);
        }
        out.fixing.push_back(steps);
    }
    out.ok = true;
    return out;
}

}  // namespace pagcid
