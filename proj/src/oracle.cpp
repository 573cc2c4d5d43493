#include "pagcid/oracle.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "pagcid/fci.hpp"
#include "pagcid/represent.hpp"
#include "pagcid/separate.hpp"

namespace pagcid {

namespace {

using Vars = std::vector<NodeId>;

// Ordered variable list with domains; values vary fastest at the back.
struct Space {
    Vars vars;
    std::vector<int> dom;

    std::size_t states() const {
        std::size_t n = 1;
        for (int d : dom) n *= static_cast<std::size_t>(d);
        return n;
    }
    int pos(const NodeId& v) const {
        auto it = std::lower_bound(vars.begin(), vars.end(), v);
        return it != vars.end() && *it == v ? static_cast<int>(it - vars.begin()) : -1;
    }
};

Space merge(const Space& a, const Space& b) {
    Space out;
    std::size_t i = 0, j = 0;
    while (i < a.vars.size() || j < b.vars.size()) {
        if (j == b.vars.size() || (i < a.vars.size() && a.vars[i] < b.vars[j])) {
            out.vars.push_back(a.vars[i]);
            out.dom.push_back(a.dom[i++]);
        } else if (i == a.vars.size() || b.vars[j] < a.vars[i]) {
            out.vars.push_back(b.vars[j]);
            out.dom.push_back(b.dom[j++]);
        } else {
            if (a.dom[i] != b.dom[j]) throw GraphError("domain mismatch for '" + a.vars[i] + "'");
            out.vars.push_back(a.vars[i]);
            out.dom.push_back(a.dom[i]);
            ++i, ++j;
        }
    }
    return out;
}

Space restrict(const Space& s, const NodeSet& keep, bool inside) {
    Space out;
    for (std::size_t i = 0; i < s.vars.size(); ++i)
        if (keep.count(s.vars[i]) == static_cast<std::size_t>(inside)) {
            out.vars.push_back(s.vars[i]);
            out.dom.push_back(s.dom[i]);
        }
    return out;
}

// Index of a sub-space assignment read from a full assignment over `whole`.
struct Indexer {
    std::vector<int> pos;
    std::vector<std::size_t> stride;

    Indexer(const Space& part, const Space& whole) {
        std::size_t s = 1;
        pos.resize(part.vars.size());
        stride.resize(part.vars.size());
        for (int i = static_cast<int>(part.vars.size()) - 1; i >= 0; --i) {
            pos[i] = whole.pos(part.vars[i]);
            if (pos[i] < 0) throw GraphError("variable '" + part.vars[i] + "' missing");
            stride[i] = s;
            s *= static_cast<std::size_t>(part.dom[i]);
        }
    }
    std::size_t operator()(const std::vector<int>& vals) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < pos.size(); ++i) idx += vals[pos[i]] * stride[i];
        return idx;
    }
};

template <class F>
void for_each_assignment(const Space& s, F&& f) {
    std::vector<int> vals(s.vars.size(), 0);
    while (true) {
        f(vals);
        int i = static_cast<int>(vals.size()) - 1;
        while (i >= 0 && ++vals[i] == s.dom[i]) vals[i--] = 0;
        if (i < 0) return;
    }
}

Space ctx_space(const Kernel& k) { return Space{k.ctx, k.ctx_dom}; }
Space out_space(const Kernel& k) { return Space{k.out, k.out_dom}; }

Kernel make_kernel(const Space& ctx, const Space& out) {
    Kernel k;
    k.ctx = ctx.vars;
    k.ctx_dom = ctx.dom;
    k.out = out.vars;
    k.out_dom = out.dom;
    k.p.assign(ctx.states() * out.states(), Rational(0));
    return k;
}

// Visits every joint assignment of (ctx, out) of k with flat index helpers.
struct View {
    Space all;
    Indexer c, o;
    std::size_t outs;
    View(const Kernel& k, const Space& all_vars)
        : all(all_vars), c(ctx_space(k), all_vars), o(out_space(k), all_vars), outs(k.out_states()) {}
    std::size_t operator()(const std::vector<int>& v) const { return c(v) * outs + o(v); }
};

void require_outputs(const Kernel& k, const NodeSet& s, const char* what) {
    for (const auto& v : s)
        if (!std::binary_search(k.out.begin(), k.out.end(), v))
            throw GraphError(std::string(what) + ": '" + v + "' is not an output of the kernel");
}

std::string join(const Vars& v, const std::string& sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

std::vector<std::string> split(const std::string& s, char c) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, c))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

std::size_t Kernel::ctx_states() const { return ctx_space(*this).states(); }
std::size_t Kernel::out_states() const { return out_space(*this).states(); }

Kernel marginalize(const Kernel& k, const NodeSet& over) {
    require_outputs(k, over, "marginalize");
    Space all = merge(ctx_space(k), out_space(k));
    Kernel r = make_kernel(ctx_space(k), restrict(out_space(k), over, false));
    View src(k, all), dst(r, all);
    for_each_assignment(all, [&](const std::vector<int>& v) { r.p[dst(v)] += k.p[src(v)]; });
    return r;
}

Kernel marginal(const Kernel& k, const NodeSet& keep) {
    require_outputs(k, keep, "marginal");
    NodeSet over;
    for (const auto& v : k.out)
        if (!keep.count(v)) over.insert(v);
    return marginalize(k, over);
}

Kernel condition(const Kernel& k, const NodeSet& on, ZeroRows zero) {
    require_outputs(k, on, "condition");
    Kernel m = marginal(k, on);
    Space all = merge(ctx_space(k), out_space(k));
    Kernel r = make_kernel(merge(ctx_space(k), restrict(out_space(k), on, true)),
                           restrict(out_space(k), on, false));
    View src(k, all), den(m, all), dst(r, all);
    Rational uniform(1, static_cast<unsigned long>(r.out_states()));
    for_each_assignment(all, [&](const std::vector<int>& v) {
        const Rational& d = m.p[den(v)];
        if (d == 0) {
            if (zero == ZeroRows::Error) throw GraphError("conditioning on a zero-probability context");
            r.p[dst(v)] = uniform;
        } else {
            r.p[dst(v)] = k.p[src(v)] / d;
        }
    });
    return r;
}

Kernel product(const Kernel& a, const Kernel& b) {
    for (const auto& v : a.out)
        if (std::binary_search(b.out.begin(), b.out.end(), v))
            throw GraphError("product: '" + v + "' is an output of both factors");
    Space out = merge(out_space(a), out_space(b));
    NodeSet outs(out.vars.begin(), out.vars.end());
    Space ctx = restrict(merge(ctx_space(a), ctx_space(b)), outs, false);
    Space all = merge(ctx, out);
    Kernel r = make_kernel(ctx, out);
    View va(a, all), vb(b, all), vr(r, all);
    for_each_assignment(all, [&](const std::vector<int>& v) { r.p[vr(v)] = a.p[va(v)] * b.p[vb(v)]; });
    return r;
}

bool agree(const Kernel& a, const Kernel& b) {
    if (a.out != b.out || a.out_dom != b.out_dom) return false;
    Space all = merge(merge(ctx_space(a), ctx_space(b)), out_space(a));
    View va(a, all), vb(b, all);
    bool same = true;
    for_each_assignment(all, [&](const std::vector<int>& v) {
        if (same && a.p[va(v)] != b.p[vb(v)]) same = false;
    });
    return same;
}

bool rows_sum_to_one(const Kernel& k) {
    std::size_t n = k.out_states();
    for (std::size_t c = 0; c < k.ctx_states(); ++c) {
        Rational s = 0;
        for (std::size_t o = 0; o < n; ++o) s += k.p[c * n + o];
        if (s != 1) return false;
    }
    return true;
}

// ---- models -----------------------------------------------------------------

NodeSet DiscreteSCM::of_kind(NodeKind k) const {
    NodeSet out;
    for (const auto& [id, v] : vars)
        if (v.kind == k && !v.exogenous) out.insert(id);
    return out;
}

NodeSet DiscreteSCM::outputs() const { return of_kind(NodeKind::Output); }

int DiscreteSCM::domain(const NodeId& v) const {
    auto it = vars.find(v);
    if (it == vars.end()) throw GraphError("unknown variable '" + v + "'");
    return it->second.domain;
}

std::vector<NodeId> DiscreteSCM::topological_order() const {
    std::map<NodeId, int> pending;
    std::map<NodeId, std::vector<NodeId>> kids;
    for (const auto& [id, v] : vars) {
        if (v.kind == NodeKind::Input) continue;
        int n = 0;
        for (const auto& p : v.parents) {
            auto it = vars.find(p);
            if (it == vars.end()) throw GraphError("unknown parent '" + p + "' of '" + id + "'");
            if (it->second.kind == NodeKind::Input) continue;
            kids[p].push_back(id);
            ++n;
        }
        pending[id] = n;
    }
    std::set<NodeId> ready;
    for (const auto& [id, n] : pending)
        if (n == 0) ready.insert(id);
    std::vector<NodeId> out;
    while (!ready.empty()) {
        NodeId v = *ready.begin();
        ready.erase(ready.begin());
        out.push_back(v);
        for (const auto& c : kids[v])
            if (--pending[c] == 0) ready.insert(c);
    }
    if (out.size() != pending.size()) throw GraphError("cyclic parent relation");
    return out;
}

const Rational& DiscreteSCM::prob(const NodeId& v, const std::map<NodeId, int>& a, int value) const {
    const Variable& x = vars.at(v);
    std::size_t row = 0;
    for (const auto& p : x.parents) row = row * domain(p) + a.at(p);
    return x.cpt.at(row * x.domain + value);
}

void DiscreteSCM::check() const {
    topological_order();
    for (const auto& [id, v] : vars) {
        if (v.domain < 1) throw GraphError("variable '" + id + "' has an empty domain");
        if (v.kind == NodeKind::Input) {
            if (!v.parents.empty() || !v.cpt.empty()) throw GraphError("input '" + id + "' has a mechanism");
            continue;
        }
        if (v.kind == NodeKind::Selection && v.domain != 2)
            throw GraphError("selection variable '" + id + "' must be binary");
        if (v.exogenous && !v.parents.empty()) throw GraphError("exogenous '" + id + "' has parents");
        std::size_t rows = 1;
        for (const auto& p : v.parents) rows *= domain(p);
        if (v.cpt.size() != rows * v.domain) throw GraphError("CPT of '" + id + "' has the wrong size");
        for (std::size_t r = 0; r < rows; ++r) {
            Rational s = 0;
            for (int x = 0; x < v.domain; ++x) {
                if (v.cpt[r * v.domain + x] < 0) throw GraphError("negative CPT entry for '" + id + "'");
                s += v.cpt[r * v.domain + x];
            }
            if (s != 1) throw GraphError("CPT row of '" + id + "' sums to " + s.get_str());
        }
    }
}

DiscreteSCM parse_scm(const std::string& text) {
    DiscreteSCM scm;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    struct Row {
        NodeId id;
        std::vector<int> assignment;
        std::vector<Rational> probs;
        int line;
    };
    std::vector<Row> rows;
    NodeSet selected;
    auto fail = [&](const std::string& msg) -> void {
        throw GraphError("scm line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok[0] == "var") {
            if (tok.size() < 2) fail("missing variable id");
            Variable v;
            for (std::size_t i = 2; i < tok.size(); ++i) {
                auto eq = tok[i].find('=');
                if (eq == std::string::npos) fail("expected key=value, got '" + tok[i] + "'");
                std::string key = tok[i].substr(0, eq), val = tok[i].substr(eq + 1);
                if (key == "kind") {
                    if (val == "exogenous") {
                        v.kind = NodeKind::Latent;
                        v.exogenous = true;
                    } else {
                        v.kind = parse_kind(val);
                    }
                } else if (key == "domain") {
                    try {
                        v.domain = std::stoi(val);
                    } catch (const std::exception&) {
                        fail("bad domain '" + val + "'");
                    }
                } else if (key == "parents") {
                    v.parents = split(val, ',');
                } else {
                    fail("unknown key '" + key + "'");
                }
            }
            if (!scm.vars.emplace(tok[1], v).second) fail("duplicate variable '" + tok[1] + "'");
        } else if (tok[0] == "cpt") {
            if (tok.size() < 4) fail("cpt needs an id, a parent assignment and probabilities");
            Row r{tok[1], {}, {}, lineno};
            if (tok[2] != "-")
                for (const auto& x : split(tok[2], ',')) r.assignment.push_back(std::stoi(x));
            for (std::size_t i = 3; i < tok.size(); ++i) {
                try {
                    Rational q(tok[i]);
                    q.canonicalize();
                    r.probs.push_back(q);
                } catch (const std::exception&) {
                    fail("bad probability '" + tok[i] + "'");
                }
            }
            rows.push_back(std::move(r));
        } else if (tok[0] == "select") {
            if (tok.size() != 2) fail("select takes one id");
            selected.insert(tok[1]);
        } else {
            fail("unknown statement '" + tok[0] + "'");
        }
    }
    for (const auto& s : selected) {
        auto it = scm.vars.find(s);
        if (it == scm.vars.end()) throw GraphError("select of unknown variable '" + s + "'");
        it->second.kind = NodeKind::Selection;
    }
    for (auto& [id, v] : scm.vars) {
        if (v.kind == NodeKind::Input) continue;
        std::size_t n = 1;
        for (const auto& p : v.parents) n *= scm.domain(p);
        v.cpt.assign(n * v.domain, Rational(-1));
    }
    for (const auto& r : rows) {
        lineno = r.line;
        auto it = scm.vars.find(r.id);
        if (it == scm.vars.end()) fail("cpt for unknown variable '" + r.id + "'");
        Variable& v = it->second;
        if (r.assignment.size() != v.parents.size()) fail("parent assignment has the wrong length");
        if (static_cast<int>(r.probs.size()) != v.domain) fail("expected " + std::to_string(v.domain) + " probabilities");
        std::size_t row = 0;
        for (std::size_t i = 0; i < v.parents.size(); ++i) {
            int d = scm.domain(v.parents[i]);
            if (r.assignment[i] < 0 || r.assignment[i] >= d) fail("parent value out of range");
            row = row * d + r.assignment[i];
        }
        for (int x = 0; x < v.domain; ++x) v.cpt[row * v.domain + x] = r.probs[x];
    }
    for (const auto& [id, v] : scm.vars)
        for (const auto& q : v.cpt)
            if (q < 0) throw GraphError("missing CPT rows for '" + id + "'");
    scm.check();
    return scm;
}

std::string format_scm(const DiscreteSCM& scm) {
    std::ostringstream out;
    for (const auto& [id, v] : scm.vars) {
        out << "var " << id << " kind=" << (v.exogenous ? "exogenous" : kind_name(v.kind)) << " domain=" << v.domain
            << " parents=" << join(v.parents) << "\n";
    }
    for (const auto& [id, v] : scm.vars) {
        if (v.kind == NodeKind::Input) continue;
        std::vector<int> dom;
        for (const auto& p : v.parents) dom.push_back(scm.domain(p));
        Space s{v.parents, dom};
        std::size_t row = 0;
        for_each_assignment(s, [&](const std::vector<int>& a) {
            out << "cpt " << id << " ";
            if (a.empty()) out << "-";
            for (std::size_t i = 0; i < a.size(); ++i) out << (i ? "," : "") << a[i];
            for (int x = 0; x < v.domain; ++x) out << " " << v.cpt[row * v.domain + x].get_str();
            out << "\n";
            ++row;
        });
    }
    for (const auto& s : scm.selections()) out << "select " << s << "\n";
    return out.str();
}

MixedGraph graph_of(const DiscreteSCM& scm) {
    MixedGraph g;
    for (const auto& [id, v] : scm.vars)
        if (!v.exogenous) g.add_node(id, v.kind);
    for (const auto& [id, v] : scm.vars) {
        if (v.exogenous) continue;
        for (const auto& p : v.parents)
            if (!scm.vars.at(p).exogenous) g.add_edge(p, Mark::Tail, id, Mark::Arrow);
    }
    for (const auto& [id, v] : scm.vars) {
        if (!v.exogenous) continue;
        std::vector<NodeId> kids;
        for (const auto& [c, w] : scm.vars)
            if (std::find(w.parents.begin(), w.parents.end(), id) != w.parents.end()) kids.push_back(c);
        for (std::size_t i = 0; i < kids.size(); ++i)
            for (std::size_t j = i + 1; j < kids.size(); ++j) {
                int a = g.index(kids[i]), b = g.index(kids[j]);
                if (!bidirected(g, a, b)) add_bidirected(g, a, b);
            }
    }
    g.tag = GraphClass::ADMG;
    return g;
}

DiscreteSCM random_scm(const MixedGraph& g, const RandomScmOptions& opt) {
    auto bad = validate(g, GraphClass::ADMG);
    if (!bad.empty()) throw GraphError("random_scm needs an ADMG: " + bad.front());
    std::mt19937_64 rng(opt.seed);
    DiscreteSCM scm;
    auto dom = [&](const NodeId& id) {
        auto it = opt.domains.find(id);
        return it == opt.domains.end() ? 2 : it->second;
    };
    for (int v = 0; v < g.size(); ++v) {
        Variable x;
        x.kind = g.kind(v);
        x.domain = x.kind == NodeKind::Selection ? 2 : dom(g.name(v));
        for (int p : members(parents(g, v))) x.parents.push_back(g.name(p));
        scm.vars[g.name(v)] = x;
    }
    for (const auto& e : g.edges()) {
        if (e.mark_a != Mark::Arrow || e.mark_b != Mark::Arrow) continue;
        NodeId w = confounder_id(e.a, e.b);
        w[0] = 'W';
        if (scm.vars.count(w)) throw GraphError("name clash for exogenous variable '" + w + "'");
        Variable x;
        x.kind = NodeKind::Latent;
        x.exogenous = true;
        scm.vars[w] = x;
        scm.vars[e.a].parents.push_back(w);
        scm.vars[e.b].parents.push_back(w);
    }
    const int grid = 64;
    for (auto& [id, x] : scm.vars) {
        if (x.kind == NodeKind::Input) continue;
        std::sort(x.parents.begin(), x.parents.end());
        std::size_t rows = 1;
        for (const auto& p : x.parents) rows *= scm.vars.at(p).domain;
        x.cpt.clear();
        for (std::size_t r = 0; r < rows; ++r) {
            // Random composition of the grid into `domain` parts.
            std::vector<int> cuts;
            if (opt.positive) {
                if (x.domain > grid) throw GraphError("domain larger than the probability grid");
                std::vector<int> pool(grid - 1);
                for (int i = 0; i < grid - 1; ++i) pool[i] = i + 1;
                std::shuffle(pool.begin(), pool.end(), rng);
                cuts.assign(pool.begin(), pool.begin() + (x.domain - 1));
            } else {
                std::uniform_int_distribution<int> u(0, grid);
                for (int i = 0; i + 1 < x.domain; ++i) cuts.push_back(u(rng));
            }
            cuts.push_back(0);
            cuts.push_back(grid);
            std::sort(cuts.begin(), cuts.end());
            for (int i = 0; i < x.domain; ++i) x.cpt.push_back(Rational(cuts[i + 1] - cuts[i], grid));
        }
        for (auto& q : x.cpt) q.canonicalize();
    }
    scm.check();
    return scm;
}

// ---- exact inference -----------------------------------------------------------

Kernel interventional_kernel(const DiscreteSCM& scm, const NodeSet& B, bool condition_selection,
                             Enumeration how) {
    NodeSet O = scm.outputs();
    for (const auto& b : B)
        if (!O.count(b)) throw GraphError("intervention target '" + b + "' is not an observed output");
    Vars names;
    std::vector<int> doms;
    for (const auto& [id, v] : scm.vars) {
        names.push_back(id);
        doms.push_back(v.domain);
    }
    Space all{names, doms};
    NodeSet ctx_ids = scm.inputs();
    ctx_ids.insert(B.begin(), B.end());
    Space ctx = restrict(all, ctx_ids, true);
    NodeSet out_ids;
    for (const auto& o : O)
        if (!B.count(o)) out_ids.insert(o);
    Space out = restrict(all, out_ids, true);
    Kernel k = make_kernel(ctx, out);
    Indexer cidx(ctx, all), oidx(out, all);
    std::size_t outs = out.states();

    struct Step {
        int var;
        bool fixed;
        bool selected;
        std::vector<int> par;
        std::vector<std::size_t> mul;
        const std::vector<Rational>* cpt;
        int dom;
    };
    std::vector<Step> steps;
    for (const auto& id : scm.topological_order()) {
        const Variable& v = scm.vars.at(id);
        Step s{all.pos(id), B.count(id) > 0, condition_selection && v.kind == NodeKind::Selection, {}, {}, &v.cpt,
               v.domain};
        std::size_t m = 1;
        for (auto it = v.parents.rbegin(); it != v.parents.rend(); ++it) {
            s.par.insert(s.par.begin(), all.pos(*it));
            s.mul.insert(s.mul.begin(), m);
            m *= scm.domain(*it);
        }
        steps.push_back(std::move(s));
    }
    auto row_of = [&](const Step& s, const std::vector<int>& vals) {
        std::size_t r = 0;
        for (std::size_t i = 0; i < s.par.size(); ++i) r += vals[s.par[i]] * s.mul[i];
        return r * s.dom;
    };

    std::vector<int> vals(names.size(), 0);
    for_each_assignment(ctx, [&](const std::vector<int>& cv) {
        for (std::size_t i = 0; i < ctx.vars.size(); ++i) vals[all.pos(ctx.vars[i])] = cv[i];
        std::size_t base = cidx(vals) * outs;
        if (how == Enumeration::Incremental) {
            std::function<void(std::size_t, const Rational&)> go = [&](std::size_t d, const Rational& w) {
                if (d == steps.size()) {
                    k.p[base + oidx(vals)] += w;
                    return;
                }
                const Step& s = steps[d];
                if (s.fixed) return go(d + 1, w);
                std::size_t r = row_of(s, vals);
                for (int x = s.selected ? 1 : 0; x < s.dom; ++x) {
                    const Rational& f = (*s.cpt)[r + x];
                    if (f == 0) continue;
                    vals[s.var] = x;
                    go(d + 1, w * f);
                }
            };
            go(0, Rational(1));
        } else {
            std::vector<int> free;
            for (const auto& s : steps)
                if (!s.fixed) free.push_back(static_cast<int>(&s - steps.data()));
            Space fs;
            for (int i : free) {
                fs.vars.push_back(names[steps[i].var]);
                fs.dom.push_back(steps[i].dom);
            }
            for_each_assignment(fs, [&](const std::vector<int>& fv) {
                for (std::size_t i = 0; i < free.size(); ++i) vals[steps[free[i]].var] = fv[i];
                Rational w = 1;
                for (const auto& s : steps) {
                    if (s.fixed) continue;
                    if (s.selected && vals[s.var] != 1) return;
                    w *= (*s.cpt)[row_of(s, vals) + vals[s.var]];
                }
                k.p[base + oidx(vals)] += w;
            });
        }
        Rational total = 0;
        for (std::size_t o = 0; o < outs; ++o) total += k.p[base + o];
        if (total == 0) throw GraphError("selection event has probability zero in some context");
        if (total != 1)
            for (std::size_t o = 0; o < outs; ++o) k.p[base + o] /= total;
    });
    return k;
}

Kernel c_factor(const DiscreteSCM& scm, const NodeSet& C) {
    NodeSet rest;
    for (const auto& o : scm.outputs())
        if (!C.count(o)) rest.insert(o);
    return interventional_kernel(scm, rest);
}

Kernel effect(const DiscreteSCM& scm, const NodeSet& A, const NodeSet& B, const NodeSet& C, ZeroRows zero) {
    Kernel k = interventional_kernel(scm, B);
    NodeSet keep = A;
    keep.insert(C.begin(), C.end());
    return condition(marginal(k, keep), C, zero);
}

Kernel fix(const Kernel& q, const NodeId& r, const NodeSet& blanket, ZeroRows zero) {
    NodeSet keep = blanket;
    keep.insert(r);
    Kernel den = condition(marginal(q, keep), blanket, zero);
    Space ctx = merge(ctx_space(q), restrict(out_space(q), {r}, true));
    Space out = restrict(out_space(q), {r}, false);
    Space all = merge(ctx, out);
    Kernel k = make_kernel(ctx, out);
    View src(q, all), dv(den, all), dst(k, all);
    for_each_assignment(all, [&](const std::vector<int>& v) {
        const Rational& d = den.p[dv(v)];
        if (d == 0) {
            if (zero == ZeroRows::Error) throw GraphError("fixing " + r + " divides by zero");
            k.p[dst(v)] = 0;
        } else {
            k.p[dst(v)] = q.p[src(v)] / d;
        }
    });
    return k;
}

Kernel district_kernel(const DistrictId& id, const NodeSet& A, const Kernel& qv) {
    if (!id.ok) throw GraphError("district identification failed");
    std::optional<Kernel> acc;
    for (const auto& steps : id.fixing) {
        Kernel q = qv;
        for (const auto& [r, mb] : steps) q = fix(q, r, mb);
        acc = acc ? product(*acc, q) : q;
    }
    if (!acc) throw GraphError("no districts");
    NodeSet drop;
    for (const auto& d : id.D)
        if (!A.count(d)) drop.insert(d);
    return marginalize(*acc, drop);
}

bool ci_test(const Kernel& k, const NodeSet& A, const NodeSet& B, const NodeSet& C) {
    NodeSet ac = A, bc = B, abc = A;
    ac.insert(C.begin(), C.end());
    bc.insert(C.begin(), C.end());
    abc.insert(B.begin(), B.end());
    abc.insert(C.begin(), C.end());
    Kernel pabc = marginal(k, abc), pac = marginal(k, ac), pbc = marginal(k, bc), pc = marginal(k, C);
    Space all = merge(ctx_space(pabc), out_space(pabc));
    View v1(pabc, all), v2(pac, all), v3(pbc, all), v4(pc, all);
    bool ok = true;
    for_each_assignment(all, [&](const std::vector<int>& v) {
        if (ok && pabc.p[v1(v)] * pc.p[v4(v)] != pac.p[v2(v)] * pbc.p[v3(v)]) ok = false;
    });
    return ok;
}

namespace {

class DistributionOracle : public IndependenceOracle {
  public:
    explicit DistributionOracle(const DiscreteSCM& scm)
        : q_(interventional_kernel(scm, {})), in_(scm.inputs()), out_(scm.outputs()) {}

    bool query(const NodeSet& A0, const NodeSet& B0, const NodeSet& C0) const override {
        NodeSet A, B, C, J, K;
        for (const auto& a : A0) (in_.count(a) ? J : A).insert(a);
        for (const auto& b : B0) (in_.count(b) ? K : B).insert(b);
        for (const auto& c : C0)
            if (!in_.count(c)) C.insert(c);
        if (!J.empty() && !K.empty()) throw GraphError("independence query between two inputs");
        if (!K.empty()) {
            std::swap(A, B);
            std::swap(J, K);
        }
        for (const auto& a : A)
            if (B.count(a) && !C.count(a)) return false;
        if (!A.empty() && !B.empty() && !ci_test(q_, A, B, C)) return false;
        if (J.empty() || B.empty()) return true;
        // P(X_B | X_C, X_I) must not vary with the inputs in J.
        NodeSet bc = B;
        bc.insert(C.begin(), C.end());
        Kernel pbc = marginal(q_, bc), pc = marginal(q_, C);
        Space all = merge(ctx_space(pbc), out_space(pbc));
        Indexer cx(ctx_space(pbc), all);
        std::vector<int> jpos;
        for (const auto& j : J) jpos.push_back(all.pos(j));
        View v1(pbc, all), v2(pc, all);
        bool ok = true;
        for_each_assignment(all, [&](const std::vector<int>& x) {
            if (!ok) return;
            std::vector<int> y = x;
            Space js;
            for (const auto& j : J) {
                js.vars.push_back(j);
                js.dom.push_back(all.dom[all.pos(j)]);
            }
            for_each_assignment(js, [&](const std::vector<int>& jv) {
                for (std::size_t i = 0; i < jpos.size(); ++i) y[jpos[i]] = jv[i];
                if (pbc.p[v1(x)] * pc.p[v2(y)] != pbc.p[v1(y)] * pc.p[v2(x)]) ok = false;
            });
        });
        return ok;
    }
    NodeSet inputs() const override { return in_; }
    NodeSet outputs() const override { return out_; }

  private:
    Kernel q_;
    NodeSet in_, out_;
};

struct Evaluator {
    const Kernel& qv;
    const EvalOptions& opt;
    std::map<const Estimand*, Kernel> memo;

    const Kernel& run(const Estimand& e) {
        auto it = memo.find(&e);
        if (it != memo.end()) return it->second;
        Kernel k = compute(e);
        return memo.emplace(&e, std::move(k)).first->second;
    }

    Kernel compute(const Estimand& e) {
        using K = Estimand::Kind;
        switch (e.kind) {
            case K::Base: {
                if (e.vars == qv.outputs()) return qv;
                if (!opt.provider) throw GraphError("no kernel available for Q[" + format_set(e.vars) + "]");
                return opt.provider(e.vars);
            }
            case K::Marg:
                return marginalize(run(*e.kids[0]), e.vars);
            case K::Cond:
                return condition(run(*e.kids[0]), e.vars, opt.zero);
            case K::Prod: {
                Kernel acc = run(*e.kids[0]);
                for (std::size_t i = 1; i < e.kids.size(); ++i) acc = product(acc, run(*e.kids[i]));
                return acc;
            }
            case K::Comp:
                return marginalize(product(run(*e.kids[0]), run(*e.kids[1])), e.vars);
            case K::Box: {
                const Kernel& k1 = run(*e.kids[0]);
                const Kernel& k2 = run(*e.kids[1]);
                NodeSet r1 = k1.outputs(), r2 = k2.outputs();
                auto within = [](const NodeSet& a, const NodeSet& b) {
                    return std::includes(b.begin(), b.end(), a.begin(), a.end());
                };
                std::optional<Kernel> acc;
                NodeSet before;
                for (const auto& bucket : e.order) {
                    bool first = within(bucket, r1);
                    if (!first && !within(bucket, r2)) throw GraphError("box product: bucket outside both factors");
                    const Kernel& kj = first ? k1 : k2;
                    const NodeSet& rj = first ? r1 : r2;
                    NodeSet cond, keep = bucket;
                    for (const auto& v : before)
                        if (rj.count(v)) cond.insert(v);
                    keep.insert(cond.begin(), cond.end());
                    Kernel f = condition(marginal(kj, keep), cond, opt.zero);
                    acc = acc ? product(*acc, f) : f;
                    before.insert(bucket.begin(), bucket.end());
                }
                if (!acc) throw GraphError("box product over no buckets");
                return *acc;
            }
        }
        throw GraphError("bad estimand");
    }
};

}  // namespace

std::unique_ptr<IndependenceOracle> distribution_oracle(const DiscreteSCM& scm) {
    return std::make_unique<DistributionOracle>(scm);
}

Kernel eval_estimand(const Estimand& e, const Kernel& qv, const EvalOptions& opt) {
    Evaluator ev{qv, opt, {}};
    return ev.run(e);
}

std::string format_kernel(const Kernel& k) {
    std::ostringstream out;
    out << "context\toutputs\tp\n";
    Space cs = ctx_space(k), os = out_space(k);
    std::size_t c = 0;
    auto assign = [](const Space& s, const std::vector<int>& v) {
        if (v.empty()) return std::string("-");
        std::string r;
        for (std::size_t i = 0; i < v.size(); ++i) r += (i ? "," : "") + s.vars[i] + "=" + std::to_string(v[i]);
        return r;
    };
    for_each_assignment(cs, [&](const std::vector<int>& cv) {
        std::size_t o = 0;
        for_each_assignment(os, [&](const std::vector<int>& ov) {
            out << assign(cs, cv) << "\t" << assign(os, ov) << "\t" << k.p[c * k.out_states() + o].get_str() << "\n";
            ++o;
        });
        ++c;
    });
    return out.str();
}

Kernel parse_kernel(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::tuple<std::map<NodeId, int>, std::map<NodeId, int>, Rational>> rows;
    std::map<NodeId, int> cdom, odom;
    bool header = true;
    auto parse_assign = [](const std::string& s, std::map<NodeId, int>& dom) {
        std::map<NodeId, int> a;
        if (s == "-") return a;
        for (const auto& part : split(s, ',')) {
            auto eq = part.find('=');
            if (eq == std::string::npos) throw GraphError("bad kernel assignment '" + part + "'");
            int v = std::stoi(part.substr(eq + 1));
            NodeId id = part.substr(0, eq);
            a[id] = v;
            dom[id] = std::max(dom[id], v + 1);
        }
        return a;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto cells = split(line, '\t');
        if (cells.size() != 3) throw GraphError("kernel rows need three tab-separated cells");
        Rational q(cells[2]);
        q.canonicalize();
        auto ca = parse_assign(cells[0], cdom);
        auto oa = parse_assign(cells[1], odom);
        rows.emplace_back(std::move(ca), std::move(oa), q);
    }
    Space cs, os;
    for (const auto& [id, d] : cdom) {
        cs.vars.push_back(id);
        cs.dom.push_back(d);
    }
    for (const auto& [id, d] : odom) {
        os.vars.push_back(id);
        os.dom.push_back(d);
    }
    Kernel k = make_kernel(cs, os);
    Space all = merge(cs, os);
    View v(k, all);
    if (rows.size() != k.p.size()) throw GraphError("kernel table is incomplete");
    for (const auto& [ca, oa, q] : rows) {
        std::vector<int> vals(all.vars.size());
        for (const auto& [id, x] : ca) vals[all.pos(id)] = x;
        for (const auto& [id, x] : oa) vals[all.pos(id)] = x;
        k.p[v(vals)] = q;
    }
    return k;
}

}  // namespace pagcid
