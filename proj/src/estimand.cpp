#include "pagcid/estimand.hpp"

#include <cctype>
#include <sstream>

namespace pagcid {

namespace {

EstimandPtr make(Estimand::Kind k, NodeSet vars, std::vector<EstimandPtr> kids,
                 std::vector<NodeSet> order = {}) {
    auto e = std::make_shared<Estimand>();
    e->kind = k;
    e->vars = std::move(vars);
    e->kids = std::move(kids);
    e->order = std::move(order);
    return e;
}

NodeSet minus(NodeSet a, const NodeSet& b) {
    for (const auto& x : b) a.erase(x);
    return a;
}

std::string list(const NodeSet& s) {
    std::string out = "(";
    bool first = true;
    for (const auto& x : s) {
        if (!first) out += ' ';
        out += x;
        first = false;
    }
    return out + ")";
}

void write(const Estimand& e, std::string& out) {
    using K = Estimand::Kind;
    switch (e.kind) {
        case K::Base:
            out += "(Q " + list(e.vars) + ")";
            return;
        case K::Marg:
            out += "(marg " + list(e.vars) + " ";
            break;
        case K::Cond:
            out += "(cond " + list(e.vars) + " ";
            break;
        case K::Prod:
            out += "(prod ";
            break;
        case K::Comp:
            out += "(comp " + list(e.vars) + " ";
            break;
        case K::Box: {
            out += "(box (";
            for (std::size_t i = 0; i < e.order.size(); ++i) {
                if (i) out += ' ';
                out += list(e.order[i]);
            }
            out += ") ";
            break;
        }
    }
    for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += ' ';
        write(*e.kids[i], out);
    }
    out += ")";
}

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw GraphError("estimand parse error at " + std::to_string(pos) + ": " + what);
    }
    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool peek(char c) {
        skip();
        return pos < s.size() && s[pos] == c;
    }
    void expect(char c) {
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++pos;
    }
    std::string atom() {
        skip();
        std::size_t start = pos;
        while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '(' &&
               s[pos] != ')')
            ++pos;
        if (start == pos) fail("expected identifier");
        return s.substr(start, pos - start);
    }
    NodeSet set() {
        expect('(');
        NodeSet out;
        while (!peek(')')) out.insert(atom());
        expect(')');
        return out;
    }
    EstimandPtr expr() {
        expect('(');
        std::string head = atom();
        using K = Estimand::Kind;
        EstimandPtr out;
        if (head == "Q") {
            out = make(K::Base, set(), {});
        } else if (head == "marg" || head == "cond") {
            NodeSet v = set();
            EstimandPtr c = expr();
            out = head == "marg" ? Estimand::marg(c, v) : Estimand::cond(c, v);
        } else if (head == "comp") {
            NodeSet v = set();
            EstimandPtr l = expr();
            EstimandPtr r = expr();
            out = Estimand::comp(l, r, v);
        } else if (head == "prod") {
            std::vector<EstimandPtr> kids;
            while (!peek(')')) kids.push_back(expr());
            out = Estimand::prod(kids);
        } else if (head == "box") {
            expect('(');
            std::vector<NodeSet> order;
            while (!peek(')')) order.push_back(set());
            expect(')');
            EstimandPtr l = expr();
            EstimandPtr r = expr();
            out = Estimand::box(l, r, order);
        } else {
            fail("unknown operator '" + head + "'");
        }
        expect(')');
        return out;
    }
};

}  // namespace

EstimandPtr Estimand::base(NodeSet c) { return make(Kind::Base, std::move(c), {}); }

EstimandPtr Estimand::marg(EstimandPtr child, NodeSet over) {
    return make(Kind::Marg, std::move(over), {std::move(child)});
}

EstimandPtr Estimand::cond(EstimandPtr child, NodeSet on) {
    return make(Kind::Cond, std::move(on), {std::move(child)});
}

EstimandPtr Estimand::prod(std::vector<EstimandPtr> factors) {
    if (factors.empty()) throw GraphError("empty product");
    return make(Kind::Prod, {}, std::move(factors));
}

EstimandPtr Estimand::box(EstimandPtr left, EstimandPtr right, std::vector<NodeSet> order) {
    return make(Kind::Box, {}, {std::move(left), std::move(right)}, std::move(order));
}

EstimandPtr Estimand::comp(EstimandPtr left, EstimandPtr right, NodeSet over) {
    return make(Kind::Comp, std::move(over), {std::move(left), std::move(right)});
}

NodeSet Estimand::outputs() const {
    switch (kind) {
        case Kind::Base:
            return vars;
        case Kind::Marg:
        case Kind::Cond:
            return minus(kids[0]->outputs(), vars);
        case Kind::Comp: {
            NodeSet out = kids[0]->outputs();
            for (const auto& x : kids[1]->outputs()) out.insert(x);
            return minus(out, vars);
        }
        case Kind::Prod:
        case Kind::Box: {
            NodeSet out;
            for (const auto& k : kids)
                for (const auto& x : k->outputs()) out.insert(x);
            return out;
        }
    }
    return {};
}

std::string format_estimand(const Estimand& e) {
    std::string out;
    write(e, out);
    return out;
}

EstimandPtr parse_estimand(const std::string& text) {
    Parser p{text};
    EstimandPtr e = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    return e;
}

}  // namespace pagcid
