#include "abdutab/term.hpp"

#include <algorithm>
#include <sstream>

namespace abdutab {

namespace {
const std::string kNil = "[]";
const std::string kCons = "[|]";
}  // namespace

Term Term::atom(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Atom;
    n->name = std::move(name);
    return Term(std::move(n));
}

Term Term::var(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->name = std::move(name);
    return Term(std::move(n));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) return atom(std::move(functor));
    auto n = std::make_shared<Node>();
    n->kind = Kind::Compound;
    n->name = std::move(functor);
    n->args = std::move(args);
    return Term(std::move(n));
}

Term Term::list(const std::vector<Term>& items) {
    Term t = atom(kNil);
    for (auto it = items.rbegin(); it != items.rend(); ++it)
        t = compound(kCons, {*it, t});
    return t;
}

std::string Term::signature() const {
    return name() + "/" + std::to_string(arity());
}

bool Term::ground() const {
    switch (kind()) {
        case Kind::Atom: return true;
        case Kind::Var: return false;
        case Kind::Compound:
            return std::all_of(args().begin(), args().end(),
                               [](const Term& a) { return a.ground(); });
    }
    return false;
}

void Term::collect_vars(std::set<std::string>& out) const {
    if (is_var()) {
        out.insert(name());
        return;
    }
    for (const Term& a : args()) a.collect_vars(out);
}

bool Term::equals(const Term& other) const {
    if (node_ == other.node_) return true;
    if (kind() != other.kind() || name() != other.name() ||
        arity() != other.arity())
        return false;
    for (std::size_t i = 0; i < arity(); ++i)
        if (!args()[i].equals(other.args()[i])) return false;
    return true;
}

int Term::compare(const Term& other) const {
    if (kind() != other.kind())
        return static_cast<int>(kind()) < static_cast<int>(other.kind()) ? -1 : 1;
    if (int c = name().compare(other.name())) return c < 0 ? -1 : 1;
    if (arity() != other.arity()) return arity() < other.arity() ? -1 : 1;
    for (std::size_t i = 0; i < arity(); ++i)
        if (int c = args()[i].compare(other.args()[i])) return c;
    return 0;
}

bool Term::is_list() const {
    const Term* t = this;
    while (true) {
        if (t->is_atom() && t->name() == kNil) return true;
        if (t->is_compound() && t->name() == kCons && t->arity() == 2) {
            t = &t->args()[1];
            continue;
        }
        return false;
    }
}

std::vector<Term> Term::list_items() const {
    std::vector<Term> items;
    const Term* t = this;
    while (t->is_compound() && t->name() == kCons && t->arity() == 2) {
        items.push_back(t->args()[0]);
        t = &t->args()[1];
    }
    return items;
}

std::string Term::to_string() const {
    if (is_var()) return name();
    if (is_compound() && name() == "not" && arity() == 1)
        return "not " + args()[0].to_string();
    if (is_list()) {
        std::ostringstream os;
        os << '[';
        bool first = true;
        for (const Term& it : list_items()) {
            if (!first) os << ',';
            os << it.to_string();
            first = false;
        }
        os << ']';
        return os.str();
    }
    if (is_atom()) return name();
    std::ostringstream os;
    os << name() << '(';
    bool first = true;
    for (const Term& a : args()) {
        if (!first) os << ',';
        os << a.to_string();
        first = false;
    }
    os << ')';
    return os.str();
}

Term walk(const Term& t, const Subst& s) {
    Term cur = t;
    while (cur.is_var()) {
        auto it = s.find(cur.name());
        if (it == s.end()) return cur;
        cur = it->second;
    }
    return cur;
}

Term apply_subst(const Subst& s, const Term& t) {
    Term w = walk(t, s);
    if (!w.is_compound()) return w;
    std::vector<Term> args;
    args.reserve(w.arity());
    for (const Term& a : w.args()) args.push_back(apply_subst(s, a));
    return Term::compound(w.name(), std::move(args));
}

namespace {

bool occurs(const std::string& var, const Term& t, const Subst& s) {
    Term w = walk(t, s);
    if (w.is_var()) return w.name() == var;
    for (const Term& a : w.args())
        if (occurs(var, a, s)) return true;
    return false;
}

bool unify_into(const Term& a, const Term& b, Subst& s) {
    Term x = walk(a, s);
    Term y = walk(b, s);
    if (x.is_var() && y.is_var() && x.name() == y.name()) return true;
    if (x.is_var()) {
        if (occurs(x.name(), y, s)) return false;
        s.emplace(x.name(), y);
        return true;
    }
    if (y.is_var()) {
        if (occurs(y.name(), x, s)) return false;
        s.emplace(y.name(), x);
        return true;
    }
    if (x.kind() != y.kind() || x.name() != y.name() || x.arity() != y.arity())
        return false;
    for (std::size_t i = 0; i < x.arity(); ++i)
        if (!unify_into(x.args()[i], y.args()[i], s)) return false;
    return true;
}

}  // namespace

std::optional<Subst> unify(const Term& t1, const Term& t2, Subst s) {
    if (unify_into(t1, t2, s)) return s;
    return std::nullopt;
}

Term VarCounter::fresh(const std::string& hint) {
    return Term::var(fresh_name(hint));
}

std::string VarCounter::fresh_name(const std::string& hint) {
    return "_" + hint + std::to_string(next_++);
}

Term rename_term(const Term& t, VarCounter& counter,
                 std::map<std::string, Term>& mapping) {
    if (t.is_var()) {
        auto it = mapping.find(t.name());
        if (it == mapping.end())
            it = mapping.emplace(t.name(), counter.fresh()).first;
        return it->second;
    }
    if (t.is_atom()) return t;
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const Term& a : t.args()) args.push_back(rename_term(a, counter, mapping));
    return Term::compound(t.name(), std::move(args));
}

}  // namespace abdutab
