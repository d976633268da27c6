#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace abdutab {

// First-order terms. Source programs are flat (predicate args are atoms or
// variables); engine-internal terms (#r(Head,Body), timed abducibles a(T),
// body lists) use nested compounds freely.
class Term {
public:
    enum class Kind { Atom, Var, Compound };

    Term() : Term(atom("?")) {}

    static Term atom(std::string name);
    static Term var(std::string name);
    static Term compound(std::string functor, std::vector<Term> args);
    // Builds the [|]/[] chain for a body list; printed back as [a,b,c].
    static Term list(const std::vector<Term>& items);

    Kind kind() const { return node_->kind; }
    bool is_atom() const { return kind() == Kind::Atom; }
    bool is_var() const { return kind() == Kind::Var; }
    bool is_compound() const { return kind() == Kind::Compound; }

    const std::string& name() const { return node_->name; }
    const std::vector<Term>& args() const { return node_->args; }
    std::size_t arity() const { return node_->args.size(); }

    // name/arity signature, e.g. "p/2"; atoms are "p/0".
    std::string signature() const;

    bool ground() const;
    void collect_vars(std::set<std::string>& out) const;

    bool equals(const Term& other) const;
    bool operator==(const Term& other) const { return equals(other); }
    bool operator!=(const Term& other) const { return !equals(other); }

    // Total order for canonical structures (contexts, table keys).
    int compare(const Term& other) const;
    bool operator<(const Term& other) const { return compare(other) < 0; }

    // List-aware printing: atoms bare, vars bare, f(a,B), [x,y].
    std::string to_string() const;

    // True for the nil/cons encoding produced by list().
    bool is_list() const;
    std::vector<Term> list_items() const;

private:
    struct Node {
        Kind kind;
        std::string name;
        std::vector<Term> args;
    };
    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

using Subst = std::map<std::string, Term>;

// Resolves a variable through binding chains; returns the final term.
Term walk(const Term& t, const Subst& s);

// Applies s to t exhaustively (idempotent on the result).
Term apply_subst(const Subst& s, const Term& t);

// Most general unifier extending s, or nullopt. Occurs-check enabled.
std::optional<Subst> unify(const Term& t1, const Term& t2, Subst s);

// Fresh-variable supply for standardization apart.
class VarCounter {
public:
    Term fresh(const std::string& hint = "G");
    std::string fresh_name(const std::string& hint = "G");

private:
    std::uint64_t next_ = 0;
};

// Replaces every variable in t with a fresh one (consistently), recording
// the renaming in map.
Term rename_term(const Term& t, VarCounter& counter,
                 std::map<std::string, Term>& mapping);

}  // namespace abdutab
