#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abdutab/parse.hpp"
#include "abdutab/program.hpp"

namespace abdutab {

// A signed fluent reference: the positive atom plus a polarity. Negative
// references are the dual/complement calls (not_p). Rule-name fluents carry
// their rule id (store keys and update targets address rules by id; the
// structural #r(Head,Body) term is the printed face).
struct SFluent {
    bool positive = true;
    Term atom;
    std::optional<std::string> rule_id;

    std::string pred_key() const { return atom.signature(); }
    std::string to_string() const {
        return positive ? atom.to_string() : "not_" + atom.to_string();
    }
};

SFluent complement(const SFluent& f);

// One goal of an augmented rule. Context threading is implicit and linear:
// the rule's input context feeds the first context-bearing goal, each feeds
// the next, the last one feeds the head's output context.
struct AugGoal {
    enum class Kind {
        Fluent,      // tabled, incremental: fluent(F, I, O, H)
        Direct,      // rule-backed direct call (consider, not_consider, p*i, inserts)
        ConsiderAb,  // tabled consider_ab(A, E, T); E is side-band, not chained
        ProduceE,    // O := produce(chain, E-from-ConsiderAb)
        Insert,      // chain := insert(signed abducible @ head time, chain)
        Latest,      // head H := latest over listed goals, with supervention
        VerifyPos,   // supervention check of listed goals up to head H
        VerifyLits,  // same semantics as VerifyPos
        Diseq        // structural non-unifiability check (ground call side)
    };
    Kind kind = Kind::Fluent;
    SFluent fluent;              // Kind::Fluent
    Term call;                   // Direct: head pattern; ConsiderAb/Insert: abducible
    bool positive = true;        // Insert polarity
    std::vector<int> goal_refs;  // Latest/Verify*: indices of checked goals
    Term lhs, rhs;               // Diseq

    bool threads_context() const {
        return kind == Kind::Fluent || kind == Kind::Direct ||
               kind == Kind::ProduceE || kind == Kind::Insert;
    }
    bool has_time() const {
        return kind == Kind::Fluent || kind == Kind::Direct ||
               kind == Kind::ConsiderAb;
    }
};

struct AugRule {
    enum class HeadTime { FromLatest, FromGoal, Open };

    Term head;  // source-argument pattern (q, expect(A), consider(a), q*1)
    std::vector<AugGoal> body;
    HeadTime head_time = HeadTime::Open;
    int head_time_goal = -1;
    std::string rule_id;  // source rule id for positive rules, else ""

    std::string pred_key() const { return head.signature(); }
};

struct AbducibleSig {
    std::string name;
    std::size_t arity = 0;

    // The pattern term a or m(X1..Xk).
    Term pattern() const;
};

// Dual rules of one predicate: the not_p ruleset (fluent space) plus the
// p*i helper predicates (direct-call space), in clause order.
struct DualRules {
    std::vector<AugRule> negative_rules;
    std::vector<std::pair<std::string, std::vector<AugRule>>> star_rules;
    std::size_t clause_count() const;
};

struct CompiledProgram {
    Program source;
    Program preprocessed;  // abducibles replaced by consider(A)

    // Positive transforms of source rules, keyed by head signature.
    std::map<std::string, std::vector<AugRule>> fluent_rules;
    // consider/not_consider/consider*1 and abducible insertion rules,
    // keyed by head signature.
    std::map<std::string, std::vector<AugRule>> aux_rules;
    // All facts hold from the initial time 1 (source facts + rule names).
    std::vector<SFluent> initial_facts;
    std::vector<AbducibleSig> abducibles;
    std::map<std::string, Term> rule_name_terms;  // rule id -> #r(Head,Body)

    bool has_fluent_definition(const std::string& pred_key) const;
    bool is_abducible_pred(const Term& t) const;
    // Footnote-2 eligibility: a fluent with no rules, no facts, and outside
    // the expect/expect_not/#r/abducible machinery answers undefined at 1.
    bool undefined_convention(const Term& positive_atom) const;
};

// Body occurrences of abducibles become consider(A) / not consider(A).
Program preprocess_abducibles(const Program& p);

// Full compilation: preprocess, name rules, augment, emit machinery and
// initial facts. Deterministic.
CompiledProgram compile(const Program& p);

// Lazy dual construction for one predicate ("q/0", "expect/1", "#r/2").
DualRules generate_duals(const CompiledProgram& cp, const std::string& pred_key);

// Source-like pretty print of the whole transform, duals included
// (--dump-transform; golden-tested).
std::string dump_transform(const CompiledProgram& cp);

std::string print_aug_rule(const AugRule& r);

}  // namespace abdutab
