#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "abdutab/term.hpp"

namespace abdutab {

struct Literal {
    bool positive = true;
    Term atom;

    bool operator==(const Literal& o) const {
        return positive == o.positive && atom == o.atom;
    }
    std::string to_string() const {
        return positive ? atom.to_string() : "not " + atom.to_string();
    }
};

// One source rule or fact. Facts have an empty body. Ids rN are assigned in
// textual order across the whole program, expectation rules included.
struct Rule {
    std::string id;
    Term head;
    std::vector<Literal> body;

    bool is_fact() const { return body.empty(); }
};

Rule rename_apart(const Rule& r, VarCounter& counter);

struct Program {
    std::vector<Rule> rules;  // all rules/facts, textual order
    std::set<std::pair<std::string, std::size_t>> abducibles;

    bool is_abducible(const Term& t) const {
        return abducibles.count({t.name(), t.arity()}) > 0;
    }
    bool is_expectation_head(const Term& t) const {
        return (t.name() == "expect" || t.name() == "expect_not") && t.arity() == 1;
    }
    std::vector<Rule> expectations() const {
        std::vector<Rule> out;
        for (const Rule& r : rules)
            if (is_expectation_head(r.head)) out.push_back(r);
        return out;
    }
    const Rule* rule_by_id(const std::string& id) const {
        for (const Rule& r : rules)
            if (r.id == id) return &r;
        return nullptr;
    }
};

// A pending assert of fluent F or its complement ~F at a timestamp. Rule
// toggles carry the rule id alongside the structural #r term.
struct UpdateRecord {
    int timestamp = 0;
    bool positive = true;               // assert(F) vs assert(~F)
    Term fluent;                        // source fluent atom, or #r(Head,Body)
    std::optional<std::string> rule_id; // set for rule-name targets
};

struct Query {
    Literal goal;
    int query_time = 1;
};

struct ScriptItem {
    std::variant<UpdateRecord, Query> item;
};

struct UpdateScript {
    std::optional<int> limit;
    std::vector<UpdateRecord> updates;  // non-decreasing timestamps
    std::vector<ScriptItem> items;      // updates and queries, script order
};

}  // namespace abdutab
