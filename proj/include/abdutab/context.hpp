#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abdutab/term.hpp"

namespace abdutab {

// A holds-time: resolved natural (>= 1) or an open time variable awaiting
// resolution. Open times never raise a `latest` maximum and materialize as
// the initial time 1 when an answer is recorded.
struct TimeVal {
    int value = 0;  // > 0 when resolved
    int var = 0;    // token id when unresolved

    static TimeVal at(int t) { return {t, 0}; }
    static TimeVal open(int token) { return {0, token}; }
    bool resolved() const { return value > 0; }

    bool operator==(const TimeVal& o) const {
        return value == o.value && var == o.var;
    }
    std::string to_string() const {
        return resolved() ? std::to_string(value) : "T" + std::to_string(var);
    }
};

// Bindings produced when contexts merge entries with open times.
using TimeBinding = std::pair<int, TimeVal>;  // token := value-or-token

struct TimedAbducible {
    bool positive = true;
    Term atom;  // ground abducible instance
    TimeVal at;

    bool same_assumption(const TimedAbducible& o) const {
        return positive == o.positive && atom == o.atom;
    }
    bool conflicts(const TimedAbducible& o) const {
        return positive != o.positive && atom == o.atom;
    }
    std::string to_string() const {
        std::string s = positive ? "" : "not ";
        return s + atom.to_string() + "@" + at.to_string();
    }
};

// Consistent, canonically ordered set of timed abducibles (the paper's
// I, O, R, E). Immutable value; all operations pure.
class Context {
public:
    Context() = default;

    static Context canonical(std::vector<TimedAbducible> entries);

    const std::vector<TimedAbducible>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    // O = canonical(this ∪ {a}) if consistent. Idempotent when a is present;
    // same-signed entries at different times merge to the earliest (open
    // times bind to the resolved side, recorded in bindings).
    std::optional<Context> insert(const TimedAbducible& a,
                                  std::vector<TimeBinding>* bindings = nullptr) const;

    // O = canonical(this ∪ e) if consistent; O ⊇ this and O ⊇ e.
    std::optional<Context> produce(const Context& e,
                                   std::vector<TimeBinding>* bindings = nullptr) const;

    // True iff o's entries ⊆ this's entries (atom and polarity; a resolved
    // and an open time for the same assumption are compatible).
    bool subsumes(const Context& o) const;

    bool operator==(const Context& o) const;

    // Rewrites open-time tokens through a mapping (resolution / renaming).
    Context map_times(const std::vector<TimeBinding>& bindings) const;
    Context resolve_open_to(int t) const;
    bool has_open_times() const;

    // Textual form "[a@1, not b@2]".
    std::string to_string() const;

private:
    std::vector<TimedAbducible> entries_;
};

}  // namespace abdutab
