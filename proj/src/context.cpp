#include "abdutab/context.hpp"

#include <algorithm>
#include <sstream>

namespace abdutab {

namespace {

// Canonical entry order: (atom, polarity, time). Open times sort after
// resolved ones so keys stay stable under token renaming.
bool entry_less(const TimedAbducible& a, const TimedAbducible& b) {
    if (int c = a.atom.compare(b.atom)) return c < 0;
    if (a.positive != b.positive) return a.positive;
    if (a.at.resolved() != b.at.resolved()) return a.at.resolved();
    if (a.at.resolved()) return a.at.value < b.at.value;
    return a.at.var < b.at.var;
}

// Merges two times for the same signed assumption: earliest resolved time
// wins; an open time binds to its partner.
TimeVal merge_times(const TimeVal& a, const TimeVal& b,
                    std::vector<TimeBinding>* bindings) {
    if (a.resolved() && b.resolved())
        return TimeVal::at(std::min(a.value, b.value));
    if (a.resolved()) {
        if (bindings) bindings->push_back({b.var, a});
        return a;
    }
    if (b.resolved()) {
        if (bindings) bindings->push_back({a.var, b});
        return b;
    }
    if (a.var != b.var && bindings) bindings->push_back({b.var, a});
    return a;
}

}  // namespace

Context Context::canonical(std::vector<TimedAbducible> entries) {
    std::sort(entries.begin(), entries.end(), entry_less);
    std::vector<TimedAbducible> dedup;
    for (auto& e : entries) {
        if (!dedup.empty() && dedup.back().same_assumption(e) &&
            dedup.back().at == e.at)
            continue;
        dedup.push_back(std::move(e));
    }
    Context c;
    c.entries_ = std::move(dedup);
    return c;
}

std::optional<Context> Context::insert(const TimedAbducible& a,
                                       std::vector<TimeBinding>* bindings) const {
    std::vector<TimedAbducible> merged;
    merged.reserve(entries_.size() + 1);
    bool placed = false;
    for (const auto& e : entries_) {
        if (e.conflicts(a)) return std::nullopt;
        if (e.same_assumption(a) && !placed) {
            TimedAbducible m = e;
            m.at = merge_times(e.at, a.at, bindings);
            merged.push_back(m);
            placed = true;
        } else {
            merged.push_back(e);
        }
    }
    if (!placed) merged.push_back(a);
    return canonical(std::move(merged));
}

std::optional<Context> Context::produce(const Context& e,
                                        std::vector<TimeBinding>* bindings) const {
    Context out = *this;
    for (const auto& entry : e.entries_) {
        auto next = out.insert(entry, bindings);
        if (!next) return std::nullopt;
        out = std::move(*next);
    }
    return out;
}

bool Context::subsumes(const Context& o) const {
    for (const auto& oe : o.entries_) {
        bool found = false;
        for (const auto& e : entries_)
            if (e.same_assumption(oe)) {
                found = true;
                break;
            }
        if (!found) return false;
    }
    return true;
}

bool Context::operator==(const Context& o) const {
    if (entries_.size() != o.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& a = entries_[i];
        const auto& b = o.entries_[i];
        if (!a.same_assumption(b) || !(a.at == b.at)) return false;
    }
    return true;
}

Context Context::map_times(const std::vector<TimeBinding>& bindings) const {
    if (bindings.empty()) return *this;
    std::vector<TimedAbducible> out = entries_;
    for (auto& e : out) {
        int guard = 0;
        while (!e.at.resolved() && guard++ < 64) {
            bool hit = false;
            for (const auto& [tok, val] : bindings)
                if (tok == e.at.var) {
                    e.at = val;
                    hit = true;
                    break;
                }
            if (!hit) break;
        }
    }
    return canonical(std::move(out));
}

Context Context::resolve_open_to(int t) const {
    std::vector<TimedAbducible> out = entries_;
    for (auto& e : out)
        if (!e.at.resolved()) e.at = TimeVal::at(t);
    return canonical(std::move(out));
}

bool Context::has_open_times() const {
    for (const auto& e : entries_)
        if (!e.at.resolved()) return true;
    return false;
}

std::string Context::to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) os << ", ";
        os << entries_[i].to_string();
    }
    os << ']';
    return os.str();
}

}  // namespace abdutab
