#include "abdutab/engine.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace abdutab {

std::string to_string(TruthValue v) {
    switch (v) {
        case TruthValue::True: return "true";
        case TruthValue::Undefined: return "undefined";
        case TruthValue::False: return "false";
    }
    return "?";
}

std::string Stats::to_string() const {
    std::ostringstream os;
    os << "table_hits=" << table_hits << '\n'
       << "table_misses=" << table_misses << '\n'
       << "tables_invalidated=" << tables_invalidated << '\n'
       << "rule_body_reevaluations=" << rule_body_reevaluations << '\n'
       << "dual_rules_generated=" << dual_rules_generated << '\n';
    return os.str();
}

void FluentStore::add(const std::string& bucket, const Term& t, int time) {
    auto& v = data_[bucket];
    for (const auto& [term, tm] : v)
        if (tm == time && term == t) return;
    v.push_back({t, time});
}

const std::vector<std::pair<Term, int>>& FluentStore::entries(
    const std::string& bucket) const {
    static const std::vector<std::pair<Term, int>> kEmpty;
    auto it = data_.find(bucket);
    return it == data_.end() ? kEmpty : it->second;
}

namespace {

struct DepthGuard {
    int& d;
    int max;
    DepthGuard(int& depth, int maximum) : d(depth), max(maximum) {
        if (++d > max) {
            --d;
            throw EngineError("depth budget exceeded");
        }
    }
    ~DepthGuard() { --d; }
};

AugRule rename_aug_rule(const AugRule& r, VarCounter& vc) {
    std::map<std::string, Term> m;
    AugRule out = r;
    out.head = rename_term(r.head, vc, m);
    for (AugGoal& g : out.body) {
        if (g.kind == AugGoal::Kind::Fluent)
            g.fluent.atom = rename_term(g.fluent.atom, vc, m);
        if (!g.call.is_var() || true) g.call = rename_term(g.call, vc, m);
        g.lhs = rename_term(g.lhs, vc, m);
        g.rhs = rename_term(g.rhs, vc, m);
    }
    return out;
}

Term normalize_term(const Term& t, std::map<std::string, Term>& m, int& seq) {
    if (t.is_var()) {
        auto it = m.find(t.name());
        if (it == m.end())
            it = m.emplace(t.name(), Term::var("V" + std::to_string(seq++))).first;
        return it->second;
    }
    if (t.is_atom()) return t;
    std::vector<Term> args;
    for (const Term& a : t.args()) args.push_back(normalize_term(a, m, seq));
    return Term::compound(t.name(), std::move(args));
}

}  // namespace

std::string Engine::bucket_of(const SFluent& f) {
    std::string s = f.positive ? "+" : "-";
    if (f.rule_id) return s + "#r:" + *f.rule_id;
    return s + f.atom.signature();
}

Engine::Engine(CompiledProgram cp, int limit)
    : cp_(std::move(cp)), limit_(limit) {
    if (limit_ < 1) throw InputError("limit must be >= 1");
    aux_ = cp_.aux_rules;
    for (const SFluent& f : cp_.initial_facts)
        store_.add(bucket_of(f), f.atom, 1);
}

void Engine::set_trace(std::function<void(const std::string&)> sink) {
    trace_ = std::move(sink);
}

void Engine::trace(const std::string& line) const {
    if (trace_) trace_(line);
}

// ---------------------------------------------------------------------------
// Time and context helpers

Engine::Flow dummy_flow;

TimeVal Engine::chase(TimeVal tv, const std::map<int, TimeVal>& tbind) const {
    int guard = 0;
    while (!tv.resolved() && guard++ < 1024) {
        auto it = tbind.find(tv.var);
        if (it == tbind.end()) break;
        tv = it->second;
    }
    return tv;
}

int Engine::resolve_or_one(const TimeVal& tv,
                           const std::map<int, TimeVal>& tbind) const {
    TimeVal t = chase(tv, tbind);
    return t.resolved() ? t.value : 1;
}

Context Engine::resolve_ctx(const Context& c,
                            const std::map<int, TimeVal>& tbind) const {
    std::vector<TimedAbducible> out = c.entries();
    for (auto& e : out) e.at = chase(e.at, tbind);
    return Context::canonical(std::move(out));
}

// Key tokens (from the canonical call's input context) survive into answers;
// local tokens left open resolve to the initial time 1.
Context Engine::finalize_ctx(const Context& ctx,
                             const std::map<int, TimeVal>& tbind,
                             std::vector<TimeBinding>* key_binds) const {
    std::vector<TimedAbducible> out = ctx.entries();
    for (auto& e : out) {
        e.at = chase(e.at, tbind);
        if (!e.at.resolved() && e.at.var > 0) e.at = TimeVal::at(1);
    }
    if (key_binds) {
        for (const auto& [tok, val] : tbind) {
            if (tok >= 0) continue;
            TimeVal t = chase(TimeVal::open(tok), tbind);
            if (t.resolved())
                key_binds->push_back({tok, t});
            else if (t.var != tok && t.var < 0)
                key_binds->push_back({tok, t});
        }
    }
    return Context::canonical(std::move(out));
}

bool Engine::same_assumptions(const Context& a, const Context& b) {
    return a.subsumes(b) && b.subsumes(a);
}

// ---------------------------------------------------------------------------
// Store and dependencies

const std::vector<std::pair<Term, int>>& Engine::store_lookup(const SFluent& f) {
    std::string bucket = bucket_of(f);
    if (!stack_.empty()) stack_.back()->fluent_deps.insert(bucket);
    return store_.entries(bucket);
}

void Engine::invalidate_for(const std::string& bucket) {
    std::set<std::string> dirty;
    for (auto& [key, t] : tables_)
        if (t.state == Table::State::Valid && t.fluent_deps.count(bucket))
            dirty.insert(key);
    bool grew = true;
    while (grew) {
        grew = false;
        for (auto& [key, t] : tables_) {
            if (t.state != Table::State::Valid || dirty.count(key)) continue;
            for (const auto& dep : t.table_deps)
                if (dirty.count(dep)) {
                    dirty.insert(key);
                    grew = true;
                    break;
                }
        }
    }
    for (const auto& key : dirty) {
        tables_[key].state = Table::State::Invalid;
        ++stats_.tables_invalidated;
        trace("invalidate " + key + " by " + bucket);
    }
}

// ---------------------------------------------------------------------------
// Updates

void Engine::register_update(const UpdateRecord& u) {
    if (u.timestamp < 2 || u.timestamp > limit_)
        throw InputError("update timestamp " + std::to_string(u.timestamp) +
                         " out of range [2, " + std::to_string(limit_) + "]");
    UpdateRecord r = u;
    if (u.rule_id) {
        auto it = cp_.rule_name_terms.find(*u.rule_id);
        if (it == cp_.rule_name_terms.end())
            throw InputError("unknown rule id '" + *u.rule_id + "'");
        r.fluent = it->second;
    } else if (!u.fluent.ground()) {
        throw InputError("update target must be ground");
    }
    pending_.push_back({r, false});
}

void Engine::activate_pending(int qt) {
    if (!stack_.empty()) throw EngineError("activation during table evaluation");
    for (auto& [u, consumed] : pending_) {
        if (consumed || u.timestamp > qt) continue;
        SFluent f{u.positive, u.fluent, u.rule_id};
        std::string bucket = bucket_of(f);
        store_.add(bucket, u.fluent, u.timestamp);
        trace("activate " + (u.positive ? std::string() : std::string("~")) +
              u.fluent.to_string() + "@" + std::to_string(u.timestamp));
        invalidate_for(bucket);
        consumed = true;
    }
    watermark_ = std::max(watermark_, qt);
}

std::size_t Engine::pending_count() const {
    std::size_t n = 0;
    for (const auto& [u, consumed] : pending_)
        if (!consumed) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Tabling

Engine::CanonCall Engine::canonicalize(const SFluent& f, const Context& in) const {
    CanonCall cc;
    std::map<std::string, Term> vm;
    int seq = 0;
    cc.target = {f.positive, normalize_term(f.atom, vm, seq), f.rule_id};
    std::vector<TimedAbducible> entries = in.entries();
    int tok = 0;
    std::map<int, int> fwd;  // caller token -> canonical token
    for (auto& e : entries) {
        if (!e.at.resolved()) {
            auto it = fwd.find(e.at.var);
            if (it == fwd.end()) {
                int c = -(++tok);
                fwd.emplace(e.at.var, c);
                cc.token_to_caller.emplace(c, e.at.var);
                e.at = TimeVal::open(c);
            } else {
                e.at = TimeVal::open(it->second);
            }
        }
    }
    cc.in = Context::canonical(std::move(entries));
    cc.key = "fluent " + cc.target.to_string() + " | " + cc.in.to_string();
    return cc;
}

Engine::Table& Engine::ensure(const CanonCall& cc) {
    auto [it, created] = tables_.try_emplace(cc.key);
    Table& t = it->second;
    if (created) {
        t.call = cc.target;
        t.in = cc.in;
    }
    evaluate_table(cc.key, t);
    if (!stack_.empty()) stack_.back()->table_deps.insert(cc.key);
    return t;
}

Engine::Table& Engine::ensure_consider_ab(const Term& a) {
    if (!a.ground()) throw EngineError("consider on non-ground abducible " + a.to_string());
    if (!cp_.is_abducible_pred(a))
        throw EngineError("consider on undeclared abducible " + a.to_string());
    std::string key = "consider_ab " + a.to_string();
    auto [it, created] = tables_.try_emplace(key);
    Table& t = it->second;
    if (created) {
        t.consider_ab = true;
        t.call = {true, a, std::nullopt};
    }
    evaluate_table(key, t);
    if (!stack_.empty()) stack_.back()->table_deps.insert(key);
    return t;
}

void Engine::evaluate_table(const std::string& key, Table& t) {
    switch (t.state) {
        case Table::State::Valid:
            ++stats_.table_hits;
            trace("hit " + key);
            return;
        case Table::State::InProgress:
        case Table::State::Provisional:
            if (!stack_.empty()) stack_.back()->used_incomplete = true;
            trace("cycle " + key);
            return;
        case Table::State::Fresh:
        case Table::State::Invalid: {
            ++stats_.table_misses;
            trace("miss " + key);
            bool root = stack_.empty();
            produce(key, t, /*clear=*/true);
            t.state = t.used_incomplete ? Table::State::Provisional
                                        : Table::State::Valid;
            if (root) fixpoint_episode(t);
            return;
        }
    }
}

void Engine::fixpoint_episode(Table& root) {
    for (int pass = 0;; ++pass) {
        if (pass > 64) throw EngineError("table fixpoint did not stabilize");
        std::vector<std::pair<const std::string*, Table*>> provisional;
        for (auto& [key, t] : tables_)
            if (t.state == Table::State::Provisional)
                provisional.push_back({&key, &t});
        if (provisional.empty()) break;
        long before = answers_total_;
        for (auto& [key, t] : provisional) {
            produce(*key, *t, /*clear=*/false);
            t->state = t->used_incomplete ? Table::State::Provisional
                                          : Table::State::Valid;
        }
        if (answers_total_ == before) {
            for (auto& [key, t] : provisional) t->state = Table::State::Valid;
            if (root.state == Table::State::Provisional)
                root.state = Table::State::Valid;
            break;
        }
    }
    if (root.state == Table::State::Provisional) root.state = Table::State::Valid;
}

void Engine::produce(const std::string& key, Table& t, bool clear) {
    if (clear) {
        answers_total_ -= static_cast<long>(t.answers.size());
        t.answers.clear();
        t.fluent_deps.clear();
        t.table_deps.clear();
    }
    t.used_incomplete = false;
    t.state = Table::State::InProgress;
    ++t.eval_count;
    ++stats_.rule_body_reevaluations;
    stack_.push_back(&t);
    try {
        if (t.consider_ab)
            produce_consider_ab(t);
        else
            produce_fluent(t);
    } catch (...) {
        stack_.pop_back();
        t.state = Table::State::Invalid;
        throw;
    }
    stack_.pop_back();
}

void Engine::record_answer(Table& t, Term inst, const Context& out, int h,
                           bool undef, std::vector<TimeBinding> binds) {
    if (h > limit_) return;  // boundedness: no answer carries H > Lim
    std::map<std::string, Term> m;
    int seq = 0;
    Term norm = normalize_term(inst, m, seq);
    std::sort(binds.begin(), binds.end(),
              [](const TimeBinding& a, const TimeBinding& b) {
                  return a.first < b.first;
              });
    for (auto& a : t.answers) {
        if (a.holds_at != h || !(a.out == out) || !(a.inst == norm)) continue;
        if (a.undef && !undef) a.undef = false;  // true dominates undefined
        return;
    }
    t.answers.push_back({norm, out, h, undef, std::move(binds)});
    ++answers_total_;
}

void Engine::produce_fluent(Table& t) {
    const SFluent& f = t.call;
    // stored facts relay any input context
    for (const auto& [term, time] : store_lookup(f)) {
        if (time > limit_) continue;
        std::map<std::string, Term> m;
        Term fact = rename_term(term, vars_, m);
        Subst s;
        if (auto u = unify(f.atom, fact, s))
            record_answer(t, apply_subst(*u, f.atom), t.in, time, false, {});
    }
    // program rules (positive) or dual rules (negative)
    const std::vector<AugRule>* rules = nullptr;
    if (f.positive) {
        auto it = cp_.fluent_rules.find(f.pred_key());
        if (it != cp_.fluent_rules.end()) rules = &it->second;
    } else {
        rules = &dual_rules_for(f.pred_key());
    }
    if (rules) {
        for (const AugRule& r : *rules) {
            Flow flow;
            flow.ctx = t.in;
            eval_rules({r}, f.atom, flow, [&](Flow& fl, const TimeVal& ht) {
                int h = resolve_or_one(ht, fl.tbind);
                std::vector<TimeBinding> binds;
                Context out = finalize_ctx(fl.ctx, fl.tbind, &binds);
                record_answer(t, apply_subst(fl.subst, f.atom), out, h, fl.undef,
                              std::move(binds));
            });
        }
    }
    // footnote-2 convention: never-defined fluents answer undefined at 1
    if (f.positive && cp_.undefined_convention(f.atom))
        record_answer(t, f.atom, t.in, 1, true, {});
}

void Engine::produce_consider_ab(Table& t) {
    const Term& a = t.call.atom;
    int seed = next_token_++;
    Flow flow;
    flow.ctx = Context::canonical({{true, a, TimeVal::open(seed)}});
    SFluent expect_a{true, Term::compound("expect", {a}), std::nullopt};
    SFluent not_expect_not_a{false, Term::compound("expect_not", {a}), std::nullopt};
    consume_fluent(expect_a, flow, [&](Flow& f1, int h1, bool) {
        consume_fluent(not_expect_not_a, f1, [&](Flow& f2, int h2, bool) {
            int tm = std::max(h1, h2);
            Flow f3 = f2;
            f3.tbind[seed] = TimeVal::at(tm);
            Context world = resolve_ctx(f3.ctx, f3.tbind);
            if (supervened(expect_a, h1, tm, world)) return;
            if (supervened(not_expect_not_a, h2, tm, world)) return;
            std::vector<TimeBinding> binds;
            Context e = finalize_ctx(f3.ctx, f3.tbind, &binds);
            record_answer(t, a, e, tm, f3.undef, std::move(binds));
        });
    });
}

// ---------------------------------------------------------------------------
// Goal evaluation

void Engine::consume_fluent(const SFluent& target, const Flow& flow,
                            const FluentCb& cb) {
    DepthGuard guard(depth_, max_depth_);
    SFluent inst{target.positive, apply_subst(flow.subst, target.atom),
                 target.rule_id};
    Context in = resolve_ctx(flow.ctx, flow.tbind);
    CanonCall cc = canonicalize(inst, in);
    Table& t = ensure(cc);
    std::size_t n = t.answers.size();
    for (std::size_t i = 0; i < n; ++i) {
        Answer a = t.answers[i];
        Flow f2 = flow;
        std::map<std::string, Term> m;
        Term ai = rename_term(a.inst, vars_, m);
        auto u = unify(inst.atom, ai, f2.subst);
        if (!u) continue;
        f2.subst = std::move(*u);
        for (const auto& [tok, val] : a.binds) {
            auto it = cc.token_to_caller.find(tok);
            if (it == cc.token_to_caller.end()) continue;
            TimeVal v = val;
            if (!v.resolved() && v.var < 0) {
                auto vt = cc.token_to_caller.find(v.var);
                if (vt == cc.token_to_caller.end()) continue;
                v = TimeVal::open(vt->second);
            }
            f2.tbind[it->second] = v;
        }
        std::vector<TimedAbducible> entries = a.out.entries();
        for (auto& e : entries) {
            if (!e.at.resolved() && e.at.var < 0) {
                auto it = cc.token_to_caller.find(e.at.var);
                e.at = it != cc.token_to_caller.end() ? TimeVal::open(it->second)
                                                      : TimeVal::at(1);
            }
        }
        f2.ctx = Context::canonical(std::move(entries));
        f2.undef = flow.undef || a.undef;
        cb(f2, a.holds_at, a.undef);
    }
}

void Engine::eval_rules(const std::vector<AugRule>& rules, const Term& call,
                        const Flow& flow, const RuleDone& done) {
    DepthGuard guard(depth_, max_depth_);
    for (const AugRule& r : rules) {
        AugRule rr = rename_aug_rule(r, vars_);
        Flow f = flow;
        auto u = unify(call, rr.head, f.subst);
        if (!u) continue;
        f.subst = std::move(*u);
        Frame frame;
        frame.times.assign(rr.body.size(), TimeVal{});
        if (rr.head_time == AugRule::HeadTime::Open)
            frame.head_time = TimeVal::open(next_token_++);
        eval_goals(rr, 0, std::move(f), std::move(frame), done);
    }
}

void Engine::eval_goals(const AugRule& r, std::size_t idx, Flow flow, Frame frame,
                        const RuleDone& done) {
    if (idx == r.body.size()) {
        TimeVal ht = frame.head_time;
        if (r.head_time == AugRule::HeadTime::FromGoal)
            ht = frame.times[r.head_time_goal];
        done(flow, ht);
        return;
    }
    const AugGoal& g = r.body[idx];
    switch (g.kind) {
        case AugGoal::Kind::Fluent: {
            consume_fluent(g.fluent, flow, [&](Flow& f2, int h, bool) {
                Frame fr = frame;
                fr.times[idx] = TimeVal::at(h);
                eval_goals(r, idx + 1, f2, std::move(fr), done);
            });
            return;
        }
        case AugGoal::Kind::Direct: {
            Term call = apply_subst(flow.subst, g.call);
            auto it = aux_.find(call.signature());
            if (it == aux_.end()) return;
            eval_rules(it->second, call, flow, [&](Flow& f2, const TimeVal& ht) {
                Frame fr = frame;
                fr.times[idx] = chase(ht, f2.tbind);
                eval_goals(r, idx + 1, f2, std::move(fr), done);
            });
            return;
        }
        case AugGoal::Kind::ConsiderAb: {
            Term a = apply_subst(flow.subst, g.call);
            Table& t = ensure_consider_ab(a);
            std::size_t n = t.answers.size();
            for (std::size_t i = 0; i < n; ++i) {
                const Answer& ans = t.answers[i];
                Flow f2 = flow;
                f2.undef = flow.undef || ans.undef;
                Frame fr = frame;
                fr.times[idx] = TimeVal::at(ans.holds_at);
                fr.e_ctx = ans.out;
                fr.has_e = true;
                eval_goals(r, idx + 1, std::move(f2), std::move(fr), done);
            }
            return;
        }
        case AugGoal::Kind::ProduceE: {
            assert(frame.has_e);
            std::vector<TimeBinding> binds;
            Context in = resolve_ctx(flow.ctx, flow.tbind);
            auto out = in.produce(frame.e_ctx, &binds);
            if (!out) return;
            for (const auto& [tok, val] : binds) flow.tbind[tok] = val;
            flow.ctx = *out;
            eval_goals(r, idx + 1, std::move(flow), std::move(frame), done);
            return;
        }
        case AugGoal::Kind::Insert: {
            Term a = apply_subst(flow.subst, g.call);
            if (!a.ground())
                throw EngineError("abducible insertion on non-ground " +
                                  a.to_string());
            if (!cp_.is_abducible_pred(a))
                throw EngineError("insert on undeclared abducible " + a.to_string());
            TimedAbducible e{g.positive, a, chase(frame.head_time, flow.tbind)};
            std::vector<TimeBinding> binds;
            Context in = resolve_ctx(flow.ctx, flow.tbind);
            auto out = in.insert(e, &binds);
            if (!out) return;
            for (const auto& [tok, val] : binds) flow.tbind[tok] = val;
            flow.ctx = *out;
            eval_goals(r, idx + 1, std::move(flow), std::move(frame), done);
            return;
        }
        case AugGoal::Kind::Latest: {
            int h = 0;
            bool any = false;
            for (int ref : g.goal_refs) {
                TimeVal tv = chase(frame.times[ref], flow.tbind);
                if (tv.resolved()) {
                    h = std::max(h, tv.value);
                    any = true;
                }
            }
            if (!any) {
                frame.head_time = TimeVal::open(next_token_++);
                eval_goals(r, idx + 1, std::move(flow), std::move(frame), done);
                return;
            }
            Context world = resolve_ctx(flow.ctx, flow.tbind);
            for (int ref : g.goal_refs) {
                const AugGoal& gg = r.body[ref];
                if (gg.kind != AugGoal::Kind::Fluent) continue;
                TimeVal tv = chase(frame.times[ref], flow.tbind);
                int gi = tv.resolved() ? tv.value : 1;
                SFluent fi{gg.fluent.positive,
                           apply_subst(flow.subst, gg.fluent.atom),
                           gg.fluent.rule_id};
                if (supervened(fi, gi, h, world)) return;
            }
            frame.head_time = TimeVal::at(h);
            eval_goals(r, idx + 1, std::move(flow), std::move(frame), done);
            return;
        }
        case AugGoal::Kind::VerifyPos:
        case AugGoal::Kind::VerifyLits: {
            TimeVal ht = frame.head_time;
            if (r.head_time == AugRule::HeadTime::FromGoal)
                ht = frame.times[r.head_time_goal];
            ht = chase(ht, flow.tbind);
            int h = ht.resolved() ? ht.value : 1;
            Context world = resolve_ctx(flow.ctx, flow.tbind);
            for (int ref : g.goal_refs) {
                const AugGoal& gg = r.body[ref];
                if (gg.kind != AugGoal::Kind::Fluent) continue;
                TimeVal tv = chase(frame.times[ref], flow.tbind);
                int gi = tv.resolved() ? tv.value : 1;
                SFluent fi{gg.fluent.positive,
                           apply_subst(flow.subst, gg.fluent.atom),
                           gg.fluent.rule_id};
                if (supervened(fi, gi, h, world)) return;
            }
            eval_goals(r, idx + 1, std::move(flow), std::move(frame), done);
            return;
        }
        case AugGoal::Kind::Diseq: {
            Term l = apply_subst(flow.subst, g.lhs);
            if (!l.ground())
                throw EngineError(
                    "disequality on insufficiently instantiated term " +
                    l.to_string());
            Term rr = apply_subst(flow.subst, g.rhs);
            if (unify(l, rr, flow.subst)) return;  // unifiable: mismatch fails
            eval_goals(r, idx + 1, std::move(flow), std::move(frame), done);
            return;
        }
    }
}

// True iff the complement of f holds at some t in (lo, hi] within world:
// stored complement facts, or a derivation via the duals that needs no
// assumption beyond world.
bool Engine::supervened(const SFluent& f, int lo, int hi, const Context& world) {
    if (hi <= lo) return false;
    SFluent c = complement(f);
    for (const auto& [term, time] : store_lookup(c)) {
        if (time <= lo || time > hi) continue;
        std::map<std::string, Term> m;
        Term fact = rename_term(term, vars_, m);
        Subst s;
        if (unify(f.atom, fact, s)) return true;
    }
    CanonCall cc = canonicalize(c, world);
    Table& t = ensure(cc);
    std::size_t n = t.answers.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Answer& a = t.answers[i];
        if (a.holds_at <= lo || a.holds_at > hi) continue;
        Subst s;
        std::map<std::string, Term> m;
        if (!unify(c.atom, rename_term(a.inst, vars_, m), s)) continue;
        Context out = a.out.resolve_open_to(1);
        if (same_assumptions(out, cc.in)) return true;
    }
    return false;
}

const std::vector<AugRule>& Engine::dual_rules_for(const std::string& pred_key) {
    auto it = dual_memo_.find(pred_key);
    if (it != dual_memo_.end()) return it->second;
    DualRules d = generate_duals(cp_, pred_key);
    stats_.dual_rules_generated += static_cast<long>(d.clause_count());
    trace("duals " + pred_key + " (" + std::to_string(d.clause_count()) +
          " clauses)");
    for (auto& [star, rules] : d.star_rules) {
        auto& slot = aux_[star];
        for (AugRule& r : rules) slot.push_back(std::move(r));
    }
    return dual_memo_.emplace(pred_key, std::move(d.negative_rules)).first->second;
}

// ---------------------------------------------------------------------------
// Reserved predicates and the top goal

Term Engine::extend(const Term& f, const std::vector<Term>& args) {
    if (args.empty()) return f;
    std::vector<Term> all(f.is_compound() ? f.args() : std::vector<Term>{});
    all.insert(all.end(), args.begin(), args.end());
    return Term::compound(f.name(), std::move(all));
}

Term Engine::timed(const Term& abducible, const std::string& time_var) const {
    if (!cp_.is_abducible_pred(abducible))
        throw EngineError("timed on non-abducible " + abducible.to_string());
    return extend(abducible, {Term::var(time_var)});
}

std::optional<TruthValue> Engine::verify_holds(int h, TruthValue v, int hc,
                                               TruthValue vc) {
    if (vc == TruthValue::False) return v;
    if (h < hc) return std::nullopt;
    if (h > hc) return v;
    return TruthValue::Undefined;  // equal-time conflict
}

std::vector<Candidate> Engine::compute(const SFluent& g, const Context& in,
                                       int qt) {
    CanonCall cc = canonicalize(g, in);
    Table& t = ensure(cc);
    std::map<std::string, Candidate> best;
    std::size_t n = t.answers.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Answer& a = t.answers[i];
        if (a.holds_at > qt) continue;
        Context out = a.out.resolve_open_to(1);
        std::string key = out.to_string();
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, Candidate{out, a.holds_at, a.undef});
        } else if (a.holds_at > it->second.holds_at ||
                   (a.holds_at == it->second.holds_at && it->second.undef &&
                    !a.undef)) {
            it->second = Candidate{out, a.holds_at, a.undef};
        }
    }
    std::vector<Candidate> out;
    for (auto& [key, c] : best) out.push_back(std::move(c));
    return out;
}

std::vector<HoldsAnswer> Engine::holds(const Literal& goal, const Context& in,
                                       int qt) {
    if (qt < 1 || qt > limit_)
        throw InputError("query time " + std::to_string(qt) +
                         " out of range [1, " + std::to_string(limit_) + "]");
    if (!goal.atom.ground())
        throw InputError("query goal must be ground: " + goal.atom.to_string());
    activate_pending(qt);

    SFluent g{goal.positive, goal.atom, std::nullopt};
    SFluent gc = complement(g);
    std::vector<HoldsAnswer> answers;
    for (const Candidate& cand : compute(g, in, qt)) {
        int hc = 0;
        TruthValue vc = TruthValue::False;
        for (const Candidate& c : compute(gc, cand.out, qt)) {
            if (!same_assumptions(c.out, cand.out)) continue;
            if (c.holds_at > hc || (c.holds_at == hc && vc == TruthValue::False)) {
                hc = c.holds_at;
                vc = c.undef ? TruthValue::Undefined : TruthValue::True;
            }
        }
        TruthValue v = cand.undef ? TruthValue::Undefined : TruthValue::True;
        auto verdict = verify_holds(cand.holds_at, v, hc, vc);
        if (!verdict || *verdict == TruthValue::False) continue;
        answers.push_back({cand.out, *verdict, cand.holds_at});
    }
    std::sort(answers.begin(), answers.end(),
              [](const HoldsAnswer& a, const HoldsAnswer& b) {
                  if (a.value != b.value)
                      return static_cast<int>(a.value) < static_cast<int>(b.value);
                  return a.out.to_string() < b.out.to_string();
              });
    answers.erase(std::unique(answers.begin(), answers.end(),
                              [](const HoldsAnswer& a, const HoldsAnswer& b) {
                                  return a.value == b.value && a.out == b.out &&
                                         a.holds_at == b.holds_at;
                              }),
                  answers.end());
    return answers;
}

// ---------------------------------------------------------------------------
// Observability

Engine::TableView Engine::fluent_answers(const SFluent& f, const Context& in) {
    CanonCall cc = canonicalize(f, in);
    Table& t = ensure(cc);
    TableView v;
    v.key = cc.key;
    for (const Answer& a : t.answers)
        v.answers.push_back({a.inst, a.out, a.holds_at, a.undef});
    return v;
}

Engine::TableView Engine::consider_ab_answers(const Term& abducible) {
    Table& t = ensure_consider_ab(abducible);
    TableView v;
    v.key = "consider_ab " + abducible.to_string();
    for (const Answer& a : t.answers)
        v.answers.push_back({a.inst, a.out, a.holds_at, a.undef});
    return v;
}

std::vector<Engine::TableInfo> Engine::tables_info() const {
    std::vector<TableInfo> out;
    for (const auto& [key, t] : tables_)
        out.push_back({key, t.answers.size(), t.state == Table::State::Valid,
                       t.eval_count});
    return out;
}

long Engine::eval_count_of(const std::string& key_substring) const {
    long n = 0;
    for (const auto& [key, t] : tables_)
        if (key.find(key_substring) != std::string::npos) n += t.eval_count;
    return n;
}

std::vector<std::string> Engine::audit_tables() const {
    std::vector<std::string> issues;
    auto norm = [](const Table& t) {
        std::set<std::string> s;
        for (const auto& a : t.answers) {
            std::ostringstream os;
            os << a.inst.to_string() << '|' << a.out.to_string() << '|'
               << a.holds_at << '|' << a.undef;
            s.insert(os.str());
        }
        return s;
    };
    for (const auto& [key, t] : tables_) {
        if (t.state != Table::State::Valid) continue;
        Engine scratch(cp_, limit_);
        scratch.store_ = store_;
        Table* ft = nullptr;
        if (t.consider_ab) {
            ft = &scratch.ensure_consider_ab(t.call.atom);
        } else {
            CanonCall cc = scratch.canonicalize(t.call, t.in);
            ft = &scratch.ensure(cc);
        }
        if (norm(t) != norm(*ft)) issues.push_back(key);
    }
    return issues;
}

}  // namespace abdutab
