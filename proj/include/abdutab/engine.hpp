#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "abdutab/context.hpp"
#include "abdutab/transform.hpp"

namespace abdutab {

// Bad input (query out of range, unknown rule id): CLI exit 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Broken engine invariant (non-ground disequality, depth budget): CLI exit 2.
struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TruthValue { True, Undefined, False };
std::string to_string(TruthValue v);

struct Stats {
    long table_hits = 0;
    long table_misses = 0;
    long tables_invalidated = 0;
    long rule_body_reevaluations = 0;
    long dual_rules_generated = 0;

    std::string to_string() const;  // flat key=value block
};

// Dynamic signed fluent facts with their activation timestamps. Buckets are
// signed predicate keys ("+q/0", "-expect/1") or rule ids ("-#r:r1").
class FluentStore {
public:
    void add(const std::string& bucket, const Term& t, int time);
    const std::vector<std::pair<Term, int>>& entries(const std::string& bucket) const;
    bool operator==(const FluentStore& o) const { return data_ == o.data_; }

private:
    std::map<std::string, std::vector<std::pair<Term, int>>> data_;
    friend class Engine;
};

struct HoldsAnswer {
    Context out;
    TruthValue value = TruthValue::True;
    int holds_at = 0;
};

struct Candidate {
    Context out;
    int holds_at = 0;
    bool undef = false;
};

// One tabled-resolution session: owns its fluent store and table space.
// Sessions are single-threaded; run independent sessions for parallelism.
class Engine {
public:
    Engine(CompiledProgram cp, int limit);

    int limit() const { return limit_; }
    const CompiledProgram& compiled() const { return cp_; }
    const Stats& stats() const { return stats_; }
    int watermark() const { return watermark_; }

    // --- updates -----------------------------------------------------------
    void register_update(const UpdateRecord& u);
    void activate_pending(int qt);
    std::size_t pending_count() const;

    // --- queries -----------------------------------------------------------
    // Top-goal query: activates pending updates up to qt, then pairs each
    // abductive answer of the goal with the complement computed inside that
    // answer's context, per verify_holds.
    std::vector<HoldsAnswer> holds(const Literal& goal, const Context& in, int qt);

    // Maximal-H answers of fluent(g, in, O, H) with H <= qt, one per distinct
    // output context. Empty result is the failure convention (V=false, H=0).
    std::vector<Candidate> compute(const SFluent& g, const Context& in, int qt);

    // --- reserved predicates (also exercised directly by tests) ------------
    static Term extend(const Term& f, const std::vector<Term>& args);
    Term timed(const Term& abducible, const std::string& time_var = "T") const;
    static std::optional<TruthValue> verify_holds(int h, TruthValue v, int hc,
                                                  TruthValue vc);
    // True iff f@lo is supervened by its complement at some t in (lo, hi]
    // within the given context world (store facts and derived duals).
    bool supervened(const SFluent& f, int lo, int hi, const Context& world);

    // Tabled entry points (top-level use; holds/compute call these).
    struct TableView {
        std::string key;
        std::vector<std::tuple<Term, Context, int, bool>> answers;
    };
    TableView fluent_answers(const SFluent& f, const Context& in);
    TableView consider_ab_answers(const Term& abducible);

    // --- observability ------------------------------------------------------
    struct TableInfo {
        std::string key;
        std::size_t answers = 0;
        bool valid = false;
        long eval_count = 0;
    };
    std::vector<TableInfo> tables_info() const;
    long eval_count_of(const std::string& key_substring) const;
    void set_trace(std::function<void(const std::string&)> sink);

    // Incremental-tabling audit: re-evaluates every valid table against the
    // current store in a scratch session; returns the keys that differ.
    std::vector<std::string> audit_tables() const;

    static std::string bucket_of(const SFluent& f);

private:
    struct Answer {
        Term inst;
        Context out;
        int holds_at = 0;
        bool undef = false;
        std::vector<TimeBinding> binds;  // resolutions of key tokens
    };
    struct Table {
        enum class State { Fresh, InProgress, Provisional, Valid, Invalid };
        State state = State::Fresh;
        bool consider_ab = false;
        SFluent call;
        Context in;
        std::vector<Answer> answers;
        std::set<std::string> fluent_deps;
        std::set<std::string> table_deps;
        bool used_incomplete = false;
        long eval_count = 0;
    };
    struct Flow {
        Subst subst;
        std::map<int, TimeVal> tbind;
        Context ctx;
        bool undef = false;
    };
    struct Frame {
        std::vector<TimeVal> times;
        TimeVal head_time;
        Context e_ctx;  // consider_ab side band
        bool has_e = false;
    };
    struct CanonCall {
        SFluent target;
        Context in;
        std::string key;
        std::map<int, int> token_to_caller;
    };

    using RuleDone = std::function<void(Flow&, const TimeVal&)>;
    using FluentCb = std::function<void(Flow&, int, bool)>;

    CanonCall canonicalize(const SFluent& f, const Context& in) const;
    Table& ensure(const CanonCall& cc);
    Table& ensure_consider_ab(const Term& ground_abducible);
    void evaluate_table(const std::string& key, Table& t);
    void produce(const std::string& key, Table& t, bool clear);
    void produce_fluent(Table& t);
    void produce_consider_ab(Table& t);
    void fixpoint_episode(Table& root);

    void record_answer(Table& t, Term inst, const Context& out, int h, bool undef,
                       std::vector<TimeBinding> binds);
    Context finalize_ctx(const Context& ctx, const std::map<int, TimeVal>& tbind,
                         std::vector<TimeBinding>* key_binds) const;
    int resolve_or_one(const TimeVal& tv, const std::map<int, TimeVal>& tbind) const;
    TimeVal chase(TimeVal tv, const std::map<int, TimeVal>& tbind) const;

    void consume_fluent(const SFluent& target, const Flow& flow, const FluentCb& cb);
    void eval_rules(const std::vector<AugRule>& rules, const Term& call,
                    const Flow& flow, const RuleDone& done);
    void eval_goals(const AugRule& r, std::size_t idx, Flow flow, Frame frame,
                    const RuleDone& done);

    const std::vector<AugRule>& dual_rules_for(const std::string& pred_key);
    const std::vector<std::pair<Term, int>>& store_lookup(const SFluent& f);
    void invalidate_for(const std::string& bucket);
    void trace(const std::string& line) const;

    Context resolve_ctx(const Context& c, const std::map<int, TimeVal>& tbind) const;
    static bool same_assumptions(const Context& a, const Context& b);

    CompiledProgram cp_;
    int limit_;
    FluentStore store_;
    std::map<std::string, Table> tables_;
    std::vector<Table*> stack_;
    std::map<std::string, std::vector<AugRule>> aux_;
    std::map<std::string, std::vector<AugRule>> dual_memo_;
    VarCounter vars_;
    int next_token_ = 1;
    long answers_total_ = 0;
    Stats stats_;
    std::vector<std::pair<UpdateRecord, bool>> pending_;  // record, consumed
    int watermark_ = 1;
    int depth_ = 0;
    int max_depth_ = 4096;
    std::function<void(const std::string&)> trace_;
};

}  // namespace abdutab
