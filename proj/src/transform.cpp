#include "abdutab/transform.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace abdutab {

SFluent complement(const SFluent& f) {
    return {!f.positive, f.atom, f.rule_id};
}

Term AbducibleSig::pattern() const {
    if (arity == 0) return Term::atom(name);
    std::vector<Term> args;
    for (std::size_t i = 0; i < arity; ++i)
        args.push_back(Term::var("X" + std::to_string(i + 1)));
    return Term::compound(name, std::move(args));
}

std::size_t DualRules::clause_count() const {
    std::size_t n = negative_rules.size();
    for (const auto& [name, rules] : star_rules) n += rules.size();
    return n;
}

bool CompiledProgram::has_fluent_definition(const std::string& pred_key) const {
    if (fluent_rules.count(pred_key)) return true;
    for (const SFluent& f : initial_facts)
        if (f.atom.signature() == pred_key) return true;
    return false;
}

bool CompiledProgram::is_abducible_pred(const Term& t) const {
    for (const auto& sig : abducibles)
        if (sig.name == t.name() && sig.arity == t.arity()) return true;
    return false;
}

bool CompiledProgram::undefined_convention(const Term& positive_atom) const {
    const std::string& n = positive_atom.name();
    if (n == "expect" || n == "expect_not" || n == "#r") return false;
    if (is_abducible_pred(positive_atom)) return false;
    return !has_fluent_definition(positive_atom.signature());
}

Program preprocess_abducibles(const Program& p) {
    Program out = p;
    for (Rule& r : out.rules)
        for (Literal& l : r.body)
            if (p.is_abducible(l.atom))
                l.atom = Term::compound("consider", {l.atom});
    return out;
}

namespace {

AugGoal fluent_goal(bool positive, Term atom,
                    std::optional<std::string> rule_id = std::nullopt) {
    AugGoal g;
    g.kind = AugGoal::Kind::Fluent;
    g.fluent = {positive, std::move(atom), std::move(rule_id)};
    return g;
}

AugGoal direct_goal(Term call) {
    AugGoal g;
    g.kind = AugGoal::Kind::Direct;
    g.call = std::move(call);
    return g;
}

AugGoal check_goal(AugGoal::Kind kind, std::vector<int> refs) {
    AugGoal g;
    g.kind = kind;
    g.goal_refs = std::move(refs);
    return g;
}

// q <- #r(q,[consider(a)]), consider(a)
// becomes
// q(I,O,H) <- fluent(#r(..),I,R,Hr), consider(a,R,O,Ha), latest([..],H).
AugRule augment(const Rule& preprocessed, const Term& rule_name) {
    AugRule ar;
    ar.head = preprocessed.head;
    ar.rule_id = preprocessed.id;
    ar.body.push_back(fluent_goal(true, rule_name, preprocessed.id));
    for (const Literal& l : preprocessed.body) {
        if (l.atom.name() == "consider" && l.atom.arity() == 1) {
            Term abd = l.atom.args()[0];
            ar.body.push_back(direct_goal(
                l.positive ? l.atom : Term::compound("not_consider", {abd})));
        } else {
            ar.body.push_back(fluent_goal(l.positive, l.atom));
        }
    }
    std::vector<int> all(ar.body.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    ar.body.push_back(check_goal(AugGoal::Kind::Latest, std::move(all)));
    ar.head_time = AugRule::HeadTime::FromLatest;
    return ar;
}

// The per-abducible machinery in dump order: consider/4, not_consider/4,
// the three consider*1 clauses, and the two insertion rules. consider_ab is
// a reserved producer; its displayed definition lives in the dump printer.
std::vector<AugRule> machinery_rules(const AbducibleSig& sig) {
    Term a = sig.pattern();
    std::vector<Term> xs(a.is_compound() ? a.args() : std::vector<Term>{});
    std::vector<AugRule> out;

    {
        AugRule r;
        r.head = Term::compound("consider", {a});
        AugGoal cab;
        cab.kind = AugGoal::Kind::ConsiderAb;
        cab.call = a;
        r.body.push_back(cab);
        AugGoal pe;
        pe.kind = AugGoal::Kind::ProduceE;
        r.body.push_back(pe);
        r.head_time = AugRule::HeadTime::FromGoal;
        r.head_time_goal = 0;
        out.push_back(r);
    }
    {
        AugRule r;
        r.head = Term::compound("not_consider", {a});
        r.body.push_back(direct_goal(Term::compound("consider*1", {a})));
        r.head_time = AugRule::HeadTime::FromGoal;
        r.head_time_goal = 0;
        out.push_back(r);
    }
    {
        AugRule r;
        r.head = Term::compound("consider*1", {a});
        r.body.push_back(direct_goal(Term::compound("not_" + sig.name, xs)));
        r.head_time = AugRule::HeadTime::FromGoal;
        r.head_time_goal = 0;
        out.push_back(r);
    }
    {
        AugRule r;
        r.head = Term::compound("consider*1", {a});
        r.body.push_back(fluent_goal(false, Term::compound("expect", {a})));
        r.head_time = AugRule::HeadTime::FromGoal;
        r.head_time_goal = 0;
        out.push_back(r);
    }
    {
        AugRule r;
        r.head = Term::compound("consider*1", {a});
        r.body.push_back(fluent_goal(true, Term::compound("expect", {a})));
        r.body.push_back(fluent_goal(true, Term::compound("expect_not", {a})));
        r.body.push_back(check_goal(AugGoal::Kind::VerifyLits, {0}));
        r.head_time = AugRule::HeadTime::FromGoal;
        r.head_time_goal = 1;
        out.push_back(r);
    }
    {
        AugRule r;
        r.head = Term::compound(sig.name, xs);
        AugGoal ins;
        ins.kind = AugGoal::Kind::Insert;
        ins.call = a;
        ins.positive = true;
        r.body.push_back(ins);
        r.head_time = AugRule::HeadTime::Open;
        out.push_back(r);
    }
    {
        AugRule r;
        r.head = Term::compound("not_" + sig.name, xs);
        AugGoal ins;
        ins.kind = AugGoal::Kind::Insert;
        ins.call = a;
        ins.positive = false;
        r.body.push_back(ins);
        r.head_time = AugRule::HeadTime::Open;
        out.push_back(r);
    }
    return out;
}

Term tuple_term(std::vector<Term> items) {
    if (items.size() == 1) return items[0];
    return Term::compound("()", std::move(items));
}

std::vector<Term> fresh_head_vars(std::size_t arity) {
    std::vector<Term> vs;
    for (std::size_t i = 0; i < arity; ++i) {
        std::string n(1, static_cast<char>('A' + (i % 26)));
        if (i >= 26) n += std::to_string(i / 26);
        vs.push_back(Term::var(n));
    }
    return vs;
}

void split_key(const std::string& key, std::string& name, std::size_t& arity) {
    auto slash = key.rfind('/');
    name = key.substr(0, slash);
    arity = std::stoul(key.substr(slash + 1));
}

}  // namespace

CompiledProgram compile(const Program& p) {
    CompiledProgram cp;
    cp.source = p;
    cp.preprocessed = preprocess_abducibles(p);
    for (const auto& [name, arity] : p.abducibles)
        cp.abducibles.push_back({name, arity});

    for (const Rule& r : cp.preprocessed.rules) {
        if (r.is_fact()) {
            cp.initial_facts.push_back({true, r.head, std::nullopt});
            continue;
        }
        Term rn = rule_name_term(r);
        cp.rule_name_terms[r.id] = rn;
        cp.initial_facts.push_back({true, rn, r.id});
        cp.fluent_rules[r.head.signature()].push_back(augment(r, rn));
    }
    for (const auto& sig : cp.abducibles)
        for (AugRule& r : machinery_rules(sig))
            cp.aux_rules[r.pred_key()].push_back(std::move(r));
    return cp;
}

namespace {

AugGoal negate_goal(const AugGoal& g) {
    if (g.kind == AugGoal::Kind::Fluent) {
        AugGoal out = g;
        out.fluent = complement(g.fluent);
        return out;
    }
    assert(g.kind == AugGoal::Kind::Direct);
    const Term& c = g.call;
    if (c.name() == "consider")
        return direct_goal(Term::compound("not_consider", c.args()));
    assert(c.name() == "not_consider");
    return direct_goal(Term::compound("consider", c.args()));
}

// One clause per body prefix: keep goals 1..k-1, negate goal k, verify the
// kept positives. The trailing latest of the positive rule is machinery and
// is not a falsifiable goal.
std::vector<AugRule> star_clauses_for_rule(const AugRule& pos,
                                           const std::string& star_name) {
    std::vector<AugRule> out;
    std::size_t m = pos.body.size();
    while (m > 0 && !pos.body[m - 1].threads_context() &&
           pos.body[m - 1].kind != AugGoal::Kind::Fluent)
        --m;  // drop trailing latest/verify goals
    for (std::size_t k = 0; k < m; ++k) {
        AugRule c;
        c.head = Term::compound(star_name, pos.head.args());
        std::vector<int> kept_fluents;
        for (std::size_t j = 0; j < k; ++j) {
            c.body.push_back(pos.body[j]);
            if (pos.body[j].kind == AugGoal::Kind::Fluent)
                kept_fluents.push_back(static_cast<int>(j));
        }
        c.body.push_back(negate_goal(pos.body[k]));
        c.head_time = AugRule::HeadTime::FromGoal;
        c.head_time_goal = static_cast<int>(k);
        if (!kept_fluents.empty())
            c.body.push_back(
                check_goal(AugGoal::Kind::VerifyPos, std::move(kept_fluents)));
        out.push_back(std::move(c));
    }
    return out;
}

AugRule mismatch_clause(const std::string& star_name,
                        const std::vector<Term>& against_args) {
    AugRule c;
    std::vector<Term> vars = fresh_head_vars(against_args.size());
    c.head = Term::compound(star_name, vars);
    AugGoal d;
    d.kind = AugGoal::Kind::Diseq;
    d.lhs = tuple_term(vars);
    d.rhs = tuple_term(against_args);
    c.body.push_back(d);
    c.head_time = AugRule::HeadTime::Open;
    return c;
}

}  // namespace

DualRules generate_duals(const CompiledProgram& cp, const std::string& pred_key) {
    DualRules out;
    std::string name;
    std::size_t arity = 0;
    split_key(pred_key, name, arity);

    // Defining clauses in program order: rules (already augmented, with the
    // rule-name goal prepended) and facts.
    struct Def {
        const AugRule* rule = nullptr;  // null for facts
        Term fact_head;
    };
    std::vector<Def> defs;
    if (pred_key == "#r/2") {
        for (const Rule& r : cp.preprocessed.rules) {
            auto it = cp.rule_name_terms.find(r.id);
            if (it != cp.rule_name_terms.end()) defs.push_back({nullptr, it->second});
        }
    } else {
        for (const Rule& r : cp.preprocessed.rules) {
            if (r.head.signature() != pred_key) continue;
            if (r.is_fact()) {
                defs.push_back({nullptr, r.head});
            } else {
                const AugRule* found = nullptr;
                auto it = cp.fluent_rules.find(pred_key);
                if (it != cp.fluent_rules.end())
                    for (const AugRule& ar : it->second)
                        if (ar.rule_id == r.id) found = &ar;
                assert(found);
                defs.push_back({found, Term()});
            }
        }
    }

    if (defs.empty()) {
        // No rules, no facts: the dual is an unconditional relay.
        AugRule relay;
        relay.head = Term::compound(name, fresh_head_vars(arity));
        relay.head_time = AugRule::HeadTime::Open;
        out.negative_rules.push_back(std::move(relay));
        return out;
    }

    std::vector<Term> callers = fresh_head_vars(arity);
    AugRule chain;
    chain.head = Term::compound(name, callers);
    for (std::size_t i = 0; i < defs.size(); ++i) {
        std::string star = name + "*" + std::to_string(i + 1);
        chain.body.push_back(direct_goal(Term::compound(star, callers)));

        std::vector<AugRule> clauses;
        if (defs[i].rule) {
            clauses = star_clauses_for_rule(*defs[i].rule, star);
            if (arity > 0)
                clauses.push_back(mismatch_clause(star, defs[i].rule->head.args()));
        } else if (arity > 0) {
            clauses.push_back(mismatch_clause(star, defs[i].fact_head.args()));
        }
        out.star_rules.push_back({star + "/" + std::to_string(arity),
                                  std::move(clauses)});
    }
    if (defs.size() == 1) {
        chain.head_time = AugRule::HeadTime::FromGoal;
        chain.head_time_goal = 0;
    } else {
        std::vector<int> all(chain.body.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        chain.body.push_back(check_goal(AugGoal::Kind::Latest, std::move(all)));
        chain.head_time = AugRule::HeadTime::FromLatest;
    }
    out.negative_rules.push_back(std::move(chain));
    return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

struct PrintPlan {
    std::vector<std::string> in_ctx, out_ctx, time;
    std::string head_in, head_out, head_time;
};

PrintPlan plan_rule(const AugRule& r) {
    PrintPlan p;
    p.in_ctx.resize(r.body.size());
    p.out_ctx.resize(r.body.size());
    p.time.resize(r.body.size());

    int last_threading = -1;
    for (std::size_t i = 0; i < r.body.size(); ++i)
        if (r.body[i].threads_context()) last_threading = static_cast<int>(i);

    std::string cur = "I";
    int rseq = 0;
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        p.in_ctx[i] = cur;
        if (r.body[i].threads_context()) {
            cur = (static_cast<int>(i) == last_threading)
                      ? "O"
                      : "R" + std::to_string(++rseq);
            p.out_ctx[i] = cur;
        } else {
            p.out_ctx[i] = cur;
        }
    }
    p.head_in = "I";
    p.head_out = last_threading >= 0 ? "O" : "I";

    int tseq = 0;
    for (std::size_t i = 0; i < r.body.size(); ++i)
        if (r.body[i].has_time())
            p.time[i] = "H" + std::to_string(++tseq);
    if (r.head_time == AugRule::HeadTime::FromGoal)
        p.time[r.head_time_goal] = "H";
    p.head_time = "H";
    return p;
}

std::string with_extra(const Term& t, const std::vector<std::string>& extra) {
    std::ostringstream os;
    os << t.name() << '(';
    bool first = true;
    for (const Term& a : t.args()) {
        if (!first) os << ',';
        os << a.to_string();
        first = false;
    }
    for (const auto& e : extra) {
        if (!first) os << ',';
        os << e;
        first = false;
    }
    os << ')';
    return os.str();
}

std::string signed_name(const SFluent& f) {
    return f.positive ? f.atom.name() : "not_" + f.atom.name();
}

Term signed_view(const SFluent& f) {
    if (f.positive) return f.atom;
    return Term::compound("not_" + f.atom.name(),
                          std::vector<Term>(f.atom.args()));
}

std::string goal_entry(const AugRule& r, const PrintPlan& p, int i) {
    const AugGoal& g = r.body[i];
    std::vector<std::string> ctx = {p.in_ctx[i], p.out_ctx[i], p.time[i]};
    if (g.kind == AugGoal::Kind::Fluent) return with_extra(signed_view(g.fluent), ctx);
    return with_extra(g.call, ctx);
}

std::string print_goal(const AugRule& r, const PrintPlan& p, int i) {
    const AugGoal& g = r.body[i];
    std::ostringstream os;
    switch (g.kind) {
        case AugGoal::Kind::Fluent:
            os << "fluent(" << signed_view(g.fluent).to_string() << ','
               << p.in_ctx[i] << ',' << p.out_ctx[i] << ',' << p.time[i] << ')';
            break;
        case AugGoal::Kind::Direct:
            os << with_extra(g.call, {p.in_ctx[i], p.out_ctx[i], p.time[i]});
            break;
        case AugGoal::Kind::ConsiderAb:
            os << "consider_ab(" << g.call.to_string() << ",E," << p.time[i] << ')';
            break;
        case AugGoal::Kind::ProduceE:
            os << "produce(" << p.out_ctx[i] << ',' << p.in_ctx[i] << ",E)";
            break;
        case AugGoal::Kind::Insert: {
            std::vector<Term> args = g.call.is_compound()
                                         ? g.call.args()
                                         : std::vector<Term>{};
            args.push_back(Term::var(p.head_time));
            Term timed = Term::compound(g.call.name(), std::move(args));
            os << "insert(" << (g.positive ? "" : "not ") << timed.to_string()
               << ',' << p.in_ctx[i] << ',' << p.out_ctx[i] << ')';
            break;
        }
        case AugGoal::Kind::Latest:
        case AugGoal::Kind::VerifyPos:
        case AugGoal::Kind::VerifyLits: {
            const char* n = g.kind == AugGoal::Kind::Latest      ? "latest"
                            : g.kind == AugGoal::Kind::VerifyPos ? "verify_pos"
                                                                 : "verify_lits";
            os << n << "([";
            for (std::size_t j = 0; j < g.goal_refs.size(); ++j) {
                if (j) os << ',';
                os << goal_entry(r, p, g.goal_refs[j]);
            }
            os << "]," << p.head_time << ')';
            break;
        }
        case AugGoal::Kind::Diseq:
            os << g.lhs.to_string() << " != " << g.rhs.to_string();
            break;
    }
    return os.str();
}

}  // namespace

std::string print_aug_rule(const AugRule& r) {
    PrintPlan p = plan_rule(r);
    std::ostringstream os;
    os << with_extra(r.head, {p.head_in, p.head_out, p.head_time});
    if (!r.body.empty()) {
        os << " <- ";
        for (std::size_t i = 0; i < r.body.size(); ++i) {
            if (i) os << ", ";
            os << print_goal(r, p, static_cast<int>(i));
        }
    }
    os << '.';
    return os.str();
}

std::string dump_transform(const CompiledProgram& cp) {
    std::ostringstream os;
    os << "% transformed program\n";
    for (const Rule& r : cp.preprocessed.rules) {
        if (r.is_fact()) continue;
        os << "% rule " << r.id << ": " << pretty(r) << '\n';
        for (const AugRule& ar : cp.fluent_rules.at(r.head.signature()))
            if (ar.rule_id == r.id) os << print_aug_rule(ar) << '\n';
    }
    os << "\n% initial facts (time 1)\n";
    for (const SFluent& f : cp.initial_facts)
        os << with_extra(f.atom, {"I", "I", "1"}) << ".\n";

    for (const auto& sig : cp.abducibles) {
        os << "\n% abducible " << sig.name << '/' << sig.arity << '\n';
        Term a = sig.pattern();
        std::string at = a.to_string();
        os << "consider_ab(" << at << ",E,T) <- timed(" << at << ",A_T), "
           << "fluent(expect(" << at << "),[A_T],R1,H1), "
           << "fluent(not_expect_not(" << at << "),R1,E,H2), "
           << "latest([expect(" << at << ",[A_T],R1,H1),not_expect_not(" << at
           << ",R1,E,H2)],T).\n";
        for (const AugRule& r : machinery_rules(sig))
            os << print_aug_rule(r) << '\n';
    }

    os << "\n% dual transform\n";
    std::vector<std::string> order;
    auto add_pred = [&](const std::string& key) {
        if (std::find(order.begin(), order.end(), key) == order.end())
            order.push_back(key);
    };
    for (const Rule& r : cp.preprocessed.rules) add_pred(r.head.signature());
    if (!cp.abducibles.empty()) {
        add_pred("expect/1");
        add_pred("expect_not/1");
    }
    if (!cp.rule_name_terms.empty()) add_pred("#r/2");

    for (const std::string& key : order) {
        DualRules d = generate_duals(cp, key);
        for (const AugRule& r : d.negative_rules) {
            AugRule view = r;
            view.head = Term::compound("not_" + r.head.name(),
                                       std::vector<Term>(r.head.args()));
            os << print_aug_rule(view) << '\n';
        }
        for (const auto& [star, rules] : d.star_rules)
            for (const AugRule& r : rules) os << print_aug_rule(r) << '\n';
    }
    return os.str();
}

}  // namespace abdutab
