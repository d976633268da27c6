#include "abdutab/parse.hpp"

#include <cctype>
#include <sstream>

namespace abdutab {

std::string Diagnostic::to_string() const {
    std::ostringstream os;
    os << (severity == Severity::Error ? "error" : "warning") << " at " << line
       << ':' << column << ": " << message;
    return os.str();
}

bool has_errors(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.severity == Diagnostic::Severity::Error) return true;
    return false;
}

namespace {

const char* kReservedHeads[] = {
    "consider", "consider_ab", "fluent",  "latest", "verify_pos",
    "verify_lits", "insert",   "produce", "timed",  "extend",
    "holds",    "compute",     "compl",   "assert", "abducible", "not"};

bool reserved_name(const std::string& n) {
    if (n.rfind("not_", 0) == 0) return true;
    for (const char* r : kReservedHeads)
        if (n == r) return true;
    return false;
}

struct Token {
    enum class Kind {
        Name, Var, Nat, Arrow, LParen, RParen, Comma, Period, Slash,
        Tilde, Colon, QueryArrow, Directive, End
    };
    Kind kind;
    std::string text;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    Lexer(std::string_view text, std::vector<Diagnostic>& diags)
        : text_(text), diags_(diags) {
        advance();
    }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void error_here(const std::string& msg) {
        diags_.push_back({Diagnostic::Severity::Error, line_, col_, msg});
    }

    int getc_() {
        if (pos_ >= text_.size()) return -1;
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return static_cast<unsigned char>(c);
    }
    int look(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size()
                   ? static_cast<unsigned char>(text_[pos_ + ahead])
                   : -1;
    }

    void advance() {
        for (;;) {
            while (look() != -1 && std::isspace(look())) getc_();
            if (look() == '%') {
                while (look() != -1 && look() != '\n') getc_();
                continue;
            }
            break;
        }
        tok_.line = line_;
        tok_.col = col_;
        int c = look();
        if (c == -1) {
            tok_ = {Token::Kind::End, "", line_, col_};
            return;
        }
        if (std::isdigit(c)) {
            std::string s;
            while (look() != -1 && std::isdigit(look())) s += char(getc_());
            tok_ = {Token::Kind::Nat, s, tok_.line, tok_.col};
            return;
        }
        if (std::islower(c)) {
            std::string s;
            while (look() != -1 && (std::isalnum(look()) || look() == '_'))
                s += char(getc_());
            tok_ = {Token::Kind::Name, s, tok_.line, tok_.col};
            return;
        }
        if (std::isupper(c) || c == '_') {
            std::string s;
            while (look() != -1 && (std::isalnum(look()) || look() == '_'))
                s += char(getc_());
            tok_ = {Token::Kind::Var, s, tok_.line, tok_.col};
            return;
        }
        switch (c) {
            case '<':
                if (look(1) == '-') {
                    getc_();
                    getc_();
                    tok_ = {Token::Kind::Arrow, "<-", tok_.line, tok_.col};
                    return;
                }
                break;
            case '?':
                if (look(1) == '-') {
                    getc_();
                    getc_();
                    tok_ = {Token::Kind::QueryArrow, "?-", tok_.line, tok_.col};
                    return;
                }
                break;
            case '#': {
                getc_();
                std::string s = "#";
                while (look() != -1 && (std::isalnum(look()) || look() == '_'))
                    s += char(getc_());
                tok_ = {Token::Kind::Directive, s, tok_.line, tok_.col};
                return;
            }
            case '(': getc_(); tok_ = {Token::Kind::LParen, "(", tok_.line, tok_.col}; return;
            case ')': getc_(); tok_ = {Token::Kind::RParen, ")", tok_.line, tok_.col}; return;
            case ',': getc_(); tok_ = {Token::Kind::Comma, ",", tok_.line, tok_.col}; return;
            case '.': getc_(); tok_ = {Token::Kind::Period, ".", tok_.line, tok_.col}; return;
            case '/': getc_(); tok_ = {Token::Kind::Slash, "/", tok_.line, tok_.col}; return;
            case '~': getc_(); tok_ = {Token::Kind::Tilde, "~", tok_.line, tok_.col}; return;
            case ':': getc_(); tok_ = {Token::Kind::Colon, ":", tok_.line, tok_.col}; return;
            default: break;
        }
        error_here(std::string("unexpected character '") + char(getc_()) + "'");
        advance();
    }

    std::string_view text_;
    std::vector<Diagnostic>& diags_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

class Parser {
public:
    Parser(std::string_view text, std::vector<Diagnostic>& diags)
        : lex_(text, diags), diags_(diags) {}

    std::optional<Program> program() {
        Program p;
        while (lex_.peek().kind != Token::Kind::End) {
            if (!program_item(p)) skip_to_period();
        }
        validate(p);
        if (has_errors(diags_)) return std::nullopt;
        return p;
    }

    std::optional<UpdateScript> script(const Program& prog) {
        UpdateScript s;
        while (lex_.peek().kind != Token::Kind::End) {
            if (!script_item(s, prog)) skip_to_period();
        }
        validate_script(s);
        if (has_errors(diags_)) return std::nullopt;
        return s;
    }

    std::optional<Query> single_query() {
        auto q = query();
        if (!q) return std::nullopt;
        if (lex_.peek().kind != Token::Kind::End)
            error(lex_.peek(), "trailing input after query");
        if (has_errors(diags_)) return std::nullopt;
        return q;
    }

    std::optional<UpdateRecord> single_update(const Program& prog) {
        if (lex_.peek().kind != Token::Kind::Directive ||
            lex_.peek().text != "#update") {
            error(lex_.peek(), "expected #update directive");
            return std::nullopt;
        }
        auto u = update_directive(prog);
        if (!u || has_errors(diags_)) return std::nullopt;
        return u;
    }

private:
    void error(const Token& at, const std::string& msg) {
        diags_.push_back({Diagnostic::Severity::Error, at.line, at.col, msg});
    }
    void warn(const Token& at, const std::string& msg) {
        diags_.push_back({Diagnostic::Severity::Warning, at.line, at.col, msg});
    }

    void skip_to_period() {
        while (lex_.peek().kind != Token::Kind::Period &&
               lex_.peek().kind != Token::Kind::End)
            lex_.take();
        if (lex_.peek().kind == Token::Kind::Period) lex_.take();
    }

    bool expect_tok(Token::Kind k, const std::string& what) {
        if (lex_.peek().kind != k) {
            error(lex_.peek(), "expected " + what);
            return false;
        }
        lex_.take();
        return true;
    }

    // term := VAR | NAME [ "(" term ("," term)* ")" ]
    std::optional<Term> term() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Var) return Term::var(lex_.take().text);
        if (t.kind != Token::Kind::Name) {
            error(t, "expected a term");
            return std::nullopt;
        }
        std::string name = lex_.take().text;
        if (lex_.peek().kind != Token::Kind::LParen) return Term::atom(name);
        lex_.take();
        std::vector<Term> args;
        for (;;) {
            auto a = term();
            if (!a) return std::nullopt;
            args.push_back(*a);
            if (lex_.peek().kind == Token::Kind::Comma) {
                lex_.take();
                continue;
            }
            break;
        }
        if (!expect_tok(Token::Kind::RParen, "')'")) return std::nullopt;
        return Term::compound(name, std::move(args));
    }

    std::optional<Literal> literal() {
        bool positive = true;
        if (lex_.peek().kind == Token::Kind::Name && lex_.peek().text == "not") {
            lex_.take();
            positive = false;
        }
        auto a = term();
        if (!a) return std::nullopt;
        if (a->is_var()) {
            error(lex_.peek(), "a literal cannot be a bare variable");
            return std::nullopt;
        }
        return Literal{positive, *a};
    }

    bool program_item(Program& p) {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Name && t.text == "abducible") {
            Token at = lex_.take();
            if (lex_.peek().kind != Token::Kind::Name) {
                error(lex_.peek(), "expected abducible name");
                return false;
            }
            std::string name = lex_.take().text;
            if (!expect_tok(Token::Kind::Slash, "'/'")) return false;
            if (lex_.peek().kind != Token::Kind::Nat) {
                error(lex_.peek(), "expected abducible arity");
                return false;
            }
            std::size_t arity = std::stoul(lex_.take().text);
            if (!expect_tok(Token::Kind::Period, "'.'")) return false;
            if (reserved_name(name)) {
                error(at, "'" + name + "' is reserved and cannot be an abducible");
                return false;
            }
            p.abducibles.insert({name, arity});
            return true;
        }
        // rule or fact
        Token start = lex_.peek();
        auto head = term();
        if (!head) return false;
        if (head->is_var()) {
            error(start, "rule head cannot be a variable");
            return false;
        }
        Rule r;
        r.head = *head;
        if (lex_.peek().kind == Token::Kind::Arrow) {
            lex_.take();
            for (;;) {
                auto l = literal();
                if (!l) return false;
                r.body.push_back(*l);
                if (lex_.peek().kind == Token::Kind::Comma) {
                    lex_.take();
                    continue;
                }
                break;
            }
        }
        if (!expect_tok(Token::Kind::Period, "'.'")) return false;
        r.id = "r" + std::to_string(p.rules.size() + 1);
        rule_locs_.push_back(start);
        p.rules.push_back(std::move(r));
        return true;
    }

    std::optional<Query> query() {
        Token start = lex_.peek();
        if (!expect_tok(Token::Kind::QueryArrow, "'?-'")) return std::nullopt;
        if (lex_.peek().kind != Token::Kind::Name || lex_.peek().text != "holds") {
            error(lex_.peek(), "expected holds(...)");
            return std::nullopt;
        }
        lex_.take();
        if (!expect_tok(Token::Kind::LParen, "'('")) return std::nullopt;
        auto l = literal();
        if (!l) return std::nullopt;
        if (!expect_tok(Token::Kind::RParen, "')'")) return std::nullopt;
        Query q;
        q.goal = *l;
        q.query_time = 1;
        if (lex_.peek().kind == Token::Kind::Name && lex_.peek().text == "at") {
            lex_.take();
            if (lex_.peek().kind != Token::Kind::Nat) {
                error(lex_.peek(), "expected query time");
                return std::nullopt;
            }
            q.query_time = std::stoi(lex_.take().text);
        }
        if (!expect_tok(Token::Kind::Period, "'.'")) return std::nullopt;
        if (q.query_time < 1) {
            error(start, "query time must be >= 1");
            return std::nullopt;
        }
        if (reserved_name(q.goal.atom.name()) || q.goal.atom.name() == "expect" ||
            q.goal.atom.name() == "expect_not") {
            // expectations are queryable fluents; only hard-reserved names are not
            if (reserved_name(q.goal.atom.name())) {
                error(start, "cannot query reserved predicate '" +
                                 q.goal.atom.name() + "'");
                return std::nullopt;
            }
        }
        return q;
    }

    std::optional<UpdateRecord> update_directive(const Program& prog) {
        Token start = lex_.take();  // #update
        if (lex_.peek().kind != Token::Kind::Nat) {
            error(lex_.peek(), "expected update timestamp");
            return std::nullopt;
        }
        int ts = std::stoi(lex_.take().text);
        if (!expect_tok(Token::Kind::Colon, "':'")) return std::nullopt;
        if (lex_.peek().kind != Token::Kind::Name || lex_.peek().text != "assert") {
            error(lex_.peek(), "expected assert(...)");
            return std::nullopt;
        }
        lex_.take();
        if (!expect_tok(Token::Kind::LParen, "'('")) return std::nullopt;
        bool positive = true;
        if (lex_.peek().kind == Token::Kind::Tilde) {
            lex_.take();
            positive = false;
        }
        Token targ_tok = lex_.peek();
        auto target = term();
        if (!target) return std::nullopt;
        if (!expect_tok(Token::Kind::RParen, "')'")) return std::nullopt;
        if (!expect_tok(Token::Kind::Period, "'.'")) return std::nullopt;

        UpdateRecord u;
        u.timestamp = ts;
        u.positive = positive;
        if (ts < 2) {
            error(start, ts == 1
                             ? "timestamp 1 is reserved for program insertion"
                             : "update timestamps start at 2");
            return std::nullopt;
        }
        // rule-id target?
        if (target->is_atom() && prog.rule_by_id(target->name())) {
            const Rule* r = prog.rule_by_id(target->name());
            bool also_fluent = false;
            for (const Rule& pr : prog.rules)
                if (pr.head.name() == target->name() && pr.head.arity() == 0)
                    also_fluent = true;
            if (also_fluent) {
                error(targ_tok, "'" + target->name() +
                                    "' names both a rule and a fluent; rename one");
                return std::nullopt;
            }
            if (r->is_fact()) {
                error(targ_tok, "rule " + target->name() +
                                    " is a fact and has no rule-name fluent; "
                                    "write it as a rule to toggle it");
                return std::nullopt;
            }
            u.rule_id = target->name();
            u.fluent = *target;  // resolved to the #r term at load time
            return u;
        }
        if (!target->ground()) {
            error(targ_tok, "update target must be ground");
            return std::nullopt;
        }
        if (prog.is_abducible(*target)) {
            error(targ_tok, "abducibles cannot be updated");
            return std::nullopt;
        }
        if (reserved_name(target->name())) {
            error(targ_tok, "'" + target->name() + "' is reserved");
            return std::nullopt;
        }
        if (target->is_atom() && target->name().size() > 1 &&
            target->name()[0] == 'r' &&
            std::isdigit(static_cast<unsigned char>(target->name()[1]))) {
            bool all_digits = true;
            for (std::size_t i = 1; i < target->name().size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(target->name()[i])))
                    all_digits = false;
            if (all_digits) {
                error(targ_tok, "unknown rule id '" + target->name() + "'");
                return std::nullopt;
            }
        }
        u.fluent = *target;
        return u;
    }

    bool script_item(UpdateScript& s, const Program& prog) {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Directive) {
            if (t.text == "#limit") {
                Token at = lex_.take();
                if (lex_.peek().kind != Token::Kind::Nat) {
                    error(lex_.peek(), "expected limit value");
                    return false;
                }
                int lim = std::stoi(lex_.take().text);
                if (!expect_tok(Token::Kind::Period, "'.'")) return false;
                if (lim < 1) {
                    error(at, "limit must be >= 1");
                    return false;
                }
                if (s.limit) {
                    error(at, "duplicate #limit directive");
                    return false;
                }
                s.limit = lim;
                return true;
            }
            if (t.text == "#update") {
                Token at = t;
                auto u = update_directive(prog);
                if (!u) return false;
                if (!s.updates.empty() && u->timestamp < s.updates.back().timestamp) {
                    error(at, "update timestamps must be non-decreasing");
                    return false;
                }
                s.updates.push_back(*u);
                s.items.push_back({*u});
                return true;
            }
            error(t, "unknown directive '" + t.text + "'");
            lex_.take();
            return false;
        }
        if (t.kind == Token::Kind::QueryArrow) {
            auto q = query();
            if (!q) return false;
            s.items.push_back({*q});
            return true;
        }
        error(t, "expected #limit, #update, or a query");
        lex_.take();
        return false;
    }

    void validate_script(UpdateScript& s) {
        if (s.limit) {
            for (const auto& u : s.updates)
                if (u.timestamp > *s.limit)
                    diags_.push_back({Diagnostic::Severity::Error, 0, 0,
                                      "update timestamp " +
                                          std::to_string(u.timestamp) +
                                          " exceeds limit " +
                                          std::to_string(*s.limit)});
            for (const auto& it : s.items)
                if (auto* q = std::get_if<Query>(&it.item))
                    if (q->query_time > *s.limit)
                        diags_.push_back({Diagnostic::Severity::Error, 0, 0,
                                          "query time " +
                                              std::to_string(q->query_time) +
                                              " exceeds limit " +
                                              std::to_string(*s.limit)});
        }
    }

    bool flat_args(const Term& atom) {
        for (const Term& a : atom.args())
            if (a.is_compound()) return false;
        return true;
    }

    void validate(Program& p) {
        std::map<std::string, std::size_t> arities;
        auto check_arity = [&](const Term& a, const Token& at) {
            auto [it, inserted] = arities.emplace(a.name(), a.arity());
            if (!inserted && it->second != a.arity())
                error(at, "predicate " + a.name() + " used with arity " +
                              std::to_string(a.arity()) + " and " +
                              std::to_string(it->second));
        };
        for (const auto& [name, arity] : p.abducibles)
            arities.emplace(name, arity);

        std::set<std::string> defined;
        for (const Rule& r : p.rules) defined.insert(r.head.signature());

        for (std::size_t i = 0; i < p.rules.size(); ++i) {
            const Rule& r = p.rules[i];
            const Token& at = rule_locs_[i];
            check_arity(r.head, at);

            if (reserved_name(r.head.name()))
                error(at, "'" + r.head.name() + "' is reserved and cannot be defined");
            if (p.is_abducible(r.head))
                error(at, "abducible " + r.head.signature() +
                              " cannot have a rule or fact; abducibles are "
                              "assumed, never derived");
            if (p.is_expectation_head(r.head)) {
                const Term& arg = r.head.args()[0];
                if (arg.is_var() || !p.is_abducible(arg))
                    error(at, r.head.name() +
                                  " takes one argument whose functor is a "
                                  "declared abducible");
                if (!flat_args(arg))
                    error(at, "expectation argument must be a flat term");
            } else if ((r.head.name() == "expect" || r.head.name() == "expect_not"))
                error(at, r.head.name() + " takes exactly one argument");
            else if (!flat_args(r.head))
                error(at, "rule head arguments must be atoms or variables");

            if (r.is_fact() && !r.head.ground())
                error(at, "facts must be ground");

            std::set<std::string> bound;  // vars bound by earlier positive goals
            for (const Literal& l : r.body) {
                check_arity(l.atom, at);
                bool abd = p.is_abducible(l.atom);
                if (!abd && !p.is_expectation_head(l.atom) && !flat_args(l.atom))
                    error(at, "body arguments must be atoms or variables");
                if (!l.positive && reserved_name(l.atom.name()))
                    error(at, "cannot negate reserved predicate " + l.atom.name());
                if (l.positive && reserved_name(l.atom.name()))
                    error(at, "'" + l.atom.name() + "' is reserved");
                std::set<std::string> vars;
                l.atom.collect_vars(vars);
                if (!l.positive || abd) {
                    for (const auto& v : vars)
                        if (!bound.count(v))
                            error(at, "variable " + v + " in " +
                                          (abd ? "abducible " : "negated ") +
                                          "literal " + l.atom.to_string() +
                                          " must be bound by an earlier "
                                          "positive literal");
                } else {
                    bound.insert(vars.begin(), vars.end());
                }
                if (l.positive && !abd && !defined.count(l.atom.signature()) &&
                    !p.is_expectation_head(l.atom))
                    warn(at, "atom " + l.atom.signature() +
                                 " has no rules, facts, or abducible "
                                 "declaration; treated as an undefined fluent "
                                 "(declare it abducible if assumption was "
                                 "intended)");
            }
            std::set<std::string> headv;
            r.head.collect_vars(headv);
            std::set<std::string> bodyb;
            for (const Literal& l : r.body)
                if (l.positive && !p.is_abducible(l.atom))
                    l.atom.collect_vars(bodyb);
            for (const auto& v : headv)
                if (!bodyb.count(v))
                    error(at, "head variable " + v +
                                  " is not bound by a positive body literal");
        }
    }

    Lexer lex_;
    std::vector<Diagnostic>& diags_;
    std::vector<Token> rule_locs_;
};

}  // namespace

std::optional<Program> parse_program(std::string_view text,
                                     std::vector<Diagnostic>& diags) {
    Parser p(text, diags);
    return p.program();
}

std::optional<UpdateScript> parse_updates(std::string_view text,
                                          const Program& program,
                                          std::vector<Diagnostic>& diags) {
    Parser p(text, diags);
    return p.script(program);
}

std::optional<Query> parse_query(std::string_view text,
                                 std::vector<Diagnostic>& diags) {
    Parser p(text, diags);
    return p.single_query();
}

std::optional<UpdateRecord> parse_update_line(std::string_view text,
                                              const Program& program,
                                              std::vector<Diagnostic>& diags) {
    Parser p(text, diags);
    return p.single_update(program);
}

Rule rename_apart(const Rule& r, VarCounter& counter) {
    std::map<std::string, Term> mapping;
    Rule out;
    out.id = r.id;
    out.head = rename_term(r.head, counter, mapping);
    for (const Literal& l : r.body)
        out.body.push_back({l.positive, rename_term(l.atom, counter, mapping)});
    return out;
}

std::string pretty(const Rule& r) {
    std::ostringstream os;
    os << r.head.to_string();
    if (!r.body.empty()) {
        os << " <- ";
        for (std::size_t i = 0; i < r.body.size(); ++i) {
            if (i) os << ", ";
            os << r.body[i].to_string();
        }
    }
    os << '.';
    return os.str();
}

std::string pretty(const Program& p) {
    std::ostringstream os;
    for (const auto& [name, arity] : p.abducibles)
        os << "abducible " << name << '/' << arity << ".\n";
    for (const Rule& r : p.rules) os << pretty(r) << '\n';
    return os.str();
}

std::string pretty(const UpdateScript& s) {
    std::ostringstream os;
    if (s.limit) os << "#limit " << *s.limit << ".\n";
    for (const ScriptItem& it : s.items) {
        if (const auto* u = std::get_if<UpdateRecord>(&it.item)) {
            os << "#update " << u->timestamp << ": assert(";
            if (!u->positive) os << '~';
            os << (u->rule_id ? *u->rule_id : u->fluent.to_string()) << ").\n";
        } else {
            const auto& q = std::get<Query>(it.item);
            os << "?- holds(" << q.goal.to_string() << ") at " << q.query_time
               << ".\n";
        }
    }
    return os.str();
}

Term rule_name_term(const Rule& preprocessed_rule) {
    std::vector<Term> body;
    for (const Literal& l : preprocessed_rule.body) {
        if (l.positive)
            body.push_back(l.atom);
        else
            body.push_back(Term::compound("not", {l.atom}));
    }
    return Term::compound("#r", {preprocessed_rule.head, Term::list(body)});
}

}  // namespace abdutab
