#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abdutab/program.hpp"

namespace abdutab {

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    int line = 0;
    int column = 0;
    std::string message;

    std::string to_string() const;
};

bool has_errors(const std::vector<Diagnostic>& ds);

// Parses and validates a source program (.alp). Returns nullopt when any
// error-severity diagnostic was emitted; warnings alone still load.
std::optional<Program> parse_program(std::string_view text,
                                     std::vector<Diagnostic>& diags);

// Parses an update/query script (.upd). Rule-id targets are resolved against
// the loaded program (the id maps to its rule-name fluent).
std::optional<UpdateScript> parse_updates(std::string_view text,
                                          const Program& program,
                                          std::vector<Diagnostic>& diags);

// Parses a single query line "?- holds(q) at 3." ("at" defaults to 1).
std::optional<Query> parse_query(std::string_view text,
                                 std::vector<Diagnostic>& diags);

// Parses a single REPL/script update line "#update 2: assert(~r1).".
std::optional<UpdateRecord> parse_update_line(std::string_view text,
                                              const Program& program,
                                              std::vector<Diagnostic>& diags);

// Pretty-printers; parse(pretty(x)) == x on valid inputs.
std::string pretty(const Program& p);
std::string pretty(const UpdateScript& s);
std::string pretty(const Rule& r);

// The #r(Head,[Body]) rule-name fluent term for a preprocessed rule.
Term rule_name_term(const Rule& preprocessed_rule);

}  // namespace abdutab
