#pragma once

#include <string>
#include <vector>

#include "opetri/compose.hpp"

namespace opetri {

/// Syntax error with a 1-based source location.
struct ParseError : Error {
    ParseError(const std::string& msg, int line, int column)
        : Error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
          line(line),
          column(column) {}
    int line;
    int column;
};

struct UwdParse {
    UWD uwd;
    std::string name;  // the diagram name from the header, presentation only
    std::vector<std::string> warnings;
};

/// Parses the relational surface syntax for wiring diagrams:
///
///   uwd NAME ( VAR , ... ) {
///     junction VAR ;        # optional explicit junction declarations
///     BOX ( VAR , ... ) ;
///     ...
///   }
///
/// Head variables become outer ports. Every distinct variable becomes a
/// junction; sharing a variable between boxes is the wiring mechanism.
/// Identifiers match [A-Za-z_][A-Za-z0-9_]*, whitespace is free-form,
/// boxes are separated by ';' or newline, and '#' starts a line comment.
///
/// Junction order: explicit `junction` declarations first (in source
/// order), then remaining variables in first-occurrence order (head, then
/// body). The declarations exist so that any junction ordering, including
/// junctions wired to nothing, can be written down and round-tripped;
/// `junction` is a reserved word and cannot name a box.
///
/// A head variable used by no box is legal (it stays an unwired junction)
/// but produces a warning.
UwdParse parse_uwd(const std::string& source);

/// Canonical text for a diagram; parse_uwd(print_uwd(u)) reproduces u
/// exactly. Prints the compact form (no junction declarations) whenever
/// the junction order is recoverable from first occurrences alone, and
/// falls back to declaring every junction otherwise. Requires all names to
/// be valid identifiers.
std::string print_uwd(const UWD& u, const std::string& name = "anon");

}  // namespace opetri
