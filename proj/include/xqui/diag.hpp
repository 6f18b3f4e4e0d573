#pragma once

#include <stdexcept>
#include <string>

namespace xqui {

// Base class for all errors raised by the library.  CLI maps these to exit code 2
// (input/usage problems) except EvalError subtypes raised while applying an
// update, which are runtime failures of the evaluated expression itself.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax error in a DTD, document, query or update, with 1-based position.
struct ParseError : Error {
    int line;
    int col;
    ParseError(const std::string& msg, int line_, int col_)
        : Error(msg + " (line " + std::to_string(line_) + ", col " + std::to_string(col_) + ")"),
          line(line_), col(col_) {}
};

// Dynamic (evaluation-time) error: unbound variable, node constructed where a
// tree was required, etc.
struct EvalError : Error {
    explicit EvalError(const std::string& msg) : Error(msg) {}
};

// Update target produced the wrong number of nodes (insert/replace/rename need
// exactly one).
struct CardinalityError : EvalError {
    explicit CardinalityError(const std::string& msg) : EvalError(msg) {}
};

} // namespace xqui
