#pragma once

// Small arithmetic expression language for user-supplied scalar functions of
// the shape coordinates (phi, potentials).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Functions: ln, log, exp, sqrt, sin, cos, tan, abs. Constants: pi, e.

#include <map>
#include <stdexcept>
#include <string>

#include "chaplygin/numkit.hpp"

namespace chaplygin::cli {

class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Maps variable names to the index they read from the argument vector.
using VariableTable = std::map<std::string, Index>;

/// Parses `source` and returns f(v) evaluating it with the variables bound to
/// entries of v. Throws ExpressionError on syntax errors or unknown names.
ScalarMap compile_expression(const std::string& source, const VariableTable& variables);

/// s1..sr bound to entries 0..r-1.
VariableTable shape_variables(Index r);

}  // namespace chaplygin::cli
