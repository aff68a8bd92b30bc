#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "pshlab/expr.hpp"

namespace pshlab {

struct ParseError : ExprError {
  ParseError(const std::string& msg, std::size_t pos);
  std::size_t position;
};

// Parses the expression DSL over x, y, u, v with operators + - * / ^ (integer
// exponent), functions ln, cos, sin, tan, exp, sqrt, parenthesized
// subexpressions, named parameters $name bound through `params`, and the
// macros absz2 = x^2+y^2, absw2 = u^2+v^2. Whitespace-insensitive; the
// UTF-8 minus sign is accepted as '-'.
ScalarField parse_field(const std::string& src,
                        const std::map<std::string, double>& params = {});

// Re-emits a field as DSL text; parse_field(to_dsl(f)) evaluates like f.
// Shared subgraphs are expanded, so the text can be much larger than the
// graph; `max_size` caps the output (0 = unlimited) and an ellipsis marker
// plus error is produced past the cap.
std::string to_dsl(const ScalarField& f, std::size_t max_size = 0);

}  // namespace pshlab
