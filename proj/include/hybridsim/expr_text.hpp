// Copyright 2026 The hybridsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Text form of Hamiltonian expressions.
//
//   expr   := term (('+' | '-') term)*        a leading '-' is allowed
//   term   := [number '*'] factor ('*' factor)* | number
//   factor := NAME '@' INT ['^' INT]
//   NAME   := sx | sy | sz | I | X | P | a | ad   (powers only on X and P)
//
// Whitespace is insignificant. A bare number is a multiple of the identity.
// Factors on the same subsystem must be pre-multiplied; they are rejected.

#pragma once

#include <string>
#include <string_view>

#include "hybridsim/expr.hpp"

namespace hybridsim {

/// Throws ParseError with the line and column of the offending character.
HamiltonianExpr parse_hamiltonian(std::string_view text);

/// Canonical form, e.g. "1.5 * sz@0 * X@1 - 0.5 * X@1^2"; parses back to an equal expression.
std::string to_string(const HamiltonianExpr& expr);
/// Compact form without spaces or unit coefficients, e.g. "sz@0*X@1"; used as generator ids.
std::string to_compact(const HamiltonianExpr& expr);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace hybridsim
