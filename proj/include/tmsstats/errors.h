// Copyright 2026 The tmsstats Authors
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

#ifndef TMSSTATS_ERRORS_H
#define TMSSTATS_ERRORS_H

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tms {

/// A numeric or physicality failure: an invariant of a computed quantity does
/// not hold (unphysical state, zero variance, infeasible budget, ...).
/// Argument validation failures use std::invalid_argument instead.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised by the Fock oracle when a circuit falls outside what it can
/// represent exactly (squeezer on an occupied mode, too many modes).
struct UnsupportedCircuit : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a computation would exceed a configured size cap.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Circuit document error carrying a 1-based source position.
struct ParseError : std::runtime_error {
    size_t line;
    size_t column;
    ParseError(size_t line, size_t column, const std::string &message)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line(line),
          column(column) {
    }
};

}  // namespace tms

#endif
