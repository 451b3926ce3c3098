// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace grin {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// smiles
struct SyntaxError : Error { using Error::Error; };
struct AnchorError : Error { using Error::Error; };
struct ConnectivityError : Error { using Error::Error; };

// graph / theory
struct DisconnectedError : Error { using Error::Error; };
struct MalformedError : Error { using Error::Error; };
struct ConstructionError : Error { using Error::Error; };

// numerics
struct ShapeError : Error { using Error::Error; };
struct EmptyGraphError : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };
struct TrainingFailure : Error { using Error::Error; };

// io
struct IoError : Error { using Error::Error; };

}  // namespace grin
