// Copyright 2026 The qdots Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qdots {

// Base for every error raised by the library. The CLI maps DomainError to a
// usage failure and everything else to a numerical failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Iteration failed to converge, a matrix was too ill-conditioned, or a
// sampler diagnostic tripped.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The Kraus product lost every direction.
class RankCollapsed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Deliberately unsupported corner of the model (see README).
class NotImplemented : public Error {
 public:
  using Error::Error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace qdots
