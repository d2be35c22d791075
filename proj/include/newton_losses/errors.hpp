// Copyright 2026 The Newton Losses Authors
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

namespace nl {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric failures map to CLI exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonFiniteResult : public NumericError {
 public:
  using NumericError::NumericError;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class MissingHessian : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public NumericError {
 public:
  using NumericError::NumericError;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment or CLI configuration; exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nl
