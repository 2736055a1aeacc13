// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace rme {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation
/// (non-positive watts, location outside a map, zero Friis distance).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or parameter combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Factorization failure, singular system, or a broken internal identity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Linear system without a unique solution, e.g. conflicting noiseless
/// readings at one location.
class IllPosedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A noiseless measurement that no map of the model can produce.
class InfeasibleMeasurement : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Rejection sampler finished without a single accepted draw.
class AcceptanceStarvation : public NumericalError {
 public:
  AcceptanceStarvation(const std::string& what, std::size_t draws)
      : NumericalError(what), draws_(draws) {}
  std::size_t draws() const noexcept { return draws_; }

 private:
  std::size_t draws_;
};

}  // namespace rme
