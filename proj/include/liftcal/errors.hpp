// Copyright 2026 The liftcal Authors
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

#ifndef LIFTCAL_ERRORS_HPP
#define LIFTCAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace liftcal {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

/// Density matrix or Bloch vector that is not a physical state.
class InvalidState : public Error {
public:
    using Error::Error;
};

/// Operator that should be Hermitian (or unitary) but is not.
class InvalidOperator : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Reference triplet whose remainder f(x_ref(s), u_ref(s)) - x_ref(s+1) is not zero.
class InfeasibleReference : public Error {
public:
    using Error::Error;
};

/// Rollout whose first snapshot does not match the reference initial state.
class ResetError : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Output location that cannot be created or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Raised when the pulse optimizer misses its infidelity tolerance.
class QocConvergenceError : public Error {
public:
    QocConvergenceError(const std::string &what, double best_infidelity)
        : Error(what), best_infidelity_(best_infidelity) {}

    double best_infidelity() const noexcept { return best_infidelity_; }

private:
    double best_infidelity_;
};

}  // namespace liftcal

#endif  // LIFTCAL_ERRORS_HPP
