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

#ifndef LIFTCAL_CHECKS_HPP
#define LIFTCAL_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace liftcal {

struct CheckResult {
    std::string name;
    double value = 0.0;  ///< worst observed error
    double tolerance = 0.0;
    bool passed = false;
};

/// Seeded self-checks of the structural invariants: Pauli orthogonality and
/// structure constants, generator skew-symmetry against the commutator,
/// norm conservation over long rollouts, lifted-map triangularity against the
/// linear recursion, and Jacobians against central differences.
std::vector<CheckResult> structural_checks(std::uint64_t seed);

}  // namespace liftcal

#endif  // LIFTCAL_CHECKS_HPP
