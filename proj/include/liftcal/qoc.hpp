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

#ifndef LIFTCAL_QOC_HPP
#define LIFTCAL_QOC_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "liftcal/lifting.hpp"

namespace liftcal {

/// Target unitary for the gate, defined up to a global phase.
struct GateTarget {
    MatrixXc unitary;

    static GateTarget from_unitary(const MatrixXc &u);
    Index dim() const { return unitary.rows(); }
};

enum class InitialGuess { Zero, ConstantArea, RandomSeeded };

struct QocConfig {
    int max_iterations = 500;
    double gradient_tolerance = 1e-12;
    /// Design succeeds when 1 - F <= infidelity_tolerance on the design model.
    double infidelity_tolerance = 1e-6;
    double u_sat = 1.0;
    InitialGuess initial_guess = InitialGuess::ConstantArea;
    /// Relative size of the smooth random perturbation used by RandomSeeded.
    double perturbation = 0.3;
    int random_restarts = 3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct QocResult {
    ReferenceTriplet reference;
    ControlSchedule controls;
    double infidelity = 1.0;
    /// Best-so-far infidelity after each accepted iterate.
    std::vector<double> history;
    int iterations = 0;
};

/// Time-ordered product U(T-1) ... U(0) of exp(-i dt H(u(s))).
MatrixXc gate_unitary(const HamiltonianModel &model, const ControlSchedule &u);

/// |Tr(U^dagger U_target)| / d.
double gate_fidelity(const HamiltonianModel &model, const ControlSchedule &u,
                     const GateTarget &target);

/// Constant pulse whose area reproduces the target when the drift is ignored.
ControlSchedule constant_area_guess(const HamiltonianModel &model, const GateTarget &target);

/// GRAPE-style pulse design with exact gradients and amplitude clipping.
/// The reference is the rollout of the returned controls on `model`.
/// Throws QocConvergenceError when the tolerance is not met.
QocResult design_reference(const HamiltonianModel &model, const GateTarget &target,
                           const BlochState &x0, const QocConfig &cfg,
                           const std::optional<ControlSchedule> &warm_start = std::nullopt);

}  // namespace liftcal

#endif  // LIFTCAL_QOC_HPP
