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

#ifndef LIFTCAL_LIFTING_HPP
#define LIFTCAL_LIFTING_HPP

#include <vector>

#include "liftcal/sim.hpp"

namespace liftcal {

/// (y_ref, x_ref, u_ref) satisfying the discrete dynamics of `model`.
struct ReferenceTriplet {
    MatrixXd y_ref;  ///< (T+1) x K
    MatrixXd x_ref;  ///< (T+1) x N
    ControlSchedule u_ref;
    HamiltonianModel model;

    Index steps() const { return u_ref.steps(); }
};

/// Rolls u out on `model` from x0; the result is feasible by construction.
ReferenceTriplet make_reference(const HamiltonianModel &model, const ControlSchedule &u,
                                const BlochState &x0);

/// max_s || f(x_ref(s), u_ref(s)) - x_ref(s+1) ||_2 evaluated on `model`.
double feasibility_remainder(const HamiltonianModel &model, const ReferenceTriplet &ref);

inline constexpr double kRemainderTol = 1e-10;

/// Per-step Jacobians of the discrete flow f(x, u) = exp(dt G(u)) x.
struct Jacobians {
    std::vector<MatrixXd> a;  ///< df/dx, N x N
    std::vector<MatrixXd> b;  ///< df/du, N x J
};

/// Linearize the nominal flow along the reference. A(s) is the step
/// propagator; column j of B(s) is the Frechet derivative of the exponential
/// in direction dt Gj applied to x_ref(s).
Jacobians linearize(const HamiltonianModel &model, const ReferenceTriplet &ref,
                    double remainder_tol = kRemainderTol);

/// Lifted input-output map dx = F du, dy = G dx with time-major stacking.
struct LiftedSystem {
    MatrixXd f_ref;        ///< (T+1)N x TJ, strictly block lower triangular
    MatrixXd g;            ///< (T+1)K x (T+1)N, I_{T+1} (x) C
    Jacobians jacobians;
    Index steps = 0;
    Index state_dim = 0;
    Index channels = 0;
};

LiftedSystem build_lifted(const Jacobians &jac, const MatrixXd &observation);

struct LiftedDeviation {
    VectorXd dx;
    VectorXd dy;
    VectorXd du;
};

inline constexpr double kResetTol = 1e-10;

/// Stacked deviations of a rollout from the reference. Throws ResetError when
/// the rollout did not start from x_ref(0).
LiftedDeviation lift_deviation(const RolloutRecord &record, const ReferenceTriplet &ref,
                               double reset_tol = kResetTol);

/// Row-major flattening of a (T+1) x N trajectory, i.e. time-major stacking.
VectorXd stack_time_major(const MatrixXd &rows);

}  // namespace liftcal

#endif  // LIFTCAL_LIFTING_HPP
