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

#ifndef LIFTCAL_ILC_HPP
#define LIFTCAL_ILC_HPP

#include <vector>

#include "liftcal/lifting.hpp"

namespace liftcal {

/// Norm-optimal ILC weights and limits. The correction solves
///
///   min  1/2 ||W (F du + d)||^2 + 1/2 lambda^2 ||D du||^2
///   s.t. |u_ref + du| <= u_sat,  |du| <= du_sat   (entrywise)
///
/// where D is the forward difference over time of each control channel.
struct IlcConfig {
    /// Output weight on the lifted state deviation; empty means identity.
    MatrixXd weight;
    double lambda = 1e-3;
    double u_sat = 1.0;
    double du_sat = 0.5;
    int max_qp_iterations = 20000;
    double qp_tolerance = 1e-11;

    void validate() const;
};

struct IlcState {
    VectorXd d_hat;
    VectorXd delta_u;
    int iteration = 0;
    std::vector<double> tracking_rms;
};

/// (T-1)J x TJ forward-difference operator on time-major lifted controls.
MatrixXd difference_operator(Index steps, Index channels);

/// d = dx - F du.
VectorXd disturbance(const MatrixXd &f_ref, const VectorXd &dx, const VectorXd &du);

/// Disturbance from a rollout made with controls u_ref + delta_u_applied.
VectorXd estimate_disturbance(const LiftedSystem &lifted, const RolloutRecord &record,
                              const ReferenceTriplet &ref, const VectorXd &delta_u_applied);

struct BoxQpResult {
    VectorXd x;
    double objective = 0.0;
    /// || x - P(x - grad) ||_inf at the returned point.
    double stationarity = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// min 1/2 x'Hx + c'x over lo <= x <= hi with H symmetric positive
/// semidefinite. Accelerated projected gradient (step 1/L, adaptive restart)
/// with an active-set polish of the final iterate.
BoxQpResult solve_box_qp(const MatrixXd &h, const VectorXd &c, const VectorXd &lo,
                         const VectorXd &hi, double tol, int max_iterations);

struct Correction {
    VectorXd delta_u;
    double objective = 0.0;
    bool converged = false;
};

Correction solve_correction(const LiftedSystem &lifted, const VectorXd &d_hat,
                            const ControlSchedule &u_ref, const IlcConfig &cfg);

/// Same problem with the lifted map given directly.
Correction solve_correction(const MatrixXd &f_ref, const VectorXd &d_hat, const VectorXd &u_ref,
                            Index steps, Index channels, const IlcConfig &cfg);

struct IlcStepResult {
    VectorXd delta_u;
    IlcState state;
    bool converged = false;
};

/// Estimate the disturbance from `record` and solve for the next correction.
IlcStepResult ilc_step(const LiftedSystem &lifted, const RolloutRecord &record,
                       const ReferenceTriplet &ref, const IlcState &state, const IlcConfig &cfg);

/// ||I - F_ref^+ F_true||_2.
double contraction_estimate(const MatrixXd &f_true, const MatrixXd &f_ref);

}  // namespace liftcal

#endif  // LIFTCAL_ILC_HPP
