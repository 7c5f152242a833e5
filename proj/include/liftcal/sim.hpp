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

#ifndef LIFTCAL_SIM_HPP
#define LIFTCAL_SIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "liftcal/pauli.hpp"

namespace liftcal {

/// Bilinear model dx/dt = (G0 + sum_j u_j Gj) x, y = C x, sampled every dt
/// with zero-order-hold controls over `horizon` steps.
///
/// Hamiltonians and their real generators are both stored. Models built from
/// learned generators reconstruct the Hamiltonians by projection onto the
/// Pauli generators.
struct HamiltonianModel {
    PauliBasisPtr basis;
    MatrixXc drift_hamiltonian;
    std::vector<MatrixXc> control_hamiltonians;
    MatrixXd drift;
    std::vector<MatrixXd> controls;
    double dt = 0.0;
    int horizon = 0;
    MatrixXd observation;

    static HamiltonianModel from_hamiltonians(PauliBasisPtr basis, const MatrixXc &h0,
                                              const std::vector<MatrixXc> &hc, double dt,
                                              int horizon, MatrixXd observation = {});
    static HamiltonianModel from_generators(PauliBasisPtr basis, const MatrixXd &g0,
                                            const std::vector<MatrixXd> &gc, double dt,
                                            int horizon, MatrixXd observation = {});

    Index state_dim() const { return drift.rows(); }
    Index num_controls() const { return static_cast<Index>(controls.size()); }
    Index num_observables() const { return observation.rows(); }

    MatrixXd generator(const Eigen::Ref<const VectorXd> &u) const;
    MatrixXc hamiltonian(const Eigen::Ref<const VectorXd> &u) const;

    /// Throws ConfigError/ShapeError if an invariant is broken.
    void validate() const;
};

/// Nominal single-qubit model: zero drift, controls on X and Y, C = I.
HamiltonianModel single_qubit_model(double dt, int horizon);

/// Controls u[s][j], held constant over step s. Stored steps x channels.
struct ControlSchedule {
    MatrixXd values;

    Index steps() const { return values.rows(); }
    Index channels() const { return values.cols(); }

    /// Time-major stacking [u(0); u(1); ...; u(T-1)].
    VectorXd lifted() const;
    static ControlSchedule from_lifted(const VectorXd &v, Index steps, Index channels);
    static ControlSchedule zeros(Index steps, Index channels);
};

/// Coherent model error: an additive drift (H0 += sum_i c_i P_i) and
/// multiplicative gain errors on each control's Pauli coefficients
/// (h_ij -> (1 + eps_ij) h_ij).
struct ErrorModel {
    VectorXd drift_offset;
    MatrixXd gain_error;

    static ErrorModel zero(Index axes, Index controls);
    /// eps_z Z + u_x (1 + eps_x) X + u_y (1 + eps_y) Y.
    static ErrorModel single_qubit(double eps_z, double eps_x, double eps_y);

    bool is_zero() const;
};

enum class SignPolicy { Random, Positive };

/// Each of (eps_z, eps_x, eps_y) ~ N(+/-mean, mean^2 / 100). Under
/// SignPolicy::Random the sign of each component is a fair coin.
ErrorModel sample_error_model(double mean_eps, std::uint64_t seed,
                              SignPolicy policy = SignPolicy::Random);

HamiltonianModel apply_error_model(const HamiltonianModel &nominal, const ErrorModel &err);

enum class Phase { InitialQoc, DmdRedesign, Ilc };

std::string to_string(Phase phase);

struct RolloutRecord {
    MatrixXd states;        ///< (T+1) x N, row s is x(s)
    MatrixXd observations;  ///< (T+1) x K, row s is y(s)
    ControlSchedule controls;
    int iteration = 0;
    Phase phase = Phase::InitialQoc;

    Index steps() const { return controls.steps(); }
};

/// exp(dt (G0 + sum_j u_j Gj)).
MatrixXd step_propagator(const HamiltonianModel &model, const Eigen::Ref<const VectorXd> &u);

struct RolloutOptions {
    /// Standard deviation of additive Gaussian noise on y. Off by default.
    double observation_noise = 0.0;
    std::uint64_t noise_seed = 0;
};

RolloutRecord rollout(const HamiltonianModel &model, const ControlSchedule &u,
                      const BlochState &x0, const RolloutOptions &options = {});

}  // namespace liftcal

#endif  // LIFTCAL_SIM_HPP
