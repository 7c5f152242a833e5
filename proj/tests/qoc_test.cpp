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

#include "liftcal/qoc.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "liftcal/errors.hpp"
#include "support.hpp"

using namespace liftcal;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

const BlochState kGround{Eigen::Vector3d(0, 0, 1)};

GateTarget x_gate() { return GateTarget::from_unitary(pauli_x()); }

}  // namespace

TEST(qoc, target_must_be_unitary) {
    EXPECT_THROW(GateTarget::from_unitary(2.0 * pauli_x()), InvalidOperator);
    EXPECT_THROW(GateTarget::from_unitary(MatrixXc::Identity(2, 3)), InvalidOperator);
}

TEST(qoc, fidelity_is_phase_invariant) {
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    ControlSchedule u = ControlSchedule::zeros(10, 2);
    u.values.col(0).setConstant(kPi / 2.0 / 0.5);
    EXPECT_NEAR(gate_fidelity(m, u, x_gate()), 1.0, 1e-12);
    const Complex phase = std::exp(Complex(0.0, 0.7));
    EXPECT_NEAR(gate_fidelity(m, u, GateTarget::from_unitary(phase * pauli_x())), 1.0, 1e-12);
    const MatrixXc rx = su2_exp(kPi / 2.0, Eigen::Vector3d(1, 0, 0));
    EXPECT_LE((gate_unitary(m, u) - rx).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(qoc, fidelity_of_idle_and_half_rotation) {
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    EXPECT_NEAR(gate_fidelity(m, ControlSchedule::zeros(10, 2), x_gate()), 0.0, 1e-15);
    ControlSchedule u = ControlSchedule::zeros(10, 2);
    u.values.col(0).setConstant(kPi / 4.0 / 0.5);
    EXPECT_NEAR(gate_fidelity(m, u, x_gate()), std::cos(kPi / 4.0), 1e-9);
}

TEST(qoc, gate_unitary_is_time_ordered_product) {
    Rng rng(1);
    const HamiltonianModel m = single_qubit_model(0.1, 4);
    ControlSchedule u{rng.matrix(4, 2)};
    MatrixXc expected = MatrixXc::Identity(2, 2);
    for (Index s = 0; s < 4; ++s) {
        expected = qubit_propagator(Eigen::Vector3d(u.values(s, 0), u.values(s, 1), 0.0), 0.1) * expected;
    }
    EXPECT_LE((gate_unitary(m, u) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(qoc, constant_area_guess_is_the_analytic_pulse) {
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    const ControlSchedule g = constant_area_guess(m, x_gate());
    EXPECT_LE((g.values.col(0).array() - kPi / (2.0 * 10 * 0.05)).abs().maxCoeff(), 1e-10);
    EXPECT_LE(g.values.col(1).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(qoc, design_reaches_tolerance_on_nominal_model) {
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    for (InitialGuess g : {InitialGuess::Zero, InitialGuess::ConstantArea, InitialGuess::RandomSeeded}) {
        QocConfig cfg;
        cfg.u_sat = 2 * kPi;
        cfg.initial_guess = g;
        cfg.seed = 4;
        const QocResult r = design_reference(m, x_gate(), kGround, cfg);
        EXPECT_LE(r.infidelity, 1e-6);
        EXPECT_NEAR(1.0 - gate_fidelity(m, r.controls, x_gate()), r.infidelity, 1e-12);
        EXPECT_LE(r.controls.values.cwiseAbs().maxCoeff(), cfg.u_sat);
        EXPECT_LE(feasibility_remainder(m, r.reference), 1e-10);
        EXPECT_EQ(r.reference.u_ref.values, r.controls.values);
        for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1]);
    }
}

TEST(qoc, identity_target_keeps_zero_controls) {
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    QocConfig cfg;
    cfg.initial_guess = InitialGuess::Zero;
    const QocResult r = design_reference(m, GateTarget::from_unitary(MatrixXc::Identity(2, 2)), kGround, cfg);
    EXPECT_LE(r.infidelity, 1e-15);
    EXPECT_LE(r.controls.values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(qoc, design_on_model_with_drift_is_feasible_there) {
    HamiltonianModel m = apply_error_model(single_qubit_model(0.05, 10), ErrorModel::single_qubit(0.2, 0.0, 0.0));
    QocConfig cfg;
    cfg.u_sat = 2 * kPi;
    cfg.initial_guess = InitialGuess::RandomSeeded;
    const QocResult r = design_reference(m, x_gate(), kGround, cfg);
    EXPECT_LE(r.infidelity, 1e-6);
    EXPECT_LE(feasibility_remainder(m, r.reference), 1e-10);
}

TEST(qoc, respects_saturation_and_reports_best_infidelity) {
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    QocConfig cfg;
    cfg.u_sat = 1.0;  // below the pi / (T dt) amplitude of the rotation
    cfg.random_restarts = 1;
    try {
        design_reference(m, x_gate(), kGround, cfg);
        FAIL() << "expected QocConvergenceError";
    } catch (const QocConvergenceError &e) {
        EXPECT_GT(e.best_infidelity(), 1e-6);
        EXPECT_LT(e.best_infidelity(), 1.0);
    }
}

TEST(qoc, warm_start_is_used) {
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    QocConfig cfg;
    cfg.u_sat = 2 * kPi;
    const ControlSchedule warm = constant_area_guess(m, x_gate());
    const QocResult r = design_reference(m, x_gate(), kGround, cfg, warm);
    EXPECT_LE(r.infidelity, 1e-12);
    EXPECT_THROW(design_reference(m, x_gate(), kGround, cfg, ControlSchedule::zeros(9, 2)), ShapeError);
}

TEST(qoc, seeded_design_is_deterministic) {
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    QocConfig cfg;
    cfg.u_sat = 2 * kPi;
    cfg.initial_guess = InitialGuess::RandomSeeded;
    cfg.seed = 99;
    const QocResult a = design_reference(m, x_gate(), kGround, cfg);
    const QocResult b = design_reference(m, x_gate(), kGround, cfg);
    EXPECT_TRUE((a.controls.values.array() == b.controls.values.array()).all());
}

TEST(qoc, config_validation) {
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    QocConfig cfg;
    cfg.max_iterations = 0;
    EXPECT_THROW(design_reference(m, x_gate(), kGround, cfg), ConfigError);
    cfg = QocConfig{};
    cfg.u_sat = 0.0;
    EXPECT_THROW(design_reference(m, x_gate(), kGround, cfg), ConfigError);
    EXPECT_THROW(gate_fidelity(m, ControlSchedule::zeros(10, 2), GateTarget::from_unitary(MatrixXc::Identity(4, 4))),
                 ShapeError);
}
