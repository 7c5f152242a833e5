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

#include "liftcal/orchestrator.hpp"

#include <gtest/gtest.h>

#include "liftcal/errors.hpp"
#include "support.hpp"

using namespace liftcal;
using namespace testing_support;

namespace {

const BlochState kGround{Eigen::Vector3d(0, 0, 1)};

GateTarget x_gate() { return GateTarget::from_unitary(pauli_x()); }

HamiltonianModel nominal() { return single_qubit_model(0.05, 10); }

LiftConfig seeded(std::uint64_t seed) {
    LiftConfig cfg;
    cfg.seed = seed;
    cfg.qoc.seed = seed + 1;
    return cfg;
}

}  // namespace

TEST(orchestrator, exact_model_converges_on_first_rollout) {
    const HamiltonianModel m = nominal();
    const CalibrationTrace t = run_lift(m, m, x_gate(), kGround, seeded(1));
    EXPECT_TRUE(t.converged);
    EXPECT_EQ(t.rollouts_used, 1);
    EXPECT_EQ(t.redesigns, 0);
    ASSERT_EQ(t.entries.size(), 1u);
    EXPECT_EQ(t.entries[0].phase, Phase::InitialQoc);
    EXPECT_LE(t.final_infidelity(), 1e-6);
    EXPECT_TRUE(convergence_check(t, seeded(1)));
}

TEST(orchestrator, experiment_is_only_seen_through_rollouts) {
    const HamiltonianModel m = nominal();
    const HamiltonianModel hidden = apply_error_model(m, ErrorModel::single_qubit(0.1, -0.1, 0.05));
    int calls = 0, scores = 0;
    const RolloutFn inner = simulated_rollout(hidden, kGround);
    const ScoreFn inner_score = simulated_score(hidden, x_gate());
    RolloutFn opaque = [&](const ControlSchedule &u) {
        ++calls;
        return inner(u);
    };
    ScoreFn opaque_score = [&](const ControlSchedule &u) {
        ++scores;
        return inner_score(u);
    };
    const CalibrationTrace a = run_lift(m, opaque, opaque_score, x_gate(), kGround, seeded(2));
    const CalibrationTrace b = run_lift(m, hidden, x_gate(), kGround, seeded(2));
    EXPECT_EQ(a.rollouts_used, calls);
    EXPECT_EQ(static_cast<int>(a.entries.size()), calls);
    EXPECT_EQ(scores, calls);
    EXPECT_TRUE((a.u_star.values.array() == b.u_star.values.array()).all());
    EXPECT_EQ(a.rollouts_used, b.rollouts_used);
}

TEST(orchestrator, run_is_deterministic) {
    const HamiltonianModel m = nominal();
    const HamiltonianModel hidden = apply_error_model(m, sample_error_model(0.1, 77));
    const CalibrationTrace a = run_lift(m, hidden, x_gate(), kGround, seeded(3));
    const CalibrationTrace b = run_lift(m, hidden, x_gate(), kGround, seeded(3));
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t k = 0; k < a.entries.size(); ++k) {
        EXPECT_EQ(a.entries[k].infidelity, b.entries[k].infidelity);
        EXPECT_EQ(a.entries[k].phase, b.entries[k].phase);
    }
}

TEST(orchestrator, budget_is_respected) {
    const HamiltonianModel m = nominal();
    const HamiltonianModel hidden = apply_error_model(m, ErrorModel::single_qubit(0.3, 0.3, -0.3));
    LiftConfig cfg = seeded(4);
    cfg.max_rollouts = 2;
    cfg.max_redesigns = 0;
    cfg.target_fidelity = 1.0 - 1e-14;
    const CalibrationTrace t = run_lift(m, hidden, x_gate(), kGround, cfg);
    EXPECT_FALSE(t.converged);
    EXPECT_EQ(t.rollouts_used, 2);
    EXPECT_TRUE(convergence_check(t, cfg));
}

TEST(orchestrator, convergence_check_examples) {
    LiftConfig cfg;
    cfg.target_fidelity = 0.999;
    cfg.max_rollouts = 5;
    CalibrationTrace t;
    EXPECT_FALSE(convergence_check(t, cfg));
    TraceEntry e;
    e.infidelity = 0.01;
    t.entries.push_back(e);
    t.rollouts_used = 1;
    EXPECT_FALSE(convergence_check(t, cfg));
    t.entries.back().infidelity = 5e-4;
    EXPECT_TRUE(convergence_check(t, cfg));
    t.entries.back().infidelity = 0.01;
    t.rollouts_used = 5;
    EXPECT_TRUE(convergence_check(t, cfg));
}

TEST(orchestrator, large_mismatch_triggers_one_redesign) {
    const HamiltonianModel m = nominal();
    const HamiltonianModel hidden = apply_error_model(m, ErrorModel::single_qubit(0.2, 0.2, -0.2));
    const CalibrationTrace t = run_lift(m, hidden, x_gate(), kGround, seeded(5));
    ASSERT_GE(t.entries.size(), 2u);
    EXPECT_EQ(t.entries[0].phase, Phase::InitialQoc);
    EXPECT_EQ(t.entries[0].feasible, std::optional<bool>(false));
    EXPECT_EQ(t.entries[1].phase, Phase::DmdRedesign);
    for (std::size_t k = 2; k < t.entries.size(); ++k) EXPECT_EQ(t.entries[k].phase, Phase::Ilc);
    EXPECT_EQ(t.redesigns, 1);
    EXPECT_EQ(t.references.size(), 2u);
    EXPECT_TRUE(t.converged);
    EXPECT_LE(t.final_infidelity(), 1e-4);
}

TEST(orchestrator, small_mismatch_goes_straight_to_ilc) {
    const HamiltonianModel m = nominal();
    const HamiltonianModel hidden = apply_error_model(m, ErrorModel::single_qubit(0.005, 0.005, 0.005));
    const CalibrationTrace t = run_lift(m, hidden, x_gate(), kGround, seeded(6));
    EXPECT_EQ(t.redesigns, 0);
    EXPECT_TRUE(t.converged);
    for (std::size_t k = 1; k < t.entries.size(); ++k) EXPECT_EQ(t.entries[k].phase, Phase::Ilc);
}

TEST(orchestrator, ilc_only_never_redesigns) {
    const HamiltonianModel m = nominal();
    const HamiltonianModel hidden = apply_error_model(m, ErrorModel::single_qubit(0.2, 0.2, -0.2));
    LiftConfig cfg = seeded(7);
    cfg.max_rollouts = 8;
    const CalibrationTrace t = run_ilc_only(m, hidden, x_gate(), kGround, cfg);
    EXPECT_EQ(t.redesigns, 0);
    EXPECT_EQ(t.references.size(), 1u);
    for (const auto &e : t.entries) EXPECT_NE(e.phase, Phase::DmdRedesign);
    EXPECT_LE(t.rollouts_used, 8);
}

TEST(orchestrator, config_validation) {
    const HamiltonianModel m = nominal();
    LiftConfig cfg;
    cfg.target_fidelity = 1.0;
    EXPECT_THROW(run_lift(m, m, x_gate(), kGround, cfg), ConfigError);
    cfg = LiftConfig{};
    cfg.max_rollouts = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = LiftConfig{};
    cfg.ilc.u_sat = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = LiftConfig{};
    cfg.feasibility_threshold = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_NO_THROW(LiftConfig{}.validate());
}

TEST(orchestrator, phase_names) {
    EXPECT_EQ(to_string(Phase::InitialQoc), "initial-qoc");
    EXPECT_EQ(to_string(Phase::DmdRedesign), "dmd-redesign");
    EXPECT_EQ(to_string(Phase::Ilc), "ilc");
}
