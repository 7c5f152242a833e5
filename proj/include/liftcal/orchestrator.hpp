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

#ifndef LIFTCAL_ORCHESTRATOR_HPP
#define LIFTCAL_ORCHESTRATOR_HPP

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "liftcal/ilc.hpp"
#include "liftcal/qoc.hpp"
#include "liftcal/sysid.hpp"

namespace liftcal {

enum class StopRule {
    /// Stop once the out-of-band gate infidelity meets the target.
    ScoredFidelity,
    /// Stop once the tracking RMS falls below LiftConfig::tracking_tolerance.
    TrackingRms,
};

/// Default amplitude bound. With dt = 0.05 and T = 10 the constant-area
/// pi rotation needs |u| = pi, leaving room for 40% gain errors.
inline constexpr double kDefaultUSat = 2.0 * std::numbers::pi;

struct LiftConfig {
    double target_fidelity = 0.9999;
    int max_rollouts = 50;
    double feasibility_threshold = 0.05;
    /// Rollouts consumed per redesign. Extra rollouts beyond the one that
    /// failed the feasibility check replay the controls with a small seeded
    /// perturbation.
    int dmd_rollout_budget = 1;
    int max_redesigns = 1;
    /// Shrinkage toward the current model during identification. Keeps
    /// directions the data does not excite at their prior values.
    double prior_weight = 1e-8;
    DerivativeMode identification = DerivativeMode::ExactZoh;
    StopRule stop_rule = StopRule::ScoredFidelity;
    double tracking_tolerance = 0.0;
    /// Both solvers share one amplitude bound; validate() rejects a mismatch.
    IlcConfig ilc = [] {
        IlcConfig c;
        c.u_sat = kDefaultUSat;
        c.du_sat = kDefaultUSat / 2;
        return c;
    }();
    QocConfig qoc = [] {
        QocConfig c;
        c.u_sat = kDefaultUSat;
        c.initial_guess = InitialGuess::RandomSeeded;
        return c;
    }();
    std::uint64_t seed = 0;

    void validate() const;
};

/// One rollout on the experiment.
struct TraceEntry {
    int rollout = 0;      ///< 1-based rollout count
    int iteration = 0;    ///< j in the calibration loop
    Phase phase = Phase::InitialQoc;
    double infidelity = 1.0;
    double tracking_rms = 0.0;
    bool used_for_dmd = false;
    std::optional<bool> feasible;
    std::optional<double> drift_error;
    int model_id = 0;     ///< 0 is the nominal model, k the k-th learned model
    int reference_id = 0;
    RolloutRecord record;
};

struct CalibrationTrace {
    std::vector<TraceEntry> entries;
    std::vector<ReferenceTriplet> references;
    ControlSchedule u_star;
    bool converged = false;
    int rollouts_used = 0;
    int redesigns = 0;
    std::vector<std::string> warnings;
    /// Set when the loop aborted (e.g. pulse design failed).
    std::optional<std::string> error;

    double final_infidelity() const { return entries.empty() ? 1.0 : entries.back().infidelity; }
};

/// Opaque access to the device: run a schedule from the reset state.
using RolloutFn = std::function<RolloutRecord(const ControlSchedule &)>;
/// Out-of-band gate infidelity of a schedule, used for scoring the trace.
using ScoreFn = std::function<double(const ControlSchedule &)>;

CalibrationTrace run_lift(const HamiltonianModel &nominal, const RolloutFn &experiment,
                          const ScoreFn &score, const GateTarget &target, const BlochState &x0,
                          const LiftConfig &cfg);

CalibrationTrace run_ilc_only(const HamiltonianModel &nominal, const RolloutFn &experiment,
                              const ScoreFn &score, const GateTarget &target,
                              const BlochState &x0, const LiftConfig &cfg);

/// Convenience overloads for a simulated experiment. The calibration loop
/// only sees the experiment through rollout and scoring closures.
CalibrationTrace run_lift(const HamiltonianModel &nominal, const HamiltonianModel &experiment,
                          const GateTarget &target, const BlochState &x0, const LiftConfig &cfg);

CalibrationTrace run_ilc_only(const HamiltonianModel &nominal, const HamiltonianModel &experiment,
                              const GateTarget &target, const BlochState &x0,
                              const LiftConfig &cfg);

/// True once the latest scored infidelity meets the target or the rollout
/// budget is spent. Only the former sets CalibrationTrace::converged.
bool convergence_check(const CalibrationTrace &trace, const LiftConfig &cfg);

RolloutFn simulated_rollout(const HamiltonianModel &experiment, const BlochState &x0);
ScoreFn simulated_score(const HamiltonianModel &experiment, const GateTarget &target);

}  // namespace liftcal

#endif  // LIFTCAL_ORCHESTRATOR_HPP
