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

#include <cmath>
#include <numbers>
#include <random>

#include "liftcal/errors.hpp"

namespace liftcal {

namespace {

double tracking_rms(const RolloutRecord &rec, const ReferenceTriplet &ref) {
    const MatrixXd diff = rec.observations - ref.y_ref;
    return diff.norm() / std::sqrt(static_cast<double>(diff.size()));
}

ControlSchedule clip(ControlSchedule u, double u_sat) {
    u.values = u.values.cwiseMax(-u_sat).cwiseMin(u_sat);
    return u;
}

// Small smooth excitation added to replayed controls when a redesign asks for
// more than one rollout of data.
ControlSchedule excite(const ControlSchedule &u, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    ControlSchedule out = u;
    for (Index j = 0; j < u.channels(); ++j) {
        for (int mode = 1; mode <= 2; ++mode) {
            const double a = amplitude * coef(rng);
            for (Index s = 0; s < u.steps(); ++s) {
                out.values(s, j) +=
                    a * std::sin(std::numbers::pi * mode * (s + 0.5) / static_cast<double>(u.steps()));
            }
        }
    }
    return out;
}

struct Loop {
    const HamiltonianModel &nominal;
    const RolloutFn &experiment;
    const ScoreFn &score;
    const GateTarget &target;
    const BlochState &x0;
    const LiftConfig &cfg;
    bool allow_redesign;

    Loop(const HamiltonianModel &nominal_, const RolloutFn &experiment_, const ScoreFn &score_,
         const GateTarget &target_, const BlochState &x0_, const LiftConfig &cfg_, bool redesign)
        : nominal(nominal_), experiment(experiment_), score(score_), target(target_), x0(x0_),
          cfg(cfg_), allow_redesign(redesign) {}

    CalibrationTrace trace;
    HamiltonianModel model = nominal;
    int model_id = 0;
    std::vector<RolloutRecord> data;

    bool budget_left() const { return trace.rollouts_used < cfg.max_rollouts; }

    TraceEntry &record_rollout(const ControlSchedule &u, Phase phase, int iteration) {
        RolloutRecord rec = experiment(u);
        rec.iteration = iteration;
        rec.phase = phase;
        trace.rollouts_used += 1;
        TraceEntry entry;
        entry.rollout = trace.rollouts_used;
        entry.iteration = iteration;
        entry.phase = phase;
        entry.infidelity = score(u);
        entry.reference_id = static_cast<int>(trace.references.size()) - 1;
        entry.tracking_rms = tracking_rms(rec, trace.references.back());
        entry.model_id = model_id;
        entry.record = rec;
        data.push_back(std::move(rec));
        trace.entries.push_back(std::move(entry));
        return trace.entries.back();
    }

    bool done(const TraceEntry &entry) const {
        if (cfg.stop_rule == StopRule::TrackingRms) return entry.tracking_rms <= cfg.tracking_tolerance;
        return entry.infidelity <= 1.0 - cfg.target_fidelity;
    }

    LearnedModel identify(std::span<const RolloutRecord> records) const {
        SnapshotSet snap = assemble_snapshots(records, model.dt, cfg.identification);
        BilinearDmdOptions opts;
        opts.constrain_skew = true;
        opts.prior = learned_from(model);
        opts.prior_weight = cfg.prior_weight;
        opts.basis = model.basis;
        return bilinear_dmd(snap, opts);
    }

    CalibrationTrace run() {
        cfg.validate();
        QocResult design;
        try {
            design = design_reference(model, target, x0, cfg.qoc);
        } catch (const QocConvergenceError &e) {
            trace.error = e.what();
            return std::move(trace);
        }
        trace.references.push_back(design.reference);
        ControlSchedule u = design.controls;
        Phase phase = Phase::InitialQoc;
        LiftedSystem lifted = build_lifted(linearize(model, trace.references.back()), model.observation);
        IlcState ilc_state;

        for (int j = 0; budget_left(); ++j) {
            TraceEntry &entry = record_rollout(u, phase, j);
            trace.u_star = u;
            if (done(entry)) {
                trace.converged = true;
                break;
            }
            if (!budget_left()) break;

            if (allow_redesign) {
                const LearnedModel check = identify(std::span<const RolloutRecord>(&data.back(), 1));
                const FeasibilityReport rep = feasibility_report(model, check, cfg.feasibility_threshold);
                entry.feasible = rep.feasible;
                entry.drift_error = rep.drift_error;
                if (!rep.feasible && trace.redesigns >= cfg.max_redesigns) {
                    trace.warnings.push_back("rollout " + std::to_string(entry.rollout) +
                                             ": reference still infeasible after redesign, continuing with ILC");
                } else if (!rep.feasible) {
                    entry.used_for_dmd = true;
                    for (int extra = 1; extra < cfg.dmd_rollout_budget && budget_left(); ++extra) {
                        const ControlSchedule probe =
                            clip(excite(u, 0.05 * cfg.qoc.u_sat, cfg.seed + 7919u * extra), cfg.qoc.u_sat);
                        TraceEntry &more = record_rollout(probe, phase, j);
                        more.used_for_dmd = true;
                    }
                    if (!budget_left()) break;
                    const LearnedModel learned = identify(data);
                    HamiltonianModel next_model = learned.to_model(nominal);
                    QocConfig qcfg = cfg.qoc;
                    qcfg.seed = cfg.seed + 104729u * static_cast<std::uint64_t>(trace.redesigns + 1);
                    try {
                        design = design_reference(next_model, target, x0, qcfg, u);
                    } catch (const QocConvergenceError &e) {
                        trace.error = e.what();
                        break;
                    }
                    model = std::move(next_model);
                    model_id += 1;
                    trace.redesigns += 1;
                    trace.references.push_back(design.reference);
                    lifted = build_lifted(linearize(model, trace.references.back()), model.observation);
                    ilc_state = IlcState{};
                    u = design.controls;
                    phase = Phase::DmdRedesign;
                    continue;
                }
            }

            const IlcStepResult step =
                ilc_step(lifted, data.back(), trace.references.back(), ilc_state, cfg.ilc);
            ilc_state = step.state;
            if (!step.converged) {
                trace.warnings.push_back("rollout " + std::to_string(entry.rollout) +
                                         ": ILC correction stopped before reaching the QP tolerance");
            }
            u = ControlSchedule::from_lifted(trace.references.back().u_ref.lifted() + step.delta_u,
                                             model.horizon, model.num_controls());
            phase = Phase::Ilc;
        }
        return std::move(trace);
    }
};

}  // namespace

void LiftConfig::validate() const {
    if (!(target_fidelity > 0.0 && target_fidelity < 1.0)) {
        throw ConfigError("target_fidelity must lie in (0, 1)");
    }
    if (max_rollouts < 1) throw ConfigError("max_rollouts must be >= 1");
    if (dmd_rollout_budget < 1) throw ConfigError("dmd_rollout_budget must be >= 1");
    if (max_redesigns < 0) throw ConfigError("max_redesigns must be >= 0");
    if (prior_weight < 0.0) throw ConfigError("prior_weight must be non-negative");
    if (!(feasibility_threshold > 0.0)) throw ConfigError("feasibility_threshold must be positive");
    ilc.validate();
    qoc.validate();
    if (ilc.u_sat != qoc.u_sat) throw ConfigError("ilc and qoc saturation bounds differ");
}

CalibrationTrace run_lift(const HamiltonianModel &nominal, const RolloutFn &experiment,
                          const ScoreFn &score, const GateTarget &target, const BlochState &x0,
                          const LiftConfig &cfg) {
    Loop loop(nominal, experiment, score, target, x0, cfg, true);
    return loop.run();
}

CalibrationTrace run_ilc_only(const HamiltonianModel &nominal, const RolloutFn &experiment,
                              const ScoreFn &score, const GateTarget &target,
                              const BlochState &x0, const LiftConfig &cfg) {
    Loop loop(nominal, experiment, score, target, x0, cfg, false);
    return loop.run();
}

RolloutFn simulated_rollout(const HamiltonianModel &experiment, const BlochState &x0) {
    return [experiment, x0](const ControlSchedule &u) { return rollout(experiment, u, x0); };
}

ScoreFn simulated_score(const HamiltonianModel &experiment, const GateTarget &target) {
    return [experiment, target](const ControlSchedule &u) {
        return 1.0 - gate_fidelity(experiment, u, target);
    };
}

CalibrationTrace run_lift(const HamiltonianModel &nominal, const HamiltonianModel &experiment,
                          const GateTarget &target, const BlochState &x0, const LiftConfig &cfg) {
    return run_lift(nominal, simulated_rollout(experiment, x0), simulated_score(experiment, target),
                    target, x0, cfg);
}

CalibrationTrace run_ilc_only(const HamiltonianModel &nominal, const HamiltonianModel &experiment,
                              const GateTarget &target, const BlochState &x0,
                              const LiftConfig &cfg) {
    return run_ilc_only(nominal, simulated_rollout(experiment, x0),
                        simulated_score(experiment, target), target, x0, cfg);
}

bool convergence_check(const CalibrationTrace &trace, const LiftConfig &cfg) {
    if (trace.entries.empty()) return false;
    if (trace.final_infidelity() <= 1.0 - cfg.target_fidelity) return true;
    return trace.rollouts_used >= cfg.max_rollouts;
}

}  // namespace liftcal
