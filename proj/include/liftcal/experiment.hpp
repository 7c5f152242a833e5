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

#ifndef LIFTCAL_EXPERIMENT_HPP
#define LIFTCAL_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "liftcal/orchestrator.hpp"

namespace liftcal {

enum class SweepMode { Lift, IlcOnly, Both };

std::string to_string(SweepMode mode);
SweepMode sweep_mode_from_string(const std::string &name);
std::string to_string(SignPolicy policy);
SignPolicy sign_policy_from_string(const std::string &name);

/// Single-qubit X-gate sweep over mean error levels.
struct ExperimentConfig {
    std::vector<double> eps_levels{0.01, 0.05, 0.1, 0.2, 0.3};
    int trials_per_level = 30;
    SignPolicy sign_policy = SignPolicy::Random;
    LiftConfig lift;
    std::filesystem::path output_dir = "liftcal-out";
    std::uint64_t master_seed = 2024;
    SweepMode mode = SweepMode::Both;
    double dt = 0.05;
    int horizon = 10;
    /// Worker threads; 0 picks the hardware concurrency.
    int jobs = 1;

    void validate() const;
};

/// Parses a JSON document whose keys mirror the ExperimentConfig fields.
/// Missing keys keep their defaults; unknown keys are a ConfigError.
ExperimentConfig config_from_json(const std::string &text);
ExperimentConfig load_config(const std::filesystem::path &path);
std::string config_to_json(const ExperimentConfig &cfg);

/// Replaces master_seed with LIFTCAL_SEED when that variable is set.
void apply_environment(ExperimentConfig &cfg);

/// Seed of trial (eps_index, trial_index). Derived by splitmix64 mixing so
/// streams of neighbouring trials are unrelated.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t eps_index,
                         std::size_t trial_index);

struct TrialResult {
    std::string trial_id;
    SweepMode mode = SweepMode::Lift;  ///< Lift or IlcOnly, never Both
    std::size_t eps_index = 0;
    std::size_t trial_index = 0;
    double eps_mean = 0.0;
    ErrorModel error;
    CalibrationTrace trace;
};

/// Runs one trial of one mode. Deterministic in (cfg, eps_index, trial_index).
TrialResult run_trial(const ExperimentConfig &cfg, std::size_t eps_index,
                      std::size_t trial_index, SweepMode mode);

/// All trials in (eps_index, trial_index, mode) order, computed on cfg.jobs
/// threads.
std::vector<TrialResult> run_trials(const ExperimentConfig &cfg);

inline constexpr const char *kTrialsCsvHeader =
    "trial_id,eps_mean,eps_z,eps_x,eps_y,rollout,phase,infidelity,tracking_rms,converged";

/// One row per rollout. `converged` is 1 on the rollout that met the stop rule.
std::string trials_csv(const std::vector<TrialResult> &results);

struct ModeSummary {
    SweepMode mode = SweepMode::Lift;
    int trials = 0;
    double converged_fraction = 0.0;
    /// Trials with at least one redesign, and with exactly one.
    double redesign_fraction = 0.0;
    double single_redesign_fraction = 0.0;
    /// Trials whose first rollout passed the feasibility check.
    double first_feasible_fraction = 0.0;
    double median_terminal_infidelity = 1.0;
    double median_rollouts = 0.0;
    int errors = 0;
    /// Entry r is the median over trials of the infidelity at rollout r + 1,
    /// carrying each trial's last value forward once it stops.
    std::vector<double> median_infidelity_by_rollout;
};

struct LevelSummary {
    double eps_mean = 0.0;
    std::vector<ModeSummary> modes;
};

struct SweepSummary {
    std::vector<LevelSummary> levels;

    const ModeSummary *find(std::size_t level, SweepMode mode) const;
};

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
double median(std::vector<double> values);

SweepSummary summarize(const ExperimentConfig &cfg, const std::vector<TrialResult> &results);
std::string summary_to_json(const SweepSummary &summary);

/// Checks output_dir is writable, runs every trial, then writes trials.csv,
/// summary.json and config.json. Throws IoError before any trial runs when
/// the directory cannot be written.
SweepSummary run_sweep(const ExperimentConfig &cfg);

void ensure_writable(const std::filesystem::path &dir);

struct StageDump {
    std::string name;  ///< "a".."d"
    std::string description;
    std::optional<std::filesystem::path> file;
    std::string note;
    std::optional<int> rollout;
    std::optional<double> infidelity;
    std::optional<double> tracking_rms;
};

/// Trajectory files for one trial at mean error `eps`:
///   (a) first rollout of the nominal design
///   (b) first rollout after the redesign
///   (c) final LIFT rollout
///   (d) final rollout of ILC without redesign
/// Each file holds columns s, x_ref(s), x(s), u(s). A stage that did not
/// occur is listed in manifest.json without a file.
std::vector<StageDump> dump_tracking(const ExperimentConfig &cfg, double eps,
                                     std::uint64_t seed);

/// Plain-text trajectory table for one rollout against its reference.
std::string trajectory_table(const RolloutRecord &record, const ReferenceTriplet &ref);

}  // namespace liftcal

#endif  // LIFTCAL_EXPERIMENT_HPP
