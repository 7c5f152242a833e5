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

// liftcal: run calibration sweeps, dump tracking trajectories, and self-check.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "liftcal/checks.hpp"
#include "liftcal/errors.hpp"
#include "liftcal/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
    std::string config;
    std::vector<double> eps;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<int> max_rollouts;
    std::optional<double> target_fidelity;
    std::optional<double> lambda;
    std::optional<std::string> out;
    std::optional<int> jobs;
    bool full_scale = false;
};

void add_common(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--config", o.config, "JSON file with ExperimentConfig fields");
    cmd->add_option("--max-rollouts", o.max_rollouts, "Rollout budget per trial");
    cmd->add_option("--target-fidelity", o.target_fidelity, "Gate fidelity that ends a trial");
    cmd->add_option("--lambda", o.lambda, "ILC smoothness weight");
    cmd->add_option("--out", o.out, "Output directory");
}

liftcal::ExperimentConfig resolve(const Overrides &o) {
    liftcal::ExperimentConfig cfg;
    if (!o.config.empty()) cfg = liftcal::load_config(o.config);
    liftcal::apply_environment(cfg);
    if (!o.eps.empty()) cfg.eps_levels = o.eps;
    if (o.trials) cfg.trials_per_level = *o.trials;
    if (o.full_scale) cfg.trials_per_level = 300;
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.mode) cfg.mode = liftcal::sweep_mode_from_string(*o.mode);
    if (o.max_rollouts) cfg.lift.max_rollouts = *o.max_rollouts;
    if (o.target_fidelity) cfg.lift.target_fidelity = *o.target_fidelity;
    if (o.lambda) cfg.lift.ilc.lambda = *o.lambda;
    if (o.out) cfg.output_dir = *o.out;
    if (o.jobs) cfg.jobs = *o.jobs;
    cfg.validate();
    return cfg;
}

void print_summary(const liftcal::SweepSummary &summary) {
    std::printf("%-8s %-9s %7s %10s %10s %13s %9s\n", "eps", "mode", "trials", "converged",
                "redesign", "median 1-F", "rollouts");
    for (const auto &level : summary.levels) {
        for (const auto &m : level.modes) {
            std::printf("%-8.3g %-9s %7d %10.3f %10.3f %13.3e %9.1f\n", level.eps_mean,
                        liftcal::to_string(m.mode).c_str(), m.trials, m.converged_fraction,
                        m.redesign_fraction, m.median_terminal_infidelity, m.median_rollouts);
        }
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Closed-loop pulse calibration sweeps for a single-qubit gate"};
    app.require_subcommand(1);

    Overrides sweep_opts;
    CLI::App *sweep = app.add_subcommand("sweep", "Run the error-level sweep and write trials.csv");
    add_common(sweep, sweep_opts);
    sweep->add_option("--eps", sweep_opts.eps, "Mean error levels");
    sweep->add_option("--trials", sweep_opts.trials, "Trials per error level");
    sweep->add_option("--seed", sweep_opts.seed, "Master seed");
    sweep->add_option("--mode", sweep_opts.mode, "lift, ilc-only or both");
    sweep->add_option("--jobs", sweep_opts.jobs, "Worker threads, 0 for all cores");
    sweep->add_flag("--full-scale", sweep_opts.full_scale, "Use 300 trials per level");

    Overrides track_opts;
    double track_eps = 0.2;
    std::optional<std::uint64_t> track_seed;
    CLI::App *track = app.add_subcommand("track", "Write stage trajectories for one trial");
    add_common(track, track_opts);
    track->add_option("--eps", track_eps, "Mean error level");
    track->add_option("--seed", track_seed, "Trial seed (default: first trial of the master seed)");

    std::uint64_t validate_seed = 7;
    CLI::App *validate = app.add_subcommand("validate", "Run the structural self-checks");
    validate->add_option("--seed", validate_seed, "Seed for the random cases");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sweep) {
            const liftcal::ExperimentConfig cfg = resolve(sweep_opts);
            print_summary(liftcal::run_sweep(cfg));
            std::printf("wrote %s\n", (cfg.output_dir / "trials.csv").string().c_str());
        } else if (*track) {
            const liftcal::ExperimentConfig cfg = resolve(track_opts);
            const std::uint64_t seed = track_seed.value_or(liftcal::trial_seed(cfg.master_seed, 0, 0));
            for (const auto &stage : liftcal::dump_tracking(cfg, track_eps, seed)) {
                std::printf("stage %s  %-36s %s\n", stage.name.c_str(), stage.description.c_str(),
                            stage.file ? stage.file->string().c_str() : stage.note.c_str());
            }
        } else if (*validate) {
            bool ok = true;
            for (const auto &c : liftcal::structural_checks(validate_seed)) {
                std::printf("%-4s %-28s %.3e (tol %.0e)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                            c.value, c.tolerance);
                ok = ok && c.passed;
            }
            return ok ? 0 : kExitRuntime;
        }
    } catch (const liftcal::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
