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

#include "liftcal/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "liftcal/errors.hpp"

namespace liftcal {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string identification_name(DerivativeMode mode) {
    switch (mode) {
        case DerivativeMode::Discrete: return "discrete";
        case DerivativeMode::ContinuousFd: return "continuous-fd";
        case DerivativeMode::ExactZoh: return "exact-zoh";
    }
    return "exact-zoh";
}

DerivativeMode identification_from(const std::string &name) {
    if (name == "discrete") return DerivativeMode::Discrete;
    if (name == "continuous-fd") return DerivativeMode::ContinuousFd;
    if (name == "exact-zoh") return DerivativeMode::ExactZoh;
    throw ConfigError("unknown identification mode '" + name + "'");
}

std::string stop_rule_name(StopRule rule) {
    return rule == StopRule::TrackingRms ? "tracking-rms" : "scored-fidelity";
}

StopRule stop_rule_from(const std::string &name) {
    if (name == "scored-fidelity") return StopRule::ScoredFidelity;
    if (name == "tracking-rms") return StopRule::TrackingRms;
    throw ConfigError("unknown stop rule '" + name + "'");
}

std::string guess_name(InitialGuess g) {
    switch (g) {
        case InitialGuess::Zero: return "zero";
        case InitialGuess::ConstantArea: return "constant-area";
        case InitialGuess::RandomSeeded: return "random-seeded";
    }
    return "random-seeded";
}

InitialGuess guess_from(const std::string &name) {
    if (name == "zero") return InitialGuess::Zero;
    if (name == "constant-area") return InitialGuess::ConstantArea;
    if (name == "random-seeded") return InitialGuess::RandomSeeded;
    throw ConfigError("unknown initial guess '" + name + "'");
}

// Reads `key` into `out` when present and records it as consumed.
template <typename T>
void read(const json &obj, const char *key, T &out, std::vector<std::string> &seen) {
    seen.emplace_back(key);
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

void reject_unknown(const json &obj, const std::vector<std::string> &seen, const std::string &where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(seen.begin(), seen.end(), it.key()) == seen.end()) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

void parse_ilc(const json &obj, IlcConfig &c) {
    if (!obj.is_object()) throw ConfigError("lift.ilc must be an object");
    std::vector<std::string> seen;
    read(obj, "lambda", c.lambda, seen);
    read(obj, "u_sat", c.u_sat, seen);
    read(obj, "du_sat", c.du_sat, seen);
    read(obj, "max_qp_iterations", c.max_qp_iterations, seen);
    read(obj, "qp_tolerance", c.qp_tolerance, seen);
    reject_unknown(obj, seen, "lift.ilc");
}

void parse_qoc(const json &obj, QocConfig &c) {
    if (!obj.is_object()) throw ConfigError("lift.qoc must be an object");
    std::vector<std::string> seen;
    read(obj, "max_iterations", c.max_iterations, seen);
    read(obj, "gradient_tolerance", c.gradient_tolerance, seen);
    read(obj, "infidelity_tolerance", c.infidelity_tolerance, seen);
    read(obj, "u_sat", c.u_sat, seen);
    read(obj, "perturbation", c.perturbation, seen);
    read(obj, "random_restarts", c.random_restarts, seen);
    std::string guess = guess_name(c.initial_guess);
    read(obj, "initial_guess", guess, seen);
    c.initial_guess = guess_from(guess);
    reject_unknown(obj, seen, "lift.qoc");
}

void parse_lift(const json &obj, LiftConfig &c) {
    if (!obj.is_object()) throw ConfigError("lift must be an object");
    std::vector<std::string> seen;
    read(obj, "target_fidelity", c.target_fidelity, seen);
    read(obj, "max_rollouts", c.max_rollouts, seen);
    read(obj, "feasibility_threshold", c.feasibility_threshold, seen);
    read(obj, "dmd_rollout_budget", c.dmd_rollout_budget, seen);
    read(obj, "max_redesigns", c.max_redesigns, seen);
    read(obj, "prior_weight", c.prior_weight, seen);
    read(obj, "tracking_tolerance", c.tracking_tolerance, seen);
    std::string ident = identification_name(c.identification);
    read(obj, "identification", ident, seen);
    c.identification = identification_from(ident);
    std::string rule = stop_rule_name(c.stop_rule);
    read(obj, "stop_rule", rule, seen);
    c.stop_rule = stop_rule_from(rule);
    seen.emplace_back("ilc");
    if (obj.contains("ilc")) parse_ilc(obj.at("ilc"), c.ilc);
    seen.emplace_back("qoc");
    if (obj.contains("qoc")) parse_qoc(obj.at("qoc"), c.qoc);
    reject_unknown(obj, seen, "lift");
}

json lift_json(const LiftConfig &c) {
    return json{
        {"target_fidelity", c.target_fidelity},
        {"max_rollouts", c.max_rollouts},
        {"feasibility_threshold", c.feasibility_threshold},
        {"dmd_rollout_budget", c.dmd_rollout_budget},
        {"max_redesigns", c.max_redesigns},
        {"prior_weight", c.prior_weight},
        {"tracking_tolerance", c.tracking_tolerance},
        {"identification", identification_name(c.identification)},
        {"stop_rule", stop_rule_name(c.stop_rule)},
        {"ilc",
         {{"lambda", c.ilc.lambda},
          {"u_sat", c.ilc.u_sat},
          {"du_sat", c.ilc.du_sat},
          {"max_qp_iterations", c.ilc.max_qp_iterations},
          {"qp_tolerance", c.ilc.qp_tolerance}}},
        {"qoc",
         {{"max_iterations", c.qoc.max_iterations},
          {"gradient_tolerance", c.qoc.gradient_tolerance},
          {"infidelity_tolerance", c.qoc.infidelity_tolerance},
          {"u_sat", c.qoc.u_sat},
          {"perturbation", c.qoc.perturbation},
          {"random_restarts", c.qoc.random_restarts},
          {"initial_guess", guess_name(c.qoc.initial_guess)}}},
    };
}

struct TrialSetup {
    HamiltonianModel nominal;
    HamiltonianModel truth;
    GateTarget target;
    BlochState x0;
    ErrorModel error;
    LiftConfig lift;
};

TrialSetup setup_trial(const ExperimentConfig &cfg, double eps, std::uint64_t seed) {
    HamiltonianModel nominal = single_qubit_model(cfg.dt, cfg.horizon);
    ErrorModel err = sample_error_model(eps, splitmix64(seed ^ 0x1ULL), cfg.sign_policy);
    HamiltonianModel truth = apply_error_model(nominal, err);
    GateTarget target = GateTarget::from_unitary(nominal.basis->operators[nominal.basis->index_of("X")]);
    LiftConfig lift = cfg.lift;
    lift.seed = splitmix64(seed ^ 0x2ULL);
    lift.qoc.seed = splitmix64(seed ^ 0x3ULL);
    return {std::move(nominal), std::move(truth), std::move(target),
            BlochState{Eigen::Vector3d(0.0, 0.0, 1.0)}, std::move(err), std::move(lift)};
}

CalibrationTrace run_mode(const TrialSetup &t, SweepMode mode) {
    return mode == SweepMode::IlcOnly ? run_ilc_only(t.nominal, t.truth, t.target, t.x0, t.lift)
                                      : run_lift(t.nominal, t.truth, t.target, t.x0, t.lift);
}

std::vector<SweepMode> modes_of(SweepMode mode) {
    if (mode == SweepMode::Both) return {SweepMode::Lift, SweepMode::IlcOnly};
    return {mode};
}

double eps_component(const ErrorModel &err, int which) {
    if (which == 0) return err.drift_offset.size() > 2 ? err.drift_offset(2) : 0.0;
    return err.gain_error.rows() > 0 && err.gain_error.cols() >= which ? err.gain_error(0, which - 1)
                                                                       : 0.0;
}

void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

json optional_num(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string to_string(SweepMode mode) {
    switch (mode) {
        case SweepMode::Lift: return "lift";
        case SweepMode::IlcOnly: return "ilc-only";
        case SweepMode::Both: return "both";
    }
    return "both";
}

SweepMode sweep_mode_from_string(const std::string &name) {
    if (name == "lift") return SweepMode::Lift;
    if (name == "ilc-only") return SweepMode::IlcOnly;
    if (name == "both") return SweepMode::Both;
    throw ConfigError("unknown mode '" + name + "' (expected lift, ilc-only or both)");
}

std::string to_string(SignPolicy policy) {
    return policy == SignPolicy::Positive ? "positive" : "random";
}

SignPolicy sign_policy_from_string(const std::string &name) {
    if (name == "random") return SignPolicy::Random;
    if (name == "positive") return SignPolicy::Positive;
    throw ConfigError("unknown sign policy '" + name + "'");
}

void ExperimentConfig::validate() const {
    if (eps_levels.empty()) throw ConfigError("eps_levels must not be empty");
    for (double e : eps_levels) {
        if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("eps levels must be finite and >= 0");
    }
    if (trials_per_level < 1) throw ConfigError("trials_per_level must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (jobs < 0) throw ConfigError("jobs must be >= 0");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
    lift.validate();
}

ExperimentConfig config_from_json(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig cfg;
    std::vector<std::string> seen;
    read(doc, "eps_levels", cfg.eps_levels, seen);
    read(doc, "trials_per_level", cfg.trials_per_level, seen);
    std::string policy = to_string(cfg.sign_policy);
    read(doc, "sign_policy", policy, seen);
    cfg.sign_policy = sign_policy_from_string(policy);
    std::string out = cfg.output_dir.string();
    read(doc, "output_dir", out, seen);
    cfg.output_dir = out;
    read(doc, "master_seed", cfg.master_seed, seen);
    std::string mode = to_string(cfg.mode);
    read(doc, "mode", mode, seen);
    cfg.mode = sweep_mode_from_string(mode);
    read(doc, "dt", cfg.dt, seen);
    read(doc, "horizon", cfg.horizon, seen);
    read(doc, "jobs", cfg.jobs, seen);
    seen.emplace_back("lift");
    if (doc.contains("lift")) parse_lift(doc.at("lift"), cfg.lift);
    reject_unknown(doc, seen, "config");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

std::string config_to_json(const ExperimentConfig &cfg) {
    const json doc{
        {"eps_levels", cfg.eps_levels},
        {"trials_per_level", cfg.trials_per_level},
        {"sign_policy", to_string(cfg.sign_policy)},
        {"output_dir", cfg.output_dir.string()},
        {"master_seed", cfg.master_seed},
        {"mode", to_string(cfg.mode)},
        {"dt", cfg.dt},
        {"horizon", cfg.horizon},
        {"jobs", cfg.jobs},
        {"lift", lift_json(cfg.lift)},
    };
    return doc.dump(2) + "\n";
}

void apply_environment(ExperimentConfig &cfg) {
    const char *env = std::getenv("LIFTCAL_SEED");
    if (env == nullptr || *env == '\0') return;
    char *end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0' || *env == '-') {
        throw ConfigError(std::string("LIFTCAL_SEED is not an unsigned integer: ") + env);
    }
    cfg.master_seed = v;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t eps_index, std::size_t trial_index) {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(eps_index));
    return splitmix64(h ^ static_cast<std::uint64_t>(trial_index));
}

TrialResult run_trial(const ExperimentConfig &cfg, std::size_t eps_index, std::size_t trial_index,
                      SweepMode mode) {
    if (mode == SweepMode::Both) throw ConfigError("run_trial needs a single mode");
    if (eps_index >= cfg.eps_levels.size()) throw ConfigError("eps index out of range");
    const double eps = cfg.eps_levels[eps_index];
    const TrialSetup t = setup_trial(cfg, eps, trial_seed(cfg.master_seed, eps_index, trial_index));
    TrialResult r;
    r.trial_id = to_string(mode) + "-" + std::to_string(eps_index) + "-" + std::to_string(trial_index);
    r.mode = mode;
    r.eps_index = eps_index;
    r.trial_index = trial_index;
    r.eps_mean = eps;
    r.error = t.error;
    r.trace = run_mode(t, mode);
    return r;
}

std::vector<TrialResult> run_trials(const ExperimentConfig &cfg) {
    cfg.validate();
    struct Task {
        std::size_t eps_index, trial_index;
        SweepMode mode;
    };
    std::vector<Task> tasks;
    for (std::size_t e = 0; e < cfg.eps_levels.size(); ++e) {
        for (std::size_t t = 0; t < static_cast<std::size_t>(cfg.trials_per_level); ++t) {
            for (SweepMode m : modes_of(cfg.mode)) tasks.push_back({e, t, m});
        }
    }
    std::vector<TrialResult> results(tasks.size());
    std::vector<std::exception_ptr> failures(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                results[i] = run_trial(cfg, tasks[i].eps_index, tasks[i].trial_index, tasks[i].mode);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    std::size_t jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                     : static_cast<std::size_t>(cfg.jobs);
    jobs = std::min(jobs, tasks.size());
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto &th : pool) th.join();
    for (const auto &f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return results;
}

std::string trials_csv(const std::vector<TrialResult> &results) {
    std::string out = std::string(kTrialsCsvHeader) + "\n";
    for (const TrialResult &r : results) {
        const std::string prefix = r.trial_id + "," + num(r.eps_mean) + "," +
                                   num(eps_component(r.error, 0)) + "," +
                                   num(eps_component(r.error, 1)) + "," +
                                   num(eps_component(r.error, 2)) + ",";
        const auto &entries = r.trace.entries;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const TraceEntry &e = entries[i];
            const bool stop = r.trace.converged && i + 1 == entries.size();
            out += prefix + std::to_string(e.rollout) + "," + to_string(e.phase) + "," +
                   num(e.infidelity) + "," + num(e.tracking_rms) + "," + (stop ? "1" : "0") + "\n";
        }
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ConfigError("median of an empty sample");
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const ModeSummary *SweepSummary::find(std::size_t level, SweepMode mode) const {
    if (level >= levels.size()) return nullptr;
    for (const ModeSummary &m : levels[level].modes) {
        if (m.mode == mode) return &m;
    }
    return nullptr;
}

SweepSummary summarize(const ExperimentConfig &cfg, const std::vector<TrialResult> &results) {
    SweepSummary out;
    for (std::size_t e = 0; e < cfg.eps_levels.size(); ++e) {
        LevelSummary level;
        level.eps_mean = cfg.eps_levels[e];
        for (SweepMode mode : modes_of(cfg.mode)) {
            std::vector<const TrialResult *> group;
            for (const TrialResult &r : results) {
                if (r.eps_index == e && r.mode == mode) group.push_back(&r);
            }
            if (group.empty()) continue;
            ModeSummary s;
            s.mode = mode;
            s.trials = static_cast<int>(group.size());
            std::vector<double> terminal, rollouts;
            int converged = 0, redesigned = 0, single = 0, first_ok = 0;
            std::size_t longest = 0;
            for (const TrialResult *r : group) {
                const CalibrationTrace &tr = r->trace;
                converged += tr.converged ? 1 : 0;
                redesigned += tr.redesigns >= 1 ? 1 : 0;
                single += tr.redesigns == 1 ? 1 : 0;
                s.errors += tr.error ? 1 : 0;
                if (!tr.entries.empty() && tr.entries.front().feasible.value_or(true)) ++first_ok;
                terminal.push_back(tr.final_infidelity());
                rollouts.push_back(static_cast<double>(tr.rollouts_used));
                longest = std::max(longest, tr.entries.size());
            }
            const double n = static_cast<double>(group.size());
            s.converged_fraction = converged / n;
            s.redesign_fraction = redesigned / n;
            s.single_redesign_fraction = single / n;
            s.first_feasible_fraction = first_ok / n;
            s.median_terminal_infidelity = median(terminal);
            s.median_rollouts = median(rollouts);
            for (std::size_t k = 0; k < longest; ++k) {
                std::vector<double> at;
                for (const TrialResult *r : group) {
                    const auto &en = r->trace.entries;
                    at.push_back(en.empty() ? 1.0 : en[std::min(k, en.size() - 1)].infidelity);
                }
                s.median_infidelity_by_rollout.push_back(median(at));
            }
            level.modes.push_back(std::move(s));
        }
        out.levels.push_back(std::move(level));
    }
    return out;
}

std::string summary_to_json(const SweepSummary &summary) {
    json levels = json::array();
    for (const LevelSummary &level : summary.levels) {
        json modes = json::object();
        for (const ModeSummary &m : level.modes) {
            modes[to_string(m.mode)] = json{
                {"trials", m.trials},
                {"converged_fraction", m.converged_fraction},
                {"redesign_fraction", m.redesign_fraction},
                {"single_redesign_fraction", m.single_redesign_fraction},
                {"first_feasible_fraction", m.first_feasible_fraction},
                {"median_terminal_infidelity", m.median_terminal_infidelity},
                {"median_rollouts", m.median_rollouts},
                {"errors", m.errors},
                {"median_infidelity_by_rollout", m.median_infidelity_by_rollout},
            };
        }
        levels.push_back(json{{"eps_mean", level.eps_mean}, {"modes", modes}});
    }
    return json{{"levels", levels}}.dump(2) + "\n";
}

void ensure_writable(const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
    const std::filesystem::path probe = dir / ".liftcal-write-probe";
    {
        std::ofstream out(probe, std::ios::trunc);
        if (!out || !(out << "ok")) throw IoError("output directory " + dir.string() + " is not writable");
    }
    std::filesystem::remove(probe, ec);
}

SweepSummary run_sweep(const ExperimentConfig &cfg) {
    cfg.validate();
    ensure_writable(cfg.output_dir);
    const std::vector<TrialResult> results = run_trials(cfg);
    const SweepSummary summary = summarize(cfg, results);
    write_file(cfg.output_dir / "trials.csv", trials_csv(results));
    write_file(cfg.output_dir / "summary.json", summary_to_json(summary));
    write_file(cfg.output_dir / "config.json", config_to_json(cfg));
    return summary;
}

std::string trajectory_table(const RolloutRecord &record, const ReferenceTriplet &ref) {
    if (record.states.rows() != ref.x_ref.rows() || record.states.cols() != ref.x_ref.cols()) {
        throw ShapeError("rollout and reference trajectories differ in shape");
    }
    const auto &labels = ref.model.basis->labels;
    std::string out = "# s";
    for (const auto &l : labels) out += " xref_" + l;
    for (const auto &l : labels) out += " x_" + l;
    for (Index j = 0; j < record.controls.channels(); ++j) out += " u_" + std::to_string(j);
    out += "\n";
    char buf[40];
    for (Index s = 0; s < record.states.rows(); ++s) {
        out += std::to_string(s);
        for (Index i = 0; i < ref.x_ref.cols(); ++i) {
            std::snprintf(buf, sizeof buf, " %.12e", ref.x_ref(s, i));
            out += buf;
        }
        for (Index i = 0; i < record.states.cols(); ++i) {
            std::snprintf(buf, sizeof buf, " %.12e", record.states(s, i));
            out += buf;
        }
        for (Index j = 0; j < record.controls.channels(); ++j) {
            if (s < record.controls.steps()) {
                std::snprintf(buf, sizeof buf, " %.12e", record.controls.values(s, j));
                out += buf;
            } else {
                out += " nan";
            }
        }
        out += "\n";
    }
    return out;
}

std::vector<StageDump> dump_tracking(const ExperimentConfig &cfg, double eps, std::uint64_t seed) {
    cfg.validate();
    if (!(eps >= 0.0)) throw ConfigError("eps must be >= 0");
    ensure_writable(cfg.output_dir);
    const TrialSetup t = setup_trial(cfg, eps, seed);
    const CalibrationTrace lift = run_mode(t, SweepMode::Lift);
    const CalibrationTrace ilc = run_mode(t, SweepMode::IlcOnly);

    auto stage = [&](const std::string &name, const std::string &desc, const CalibrationTrace &tr,
                     const TraceEntry *entry, const std::string &missing) {
        StageDump d;
        d.name = name;
        d.description = desc;
        if (entry == nullptr) {
            d.note = tr.error ? missing + " (" + *tr.error + ")" : missing;
            return d;
        }
        const std::filesystem::path file = cfg.output_dir / ("stage_" + name + ".txt");
        write_file(file, trajectory_table(entry->record,
                                          tr.references[static_cast<std::size_t>(entry->reference_id)]));
        d.file = file;
        d.rollout = entry->rollout;
        d.infidelity = entry->infidelity;
        d.tracking_rms = entry->tracking_rms;
        d.note = "phase " + to_string(entry->phase);
        return d;
    };

    const TraceEntry *first = lift.entries.empty() ? nullptr : &lift.entries.front();
    const TraceEntry *redesigned = nullptr;
    for (const TraceEntry &e : lift.entries) {
        if (e.phase == Phase::DmdRedesign) {
            redesigned = &e;
            break;
        }
    }
    const TraceEntry *last = lift.entries.empty() ? nullptr : &lift.entries.back();
    const TraceEntry *ilc_last = ilc.entries.empty() ? nullptr : &ilc.entries.back();

    std::vector<StageDump> stages;
    stages.push_back(stage("a", "nominal design rollout", lift, first, "no rollout recorded"));
    stages.push_back(stage("b", "first rollout after redesign", lift, redesigned,
                           "no redesign was triggered"));
    stages.push_back(stage("c", "final LIFT rollout", lift, last, "no rollout recorded"));
    stages.push_back(stage("d", "final ILC rollout without redesign", ilc, ilc_last,
                           "no rollout recorded"));

    json manifest{{"eps", eps},
                  {"seed", seed},
                  {"error", {{"eps_z", eps_component(t.error, 0)},
                             {"eps_x", eps_component(t.error, 1)},
                             {"eps_y", eps_component(t.error, 2)}}},
                  {"lift_converged", lift.converged},
                  {"ilc_converged", ilc.converged},
                  {"columns", "s xref(s) x(s) u(s); u is nan on the final snapshot"}};
    json list = json::array();
    for (const StageDump &d : stages) {
        list.push_back(json{{"stage", d.name},
                            {"description", d.description},
                            {"file", d.file ? json(d.file->filename().string()) : json(nullptr)},
                            {"note", d.note},
                            {"rollout", d.rollout ? json(*d.rollout) : json(nullptr)},
                            {"infidelity", optional_num(d.infidelity)},
                            {"tracking_rms", optional_num(d.tracking_rms)}});
    }
    manifest["stages"] = list;
    write_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
    return stages;
}

}  // namespace liftcal
