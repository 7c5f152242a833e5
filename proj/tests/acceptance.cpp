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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "liftcal/experiment.hpp"
#include "support.hpp"

using namespace liftcal;
using namespace testing_support;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string &what) {
        if (!ok) passed = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "!") + what;
    }
};

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string &name) {
    const auto dir = std::filesystem::temp_directory_path() / ("liftcal-acceptance-" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

// Shared across criteria 1-3 and 8.
struct Sweep {
    ExperimentConfig cfg;
    SweepSummary summary;
};

Sweep full_sweep() {
    Sweep s;
    s.cfg.trials_per_level = 30;
    s.cfg.mode = SweepMode::Both;
    s.cfg.jobs = 0;
    s.cfg.output_dir = scratch("sweep");
    s.summary = run_sweep(s.cfg);
    return s;
}

Outcome sweep_convergence(const Sweep &s) {
    Outcome o;
    for (std::size_t e = 0; e < s.cfg.eps_levels.size(); ++e) {
        const ModeSummary *m = s.summary.find(e, SweepMode::Lift);
        const bool ok = m && m->converged_fraction >= 0.9 && m->median_rollouts <= s.cfg.lift.max_rollouts;
        o.require(ok, "eps=" + fmt("%g", s.cfg.eps_levels[e]) + " converged=" +
                          fmt("%.2f", m ? m->converged_fraction : 0.0));
    }
    return o;
}

Outcome ilc_saturation(const Sweep &s) {
    Outcome o;
    for (std::size_t e = 0; e < s.cfg.eps_levels.size(); ++e) {
        const double eps = s.cfg.eps_levels[e];
        const ModeSummary *lift = s.summary.find(e, SweepMode::Lift);
        const ModeSummary *ilc = s.summary.find(e, SweepMode::IlcOnly);
        if (!lift || !ilc) {
            o.require(false, "missing mode summary");
            continue;
        }
        const std::string tag = "eps=" + fmt("%g", eps) + " ilc=" + fmt("%.2e", ilc->median_terminal_infidelity) +
                                " lift=" + fmt("%.2e", lift->median_terminal_infidelity);
        if (eps >= 0.1) {
            o.require(ilc->median_terminal_infidelity > 1e-4 && lift->median_terminal_infidelity <= 1e-4, tag);
        } else if (eps == 0.01) {
            o.require(ilc->converged_fraction >= 0.9 && lift->converged_fraction >= 0.9, tag);
        }
    }
    return o;
}

Outcome redesign_pattern(const Sweep &s) {
    Outcome o;
    for (std::size_t e = 0; e < s.cfg.eps_levels.size(); ++e) {
        const double eps = s.cfg.eps_levels[e];
        const ModeSummary *m = s.summary.find(e, SweepMode::Lift);
        if (!m) {
            o.require(false, "missing lift summary");
            continue;
        }
        if (eps == 0.01) {
            o.require(m->redesign_fraction == 0.0 && m->first_feasible_fraction == 1.0,
                      "eps=0.01 redesigns=" + fmt("%.2f", m->redesign_fraction));
        } else if (eps >= 0.05) {
            o.require(m->single_redesign_fraction >= 0.8,
                      "eps=" + fmt("%g", eps) + " single=" + fmt("%.2f", m->single_redesign_fraction));
        }
    }
    return o;
}

// Criterion 4 -----------------------------------------------------------------

double recovery_error(double dt, std::uint64_t seed) {
    Rng rng(seed);
    auto basis = shared_basis(1);
    const MatrixXc h0 = 0.5 * rng.hermitian(2);
    const HamiltonianModel truth = HamiltonianModel::from_hamiltonians(basis, h0, {pauli_x(), pauli_y()}, dt, 60);
    std::vector<RolloutRecord> recs;
    for (int r = 0; r < 4; ++r) {
        ControlSchedule u{MatrixXd(60, 2)};
        for (Index i = 0; i < u.values.size(); ++i) u.values.data()[i] = rng.uniform(-1, 1);
        recs.push_back(rollout(truth, u, ket_to_bloch(rng.ket(2), *basis)));
    }
    const LearnedModel l = bilinear_dmd(assemble_snapshots(recs, dt, DerivativeMode::ContinuousFd), true);
    double err = (l.drift - truth.drift).norm();
    for (std::size_t j = 0; j < 2; ++j) err = std::max(err, (l.controls[j] - truth.controls[j]).norm());
    return err;
}

Outcome dmd_recovery() {
    Outcome o;
    const std::vector<double> dts{1e-2, 1e-3, 1e-4};
    std::vector<double> errs;
    for (double dt : dts) errs.push_back(recovery_error(dt, 404));
    o.require(errs[1] <= 1e-4, "err(dt=1e-3)=" + fmt("%.2e", errs[1]));
    const double slope = loglog_slope(dts, errs);
    o.require(slope >= 1.8, "order=" + fmt("%.2f", slope));
    return o;
}

// Criterion 5 -----------------------------------------------------------------

Outcome ilc_fixed_point() {
    Outcome o;
    Rng rng(505);
    const HamiltonianModel m = single_qubit_model(0.1, 8);
    const ReferenceTriplet ref =
        make_reference(m, ControlSchedule{0.5 * rng.matrix(8, 2)}, ket_to_bloch(rng.ket(2), *m.basis));
    const LiftedSystem lifted = build_lifted(linearize(m, ref), m.observation);
    const MatrixXd &f_ref = lifted.f_ref;
    const Index n = f_ref.cols();
    IlcConfig cfg;
    cfg.lambda = 0.0;
    cfg.u_sat = 1e6;
    cfg.du_sat = 1e6;

    const MatrixXd pinv = f_ref.completeOrthogonalDecomposition().pseudoInverse();
    const VectorXd d_probe = rng.vector(f_ref.rows());
    const VectorXd du_probe = solve_correction(f_ref, d_probe, ref.u_ref.lifted(), 8, 2, cfg).delta_u;
    const double mp = (du_probe + pinv * d_probe).norm();
    o.require(mp <= 1e-8, "moore-penrose=" + fmt("%.1e", mp));

    for (double rho : {0.3, 0.5, 0.8}) {
        const MatrixXd mm = rho * rng.orthogonal(n);
        const MatrixXd f_true = f_ref * (MatrixXd::Identity(n, n) - mm);
        const VectorXd d_true = 0.1 * rng.vector(f_ref.rows());
        // Fixed point of the learning law, solved directly.
        const VectorXd du_star = -(MatrixXd::Identity(n, n) - mm).fullPivLu().solve(pinv * d_true);
        VectorXd du = VectorXd::Zero(n);
        std::vector<double> err{(du - du_star).norm()};
        for (int k = 0; k < 12; ++k) {
            const VectorXd dx = f_true * du + d_true;
            const VectorXd d_hat = disturbance(f_ref, dx, du);
            du = solve_correction(f_ref, d_hat, VectorXd::Zero(n), 8, 2, cfg).delta_u;
            err.push_back((du - du_star).norm());
        }
        const double rate = std::pow(err.back() / err.front(), 1.0 / 12.0);
        o.require(std::abs(rate - rho) <= 0.02, "rho=" + fmt("%.1f", rho) + " rate=" + fmt("%.4f", rate));
    }
    return o;
}

// Criterion 6 -----------------------------------------------------------------

Outcome structural() {
    Outcome o;
    Rng rng(606);

    double orth = 0.0, recon = 0.0;
    for (int n = 1; n <= 3; ++n) {
        const PauliBasis b = build_basis(n);
        const double d = static_cast<double>(b.dim());
        for (Index j = 0; j < b.size(); ++j) {
            for (Index k = 0; k < b.size(); ++k) {
                const Complex tr = (b.operators[j] * b.operators[k]).trace();
                orth = std::max(orth, std::abs(tr - Complex(j == k ? d : 0.0, 0.0)));
                if (n == 3) continue;
                MatrixXc rebuilt = MatrixXc::Zero(b.dim(), b.dim());
                for (Index l = 0; l < b.size(); ++l) rebuilt += d * b.sigma(j, k, l) * b.operators[l];
                const MatrixXc comm = b.operators[j] * b.operators[k] - b.operators[k] * b.operators[j];
                recon = std::max(recon, (comm - rebuilt).cwiseAbs().maxCoeff());
            }
        }
    }
    o.require(orth <= 1e-12, "orthogonality=" + fmt("%.1e", orth));
    o.require(recon <= 1e-12, "structure=" + fmt("%.1e", recon));

    double gen = 0.0;
    for (int n = 1; n <= 2; ++n) {
        const PauliBasis b = build_basis(n);
        for (int t = 0; t < 10; ++t) {
            const MatrixXc h = rng.hermitian(b.dim());
            const MatrixXc rho = rng.density(b.dim());
            const MatrixXd g = vectorize_hamiltonian(h, b);
            gen = std::max(gen, (g + g.transpose()).cwiseAbs().maxCoeff());
            const MatrixXc drho = -kI * (h * rho - rho * h);
            VectorXd oracle(b.size()), x(b.size());
            for (Index j = 0; j < b.size(); ++j) {
                oracle(j) = (b.operators[j] * drho).trace().real();
                x(j) = (b.operators[j] * rho).trace().real();
            }
            gen = std::max(gen, (g * x - oracle).cwiseAbs().maxCoeff());
        }
    }
    o.require(gen <= 1e-10, "generator=" + fmt("%.1e", gen));

    double drift = 0.0;
    {
        const HamiltonianModel m = single_qubit_model(0.05, 1000);
        ControlSchedule u{rng.matrix(1000, 2)};
        const BlochState x0 = ket_to_bloch(rng.ket(2), *m.basis);
        const RolloutRecord r = rollout(m, u, x0);
        for (Index s = 0; s <= 1000; ++s) drift = std::max(drift, std::abs(r.states.row(s).norm() - x0.coords.norm()));
    }
    o.require(drift <= 1e-9, "norm=" + fmt("%.1e", drift));

    double lifted_err = 0.0, fd = 0.0;
    for (int steps = 1; steps <= 10; ++steps) {
        const HamiltonianModel m = single_qubit_model(0.1, steps);
        const ReferenceTriplet ref = make_reference(m, ControlSchedule{rng.matrix(steps, 2)},
                                                    ket_to_bloch(rng.ket(2), *m.basis));
        const Jacobians jac = linearize(m, ref);
        const LiftedSystem lifted = build_lifted(jac, m.observation);
        // Direct linear recursion dx(s+1) = A dx(s) + B du(s) on each unit input.
        for (Index col = 0; col < steps * 2; ++col) {
            VectorXd dx = VectorXd::Zero(3);
            for (Index s = 0; s < steps; ++s) {
                VectorXd du = VectorXd::Zero(2);
                if (col / 2 == s) du(col % 2) = 1.0;
                // dx is exactly zero for s <= col / 2, which checks the strict triangle.
                lifted_err = std::max(lifted_err, (lifted.f_ref.block(s * 3, col, 3, 1) - dx).cwiseAbs().maxCoeff());
                dx = jac.a[static_cast<std::size_t>(s)] * dx + jac.b[static_cast<std::size_t>(s)] * du;
            }
            lifted_err = std::max(lifted_err, (lifted.f_ref.block(steps * 3, col, 3, 1) - dx).cwiseAbs().maxCoeff());
        }
        // Jacobians against central differences of the exact step.
        const double h = 1e-5;
        for (Index s = 0; s < steps; ++s) {
            const VectorXd x = ref.x_ref.row(s).transpose();
            const VectorXd uu = ref.u_ref.values.row(s).transpose();
            for (Index j = 0; j < 2; ++j) {
                VectorXd up = uu, dn = uu;
                up(j) += h;
                dn(j) -= h;
                const VectorXd col = (step_propagator(m, up) * x - step_propagator(m, dn) * x) / (2 * h);
                const VectorXd exact = jac.b[static_cast<std::size_t>(s)].col(j);
                fd = std::max(fd, (col - exact).norm() / std::max(exact.norm(), 1e-12));
            }
            const MatrixXd a_exact = jac.a[static_cast<std::size_t>(s)];
            fd = std::max(fd, (a_exact - step_propagator(m, uu)).norm() / a_exact.norm());
        }
    }
    o.require(lifted_err <= 1e-12, "lifted=" + fmt("%.1e", lifted_err));
    o.require(fd <= 1e-6, "jacobian=" + fmt("%.1e", fd));
    return o;
}

// Criterion 7 -----------------------------------------------------------------

Outcome sufficiency() {
    Outcome o;
    const HamiltonianModel m = single_qubit_model(0.05, 10);
    QocConfig cfg;
    cfg.u_sat = kDefaultUSat;
    const QocResult q = design_reference(m, GateTarget::from_unitary(pauli_x()), BlochState{Eigen::Vector3d(0, 0, 1)}, cfg);
    const std::vector<ReferenceTriplet> refs{q.reference};
    const SufficiencyReport rep = sufficiency_analysis(refs, m.observation, *m.basis, control_axes(m));
    o.require(rep.overdetermined && rep.equations == 3 && rep.unknowns == 2 && rep.rank_s == 2,
              "x-gate K*L=" + std::to_string(rep.equations) + " rank=" + std::to_string(rep.rank_s));
    const ReferenceTriplet mixed = make_reference(m, q.controls, BlochState{Eigen::Vector3d::Zero()});
    const std::vector<ReferenceTriplet> mixed_refs{mixed};
    const SufficiencyReport collapse = sufficiency_analysis(mixed_refs, m.observation, *m.basis, control_axes(m));
    o.require(collapse.rank_s == 0 && !collapse.overdetermined, "mixed rank=" + std::to_string(collapse.rank_s));
    return o;
}

// Criterion 8 -----------------------------------------------------------------

Outcome determinism(const Sweep &first) {
    Outcome o;
    ExperimentConfig again = first.cfg;
    again.jobs = 1;
    again.output_dir = scratch("sweep-rerun");
    run_sweep(again);
    const std::string a = slurp(first.cfg.output_dir / "trials.csv");
    const std::string b = slurp(again.output_dir / "trials.csv");
    o.require(!a.empty() && a == b, "trials.csv bytes=" + std::to_string(a.size()));
    return o;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const std::string &name, const std::function<Outcome()> &fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception &e) {
            o.passed = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d %s [%s] (%.1fs)\n", o.passed ? "PASS" : "FAIL", id, name.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.passed ? 0 : 1;
    };

    Sweep sweep;
    bool swept = false;
    auto with_sweep = [&](const std::function<Outcome(const Sweep &)> &fn) {
        return [&, fn] {
            if (!swept) {
                sweep = full_sweep();
                swept = true;
            }
            return fn(sweep);
        };
    };

    report(1, "eps-sweep convergence", with_sweep(sweep_convergence));
    report(2, "ilc-only saturation", with_sweep(ilc_saturation));
    report(3, "redesign trigger pattern", with_sweep(redesign_pattern));
    report(4, "bilinear dmd recovery", dmd_recovery);
    report(5, "ilc fixed-point law", ilc_fixed_point);
    report(6, "structural invariants", structural);
    report(7, "sufficiency analysis", sufficiency);
    report(8, "determinism", with_sweep(determinism));
    return failures == 0 ? 0 : 1;
}
