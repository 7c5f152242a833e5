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

#include <cmath>
#include <numbers>
#include <random>

#include "liftcal/errors.hpp"

namespace liftcal {

namespace {

const Complex kMinusI(0.0, -1.0);

struct Objective {
    double phi = 1.0;  // 1 - F^2
    VectorXd grad;
};

// 1 - |Tr(Ut^dag U)|^2 / d^2 and its gradient w.r.t. the lifted controls.
Objective evaluate(const HamiltonianModel &model, const GateTarget &target, const VectorXd &lifted) {
    const Index steps = model.horizon;
    const Index nc = model.num_controls();
    const Index d = target.dim();
    const auto u = ControlSchedule::from_lifted(lifted, steps, nc);

    std::vector<MatrixXc> props(static_cast<std::size_t>(steps));
    std::vector<std::vector<MatrixXc>> dprops(static_cast<std::size_t>(steps));
    for (Index s = 0; s < steps; ++s) {
        const VectorXd us = u.values.row(s).transpose();
        const MatrixXc gen = kMinusI * model.dt * model.hamiltonian(us);
        auto &dp = dprops[static_cast<std::size_t>(s)];
        for (Index j = 0; j < nc; ++j) {
            auto [expd, frechet] = expm_frechet(
                gen, (kMinusI * model.dt * model.control_hamiltonians[static_cast<std::size_t>(j)]).eval());
            if (j == 0) props[static_cast<std::size_t>(s)] = std::move(expd);
            dp.push_back(std::move(frechet));
        }
    }

    // forward[s] = U(s-1) ... U(0); backward[s] = Ut^dag U(T-1) ... U(s+1).
    std::vector<MatrixXc> forward(static_cast<std::size_t>(steps + 1));
    forward[0] = MatrixXc::Identity(d, d);
    for (Index s = 0; s < steps; ++s) {
        forward[static_cast<std::size_t>(s + 1)] =
            props[static_cast<std::size_t>(s)] * forward[static_cast<std::size_t>(s)];
    }
    std::vector<MatrixXc> backward(static_cast<std::size_t>(steps));
    backward[static_cast<std::size_t>(steps - 1)] = target.unitary.adjoint();
    for (Index s = steps - 2; s >= 0; --s) {
        backward[static_cast<std::size_t>(s)] =
            backward[static_cast<std::size_t>(s + 1)] * props[static_cast<std::size_t>(s + 1)];
    }

    const Complex overlap = (target.unitary.adjoint() * forward.back()).trace();
    const double dd = static_cast<double>(d * d);
    Objective out;
    out.phi = 1.0 - std::norm(overlap) / dd;
    out.grad.resize(steps * nc);
    for (Index s = 0; s < steps; ++s) {
        for (Index j = 0; j < nc; ++j) {
            const Complex dg = (backward[static_cast<std::size_t>(s)] *
                                dprops[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] *
                                forward[static_cast<std::size_t>(s)])
                                   .trace();
            out.grad(s * nc + j) = -2.0 * (std::conj(overlap) * dg).real() / dd;
        }
    }
    return out;
}

double infidelity_from_phi(double phi) {
    const double f2 = std::clamp(1.0 - phi, 0.0, 1.0);
    return 1.0 - std::sqrt(f2);
}

struct Attempt {
    VectorXd x;
    double infidelity = 1.0;
    std::vector<double> history;
    int iterations = 0;
};

// Projected quasi-Newton descent on 1 - F^2 over the box |u| <= u_sat.
Attempt optimize(const HamiltonianModel &model, const GateTarget &target, VectorXd x,
                 const QocConfig &cfg) {
    const double lo = -cfg.u_sat;
    const double hi = cfg.u_sat;
    auto clip = [&](const VectorXd &v) { return v.cwiseMax(lo).cwiseMin(hi).eval(); };
    x = clip(x);
    Objective obj = evaluate(model, target, x);
    const Index nv = x.size();
    MatrixXd hinv = MatrixXd::Identity(nv, nv);

    Attempt out;
    out.history.push_back(infidelity_from_phi(obj.phi));
    // Stop well below the requested tolerance; polishing is cheap at this scale.
    const double phi_goal = std::min(1e-14, cfg.infidelity_tolerance * 1e-4);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        if (obj.phi <= phi_goal) break;

        // Variables pinned at a bound with the gradient pushing outward stay fixed.
        Eigen::Array<bool, Eigen::Dynamic, 1> free(nv);
        for (Index i = 0; i < nv; ++i) {
            free(i) = !((x(i) <= lo && obj.grad(i) > 0.0) || (x(i) >= hi && obj.grad(i) < 0.0));
        }
        VectorXd g_free = obj.grad;
        for (Index i = 0; i < nv; ++i) {
            if (!free(i)) g_free(i) = 0.0;
        }
        if (g_free.norm() <= cfg.gradient_tolerance) break;

        VectorXd dir = -(hinv * g_free);
        for (Index i = 0; i < nv; ++i) {
            if (!free(i)) dir(i) = 0.0;
        }
        if (dir.dot(g_free) >= 0.0) {
            hinv.setIdentity();
            dir = -g_free;
        }

        double step = 1.0;
        bool accepted = false;
        VectorXd x_new;
        Objective next;
        for (int ls = 0; ls < 50; ++ls) {
            x_new = clip(x + step * dir);
            next = evaluate(model, target, x_new);
            if (next.phi <= obj.phi + 1e-4 * obj.grad.dot(x_new - x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || next.phi >= obj.phi) {
            if (hinv.isIdentity()) break;
            hinv.setIdentity();
            continue;
        }
        const VectorXd sv = x_new - x;
        const VectorXd yv = next.grad - obj.grad;
        const double sy = sv.dot(yv);
        if (sy > 1e-16) {
            const double rho = 1.0 / sy;
            const MatrixXd left = MatrixXd::Identity(nv, nv) - rho * sv * yv.transpose();
            hinv = left * hinv * left.transpose() + rho * sv * sv.transpose();
        }
        x = std::move(x_new);
        obj = std::move(next);
        out.history.push_back(std::min(out.history.back(), infidelity_from_phi(obj.phi)));
        out.iterations = it + 1;
    }
    out.x = std::move(x);
    out.infidelity = infidelity_from_phi(obj.phi);
    return out;
}

// Smooth seeded perturbation: a few low-frequency sine modes per channel.
VectorXd perturbed_guess(const ControlSchedule &base, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    ControlSchedule out = base;
    const Index steps = base.steps();
    for (Index j = 0; j < base.channels(); ++j) {
        for (int mode = 1; mode <= 3; ++mode) {
            const double a = amplitude * coef(rng) / mode;
            for (Index s = 0; s < steps; ++s) {
                out.values(s, j) += a * std::sin(std::numbers::pi * mode * (s + 0.5) /
                                                 static_cast<double>(steps));
            }
        }
    }
    return out.lifted();
}

}  // namespace

GateTarget GateTarget::from_unitary(const MatrixXc &u) {
    if (u.rows() != u.cols()) throw InvalidOperator("target gate must be square");
    if ((u.adjoint() * u - MatrixXc::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() > 1e-10) {
        throw InvalidOperator("target gate is not unitary");
    }
    return GateTarget{u};
}

void QocConfig::validate() const {
    if (max_iterations < 1) throw ConfigError("qoc max_iterations must be >= 1");
    if (!(u_sat > 0.0)) throw ConfigError("qoc u_sat must be positive");
    if (random_restarts < 0) throw ConfigError("qoc random_restarts must be >= 0");
}

MatrixXc gate_unitary(const HamiltonianModel &model, const ControlSchedule &u) {
    if (u.steps() != model.horizon || u.channels() != model.num_controls()) {
        throw ShapeError("control schedule does not span the model horizon");
    }
    const Index d = model.basis->dim();
    MatrixXc total = MatrixXc::Identity(d, d);
    for (Index s = 0; s < u.steps(); ++s) {
        const VectorXd us = u.values.row(s).transpose();
        total = expm((kMinusI * model.dt * model.hamiltonian(us)).eval()) * total;
    }
    return total;
}

double gate_fidelity(const HamiltonianModel &model, const ControlSchedule &u,
                     const GateTarget &target) {
    if (target.dim() != model.basis->dim()) throw ShapeError("target dimension mismatch");
    const MatrixXc total = gate_unitary(model, u);
    return std::abs((total.adjoint() * target.unitary).trace()) / static_cast<double>(target.dim());
}

ControlSchedule constant_area_guess(const HamiltonianModel &model, const GateTarget &target) {
    const auto &basis = *model.basis;
    const double duration = model.dt * model.horizon;
    // H_eff = i log(U_target) / duration, projected onto the control Hamiltonians.
    const MatrixXc log_u = target.unitary.log();
    MatrixXc h_eff = Complex(0.0, 1.0) * log_u / duration;
    h_eff = ((h_eff + h_eff.adjoint()) / 2.0).eval();
    h_eff -= h_eff.trace() / static_cast<double>(basis.dim()) *
             MatrixXc::Identity(basis.dim(), basis.dim());
    const VectorXd want = pauli_coefficients(h_eff, basis);
    MatrixXd cols(basis.size(), model.num_controls());
    for (Index j = 0; j < model.num_controls(); ++j) {
        cols.col(j) = pauli_coefficients(model.control_hamiltonians[static_cast<std::size_t>(j)], basis);
    }
    const VectorXd amp = cols.completeOrthogonalDecomposition().solve(want);
    ControlSchedule out = ControlSchedule::zeros(model.horizon, model.num_controls());
    out.values.rowwise() = amp.transpose();
    return out;
}

QocResult design_reference(const HamiltonianModel &model, const GateTarget &target,
                           const BlochState &x0, const QocConfig &cfg,
                           const std::optional<ControlSchedule> &warm_start) {
    cfg.validate();
    if (target.dim() != model.basis->dim()) throw ShapeError("target dimension mismatch");
    const Index steps = model.horizon;
    const Index nc = model.num_controls();
    const ControlSchedule area = constant_area_guess(model, target);

    std::vector<VectorXd> starts;
    if (warm_start) {
        if (warm_start->steps() != steps || warm_start->channels() != nc) {
            throw ShapeError("warm start does not match the model horizon");
        }
        starts.push_back(warm_start->lifted());
    } else {
        switch (cfg.initial_guess) {
            case InitialGuess::Zero: starts.push_back(VectorXd::Zero(steps * nc)); break;
            case InitialGuess::ConstantArea: starts.push_back(area.lifted()); break;
            case InitialGuess::RandomSeeded:
                starts.push_back(perturbed_guess(area, cfg.perturbation * cfg.u_sat, cfg.seed));
                break;
        }
    }
    if (cfg.initial_guess != InitialGuess::ConstantArea || warm_start) {
        starts.push_back(area.lifted());
    }
    for (int r = 0; r < cfg.random_restarts; ++r) {
        starts.push_back(perturbed_guess(area, cfg.perturbation * cfg.u_sat,
                                         cfg.seed + 0x9e3779b97f4a7c15ULL * (r + 1)));
    }

    Attempt best;
    bool have_best = false;
    for (const auto &start : starts) {
        Attempt attempt = optimize(model, target, start, cfg);
        if (!have_best || attempt.infidelity < best.infidelity) {
            best = std::move(attempt);
            have_best = true;
        }
        if (best.infidelity <= cfg.infidelity_tolerance) break;
    }
    if (best.infidelity > cfg.infidelity_tolerance) {
        throw QocConvergenceError("pulse design did not reach the infidelity tolerance",
                                  best.infidelity);
    }
    QocResult result;
    result.controls = ControlSchedule::from_lifted(best.x, steps, nc);
    result.reference = make_reference(model, result.controls, x0);
    result.infidelity = 1.0 - gate_fidelity(model, result.controls, target);
    result.history = std::move(best.history);
    result.iterations = best.iterations;
    return result;
}

}  // namespace liftcal
