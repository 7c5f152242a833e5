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

#include "liftcal/checks.hpp"

#include <algorithm>
#include <random>

#include "liftcal/lifting.hpp"

namespace liftcal {

namespace {

MatrixXc random_hermitian(Index d, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    MatrixXc m(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
    }
    return 0.5 * (m + m.adjoint());
}

MatrixXc random_density(Index d, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    MatrixXc m(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
    }
    MatrixXc rho = m * m.adjoint();
    return rho / rho.trace().real();
}

HamiltonianModel random_model(int n, double dt, int horizon, std::mt19937_64 &rng) {
    const PauliBasisPtr basis = shared_basis(n);
    const MatrixXc h0 = 0.3 * random_hermitian(basis->dim(), rng);
    std::vector<MatrixXc> hc{random_hermitian(basis->dim(), rng), random_hermitian(basis->dim(), rng)};
    return HamiltonianModel::from_hamiltonians(basis, h0, hc, dt, horizon);
}

ControlSchedule random_controls(Index steps, Index channels, double scale, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-scale, scale);
    ControlSchedule c = ControlSchedule::zeros(steps, channels);
    for (Index i = 0; i < c.values.size(); ++i) c.values.data()[i] = u(rng);
    return c;
}

BlochState random_pure(const PauliBasis &basis, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    VectorXc psi(basis.dim());
    for (Index i = 0; i < psi.size(); ++i) psi(i) = Complex(g(rng), g(rng));
    return ket_to_bloch(psi.normalized(), basis);
}

CheckResult verdict(std::string name, double value, double tol) {
    return {std::move(name), value, tol, value <= tol};
}

double pauli_orthogonality() {
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
        const PauliBasis &b = *shared_basis(n);
        const double d = static_cast<double>(b.dim());
        for (Index i = 0; i < b.size(); ++i) {
            for (Index j = 0; j < b.size(); ++j) {
                const Complex ip = (b.operators[i] * b.operators[j]).trace() / d;
                worst = std::max(worst, std::abs(ip - Complex(i == j ? 1.0 : 0.0, 0.0)));
            }
        }
    }
    return worst;
}

double structure_reconstruction() {
    double worst = 0.0;
    for (int n = 1; n <= 2; ++n) {
        const PauliBasis &b = *shared_basis(n);
        const double d = static_cast<double>(b.dim());
        for (Index j = 0; j < b.size(); ++j) {
            for (Index k = 0; k < b.size(); ++k) {
                MatrixXc rebuilt = MatrixXc::Zero(b.dim(), b.dim());
                for (Index l = 0; l < b.size(); ++l) rebuilt += d * b.sigma(j, k, l) * b.operators[l];
                const MatrixXc comm = b.operators[j] * b.operators[k] - b.operators[k] * b.operators[j];
                worst = std::max(worst, (comm - rebuilt).cwiseAbs().maxCoeff());
            }
        }
    }
    return worst;
}

// Largest of the skew-symmetry defect and the mismatch between [H] x and the
// Bloch coordinates of -i [H, rho].
double generator_vs_commutator(std::mt19937_64 &rng) {
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
        const PauliBasis &b = *shared_basis(n);
        for (int trial = 0; trial < 5; ++trial) {
            const MatrixXc h = random_hermitian(b.dim(), rng);
            const MatrixXc rho = random_density(b.dim(), rng);
            const MatrixXd g = vectorize_hamiltonian(h, b);
            worst = std::max(worst, (g + g.transpose()).cwiseAbs().maxCoeff());
            const MatrixXc drho = Complex(0.0, -1.0) * (h * rho - rho * h);
            VectorXd oracle(b.size());
            for (Index j = 0; j < b.size(); ++j) oracle(j) = (b.operators[j] * drho).trace().real();
            const VectorXd x = density_to_bloch(rho, b).coords;
            worst = std::max(worst, (g * x - oracle).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

double norm_conservation(std::mt19937_64 &rng) {
    double worst = 0.0;
    for (int n = 1; n <= 2; ++n) {
        const HamiltonianModel m = random_model(n, 0.05, 1000, rng);
        const BlochState x0 = random_pure(*m.basis, rng);
        const RolloutRecord r = rollout(m, random_controls(1000, 2, 2.0, rng), x0);
        const double n0 = x0.coords.norm();
        for (Index s = 0; s < r.states.rows(); ++s) {
            worst = std::max(worst, std::abs(r.states.row(s).norm() - n0));
        }
    }
    return worst;
}

// Worst of the upper-block entries of F and the gap between F du and the
// recursion dx(s+1) = A(s) dx(s) + B(s) du(s).
double lifted_structure(std::mt19937_64 &rng) {
    double worst = 0.0;
    for (int n = 1; n <= 2; ++n) {
        for (int horizon : {1, 4, 10}) {
            const HamiltonianModel m = random_model(n, 0.1, horizon, rng);
            const ReferenceTriplet ref =
                make_reference(m, random_controls(horizon, 2, 1.0, rng), random_pure(*m.basis, rng));
            const Jacobians jac = linearize(m, ref);
            const LiftedSystem lifted = build_lifted(jac, MatrixXd::Identity(m.state_dim(), m.state_dim()));
            const Index nn = m.state_dim();
            for (Index s = 0; s <= horizon; ++s) {
                for (Index k = s; k < horizon; ++k) {
                    worst = std::max(worst, lifted.f_ref.block(s * nn, k * 2, nn, 2).cwiseAbs().maxCoeff());
                }
            }
            const VectorXd du = random_controls(horizon, 2, 1.0, rng).lifted();
            VectorXd dx = VectorXd::Zero(nn);
            VectorXd stacked((horizon + 1) * nn);
            stacked.head(nn) = dx;
            for (Index s = 0; s < horizon; ++s) {
                dx = jac.a[static_cast<std::size_t>(s)] * dx + jac.b[static_cast<std::size_t>(s)] * du.segment(s * 2, 2);
                stacked.segment((s + 1) * nn, nn) = dx;
            }
            worst = std::max(worst, (lifted.f_ref * du - stacked).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

double jacobian_fd(std::mt19937_64 &rng) {
    double worst = 0.0;
    const double h = 1e-6;
    for (int n = 1; n <= 2; ++n) {
        const HamiltonianModel m = random_model(n, 0.1, 3, rng);
        const ReferenceTriplet ref =
            make_reference(m, random_controls(3, 2, 1.0, rng), random_pure(*m.basis, rng));
        const Jacobians jac = linearize(m, ref);
        for (Index s = 0; s < 3; ++s) {
            const VectorXd x = ref.x_ref.row(s).transpose();
            const VectorXd u = ref.u_ref.values.row(s).transpose();
            MatrixXd a_fd(m.state_dim(), m.state_dim()), b_fd(m.state_dim(), 2);
            for (Index i = 0; i < m.state_dim(); ++i) {
                VectorXd e = VectorXd::Zero(m.state_dim());
                e(i) = h;
                const MatrixXd p = step_propagator(m, u);
                a_fd.col(i) = (p * (x + e) - p * (x - e)) / (2.0 * h);
            }
            for (Index j = 0; j < 2; ++j) {
                VectorXd e = VectorXd::Zero(2);
                e(j) = h;
                b_fd.col(j) = (step_propagator(m, u + e) * x - step_propagator(m, u - e) * x) / (2.0 * h);
            }
            const auto &a = jac.a[static_cast<std::size_t>(s)];
            const auto &b = jac.b[static_cast<std::size_t>(s)];
            worst = std::max(worst, (a - a_fd).norm() / std::max(a.norm(), 1e-300));
            worst = std::max(worst, (b - b_fd).norm() / std::max(b.norm(), 1e-300));
        }
    }
    return worst;
}

}  // namespace

std::vector<CheckResult> structural_checks(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<CheckResult> out;
    out.push_back(verdict("pauli-orthogonality", pauli_orthogonality(), 1e-12));
    out.push_back(verdict("structure-constants", structure_reconstruction(), 1e-12));
    out.push_back(verdict("generator-commutator", generator_vs_commutator(rng), 1e-10));
    out.push_back(verdict("norm-conservation", norm_conservation(rng), 1e-9));
    out.push_back(verdict("lifted-map-recursion", lifted_structure(rng), 1e-12));
    out.push_back(verdict("jacobian-finite-difference", jacobian_fd(rng), 1e-6));
    return out;
}

}  // namespace liftcal
