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

#include "liftcal/pauli.hpp"

#include <array>
#include <cmath>
#include <mutex>

#include <unsupported/Eigen/KroneckerProduct>

#include "liftcal/errors.hpp"

namespace liftcal {

namespace {

constexpr double kStateTol = 1e-10;

std::array<MatrixXc, 4> single_qubit_paulis() {
    const Complex i(0.0, 1.0);
    MatrixXc id = MatrixXc::Identity(2, 2);
    MatrixXc x(2, 2), y(2, 2), z(2, 2);
    x << 0.0, 1.0, 1.0, 0.0;
    y << 0.0, -i, i, 0.0;
    z << 1.0, 0.0, 0.0, -1.0;
    return {id, x, y, z};
}

}  // namespace

Index PauliBasis::index_of(const std::string &label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return static_cast<Index>(i);
    }
    throw ConfigError("unknown Pauli label '" + label + "'");
}

PauliBasis build_basis(int n) {
    if (n < 1 || n > 3) {
        throw UnsupportedDimension("Pauli basis supports 1 <= n <= 3 qubits, got " +
                                   std::to_string(n));
    }
    static const char kNames[4] = {'I', 'X', 'Y', 'Z'};
    const auto singles = single_qubit_paulis();

    PauliBasis basis;
    basis.n = n;
    const int count = 1 << (2 * n);
    for (int code = 1; code < count; ++code) {
        MatrixXc op = MatrixXc::Identity(1, 1);
        std::string label;
        for (int q = n - 1; q >= 0; --q) {
            const int digit = (code >> (2 * q)) & 3;
            op = Eigen::kroneckerProduct(op, singles[digit]).eval();
            label.push_back(kNames[digit]);
        }
        basis.operators.push_back(std::move(op));
        basis.labels.push_back(std::move(label));
    }

    const Index size = basis.size();
    const double norm = static_cast<double>(basis.dim() * basis.dim());
    basis.sigma_table.assign(static_cast<std::size_t>(size * size * size), Complex(0.0));
    for (Index j = 0; j < size; ++j) {
        for (Index k = 0; k < size; ++k) {
            const MatrixXc comm = basis.operators[j] * basis.operators[k] -
                                  basis.operators[k] * basis.operators[j];
            for (Index l = 0; l < size; ++l) {
                // Tr(A B) without forming the product.
                const Complex tr = (comm.transpose().cwiseProduct(basis.operators[l])).sum();
                basis.sigma_table[static_cast<std::size_t>((j * size + k) * size + l)] =
                    tr / norm;
            }
        }
    }

    basis.generators.reserve(static_cast<std::size_t>(size));
    for (Index i = 0; i < size; ++i) {
        MatrixXd g(size, size);
        for (Index l = 0; l < size; ++l) {
            for (Index k = 0; k < size; ++k) {
                // -i * sigma is real because sigma is purely imaginary.
                g(l, k) = (Complex(0.0, -1.0) * basis.sigma(i, k, l)).real();
            }
        }
        basis.generators.push_back(std::move(g));
    }
    return basis;
}

PauliBasisPtr shared_basis(int n) {
    static std::mutex mu;
    static std::array<PauliBasisPtr, 4> cache;
    if (n < 1 || n > 3) return std::make_shared<const PauliBasis>(build_basis(n));
    std::lock_guard<std::mutex> lock(mu);
    auto &slot = cache[static_cast<std::size_t>(n)];
    if (!slot) slot = std::make_shared<const PauliBasis>(build_basis(n));
    return slot;
}

double purity_bound(const PauliBasis &basis) {
    return std::sqrt(static_cast<double>(basis.dim() - 1));
}

BlochState density_to_bloch(const MatrixXc &rho, const PauliBasis &basis) {
    if (rho.rows() != basis.dim() || rho.cols() != basis.dim()) {
        throw ShapeError("density matrix has wrong dimension");
    }
    if (!is_hermitian(rho, kStateTol)) throw InvalidState("density matrix is not Hermitian");
    if (std::abs(rho.trace() - Complex(1.0)) > kStateTol) {
        throw InvalidState("density matrix does not have unit trace");
    }
    const MatrixXc herm = (rho + rho.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<MatrixXc> eig(herm, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kStateTol) {
        throw InvalidState("density matrix is not positive semidefinite");
    }
    BlochState out{VectorXd(basis.size())};
    for (Index j = 0; j < basis.size(); ++j) {
        const Complex tr = (basis.operators[j].transpose().cwiseProduct(rho)).sum();
        if (std::abs(tr.imag()) > 1e-12) throw InvalidState("complex Bloch coordinate");
        out.coords(j) = tr.real();
    }
    return out;
}

MatrixXc bloch_to_density(const BlochState &x, const PauliBasis &basis) {
    if (x.coords.size() != basis.size()) throw ShapeError("Bloch vector has wrong length");
    if (x.coords.norm() > purity_bound(basis) + 1e-12) {
        throw InvalidState("Bloch vector exceeds the purity bound");
    }
    const double d = static_cast<double>(basis.dim());
    MatrixXc rho = MatrixXc::Identity(basis.dim(), basis.dim()) / d;
    for (Index j = 0; j < basis.size(); ++j) rho += x.coords(j) / d * basis.operators[j];
    return rho;
}

BlochState ket_to_bloch(const VectorXc &psi, const PauliBasis &basis) {
    if (psi.size() != basis.dim()) throw ShapeError("ket has wrong dimension");
    const double nrm = psi.norm();
    if (std::abs(nrm - 1.0) > kStateTol) throw InvalidState("ket is not normalized");
    return density_to_bloch(psi * psi.adjoint(), basis);
}

VectorXd pauli_coefficients(const MatrixXc &h, const PauliBasis &basis) {
    if (h.rows() != basis.dim() || h.cols() != basis.dim()) {
        throw ShapeError("operator has wrong dimension");
    }
    if (!is_hermitian(h, kStateTol)) throw InvalidOperator("operator is not Hermitian");
    VectorXd coeffs(basis.size());
    for (Index j = 0; j < basis.size(); ++j) {
        coeffs(j) = (basis.operators[j].transpose().cwiseProduct(h)).sum().real();
    }
    return coeffs;
}

MatrixXc hamiltonian_from_coefficients(const VectorXd &coeffs, const PauliBasis &basis) {
    if (coeffs.size() != basis.size()) throw ShapeError("coefficient vector has wrong length");
    MatrixXc h = MatrixXc::Zero(basis.dim(), basis.dim());
    const double d = static_cast<double>(basis.dim());
    for (Index j = 0; j < basis.size(); ++j) h += coeffs(j) / d * basis.operators[j];
    return h;
}

MatrixXd generator_from_coefficients(const VectorXd &coeffs, const PauliBasis &basis) {
    if (coeffs.size() != basis.size()) throw ShapeError("coefficient vector has wrong length");
    MatrixXd g = MatrixXd::Zero(basis.size(), basis.size());
    for (Index j = 0; j < basis.size(); ++j) g += coeffs(j) * basis.generators[j];
    return g;
}

MatrixXd vectorize_hamiltonian(const MatrixXc &h, const PauliBasis &basis) {
    return generator_from_coefficients(pauli_coefficients(h, basis), basis);
}

VectorXd generator_coefficients(const MatrixXd &g, const PauliBasis &basis) {
    if (g.rows() != basis.size() || g.cols() != basis.size()) {
        throw ShapeError("generator has wrong dimension");
    }
    const Index size = basis.size();
    MatrixXd gram(size, size);
    VectorXd rhs(size);
    for (Index i = 0; i < size; ++i) {
        rhs(i) = basis.generators[i].cwiseProduct(g).sum();
        for (Index k = 0; k < size; ++k) {
            gram(i, k) = basis.generators[i].cwiseProduct(basis.generators[k]).sum();
        }
    }
    return gram.ldlt().solve(rhs);
}

}  // namespace liftcal
