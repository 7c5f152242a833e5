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

#ifndef LIFTCAL_PAULI_HPP
#define LIFTCAL_PAULI_HPP

#include <memory>
#include <string>
#include <vector>

#include "liftcal/linalg.hpp"

namespace liftcal {

/// Traceless n-qubit Pauli strings, their structure constants and the
/// real generators they induce on Bloch coordinates.
///
/// Ordering is lexicographic over {I, X, Y, Z}^n with the first qubit as the
/// most significant digit and the all-identity string removed, so for n = 1
/// the basis is [X, Y, Z] and for n = 2 it starts [IX, IY, IZ, XI, XX, ...].
///
/// Structure constants follow [P_j, P_k] = sum_l 2^n sigma_jkl P_l. They are
/// purely imaginary and antisymmetric in (j, k).
struct PauliBasis {
    int n = 0;
    std::vector<MatrixXc> operators;
    std::vector<std::string> labels;
    /// Flattened sigma_jkl, index (j * size() + k) * size() + l.
    std::vector<Complex> sigma_table;
    /// generators[i] is the real skew-symmetric matrix of H = P_i / 2^n acting
    /// on Bloch coordinates, i.e. vectorize_hamiltonian(P_i) / 2^n.
    std::vector<MatrixXd> generators;

    /// Hilbert space dimension 2^n.
    Index dim() const { return Index{1} << n; }
    /// Number of Bloch coordinates 4^n - 1.
    Index size() const { return static_cast<Index>(operators.size()); }

    Complex sigma(Index j, Index k, Index l) const {
        return sigma_table[static_cast<std::size_t>((j * size() + k) * size() + l)];
    }

    /// Position of a label such as "X" or "XZ"; throws if absent.
    Index index_of(const std::string &label) const;
};

using PauliBasisPtr = std::shared_ptr<const PauliBasis>;

/// Real Bloch coordinates x_j = Tr(P_j rho).
struct BlochState {
    VectorXd coords;
};

/// Supported range is 1 <= n <= 3.
PauliBasis build_basis(int n);

/// Shared immutable basis, cached per qubit count.
PauliBasisPtr shared_basis(int n);

BlochState density_to_bloch(const MatrixXc &rho, const PauliBasis &basis);
MatrixXc bloch_to_density(const BlochState &x, const PauliBasis &basis);

/// Bloch coordinates of a normalized ket |psi><psi|.
BlochState ket_to_bloch(const VectorXc &psi, const PauliBasis &basis);

/// Generator matrix [H]_lk = -i sum_j sigma_jkl Tr(P_j H) so that
/// d/dt x = [H] x reproduces d/dt rho = -i[H, rho]. The identity component of
/// H only contributes a global phase and is dropped.
MatrixXd vectorize_hamiltonian(const MatrixXc &h, const PauliBasis &basis);

/// Coefficients h_i = Tr(P_i H).
VectorXd pauli_coefficients(const MatrixXc &h, const PauliBasis &basis);

/// H = sum_i h_i P_i / 2^n.
MatrixXc hamiltonian_from_coefficients(const VectorXd &coeffs, const PauliBasis &basis);

/// Least-squares inverse of generator_from_coefficients: coefficients h, in the
/// h_i = Tr(P_i H) convention, minimizing || sum_i h_i generators[i] - g ||_F.
VectorXd generator_coefficients(const MatrixXd &g, const PauliBasis &basis);

/// sum_i h_i generators[i].
MatrixXd generator_from_coefficients(const VectorXd &coeffs, const PauliBasis &basis);

/// Largest admissible Bloch norm, sqrt(2^n - 1), reached by pure states.
double purity_bound(const PauliBasis &basis);

}  // namespace liftcal

#endif  // LIFTCAL_PAULI_HPP
