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

// Seeded generators and reference computations shared by the tests. Nothing
// here calls into the library's own algorithms.

#ifndef LIFTCAL_TESTS_SUPPORT_HPP
#define LIFTCAL_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace testing_support {

using Complex = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline const Complex kI{0.0, 1.0};

inline MatrixXc pauli_x() {
    MatrixXc m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline MatrixXc pauli_y() {
    MatrixXc m(2, 2);
    m << 0, -kI, kI, 0;
    return m;
}

inline MatrixXc pauli_z() {
    MatrixXc m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline MatrixXc kron(const MatrixXc &a, const MatrixXc &b) {
    MatrixXc out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
    return out;
}

/// Bloch coordinates of a single-qubit density matrix from the explicit
/// 2x2 Pauli matrices.
inline VectorXd bloch1(const MatrixXc &rho) {
    return VectorXd{{(pauli_x() * rho).trace().real(), (pauli_y() * rho).trace().real(),
                     (pauli_z() * rho).trace().real()}};
}

/// exp(-i theta (n . sigma)) for a unit vector n.
inline MatrixXc su2_exp(double theta, const Eigen::Vector3d &n) {
    const MatrixXc ns = n(0) * pauli_x() + n(1) * pauli_y() + n(2) * pauli_z();
    return std::cos(theta) * MatrixXc::Identity(2, 2) - kI * std::sin(theta) * ns;
}

/// exp(-i dt H) for a traceless single-qubit H = a.sigma, closed form.
inline MatrixXc qubit_propagator(const Eigen::Vector3d &a, double dt) {
    const double r = a.norm();
    if (r == 0.0) return MatrixXc::Identity(2, 2);
    return su2_exp(r * dt, a / r);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

    MatrixXd matrix(Index r, Index c) {
        MatrixXd m(r, c);
        for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal();
        return m;
    }

    VectorXd vector(Index n) { return matrix(n, 1); }

    MatrixXc hermitian(Index d) {
        MatrixXc m(d, d);
        for (Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(normal(), normal());
        return 0.5 * (m + m.adjoint());
    }

    MatrixXc density(Index d) {
        MatrixXc m(d, d);
        for (Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(normal(), normal());
        MatrixXc rho = m * m.adjoint();
        return rho / rho.trace().real();
    }

    VectorXc ket(Index d) {
        VectorXc v(d);
        for (Index i = 0; i < d; ++i) v(i) = Complex(normal(), normal());
        return v.normalized();
    }

    /// Random orthogonal matrix from the QR factor of a Gaussian matrix.
    MatrixXd orthogonal(Index n) {
        Eigen::HouseholderQR<MatrixXd> qr(matrix(n, n));
        return qr.householderQ();
    }

    std::mt19937_64 &engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_;
};

/// Largest singular value by power iteration on M^T M.
inline double power_iteration_norm(const MatrixXd &m, int iterations = 5000) {
    VectorXd v = VectorXd::Ones(m.cols()).normalized();
    double sigma = 0.0;
    for (int k = 0; k < iterations; ++k) {
        VectorXd w = m.transpose() * (m * v);
        const double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        v = w / nrm;
        const double next = (m * v).norm();
        if (std::abs(next - sigma) <= 1e-15 * std::max(1.0, next)) return next;
        sigma = next;
    }
    return sigma;
}

/// Exact box-QP minimizer by enumerating every assignment of each variable
/// to {free, lower, upper}. Only for a handful of variables.
inline VectorXd box_qp_enumerate(const MatrixXd &h, const VectorXd &c, const VectorXd &lo,
                                 const VectorXd &hi) {
    const Index n = c.size();
    auto objective = [&](const VectorXd &x) { return 0.5 * x.dot(h * x) + c.dot(x); };
    VectorXd best;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<int> state(static_cast<std::size_t>(n), 0);
    for (;;) {
        VectorXd x = VectorXd::Zero(n);
        std::vector<Index> free_idx;
        for (Index i = 0; i < n; ++i) {
            const int s = state[static_cast<std::size_t>(i)];
            if (s == 0) free_idx.push_back(i);
            else x(i) = s == 1 ? lo(i) : hi(i);
        }
        bool ok = true;
        if (!free_idx.empty()) {
            const auto nf = static_cast<Index>(free_idx.size());
            MatrixXd hff(nf, nf);
            VectorXd rhs(nf);
            const VectorXd hx = h * x;
            for (Index a = 0; a < nf; ++a) {
                rhs(a) = -(c(free_idx[a]) + hx(free_idx[a]));
                for (Index b = 0; b < nf; ++b) hff(a, b) = h(free_idx[a], free_idx[b]);
            }
            const VectorXd xf = hff.fullPivLu().solve(rhs);
            for (Index a = 0; a < nf; ++a) {
                x(free_idx[a]) = xf(a);
                if (xf(a) < lo(free_idx[a]) - 1e-12 || xf(a) > hi(free_idx[a]) + 1e-12) ok = false;
            }
        }
        if (ok && objective(x) < best_val) {
            best_val = objective(x);
            best = x;
        }
        Index k = 0;
        while (k < n && ++state[static_cast<std::size_t>(k)] == 3) state[static_cast<std::size_t>(k++)] = 0;
        if (k == n) break;
    }
    return best;
}

/// Minimum of a box QP over a uniform grid with `points` nodes per axis.
inline double box_qp_grid_min(const MatrixXd &h, const VectorXd &c, const VectorXd &lo,
                              const VectorXd &hi, int points, VectorXd *arg = nullptr) {
    const Index n = c.size();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    double best = std::numeric_limits<double>::infinity();
    VectorXd x(n);
    for (;;) {
        for (Index i = 0; i < n; ++i) {
            x(i) = lo(i) + (hi(i) - lo(i)) * idx[static_cast<std::size_t>(i)] / (points - 1.0);
        }
        const double v = 0.5 * x.dot(h * x) + c.dot(x);
        if (v < best) {
            best = v;
            if (arg) *arg = x;
        }
        Index k = 0;
        while (k < n && ++idx[static_cast<std::size_t>(k)] == points) idx[static_cast<std::size_t>(k++)] = 0;
        if (k == n) break;
    }
    return best;
}

/// Least-squares slope of log(err) against log(h).
inline double loglog_slope(const std::vector<double> &h, const std::vector<double> &err) {
    const auto n = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testing_support

#endif  // LIFTCAL_TESTS_SUPPORT_HPP
