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

// Small dense helpers shared by the modules. Everything here is templated on
// the Eigen expression type so it works for real and complex scalars alike.

#ifndef LIFTCAL_LINALG_HPP
#define LIFTCAL_LINALG_HPP

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <complex>
#include <utility>

namespace liftcal {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using Complex = std::complex<double>;

template <typename Derived>
typename Derived::PlainObject skew_part(const Eigen::MatrixBase<Derived> &m) {
    return (m - m.transpose()) / typename Derived::Scalar(2);
}

template <typename Derived>
typename Derived::PlainObject symmetric_part(const Eigen::MatrixBase<Derived> &m) {
    return (m + m.transpose()) / typename Derived::Scalar(2);
}

template <typename Derived>
bool is_skew_symmetric(const Eigen::MatrixBase<Derived> &m, double tol) {
    return m.rows() == m.cols() && (m + m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived> &m, double tol) {
    return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// Column-wise Kronecker product: column t is u(t) (x) x(t).
template <typename DerivedU, typename DerivedX>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic>
khatri_rao(const Eigen::MatrixBase<DerivedU> &u, const Eigen::MatrixBase<DerivedX> &x) {
    eigen_assert(u.cols() == x.cols());
    Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
        u.rows() * x.rows(), x.cols());
    for (Index t = 0; t < x.cols(); ++t) {
        for (Index j = 0; j < u.rows(); ++j) {
            out.col(t).segment(j * x.rows(), x.rows()) = u(j, t) * x.col(t);
        }
    }
    return out;
}

/// exp(a) together with the Frechet derivative L(a, e) = d/dh exp(a + h e) at h = 0.
///
/// Uses the block identity exp([[a, e], [0, a]]) = [[exp(a), L(a, e)], [0, exp(a)]].
template <typename DerivedA, typename DerivedE>
std::pair<typename DerivedA::PlainObject, typename DerivedA::PlainObject>
expm_frechet(const Eigen::MatrixBase<DerivedA> &a, const Eigen::MatrixBase<DerivedE> &e) {
    using Plain = typename DerivedA::PlainObject;
    const Index n = a.rows();
    Plain block = Plain::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = a;
    block.topRightCorner(n, n) = e;
    block.bottomRightCorner(n, n) = a;
    Plain expd = block.exp();
    return {expd.topLeftCorner(n, n), expd.topRightCorner(n, n)};
}

template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived> &a) {
    typename Derived::PlainObject plain = a;
    return plain.exp();
}

/// Largest singular value.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived> &m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<typename Derived::PlainObject> svd(m);
    return svd.singularValues()(0);
}

/// Moore-Penrose pseudo-inverse (the left inverse when m has full column rank).
template <typename Derived>
typename Derived::PlainObject pseudo_inverse(const Eigen::MatrixBase<Derived> &m) {
    Eigen::CompleteOrthogonalDecomposition<typename Derived::PlainObject> cod(m);
    return cod.pseudoInverse();
}

}  // namespace liftcal

#endif  // LIFTCAL_LINALG_HPP
