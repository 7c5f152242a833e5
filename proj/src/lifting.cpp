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

#include "liftcal/lifting.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include "liftcal/errors.hpp"

namespace liftcal {

VectorXd stack_time_major(const MatrixXd &rows) {
    VectorXd out(rows.size());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out.data(), rows.rows(), rows.cols()) = rows;
    return out;
}

ReferenceTriplet make_reference(const HamiltonianModel &model, const ControlSchedule &u,
                                const BlochState &x0) {
    const RolloutRecord rec = rollout(model, u, x0);
    return ReferenceTriplet{rec.observations, rec.states, u, model};
}

double feasibility_remainder(const HamiltonianModel &model, const ReferenceTriplet &ref) {
    if (ref.steps() != model.horizon || ref.x_ref.rows() != model.horizon + 1) {
        throw ShapeError("reference horizon does not match the model");
    }
    double worst = 0.0;
    for (int s = 0; s < model.horizon; ++s) {
        const VectorXd us = ref.u_ref.values.row(s).transpose();
        const VectorXd next = step_propagator(model, us) * ref.x_ref.row(s).transpose();
        worst = std::max(worst, (next - ref.x_ref.row(s + 1).transpose()).norm());
    }
    return worst;
}

Jacobians linearize(const HamiltonianModel &model, const ReferenceTriplet &ref,
                    double remainder_tol) {
    if (feasibility_remainder(model, ref) > remainder_tol) {
        throw InfeasibleReference("reference is not a trajectory of the model");
    }
    Jacobians jac;
    const Index n = model.state_dim();
    const Index nc = model.num_controls();
    for (int s = 0; s < model.horizon; ++s) {
        const VectorXd us = ref.u_ref.values.row(s).transpose();
        const MatrixXd gen = model.dt * model.generator(us);
        const VectorXd xs = ref.x_ref.row(s).transpose();
        MatrixXd b(n, nc);
        MatrixXd a;
        for (Index j = 0; j < nc; ++j) {
            auto [expd, frechet] =
                expm_frechet(gen, model.dt * model.controls[static_cast<std::size_t>(j)]);
            if (j == 0) a = std::move(expd);
            b.col(j) = frechet * xs;
        }
        jac.a.push_back(std::move(a));
        jac.b.push_back(std::move(b));
    }
    return jac;
}

LiftedSystem build_lifted(const Jacobians &jac, const MatrixXd &observation) {
    const auto steps = static_cast<Index>(jac.a.size());
    if (steps == 0 || jac.b.size() != jac.a.size()) throw ShapeError("Jacobian lists are inconsistent");
    const Index n = jac.a.front().rows();
    const Index nc = jac.b.front().cols();
    for (Index s = 0; s < steps; ++s) {
        const auto &a = jac.a[static_cast<std::size_t>(s)];
        const auto &b = jac.b[static_cast<std::size_t>(s)];
        if (a.rows() != n || a.cols() != n || b.rows() != n || b.cols() != nc) {
            throw ShapeError("Jacobian shapes differ across steps");
        }
    }
    if (observation.cols() != n) throw ShapeError("observation matrix has wrong width");

    LiftedSystem lifted;
    lifted.steps = steps;
    lifted.state_dim = n;
    lifted.channels = nc;
    lifted.jacobians = jac;
    lifted.f_ref = MatrixXd::Zero((steps + 1) * n, steps * nc);
    // Block (s, m) = A(s-1) ... A(m+1) B(m), built one block row at a time.
    for (Index s = 1; s <= steps; ++s) {
        const auto &a_prev = jac.a[static_cast<std::size_t>(s - 1)];
        for (Index m = 0; m + 1 < s; ++m) {
            lifted.f_ref.block(s * n, m * nc, n, nc) =
                a_prev * lifted.f_ref.block((s - 1) * n, m * nc, n, nc);
        }
        lifted.f_ref.block(s * n, (s - 1) * nc, n, nc) = jac.b[static_cast<std::size_t>(s - 1)];
    }
    lifted.g = Eigen::kroneckerProduct(MatrixXd::Identity(steps + 1, steps + 1), observation);
    return lifted;
}

LiftedDeviation lift_deviation(const RolloutRecord &record, const ReferenceTriplet &ref,
                               double reset_tol) {
    if (record.states.rows() != ref.x_ref.rows() || record.states.cols() != ref.x_ref.cols() ||
        record.controls.steps() != ref.u_ref.steps() ||
        record.controls.channels() != ref.u_ref.channels() ||
        record.observations.cols() != ref.y_ref.cols()) {
        throw ShapeError("rollout and reference horizons differ");
    }
    if ((record.states.row(0) - ref.x_ref.row(0)).norm() > reset_tol) {
        throw ResetError("rollout did not start from the reference initial state");
    }
    LiftedDeviation dev;
    dev.dx = stack_time_major(record.states - ref.x_ref);
    dev.dy = stack_time_major(record.observations - ref.y_ref);
    dev.du = record.controls.lifted() - ref.u_ref.lifted();
    return dev;
}

}  // namespace liftcal
