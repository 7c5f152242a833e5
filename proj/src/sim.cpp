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

#include "liftcal/sim.hpp"

#include <random>

#include "liftcal/errors.hpp"

namespace liftcal {

namespace {

constexpr double kSkewTol = 1e-12;

MatrixXd default_observation(const MatrixXd &observation, Index n) {
    return observation.size() == 0 ? MatrixXd::Identity(n, n) : observation;
}

}  // namespace

HamiltonianModel HamiltonianModel::from_hamiltonians(PauliBasisPtr basis, const MatrixXc &h0,
                                                     const std::vector<MatrixXc> &hc, double dt,
                                                     int horizon, MatrixXd observation) {
    if (!basis) throw ConfigError("model requires a Pauli basis");
    HamiltonianModel m;
    m.drift_hamiltonian = h0;
    m.control_hamiltonians = hc;
    m.drift = vectorize_hamiltonian(h0, *basis);
    for (const auto &h : hc) m.controls.push_back(vectorize_hamiltonian(h, *basis));
    m.dt = dt;
    m.horizon = horizon;
    m.observation = default_observation(observation, basis->size());
    m.basis = std::move(basis);
    m.validate();
    return m;
}

HamiltonianModel HamiltonianModel::from_generators(PauliBasisPtr basis, const MatrixXd &g0,
                                                   const std::vector<MatrixXd> &gc, double dt,
                                                   int horizon, MatrixXd observation) {
    if (!basis) throw ConfigError("model requires a Pauli basis");
    HamiltonianModel m;
    m.drift = g0;
    m.controls = gc;
    m.drift_hamiltonian = hamiltonian_from_coefficients(generator_coefficients(g0, *basis), *basis);
    for (const auto &g : gc) {
        m.control_hamiltonians.push_back(
            hamiltonian_from_coefficients(generator_coefficients(g, *basis), *basis));
    }
    m.dt = dt;
    m.horizon = horizon;
    m.observation = default_observation(observation, basis->size());
    m.basis = std::move(basis);
    m.validate();
    return m;
}

MatrixXd HamiltonianModel::generator(const Eigen::Ref<const VectorXd> &u) const {
    if (u.size() != num_controls()) throw ShapeError("control vector has wrong length");
    MatrixXd g = drift;
    for (Index j = 0; j < num_controls(); ++j) g += u(j) * controls[static_cast<std::size_t>(j)];
    return g;
}

MatrixXc HamiltonianModel::hamiltonian(const Eigen::Ref<const VectorXd> &u) const {
    if (u.size() != num_controls()) throw ShapeError("control vector has wrong length");
    MatrixXc h = drift_hamiltonian;
    for (Index j = 0; j < num_controls(); ++j) {
        h += u(j) * control_hamiltonians[static_cast<std::size_t>(j)];
    }
    return h;
}

void HamiltonianModel::validate() const {
    if (!basis) throw ConfigError("model requires a Pauli basis");
    const Index n = basis->size();
    if (dt <= 0.0) throw ConfigError("dt must be positive");
    if (horizon < 1) throw ConfigError("horizon must be at least one step");
    if (controls.empty()) throw ConfigError("model needs at least one control");
    if (drift.rows() != n || drift.cols() != n) throw ShapeError("drift generator has wrong shape");
    if (!is_skew_symmetric(drift, kSkewTol)) throw ConfigError("drift generator is not skew-symmetric");
    for (const auto &g : controls) {
        if (g.rows() != n || g.cols() != n) throw ShapeError("control generator has wrong shape");
        if (!is_skew_symmetric(g, kSkewTol)) {
            throw ConfigError("control generator is not skew-symmetric");
        }
    }
    if (control_hamiltonians.size() != controls.size()) {
        throw ShapeError("control Hamiltonian count does not match generators");
    }
    if (observation.cols() != n || observation.rows() < 1) {
        throw ShapeError("observation matrix has wrong shape");
    }
}

HamiltonianModel single_qubit_model(double dt, int horizon) {
    auto basis = shared_basis(1);
    const MatrixXc zero = MatrixXc::Zero(2, 2);
    const auto &x = basis->operators[0];
    const auto &y = basis->operators[1];
    return HamiltonianModel::from_hamiltonians(basis, zero, {x, y}, dt, horizon);
}

VectorXd ControlSchedule::lifted() const {
    VectorXd out(values.size());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out.data(), values.rows(), values.cols()) = values;
    return out;
}

ControlSchedule ControlSchedule::from_lifted(const VectorXd &v, Index steps, Index channels) {
    if (v.size() != steps * channels) throw ShapeError("lifted control has wrong length");
    ControlSchedule out;
    out.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(v.data(), steps, channels);
    return out;
}

ControlSchedule ControlSchedule::zeros(Index steps, Index channels) {
    return ControlSchedule{MatrixXd::Zero(steps, channels)};
}

ErrorModel ErrorModel::zero(Index axes, Index controls) {
    return ErrorModel{VectorXd::Zero(axes), MatrixXd::Zero(axes, controls)};
}

ErrorModel ErrorModel::single_qubit(double eps_z, double eps_x, double eps_y) {
    ErrorModel err = zero(3, 2);
    err.drift_offset(2) = eps_z;
    err.gain_error.col(0).setConstant(eps_x);
    err.gain_error.col(1).setConstant(eps_y);
    return err;
}

bool ErrorModel::is_zero() const {
    return (drift_offset.size() == 0 || drift_offset.isZero(0.0)) &&
           (gain_error.size() == 0 || gain_error.isZero(0.0));
}

ErrorModel sample_error_model(double mean_eps, std::uint64_t seed, SignPolicy policy) {
    if (mean_eps == 0.0) return ErrorModel::single_qubit(0.0, 0.0, 0.0);
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    const double mag = std::abs(mean_eps);
    auto draw = [&]() {
        const double sign = (policy == SignPolicy::Random && coin(rng)) ? -1.0 : 1.0;
        std::normal_distribution<double> normal(sign * mag, mag / 10.0);
        return normal(rng);
    };
    const double eps_z = draw();
    const double eps_x = draw();
    const double eps_y = draw();
    return ErrorModel::single_qubit(eps_z, eps_x, eps_y);
}

HamiltonianModel apply_error_model(const HamiltonianModel &nominal, const ErrorModel &err) {
    const auto &basis = *nominal.basis;
    if (err.drift_offset.size() != basis.size() || err.gain_error.rows() != basis.size() ||
        err.gain_error.cols() != nominal.num_controls()) {
        throw ConfigError("error model axes do not match the nominal model");
    }
    if (err.is_zero()) return nominal;

    MatrixXc h0 = nominal.drift_hamiltonian +
                  hamiltonian_from_coefficients(err.drift_offset * static_cast<double>(basis.dim()),
                                                basis);
    std::vector<MatrixXc> hc;
    std::vector<MatrixXd> gc;
    for (Index j = 0; j < nominal.num_controls(); ++j) {
        const VectorXd coeffs =
            pauli_coefficients(nominal.control_hamiltonians[static_cast<std::size_t>(j)], basis);
        const VectorXd scaled =
            coeffs.cwiseProduct((VectorXd::Ones(basis.size()) + err.gain_error.col(j)));
        hc.push_back(hamiltonian_from_coefficients(scaled, basis));
        gc.push_back(generator_from_coefficients(scaled, basis));
    }
    HamiltonianModel out = nominal;
    out.drift_hamiltonian = h0;
    out.drift = vectorize_hamiltonian(h0, basis);
    out.control_hamiltonians = std::move(hc);
    out.controls = std::move(gc);
    out.validate();
    return out;
}

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::InitialQoc: return "initial-qoc";
        case Phase::DmdRedesign: return "dmd-redesign";
        case Phase::Ilc: return "ilc";
    }
    return "unknown";
}

MatrixXd step_propagator(const HamiltonianModel &model, const Eigen::Ref<const VectorXd> &u) {
    return expm(model.dt * model.generator(u));
}

RolloutRecord rollout(const HamiltonianModel &model, const ControlSchedule &u,
                      const BlochState &x0, const RolloutOptions &options) {
    if (u.steps() != model.horizon || u.channels() != model.num_controls()) {
        throw ShapeError("control schedule does not match the model horizon");
    }
    if (x0.coords.size() != model.state_dim()) throw ShapeError("initial state has wrong length");

    RolloutRecord rec;
    rec.controls = u;
    rec.states.resize(model.horizon + 1, model.state_dim());
    rec.states.row(0) = x0.coords.transpose();
    for (int s = 0; s < model.horizon; ++s) {
        const VectorXd us = u.values.row(s).transpose();
        rec.states.row(s + 1) =
            (step_propagator(model, us) * rec.states.row(s).transpose()).transpose();
    }
    rec.observations = rec.states * model.observation.transpose();
    if (options.observation_noise > 0.0) {
        std::mt19937_64 rng(options.noise_seed);
        std::normal_distribution<double> noise(0.0, options.observation_noise);
        for (Index i = 0; i < rec.observations.size(); ++i) rec.observations.data()[i] += noise(rng);
    }
    return rec;
}

}  // namespace liftcal
