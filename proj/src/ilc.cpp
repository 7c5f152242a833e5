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

#include "liftcal/ilc.hpp"

#include <cmath>

#include "liftcal/errors.hpp"

namespace liftcal {

namespace {

double quad(const MatrixXd &h, const VectorXd &c, const VectorXd &x) {
    return 0.5 * x.dot(h * x) + c.dot(x);
}

VectorXd project(const VectorXd &x, const VectorXd &lo, const VectorXd &hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

double stationarity(const MatrixXd &h, const VectorXd &c, const VectorXd &x, const VectorXd &lo,
                    const VectorXd &hi) {
    const VectorXd g = h * x + c;
    return (x - project(x - g, lo, hi)).cwiseAbs().maxCoeff();
}

// Fix variables at their bounds and solve the remaining equality-free
// problem exactly. Returns false when the guess is not a KKT point.
bool polish(const MatrixXd &h, const VectorXd &c, const VectorXd &lo, const VectorXd &hi,
            VectorXd &x) {
    const Index n = x.size();
    const VectorXd g = h * x + c;
    std::vector<Index> free_idx;
    VectorXd fixed = VectorXd::Zero(n);
    Eigen::Array<bool, Eigen::Dynamic, 1> is_free(n);
    for (Index i = 0; i < n; ++i) {
        const double span = 1e-9 * std::max(1.0, hi(i) - lo(i));
        const bool at_lo = x(i) <= lo(i) + span && g(i) >= 0.0;
        const bool at_hi = x(i) >= hi(i) - span && g(i) <= 0.0;
        is_free(i) = !(at_lo || at_hi);
        if (is_free(i)) {
            free_idx.push_back(i);
        } else {
            fixed(i) = at_lo ? lo(i) : hi(i);
        }
    }
    VectorXd cand = fixed;
    if (!free_idx.empty()) {
        const auto nf = static_cast<Index>(free_idx.size());
        MatrixXd hff(nf, nf);
        VectorXd rhs(nf);
        const VectorXd hfix = h * fixed;
        for (Index a = 0; a < nf; ++a) {
            rhs(a) = -(c(free_idx[static_cast<std::size_t>(a)]) + hfix(free_idx[static_cast<std::size_t>(a)]));
            for (Index b = 0; b < nf; ++b) {
                hff(a, b) = h(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
            }
        }
        const VectorXd xf = hff.completeOrthogonalDecomposition().solve(rhs);
        for (Index a = 0; a < nf; ++a) cand(free_idx[static_cast<std::size_t>(a)]) = xf(a);
    }
    for (Index i = 0; i < n; ++i) {
        if (cand(i) < lo(i) || cand(i) > hi(i)) return false;
    }
    const VectorXd gc = h * cand + c;
    for (Index i = 0; i < n; ++i) {
        if (is_free(i)) continue;
        const double tol = 1e-9 * (1.0 + gc.cwiseAbs().maxCoeff());
        if (cand(i) == lo(i) && gc(i) < -tol) return false;
        if (cand(i) == hi(i) && gc(i) > tol) return false;
    }
    if (quad(h, c, cand) > quad(h, c, x) + 1e-14 * (1.0 + std::abs(quad(h, c, x)))) return false;
    x = std::move(cand);
    return true;
}

}  // namespace

void IlcConfig::validate() const {
    if (lambda < 0.0) throw ConfigError("ilc lambda must be non-negative");
    if (!(u_sat > 0.0) || !(du_sat > 0.0)) throw ConfigError("ilc saturation bounds must be positive");
    if (max_qp_iterations < 1) throw ConfigError("ilc max_qp_iterations must be >= 1");
    if (!(qp_tolerance > 0.0)) throw ConfigError("ilc qp_tolerance must be positive");
}

MatrixXd difference_operator(Index steps, Index channels) {
    MatrixXd d = MatrixXd::Zero(std::max<Index>(steps - 1, 0) * channels, steps * channels);
    for (Index s = 0; s + 1 < steps; ++s) {
        for (Index j = 0; j < channels; ++j) {
            d(s * channels + j, (s + 1) * channels + j) = 1.0;
            d(s * channels + j, s * channels + j) = -1.0;
        }
    }
    return d;
}

VectorXd disturbance(const MatrixXd &f_ref, const VectorXd &dx, const VectorXd &du) {
    if (f_ref.rows() != dx.size() || f_ref.cols() != du.size()) {
        throw ShapeError("lifted deviation does not match the lifted system");
    }
    return dx - f_ref * du;
}

VectorXd estimate_disturbance(const LiftedSystem &lifted, const RolloutRecord &record,
                              const ReferenceTriplet &ref, const VectorXd &delta_u_applied) {
    if (record.steps() != lifted.steps) throw ShapeError("rollout horizon does not match");
    const LiftedDeviation dev = lift_deviation(record, ref);
    return disturbance(lifted.f_ref, dev.dx, delta_u_applied);
}

BoxQpResult solve_box_qp(const MatrixXd &h, const VectorXd &c, const VectorXd &lo,
                         const VectorXd &hi, double tol, int max_iterations) {
    const Index n = c.size();
    if (h.rows() != n || h.cols() != n || lo.size() != n || hi.size() != n) {
        throw ShapeError("box QP dimensions disagree");
    }
    if ((lo.array() > hi.array()).any()) throw ConfigError("box QP has an empty feasible set");

    BoxQpResult out;
    // Interior unconstrained minimizer: nothing left to do.
    const VectorXd free_min = h.completeOrthogonalDecomposition().solve(-c);
    if ((free_min.array() >= lo.array()).all() && (free_min.array() <= hi.array()).all()) {
        out.x = free_min;
        out.objective = quad(h, c, out.x);
        out.stationarity = stationarity(h, c, out.x, lo, hi);
        out.converged = true;
        return out;
    }

    const double lip = std::max(Eigen::SelfAdjointEigenSolver<MatrixXd>(h, Eigen::EigenvaluesOnly)
                                    .eigenvalues()
                                    .maxCoeff(),
                                1e-300);
    VectorXd x = project(free_min, lo, hi);
    VectorXd y = x;
    double t = 1.0;
    double fx = quad(h, c, x);
    int it = 0;
    for (; it < max_iterations; ++it) {
        const VectorXd x_new = project(y - (h * y + c) / lip, lo, hi);
        const double f_new = quad(h, c, x_new);
        if (f_new > fx) {
            // Adaptive restart: drop momentum and take a plain projected step.
            t = 1.0;
            y = x;
            continue;
        }
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x_new + ((t - 1.0) / t_new) * (x_new - x);
        x = x_new;
        fx = f_new;
        t = t_new;
        if (it % 10 == 0 && stationarity(h, c, x, lo, hi) <= tol) break;
    }
    polish(h, c, lo, hi, x);
    out.x = std::move(x);
    out.objective = quad(h, c, out.x);
    out.stationarity = stationarity(h, c, out.x, lo, hi);
    out.iterations = it;
    out.converged = out.stationarity <= tol;
    return out;
}

Correction solve_correction(const MatrixXd &f_ref, const VectorXd &d_hat, const VectorXd &u_ref,
                            Index steps, Index channels, const IlcConfig &cfg) {
    cfg.validate();
    if (f_ref.rows() != d_hat.size() || f_ref.cols() != steps * channels ||
        u_ref.size() != steps * channels) {
        throw ShapeError("correction problem dimensions disagree");
    }
    MatrixXd wf = f_ref;
    VectorXd wd = d_hat;
    if (cfg.weight.size() != 0) {
        if (cfg.weight.cols() != f_ref.rows()) throw ShapeError("ILC weight has wrong width");
        wf = cfg.weight * f_ref;
        wd = cfg.weight * d_hat;
    }
    const MatrixXd dmat = difference_operator(steps, channels);
    const MatrixXd h = wf.transpose() * wf + cfg.lambda * cfg.lambda * dmat.transpose() * dmat;
    const VectorXd c = wf.transpose() * wd;
    const VectorXd lo = (-cfg.u_sat - u_ref.array()).max(-cfg.du_sat).matrix();
    const VectorXd hi = (cfg.u_sat - u_ref.array()).min(cfg.du_sat).matrix();
    if ((lo.array() > hi.array()).any()) {
        throw ConfigError("reference controls violate the saturation bound");
    }

    BoxQpResult qp = solve_box_qp(h, c, lo, hi, cfg.qp_tolerance, cfg.max_qp_iterations);
    const VectorXd zero = project(VectorXd::Zero(c.size()), lo, hi);
    if (quad(h, c, qp.x) > quad(h, c, zero)) qp.x = zero;

    Correction out;
    out.delta_u = std::move(qp.x);
    out.objective = 0.5 * (wf * out.delta_u + wd).squaredNorm() +
                    0.5 * cfg.lambda * cfg.lambda * (dmat * out.delta_u).squaredNorm();
    out.converged = qp.converged;
    return out;
}

Correction solve_correction(const LiftedSystem &lifted, const VectorXd &d_hat,
                            const ControlSchedule &u_ref, const IlcConfig &cfg) {
    return solve_correction(lifted.f_ref, d_hat, u_ref.lifted(), lifted.steps, lifted.channels, cfg);
}

IlcStepResult ilc_step(const LiftedSystem &lifted, const RolloutRecord &record,
                       const ReferenceTriplet &ref, const IlcState &state, const IlcConfig &cfg) {
    const VectorXd applied = record.controls.lifted() - ref.u_ref.lifted();
    const LiftedDeviation dev = lift_deviation(record, ref);
    const VectorXd d = disturbance(lifted.f_ref, dev.dx, applied);
    const Correction corr = solve_correction(lifted, d, ref.u_ref, cfg);

    IlcStepResult out;
    out.state = state;
    out.state.d_hat = d;
    out.state.delta_u = corr.delta_u;
    out.state.iteration = state.iteration + 1;
    out.state.tracking_rms.push_back(dev.dy.norm() / std::sqrt(static_cast<double>(dev.dy.size())));
    out.delta_u = corr.delta_u;
    out.converged = corr.converged;
    return out;
}

double contraction_estimate(const MatrixXd &f_true, const MatrixXd &f_ref) {
    if (f_true.rows() != f_ref.rows() || f_true.cols() != f_ref.cols()) {
        throw ShapeError("lifted maps have different shapes");
    }
    const MatrixXd m = MatrixXd::Identity(f_ref.cols(), f_ref.cols()) - pseudo_inverse(f_ref) * f_true;
    return spectral_norm(m);
}

}  // namespace liftcal
