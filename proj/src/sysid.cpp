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

#include "liftcal/sysid.hpp"

#include <cmath>
#include <limits>

#include "liftcal/errors.hpp"

namespace liftcal {

namespace {

double relative_conditioning(const MatrixXd &m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixXd> svd(m);
    const VectorXd &sv = svd.singularValues();
    if (sv(0) == 0.0) return 0.0;
    // Fewer columns than rows leaves trailing singular values at zero.
    if (m.cols() < m.rows()) return 0.0;
    return sv(sv.size() - 1) / sv(0);
}

// Regressor blocks: block 0 is the state, block j+1 is u_j * state.
struct Regression {
    std::vector<MatrixXd> blocks;
    MatrixXd target;
};

Regression regression_for(const SnapshotSet &snap) {
    Regression reg;
    MatrixXd base;
    switch (snap.mode) {
        case DerivativeMode::Discrete:
            base = snap.x;
            reg.target = snap.x_prime;
            break;
        case DerivativeMode::ContinuousFd:
        case DerivativeMode::ExactZoh:
            base = (snap.x + snap.x_prime) / 2.0;
            reg.target = (snap.x_prime - snap.x) / snap.dt;
            break;
    }
    reg.blocks.push_back(base);
    for (Index j = 0; j < snap.u.rows(); ++j) {
        reg.blocks.push_back(base.array().rowwise() * snap.u.row(j).array());
    }
    return reg;
}

MatrixXd stacked(const Regression &reg) {
    const Index n = reg.blocks.front().rows();
    MatrixXd z(n * static_cast<Index>(reg.blocks.size()), reg.target.cols());
    for (std::size_t b = 0; b < reg.blocks.size(); ++b) {
        z.middleRows(static_cast<Index>(b) * n, n) = reg.blocks[b];
    }
    return z;
}

std::vector<MatrixXd> prior_blocks(const LearnedModel &prior, DerivativeMode mode, double dt) {
    std::vector<MatrixXd> out;
    if (mode == DerivativeMode::Discrete) {
        out.push_back(MatrixXd::Identity(prior.drift.rows(), prior.drift.cols()) + dt * prior.drift);
        for (const auto &c : prior.controls) out.push_back(dt * c);
    } else {
        out.push_back(prior.drift);
        for (const auto &c : prior.controls) out.push_back(c);
    }
    return out;
}

// Unconstrained least squares for Theta = [A0 .. AJ], minimum norm.
std::vector<MatrixXd> solve_free(const Regression &reg, const std::vector<MatrixXd> *prior,
                                 double weight) {
    const MatrixXd z = stacked(reg);
    const Index n = reg.target.rows();
    const Index p = z.rows();
    MatrixXd lhs = z.transpose();
    MatrixXd rhs = reg.target.transpose();
    if (prior && weight > 0.0) {
        MatrixXd theta_p(n, p);
        for (std::size_t b = 0; b < prior->size(); ++b) {
            theta_p.middleCols(static_cast<Index>(b) * n, n) = (*prior)[b];
        }
        const double sw = std::sqrt(weight);
        MatrixXd l2(lhs.rows() + p, p);
        l2 << lhs, sw * MatrixXd::Identity(p, p);
        MatrixXd r2(rhs.rows() + p, n);
        r2 << rhs, sw * theta_p.transpose();
        lhs = std::move(l2);
        rhs = std::move(r2);
    }
    const MatrixXd theta_t = lhs.completeOrthogonalDecomposition().solve(rhs);
    std::vector<MatrixXd> out;
    for (std::size_t b = 0; b < reg.blocks.size(); ++b) {
        out.push_back(theta_t.middleRows(static_cast<Index>(b) * n, n).transpose());
    }
    return out;
}

// Least squares restricted to skew-symmetric blocks, parametrized by the
// strictly upper triangle of each block.
std::vector<MatrixXd> solve_skew(const Regression &reg, const std::vector<MatrixXd> *prior,
                                 double weight) {
    const Index n = reg.target.rows();
    const Index m = reg.target.cols();
    const auto nb = static_cast<Index>(reg.blocks.size());
    std::vector<std::pair<Index, Index>> pairs;
    for (Index a = 0; a < n; ++a) {
        for (Index b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    }
    const auto np = static_cast<Index>(pairs.size());
    const bool use_prior = prior && weight > 0.0;
    const Index rows = n * m + (use_prior ? nb * np : 0);

    MatrixXd design = MatrixXd::Zero(rows, nb * np);
    VectorXd rhs = VectorXd::Zero(rows);
    for (Index col = 0; col < m; ++col) {
        for (Index i = 0; i < n; ++i) rhs(col * n + i) = reg.target(i, col);
    }
    for (Index b = 0; b < nb; ++b) {
        const MatrixXd &zb = reg.blocks[static_cast<std::size_t>(b)];
        for (Index p = 0; p < np; ++p) {
            const auto [ra, rb] = pairs[static_cast<std::size_t>(p)];
            for (Index col = 0; col < m; ++col) {
                design(col * n + ra, b * np + p) += zb(rb, col);
                design(col * n + rb, b * np + p) -= zb(ra, col);
            }
        }
    }
    if (use_prior) {
        const double sw = std::sqrt(weight);
        for (Index b = 0; b < nb; ++b) {
            const MatrixXd skew = skew_part((*prior)[static_cast<std::size_t>(b)]);
            for (Index p = 0; p < np; ++p) {
                const auto [ra, rb] = pairs[static_cast<std::size_t>(p)];
                design(n * m + b * np + p, b * np + p) = sw;
                rhs(n * m + b * np + p) = sw * skew(ra, rb);
            }
        }
    }
    const VectorXd theta = design.completeOrthogonalDecomposition().solve(rhs);
    std::vector<MatrixXd> out;
    for (Index b = 0; b < nb; ++b) {
        MatrixXd blk = MatrixXd::Zero(n, n);
        for (Index p = 0; p < np; ++p) {
            const auto [ra, rb] = pairs[static_cast<std::size_t>(p)];
            blk(ra, rb) = theta(b * np + p);
            blk(rb, ra) = -theta(b * np + p);
        }
        out.push_back(std::move(blk));
    }
    return out;
}

double linear_residual(const Regression &reg, const std::vector<MatrixXd> &theta) {
    MatrixXd fit = MatrixXd::Zero(reg.target.rows(), reg.target.cols());
    for (std::size_t b = 0; b < theta.size(); ++b) fit += theta[b] * reg.blocks[b];
    return (fit - reg.target).norm();
}

// Levenberg-Marquardt on the exact hold-interval flow, Pauli coefficients
// theta = [h0; h1; ...; hJ]. Returns the refined generators and residual.
std::pair<std::vector<MatrixXd>, double> refine_exact(const SnapshotSet &snap,
                                                      const PauliBasis &basis,
                                                      const std::vector<MatrixXd> &init,
                                                      const std::vector<MatrixXd> *prior,
                                                      double weight, int max_iterations) {
    const Index n = basis.size();
    const auto nb = static_cast<Index>(init.size());
    const Index m = snap.columns();
    const Index np = n * nb;

    VectorXd theta(np);
    for (Index b = 0; b < nb; ++b) {
        theta.segment(b * n, n) = generator_coefficients(init[static_cast<std::size_t>(b)], basis);
    }
    VectorXd theta_prior = VectorXd::Zero(np);
    const bool use_prior = prior && weight > 0.0;
    if (use_prior) {
        for (Index b = 0; b < nb; ++b) {
            theta_prior.segment(b * n, n) =
                generator_coefficients(skew_part((*prior)[static_cast<std::size_t>(b)]), basis);
        }
    }

    auto coeff = [&](Index b, Index col) { return b == 0 ? 1.0 : snap.u(b - 1, col); };
    auto generator_at = [&](const VectorXd &th, Index col) {
        MatrixXd g = MatrixXd::Zero(n, n);
        for (Index b = 0; b < nb; ++b) {
            g += coeff(b, col) * generator_from_coefficients(th.segment(b * n, n), basis);
        }
        return g;
    };
    auto residual_of = [&](const VectorXd &th) {
        VectorXd r(n * m);
        for (Index col = 0; col < m; ++col) {
            r.segment(col * n, n) =
                expm((snap.dt * generator_at(th, col)).eval()) * snap.x.col(col) -
                snap.x_prime.col(col);
        }
        return r;
    };
    auto cost_of = [&](const VectorXd &th, const VectorXd &r) {
        double c = r.squaredNorm();
        if (use_prior) c += weight * (th - theta_prior).squaredNorm();
        return c;
    };

    VectorXd r = residual_of(theta);
    double cost = cost_of(theta, r);
    double mu = 1e-3;
    for (int it = 0; it < max_iterations && cost > 1e-30; ++it) {
        MatrixXd jac(n * m, np);
        for (Index col = 0; col < m; ++col) {
            const MatrixXd g = snap.dt * generator_at(theta, col);
            for (Index a = 0; a < n; ++a) {
                auto [expd, frechet] =
                    expm_frechet(g, (snap.dt * basis.generators[static_cast<std::size_t>(a)]).eval());
                const VectorXd dir = frechet * snap.x.col(col);
                for (Index b = 0; b < nb; ++b) jac.block(col * n, b * n + a, n, 1) = coeff(b, col) * dir;
            }
        }
        MatrixXd normal = jac.transpose() * jac;
        VectorXd grad = jac.transpose() * r;
        if (use_prior) {
            normal.diagonal().array() += weight;
            grad += weight * (theta - theta_prior);
        }
        const double scale = std::max(normal.diagonal().maxCoeff(), 1e-300);
        bool improved = false;
        for (int tries = 0; tries < 20; ++tries) {
            MatrixXd damped = normal;
            damped.diagonal().array() += mu * scale;
            const VectorXd step = -damped.ldlt().solve(grad);
            const VectorXd trial = theta + step;
            const VectorXd r_trial = residual_of(trial);
            const double c_trial = cost_of(trial, r_trial);
            if (c_trial < cost) {
                const bool tiny = step.norm() <= 1e-15 * (1.0 + theta.norm());
                theta = trial;
                r = r_trial;
                cost = c_trial;
                mu = std::max(mu / 3.0, 1e-12);
                improved = !tiny;
                break;
            }
            mu *= 4.0;
        }
        if (!improved) break;
    }

    std::vector<MatrixXd> out;
    for (Index b = 0; b < nb; ++b) out.push_back(generator_from_coefficients(theta.segment(b * n, n), basis));
    return {out, r.norm()};
}

}  // namespace

SnapshotSet assemble_snapshots(std::span<const RolloutRecord> records, double dt,
                               DerivativeMode mode) {
    if (records.empty()) throw InsufficientData("no rollouts to assemble");
    if (!(dt > 0.0)) throw ConfigError("snapshot dt must be positive");
    const Index n = records.front().states.cols();
    const Index nc = records.front().controls.channels();
    Index total = 0;
    for (const auto &rec : records) {
        if (rec.states.cols() != n || rec.controls.channels() != nc ||
            rec.states.rows() != rec.controls.steps() + 1) {
            throw ShapeError("rollouts disagree on state or control dimensions");
        }
        total += rec.controls.steps();
    }
    SnapshotSet snap;
    snap.dt = dt;
    snap.mode = mode;
    snap.x.resize(n, total);
    snap.x_prime.resize(n, total);
    snap.u.resize(nc, total);
    Index col = 0;
    for (const auto &rec : records) {
        const Index steps = rec.controls.steps();
        snap.x.middleCols(col, steps) = rec.states.topRows(steps).transpose();
        snap.x_prime.middleCols(col, steps) = rec.states.bottomRows(steps).transpose();
        snap.u.middleCols(col, steps) = rec.controls.values.transpose();
        col += steps;
    }
    return snap;
}

DmdResult dmd(const SnapshotSet &snapshots) {
    if (snapshots.columns() == 0) throw InsufficientData("empty snapshot set");
    DmdResult out;
    const MatrixXd xt = snapshots.x.transpose();
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(xt);
    out.propagator = cod.solve(snapshots.x_prime.transpose()).transpose();
    out.residual = (out.propagator * snapshots.x - snapshots.x_prime).norm();
    out.conditioning = relative_conditioning(snapshots.x);
    out.rank_deficient = cod.rank() < snapshots.x.rows();
    return out;
}

LearnedModel bilinear_dmd(const SnapshotSet &snapshots, const BilinearDmdOptions &options) {
    if (snapshots.columns() == 0) throw InsufficientData("empty snapshot set");
    if (options.prior_weight < 0.0) throw ConfigError("prior weight must be non-negative");
    const Regression reg = regression_for(snapshots);

    std::vector<MatrixXd> prior;
    if (options.prior) {
        if (static_cast<Index>(options.prior->controls.size()) != snapshots.u.rows()) {
            throw ShapeError("prior has a different number of controls");
        }
        prior = prior_blocks(*options.prior, snapshots.mode, snapshots.dt);
    }
    const std::vector<MatrixXd> *prior_ptr = options.prior ? &prior : nullptr;

    LearnedModel out;
    out.conditioning = relative_conditioning(stacked(reg));
    out.excitation_warning = out.conditioning < kExcitationThreshold;

    std::vector<MatrixXd> theta;
    if (snapshots.mode == DerivativeMode::Discrete) {
        theta = solve_free(reg, prior_ptr, options.prior_weight);
        out.residual = linear_residual(reg, theta);
        const Index n = theta.front().rows();
        theta[0] = (theta[0] - MatrixXd::Identity(n, n)) / snapshots.dt;
        for (std::size_t b = 1; b < theta.size(); ++b) theta[b] /= snapshots.dt;
        if (options.constrain_skew) {
            for (auto &t : theta) t = skew_part(t);
        }
    } else if (options.constrain_skew || snapshots.mode == DerivativeMode::ExactZoh) {
        theta = solve_skew(reg, prior_ptr, options.prior_weight);
        out.residual = linear_residual(reg, theta);
    } else {
        theta = solve_free(reg, prior_ptr, options.prior_weight);
        out.residual = linear_residual(reg, theta);
    }

    if (snapshots.mode == DerivativeMode::ExactZoh) {
        if (!options.basis) throw ConfigError("exact hold-interval refinement needs a Pauli basis");
        if (options.basis->size() != snapshots.x.rows()) throw ShapeError("basis does not match the state size");
        auto [refined, residual] = refine_exact(snapshots, *options.basis, theta, prior_ptr,
                                                options.prior_weight, options.max_refine_iterations);
        theta = std::move(refined);
        out.residual = residual;
    }

    out.drift = std::move(theta.front());
    for (std::size_t b = 1; b < theta.size(); ++b) out.controls.push_back(std::move(theta[b]));
    return out;
}

LearnedModel bilinear_dmd(const SnapshotSet &snapshots, bool constrain_skew,
                          const std::optional<LearnedModel> &prior, double prior_weight) {
    BilinearDmdOptions opts;
    opts.constrain_skew = constrain_skew;
    opts.prior = prior;
    opts.prior_weight = prior_weight;
    return bilinear_dmd(snapshots, opts);
}

HamiltonianModel LearnedModel::to_model(const HamiltonianModel &like) const {
    if (static_cast<Index>(controls.size()) != like.num_controls()) {
        throw ShapeError("learned model has a different number of controls");
    }
    return HamiltonianModel::from_generators(like.basis, drift, controls, like.dt, like.horizon,
                                             like.observation);
}

LearnedModel learned_from(const HamiltonianModel &model) {
    LearnedModel out;
    out.drift = model.drift;
    out.controls = model.controls;
    out.conditioning = 1.0;
    return out;
}

FeasibilityReport feasibility_report(const HamiltonianModel &nominal, const LearnedModel &learned,
                                     double threshold) {
    if (learned.drift.rows() != nominal.drift.rows() || learned.drift.cols() != nominal.drift.cols() ||
        static_cast<Index>(learned.controls.size()) != nominal.num_controls()) {
        throw ShapeError("learned and nominal models differ in shape");
    }
    FeasibilityReport rep;
    rep.drift_error = (learned.drift - nominal.drift).norm() / std::max(nominal.drift.norm(), 1.0);
    rep.feasible = rep.drift_error <= threshold;
    for (std::size_t j = 0; j < learned.controls.size(); ++j) {
        const double ref = nominal.controls[j].norm();
        const double diff = (learned.controls[j] - nominal.controls[j]).norm();
        const double err = ref > 0.0 ? diff / ref : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rep.control_errors.push_back(err);
        rep.feasible = rep.feasible && err <= threshold;
    }
    return rep;
}

bool feasible(const HamiltonianModel &nominal, const LearnedModel &learned, double threshold) {
    return feasibility_report(nominal, learned, threshold).feasible;
}

std::vector<Index> control_axes(const HamiltonianModel &model, double tol) {
    const auto &basis = *model.basis;
    std::vector<Index> axes;
    for (Index i = 0; i < basis.size(); ++i) {
        for (const auto &h : model.control_hamiltonians) {
            const double hij = (basis.operators[i].transpose().cwiseProduct(h)).sum().real();
            if (std::abs(hij) > tol) {
                axes.push_back(i);
                break;
            }
        }
    }
    return axes;
}

SufficiencyReport sufficiency_analysis(std::span<const ReferenceTriplet> refs,
                                       const MatrixXd &observation, const PauliBasis &basis,
                                       const std::vector<Index> &axes,
                                       const HamiltonianModel *nominal,
                                       const LearnedModel *learned) {
    if (refs.empty()) throw InsufficientData("sufficiency analysis needs a reference");
    const Index n = basis.size();
    if (observation.cols() != n) throw ShapeError("observation matrix has wrong width");
    const Index k_obs = observation.rows();
    const auto l_refs = static_cast<Index>(refs.size());
    const Index snapshots = refs.front().x_ref.rows();
    for (const auto &ref : refs) {
        if (ref.x_ref.rows() != snapshots || ref.x_ref.cols() != n) {
            throw ShapeError("references disagree on horizon or state size");
        }
    }
    std::vector<Index> complement;
    for (Index i = 0; i < n; ++i) {
        if (std::find(axes.begin(), axes.end(), i) == axes.end()) complement.push_back(i);
    }

    // Row (k, l), column i: Im sum_{j,m} x_lj sigma_ijm C_km.
    auto build = [&](Index t, const std::vector<Index> &cols) {
        MatrixXd s = MatrixXd::Zero(k_obs * l_refs, static_cast<Index>(cols.size()));
        for (Index l = 0; l < l_refs; ++l) {
            const auto x = refs[static_cast<std::size_t>(l)].x_ref.row(t);
            for (std::size_t c = 0; c < cols.size(); ++c) {
                const Index i = cols[c];
                VectorXd coupling = VectorXd::Zero(n);  // over m
                for (Index j = 0; j < n; ++j) {
                    if (x(j) == 0.0) continue;
                    for (Index m = 0; m < n; ++m) coupling(m) += x(j) * basis.sigma(i, j, m).imag();
                }
                const VectorXd col = observation * coupling;
                for (Index k = 0; k < k_obs; ++k) s(k * l_refs + l, static_cast<Index>(c)) = col(k);
            }
        }
        return s;
    };

    SufficiencyReport rep;
    rep.equations = k_obs * l_refs;
    rep.unknowns = static_cast<Index>(axes.size());
    MatrixXd all(rep.equations * snapshots, rep.unknowns);
    for (Index t = 0; t < snapshots; ++t) {
        MatrixXd s = build(t, axes);
        all.middleRows(t * rep.equations, rep.equations) = s;
        double cond = std::numeric_limits<double>::infinity();
        if (s.size() > 0 && s.rows() >= s.cols()) {
            Eigen::JacobiSVD<MatrixXd> svd(s);
            const VectorXd &sv = svd.singularValues();
            const double smin = sv(sv.size() - 1);
            if (smin > 1e-12 * std::max(sv(0), 1.0)) cond = sv(0) / smin;
        }
        rep.condition.push_back(cond);
        rep.s.push_back(std::move(s));
        rep.s_bar.push_back(build(t, complement));
    }
    if (all.size() > 0) {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(all);
        qr.setThreshold(1e-10);
        rep.rank_s = all.cwiseAbs().maxCoeff() > 0.0 ? qr.rank() : 0;
    }
    rep.overdetermined = rep.equations > rep.unknowns && rep.rank_s == rep.unknowns;

    if (nominal && learned) {
        const VectorXd diff = generator_coefficients(learned->drift - nominal->drift, basis);
        double acc = 0.0;
        for (Index i : complement) acc += diff(i) * diff(i);
        rep.alpha_norm = std::sqrt(acc) / static_cast<double>(basis.dim());
    }
    return rep;
}

}  // namespace liftcal
