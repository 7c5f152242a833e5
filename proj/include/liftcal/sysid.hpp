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

#ifndef LIFTCAL_SYSID_HPP
#define LIFTCAL_SYSID_HPP

#include <optional>
#include <span>
#include <vector>

#include "liftcal/lifting.hpp"

namespace liftcal {

/// How snapshot pairs are turned into generator estimates.
///  - Discrete: regress the one-step map x' = (A0 + sum u_j Aj) x and read
///    generators off as (A0 - I)/dt, Aj/dt. Diagnostics only.
///  - ContinuousFd: regress (x' - x)/dt on the step midpoint (x + x')/2, a
///    central difference about the middle of each hold interval. O(dt^2).
///  - ExactZoh: ContinuousFd followed by Gauss-Newton on the exact
///    zero-order-hold flow exp(dt G(u)) x in Pauli coefficients. Exact for
///    noiseless data regardless of dt.
enum class DerivativeMode { Discrete, ContinuousFd, ExactZoh };

/// Offset snapshot matrices: column t of x_prime follows column t of x under
/// the control in column t of u. Multiple rollouts concatenate column-wise.
struct SnapshotSet {
    MatrixXd x;
    MatrixXd x_prime;
    MatrixXd u;
    double dt = 0.0;
    DerivativeMode mode = DerivativeMode::ContinuousFd;

    Index columns() const { return x.cols(); }
};

SnapshotSet assemble_snapshots(std::span<const RolloutRecord> records, double dt,
                               DerivativeMode mode = DerivativeMode::ContinuousFd);

struct DmdResult {
    MatrixXd propagator;
    double residual = 0.0;
    /// sigma_min / sigma_max of X.
    double conditioning = 0.0;
    bool rank_deficient = false;
};

/// argmin_A || A X - X' ||_F, minimum-norm when X lacks full row rank.
DmdResult dmd(const SnapshotSet &snapshots);

/// Continuous-time generators identified from data.
struct LearnedModel {
    MatrixXd drift;
    std::vector<MatrixXd> controls;
    double residual = 0.0;
    /// sigma_min / sigma_max of the stacked regressor [X; U*X].
    double conditioning = 0.0;
    bool excitation_warning = false;

    /// Model with these generators and the timing/observation of `like`.
    HamiltonianModel to_model(const HamiltonianModel &like) const;
};

LearnedModel learned_from(const HamiltonianModel &model);

inline constexpr double kExcitationThreshold = 1e-8;

struct BilinearDmdOptions {
    bool constrain_skew = true;
    std::optional<LearnedModel> prior;
    double prior_weight = 0.0;
    /// Needed by DerivativeMode::ExactZoh.
    PauliBasisPtr basis;
    int max_refine_iterations = 50;
};

/// Bilinear DMD: min || [A0 A1..AJ] [X; U*X] - X' ||_F^2 (+ prior_weight ||A - prior||_F^2).
/// With constrain_skew the minimization runs over skew-symmetric generators.
LearnedModel bilinear_dmd(const SnapshotSet &snapshots, const BilinearDmdOptions &options);

LearnedModel bilinear_dmd(const SnapshotSet &snapshots, bool constrain_skew,
                          const std::optional<LearnedModel> &prior = std::nullopt,
                          double prior_weight = 0.0);

struct FeasibilityReport {
    double drift_error = 0.0;
    std::vector<double> control_errors;
    bool feasible = false;
};

/// Relative drift error ||A0 - H0|| / max(||H0||, 1) and per-control
/// ||Aj - Hj|| / ||Hj||, all Frobenius; feasible when every one <= threshold.
FeasibilityReport feasibility_report(const HamiltonianModel &nominal, const LearnedModel &learned,
                                     double threshold);

bool feasible(const HamiltonianModel &nominal, const LearnedModel &learned, double threshold);

/// Pauli axes touched by at least one control Hamiltonian.
std::vector<Index> control_axes(const HamiltonianModel &model, double tol = 1e-12);

/// Tracking-sufficiency analysis. S(t) has rows (k, l) -> k * L + l and columns
/// over the control axes; entries are Tr(M_k [P_i, rho_l(t)]) / i computed in
/// Bloch coordinates. S_bar uses the complementary axes.
struct SufficiencyReport {
    std::vector<MatrixXd> s;
    std::vector<MatrixXd> s_bar;
    /// Rank of all S(t) stacked over time.
    Index rank_s = 0;
    Index equations = 0;  ///< K * L
    Index unknowns = 0;   ///< |control axes|
    bool overdetermined = false;
    /// Condition number of each S(t); infinity when rank deficient.
    std::vector<double> condition;
    /// Norm of the learned-minus-nominal drift on the uncontrolled axes, as
    /// coefficients a_i of H = sum_i a_i P_i.
    std::optional<double> alpha_norm;
};

SufficiencyReport sufficiency_analysis(std::span<const ReferenceTriplet> refs,
                                       const MatrixXd &observation, const PauliBasis &basis,
                                       const std::vector<Index> &axes,
                                       const HamiltonianModel *nominal = nullptr,
                                       const LearnedModel *learned = nullptr);

}  // namespace liftcal

#endif  // LIFTCAL_SYSID_HPP
