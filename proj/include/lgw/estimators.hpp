#pragma once

#include <vector>

#include "lgw/core.hpp"

namespace lgw {

/// y = f₀ + ξ observed through an n×M design.
struct RegressionProblem {
    MatrixXd design;
    VectorXd response;
    double noise_sd = 0.0;  ///< carried for experiments, unused by the solvers
    double radius = 1.0;    ///< ℓ₁ budget R where applicable

    RegressionProblem() = default;
    RegressionProblem(MatrixXd design, VectorXd response, double noise_sd = 0.0, double radius = 1.0);

    /// max_j |x_j|₂² / n.
    double column_norm_condition() const;
};

/// Density aggregation data: G_jk = ∫ p_j p_k dμ and evals_ij = p_j(Z_i).
struct DensityProblem {
    MatrixXd gram;
    MatrixXd evals;
    double b_inf = 1.0;

    DensityProblem() = default;
    DensityProblem(MatrixXd gram, MatrixXd evals, double b_inf);
};

struct SolverOptions {
    double gap_tol = 1e-8;  ///< relative; see each estimator for the scale
    long max_iter = 100000;
    bool record_history = false;
};

struct EstimatorResult {
    VectorXd weights;
    double objective = 0.0;
    double certified_gap = 0.0;  ///< objective − certified_gap ≤ minimum
    long iterations = 0;
    bool converged = false;
    std::vector<double> history;  ///< objective per iteration when requested
};

/// argmin |y − Xβ|₂² over |β|₁ ≤ R. Stops at gap ≤ gap_tol·(1 + |y|₂²).
EstimatorResult lasso_constrained(const RegressionProblem& prob, const SolverOptions& opts = {});

/// argmin |Fθ − y|₂² over Λ^M. Stops at gap ≤ gap_tol·(1 + |y|₂²).
EstimatorResult convex_aggregate(const RegressionProblem& prob, const SolverOptions& opts = {});

/// ℓ₁-constrained least squares on an empirical design; the Lasso solver on (x, y, R).
EstimatorResult persistence_erm(const MatrixXd& x, const VectorXd& y, double R, const SolverOptions& opts = {});

/// argmin θᵀGθ − (2/n)·1ᵀ(evals·θ) over Λ^M. Stops at gap ≤ gap_tol·(1 + max_j G_jj).
EstimatorResult density_erm(const DensityProblem& prob, const SolverOptions& opts = {});

} // namespace lgw
