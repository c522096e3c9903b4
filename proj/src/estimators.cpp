#include "lgw/estimators.hpp"

#include "lgw/fw.hpp"

namespace lgw {

namespace {

MatrixXd normal_matrix(const MatrixXd& x)
{
    MatrixXd g = MatrixXd::Zero(x.cols(), x.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

fw::Options kernel_options(const SolverOptions& opts, double scale)
{
    fw::Options fo;
    fo.gap_tol = opts.gap_tol * scale;
    fo.max_iter = opts.max_iter;
    fo.record_history = opts.record_history;
    return fo;
}

EstimatorResult to_result(fw::Result r, double offset)
{
    EstimatorResult out;
    out.weights = std::move(r.state.x);
    out.objective = r.objective + offset;
    out.certified_gap = r.gap;
    out.iterations = r.iterations;
    out.converged = r.converged;
    out.history = std::move(r.history);
    for (double& h : out.history)
        h += offset;
    return out;
}

// Simplex-constrained κ=1 quadratic started from its best vertex.
fw::Result simplex_quadratic(const MatrixXd& g, const VectorXd& b, const fw::Options& fo)
{
    const fw::SimplexAtoms atoms{g.rows()};
    Index start = 0;
    (g.diagonal() - 2.0 * b).minCoeff(&start);
    return fw::minimize(g, 1.0, b, atoms, fw::vertex_state(atoms, g, start), fo);
}

} // namespace

RegressionProblem::RegressionProblem(MatrixXd x, VectorXd y, double sd, double r)
    : design(std::move(x)), response(std::move(y)), noise_sd(sd), radius(r)
{
    if (design.rows() < 1 || design.cols() < 1)
        throw InvalidInput("RegressionProblem: empty design");
    if (design.rows() != response.size())
        throw DimensionMismatch("RegressionProblem: design has " + std::to_string(design.rows()) +
                                " rows but response has " + std::to_string(response.size()) + " entries");
    if (!design.allFinite() || !response.allFinite())
        throw InvalidInput("RegressionProblem: non-finite entry");
    if (!(noise_sd >= 0.0))
        throw InvalidInput("RegressionProblem: noise_sd must be nonnegative");
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidInput("RegressionProblem: radius must be positive");
}

double RegressionProblem::column_norm_condition() const
{
    return design.colwise().squaredNorm().maxCoeff() / static_cast<double>(design.rows());
}

DensityProblem::DensityProblem(MatrixXd g, MatrixXd p, double b) : gram(std::move(g)), evals(std::move(p)), b_inf(b)
{
    if (evals.rows() < 1)
        throw InvalidInput("DensityProblem: no samples");
    if (gram.rows() != evals.cols())
        throw DimensionMismatch("DensityProblem: Gram is " + std::to_string(gram.rows()) + "x" +
                                std::to_string(gram.cols()) + " but evals has " + std::to_string(evals.cols()) +
                                " columns");
    if (!evals.allFinite())
        throw InvalidInput("DensityProblem: non-finite evaluation");
    GramMatrix check(gram);  // symmetry and PSD
    if (!(b_inf > 0.0))
        throw InvalidInput("DensityProblem: b_inf must be positive");
    if (evals.cwiseAbs().maxCoeff() > b_inf * (1.0 + 1e-12))
        throw InvalidInput("DensityProblem: |p_j(Z_i)| exceeds b_inf");
}

EstimatorResult lasso_constrained(const RegressionProblem& prob, const SolverOptions& opts)
{
    const MatrixXd g = normal_matrix(prob.design);
    const VectorXd b = prob.design.transpose() * prob.response;
    const double yy = prob.response.squaredNorm();
    const Index M = prob.design.cols();
    const fw::L1BallAtoms atoms{M, prob.radius};

    // β = 0 as half of +R e₀ plus half of −R e₀.
    VectorXd alpha = VectorXd::Zero(2 * M);
    alpha[0] = 0.5;
    alpha[1] = 0.5;
    fw::State start = fw::state_from_weights(atoms, g, std::move(alpha));
    return to_result(fw::minimize(g, 1.0, b, atoms, std::move(start), kernel_options(opts, 1.0 + yy)), yy);
}

EstimatorResult convex_aggregate(const RegressionProblem& prob, const SolverOptions& opts)
{
    const MatrixXd g = normal_matrix(prob.design);
    const VectorXd b = prob.design.transpose() * prob.response;
    const double yy = prob.response.squaredNorm();
    return to_result(simplex_quadratic(g, b, kernel_options(opts, 1.0 + yy)), yy);
}

EstimatorResult persistence_erm(const MatrixXd& x, const VectorXd& y, double R, const SolverOptions& opts)
{
    return lasso_constrained(RegressionProblem(x, y, 0.0, R), opts);
}

EstimatorResult density_erm(const DensityProblem& prob, const SolverOptions& opts)
{
    const double n = static_cast<double>(prob.evals.rows());
    const VectorXd b = prob.evals.colwise().sum().transpose() / n;
    const double scale = 1.0 + prob.gram.diagonal().maxCoeff();
    return to_result(simplex_quadratic(prob.gram, b, kernel_options(opts, scale)), 0.0);
}

} // namespace lgw
