#include "lgw/core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "lgw/fw.hpp"

namespace lgw {

Dictionary::Dictionary(MatrixXd points) : points_(std::move(points))
{
    if (points_.rows() < 1 || points_.cols() < 1)
        throw InvalidInput("Dictionary: need n >= 1 and M >= 1");
    if (!points_.allFinite())
        throw InvalidInput("Dictionary: non-finite entry");
}

namespace {

// Exact eigendecomposition for small Gram matrices, a shifted Cholesky
// factorization otherwise: Σ + δI is positive definite iff λ_min(Σ) > −δ.
bool is_psd(const MatrixXd& sigma, double slack)
{
    const Index m = sigma.rows();
    if (m <= 50) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() >= -slack;
    }
    MatrixXd shifted = sigma;
    shifted.diagonal().array() += slack;
    Eigen::LLT<MatrixXd> llt(shifted);
    return llt.info() == Eigen::Success;
}

} // namespace

GramMatrix::GramMatrix(MatrixXd sigma) : sigma_(std::move(sigma))
{
    const Index m = sigma_.rows();
    if (m < 1 || sigma_.cols() != m)
        throw DimensionMismatch("GramMatrix: matrix must be square and nonempty");
    if (!sigma_.allFinite())
        throw InvalidInput("GramMatrix: non-finite entry");
    for (Index j = 0; j < m; ++j)
        for (Index k = j + 1; k < m; ++k)
            if (std::abs(sigma_(j, k) - sigma_(k, j)) > 1e-12 * (1.0 + std::abs(sigma_(j, k))))
                throw InvalidInput("GramMatrix: not symmetric");
    max_diag_ = sigma_.diagonal().maxCoeff();
    if (sigma_.diagonal().minCoeff() < 0.0)
        throw InvalidInput("GramMatrix: negative diagonal entry");
    if (m <= 2000) {
        const double slack = 1e-8 * std::max(sigma_.trace(), 0.0) / static_cast<double>(m);
        if (!is_psd(sigma_, std::max(slack, 1e-300)))
            throw InvalidInput("GramMatrix: not positive semi-definite");
    }
}

SimplexWeight::SimplexWeight(VectorXd theta) : theta_(std::move(theta))
{
    if (theta_.size() < 1)
        throw InvalidInput("SimplexWeight: empty");
    if (!theta_.allFinite())
        throw InvalidInput("SimplexWeight: non-finite entry");
    if (theta_.minCoeff() < -clamp_tol)
        throw InvalidInput("SimplexWeight: negative entry");
    theta_ = theta_.cwiseMax(0.0);
    const double total = theta_.sum();
    if (std::abs(total - 1.0) > sum_tol)
        throw InvalidInput("SimplexWeight: entries do not sum to one");
    theta_ /= total;
}

SimplexWeight SimplexWeight::vertex(Index M, Index j)
{
    VectorXd t = VectorXd::Zero(M);
    t[j] = 1.0;
    return SimplexWeight(std::move(t));
}

SimplexWeight SimplexWeight::uniform(Index M)
{
    return SimplexWeight(VectorXd::Constant(M, 1.0 / static_cast<double>(M)));
}

SparseGridWeight::SparseGridWeight(std::vector<std::int64_t> counts, std::int64_t m)
    : counts_(std::move(counts)), m_(m)
{
    if (m_ < 1)
        throw InvalidInput("SparseGridWeight: m must be positive");
    std::int64_t total = 0;
    for (auto c : counts_) {
        if (c < 0)
            throw InvalidInput("SparseGridWeight: negative count");
        total += c;
    }
    if (total != m_)
        throw InvalidInput("SparseGridWeight: counts must sum to m");
}

Index SparseGridWeight::support_size() const
{
    return std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c != 0; });
}

VectorXd SparseGridWeight::weight() const
{
    VectorXd w(size());
    for (Index j = 0; j < size(); ++j)
        w[j] = static_cast<double>(counts_[static_cast<std::size_t>(j)]) / static_cast<double>(m_);
    return w;
}

GramMatrix gram(const Dictionary& dict)
{
    const Index m = dict.M();
    MatrixXd sigma = MatrixXd::Zero(m, m);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(dict.points().transpose());
    sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose();
    return GramMatrix(std::move(sigma));
}

VectorXd mu_of_theta(const Dictionary& dict, const SimplexWeight& theta)
{
    if (theta.size() != dict.M())
        throw DimensionMismatch("mu_of_theta: theta has wrong length");
    return dict.points() * theta.theta();
}

SimplexWeight project_simplex(const VectorXd& v)
{
    if (!v.allFinite())
        throw InvalidInput("project_simplex: non-finite input");
    return SimplexWeight(project_to_simplex(v));
}

MinQResult min_q_over_simplex(const GramMatrix& g, double tol, long max_iter)
{
    const MatrixXd& sigma = g.sigma();
    const fw::SimplexAtoms atoms{g.M()};
    Index start = 0;
    sigma.diagonal().minCoeff(&start);

    fw::Options opts;
    opts.gap_tol = tol * std::max(g.max_diag(), 1e-300);
    opts.max_iter = max_iter;
    const VectorXd zero = VectorXd::Zero(g.M());
    fw::Result r = fw::minimize(sigma, 1.0, zero, atoms, fw::vertex_state(atoms, sigma, start), opts);

    MinQResult out{SimplexWeight(r.state.alpha), r.objective, r.gap, r.iterations};
    if (!r.converged)
        throw MinQNonConvergence("min_q_over_simplex: iteration cap reached", std::move(out));
    return out;
}

} // namespace lgw
