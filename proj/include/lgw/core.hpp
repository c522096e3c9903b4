#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "lgw/error.hpp"

namespace lgw {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// The M points μ₁..μ_M of R^n whose convex hull is T, stored as columns.
class Dictionary {
public:
    Dictionary() = default;
    explicit Dictionary(MatrixXd points);

    Index n() const { return points_.rows(); }
    Index M() const { return points_.cols(); }
    const MatrixXd& points() const { return points_; }
    auto column(Index j) const { return points_.col(j); }

private:
    MatrixXd points_;
};

/// Σ with Σ_jk = μ_jᵀμ_k, plus R² = max_j Σ_jj.
class GramMatrix {
public:
    GramMatrix() = default;

    /// Validates symmetry and positive semi-definiteness (the latter for M ≤ 2000).
    explicit GramMatrix(MatrixXd sigma);

    Index M() const { return sigma_.rows(); }
    const MatrixXd& sigma() const { return sigma_; }
    double max_diag() const { return max_diag_; }
    double trace() const { return sigma_.trace(); }

private:
    MatrixXd sigma_;
    double max_diag_ = 0.0;
};

/// A point of the simplex Λ^M.
class SimplexWeight {
public:
    static constexpr double clamp_tol = 1e-12;
    static constexpr double sum_tol = 1e-9;

    SimplexWeight() = default;

    /// Entries in [-1e-12, 0) are clamped to zero and the vector renormalized;
    /// anything further from Λ^M throws InvalidInput.
    explicit SimplexWeight(VectorXd theta);

    static SimplexWeight vertex(Index M, Index j);
    static SimplexWeight uniform(Index M);

    Index size() const { return theta_.size(); }
    const VectorXd& theta() const { return theta_; }
    double operator[](Index j) const { return theta_[j]; }

private:
    VectorXd theta_;
};

/// An element of the grid Λ^M_m: nonnegative counts summing to m.
class SparseGridWeight {
public:
    SparseGridWeight() = default;
    SparseGridWeight(std::vector<std::int64_t> counts, std::int64_t m);

    Index size() const { return static_cast<Index>(counts_.size()); }
    std::int64_t m() const { return m_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }
    Index support_size() const;
    VectorXd weight() const;

    friend bool operator==(const SparseGridWeight&, const SparseGridWeight&) = default;

private:
    std::vector<std::int64_t> counts_;
    std::int64_t m_ = 0;
};

GramMatrix gram(const Dictionary& dict);

/// θᵀΣθ.
template <typename Derived>
typename Derived::Scalar q_form(const MatrixXd& sigma, const Eigen::MatrixBase<Derived>& theta)
{
    if (theta.size() != sigma.rows())
        throw DimensionMismatch("q_form: theta has wrong length");
    return theta.dot(sigma * theta);
}

template <typename Derived>
double q_form(const GramMatrix& g, const Eigen::MatrixBase<Derived>& theta)
{
    return q_form(g.sigma(), theta);
}

inline double q_form(const GramMatrix& g, const SimplexWeight& theta) { return q_form(g, theta.theta()); }

/// μ_θ = Σ_j θ_j μ_j.
VectorXd mu_of_theta(const Dictionary& dict, const SimplexWeight& theta);

/// Euclidean projection onto {θ ≥ 0, Σθ = radius} by sort-and-threshold.
template <typename Derived>
Vector<typename Derived::Scalar> project_to_scaled_simplex(const Eigen::MatrixBase<Derived>& v,
                                                           typename Derived::Scalar radius)
{
    using Scalar = typename Derived::Scalar;
    const Index n = v.size();
    if (n == 0)
        throw InvalidInput("project_simplex: empty vector");
    std::vector<Scalar> sorted(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        sorted[static_cast<std::size_t>(i)] = v[i];
    std::sort(sorted.begin(), sorted.end(), std::greater<Scalar>());

    Scalar cumulative = 0;
    Scalar threshold = 0;
    for (Index j = 0; j < n; ++j) {
        cumulative += sorted[j];
        const Scalar candidate = (cumulative - radius) / static_cast<Scalar>(j + 1);
        if (sorted[j] - candidate > 0)
            threshold = candidate;
    }
    return (v.array() - threshold).max(Scalar(0)).matrix();
}

template <typename Derived>
Vector<typename Derived::Scalar> project_to_simplex(const Eigen::MatrixBase<Derived>& v)
{
    return project_to_scaled_simplex(v, typename Derived::Scalar(1));
}

SimplexWeight project_simplex(const VectorXd& v);

/// Euclidean projection onto the ℓ₁ ball of radius R.
template <typename Derived>
Vector<typename Derived::Scalar> project_l1_ball(const Eigen::MatrixBase<Derived>& v,
                                                 typename Derived::Scalar radius)
{
    using Scalar = typename Derived::Scalar;
    if (!(radius > 0))
        throw InvalidInput("project_l1_ball: radius must be positive");
    if (v.template lpNorm<1>() <= radius)
        return v;
    const Vector<Scalar> shrunk = project_to_scaled_simplex(v.cwiseAbs(), radius);
    return (v.array().sign() * shrunk.array()).matrix();
}

struct MinQResult {
    SimplexWeight theta;
    double q = 0.0;
    double gap = 0.0;  ///< certified: true minimum ≥ q − gap
    long iterations = 0;
};

/// Thrown by min_q_over_simplex when the iteration cap is hit.
class MinQNonConvergence : public NonConvergence {
public:
    MinQNonConvergence(const std::string& what, MinQResult best)
        : NonConvergence(what), best_(std::move(best))
    {
    }
    const MinQResult& best() const { return best_; }

private:
    MinQResult best_;
};

/// Minimizes Q over Λ^M by away-step conditional gradient; stops once the
/// duality gap is at most tol·max_diag.
MinQResult min_q_over_simplex(const GramMatrix& g, double tol = 1e-12, long max_iter = 100000);

} // namespace lgw
