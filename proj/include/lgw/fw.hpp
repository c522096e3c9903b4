#pragma once

// Away-step conditional gradient for quadratics over a polytope given by
// its vertices ("atoms"):
//
//     minimize  f(x) = κ·xᵀGx − 2bᵀx   over x ∈ conv{a_0, ..., a_{A-1}}
//
// with G positive semi-definite. Every line search is exact, so the
// objective sequence is nonincreasing, and the Frank-Wolfe gap
// ⟨∇f(x), x − a_s⟩ is a certified bound on f(x) − min f.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "lgw/core.hpp"

namespace lgw::fw {

/// Vertices of the simplex: a_j = e_j.
struct SimplexAtoms {
    Index dim;

    Index count() const { return dim; }
    double dot(const VectorXd& v, Index j) const { return v[j]; }
    void add_scaled(VectorXd& x, double w, Index j) const { x[j] += w; }
    void add_scaled_gram_col(VectorXd& gx, const MatrixXd& g, double w, Index j) const
    {
        gx.noalias() += w * g.col(j);
    }
    double quad(const MatrixXd& g, Index j) const { return g(j, j); }
    Index argmin_dot(const VectorXd& v) const
    {
        Index best = 0;
        v.minCoeff(&best);
        return best;
    }
};

/// Vertices of the ℓ₁ ball of the given radius: atom 2k is +R·e_k, atom 2k+1 is −R·e_k.
struct L1BallAtoms {
    Index dim;
    double radius;

    Index count() const { return 2 * dim; }
    static Index coord(Index j) { return j / 2; }
    double sign(Index j) const { return (j % 2 == 0) ? radius : -radius; }
    double dot(const VectorXd& v, Index j) const { return sign(j) * v[coord(j)]; }
    void add_scaled(VectorXd& x, double w, Index j) const { x[coord(j)] += w * sign(j); }
    void add_scaled_gram_col(VectorXd& gx, const MatrixXd& g, double w, Index j) const
    {
        gx.noalias() += (w * sign(j)) * g.col(coord(j));
    }
    double quad(const MatrixXd& g, Index j) const { return radius * radius * g(coord(j), coord(j)); }
    Index argmin_dot(const VectorXd& v) const
    {
        Index k = 0;
        v.cwiseAbs().maxCoeff(&k);
        return v[k] > 0 ? 2 * k + 1 : 2 * k;
    }
};

struct Options {
    double gap_tol = 1e-10;  ///< absolute
    long max_iter = 100000;
    bool away_steps = true;
    long refresh_every = 512;
    bool record_history = false;
};

/// Atom weights plus the point they represent and Gx (without κ).
struct State {
    VectorXd alpha;
    VectorXd x;
    VectorXd gx;
};

struct Result {
    State state;
    double objective = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    long iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

template <typename Atoms>
State state_from_weights(const Atoms& atoms, const MatrixXd& g, VectorXd alpha)
{
    State s;
    s.x = VectorXd::Zero(atoms.dim);
    Index active = 0;
    for (Index j = 0; j < alpha.size(); ++j) {
        if (alpha[j] != 0.0) {
            atoms.add_scaled(s.x, alpha[j], j);
            ++active;
        }
    }
    if (4 * active < atoms.dim) {
        s.gx = VectorXd::Zero(atoms.dim);
        for (Index j = 0; j < alpha.size(); ++j)
            if (alpha[j] != 0.0)
                atoms.add_scaled_gram_col(s.gx, g, alpha[j], j);
    } else {
        s.gx.noalias() = g * s.x;
    }
    s.alpha = std::move(alpha);
    return s;
}

template <typename Atoms>
State vertex_state(const Atoms& atoms, const MatrixXd& g, Index j)
{
    VectorXd alpha = VectorXd::Zero(atoms.count());
    alpha[j] = 1.0;
    return state_from_weights(atoms, g, std::move(alpha));
}

template <typename Atoms>
void refresh(const Atoms& atoms, const MatrixXd& g, State& s)
{
    s.alpha = s.alpha.cwiseMax(0.0);
    s.alpha /= s.alpha.sum();
    s = state_from_weights(atoms, g, std::move(s.alpha));
}

template <typename Atoms>
Result minimize(const MatrixXd& g, double curvature, const VectorXd& b, const Atoms& atoms,
                State state, const Options& opts = {})
{
    Result res;
    VectorXd grad(atoms.dim);
    const Index n_atoms = atoms.count();

    auto objective = [&](const State& s) {
        return curvature * s.x.dot(s.gx) - 2.0 * b.dot(s.x);
    };

    long it = 0;
    for (;; ++it) {
        if (opts.refresh_every > 0 && it > 0 && it % opts.refresh_every == 0)
            refresh(atoms, g, state);

        grad = 2.0 * (curvature * state.gx - b);
        const double grad_x = grad.dot(state.x);
        const Index s = atoms.argmin_dot(grad);
        const double fw_gap = grad_x - atoms.dot(grad, s);
        if (opts.record_history)
            res.history.push_back(objective(state));

        res.gap = std::max(fw_gap, 0.0);
        if (fw_gap <= opts.gap_tol) {
            res.converged = true;
            break;
        }
        if (it >= opts.max_iter)
            break;

        Index v = -1;
        double away_gap = -std::numeric_limits<double>::infinity();
        if (opts.away_steps) {
            for (Index j = 0; j < n_atoms; ++j) {
                if (state.alpha[j] > 0.0) {
                    const double d = atoms.dot(grad, j);
                    if (d - grad_x > away_gap) {
                        away_gap = d - grad_x;
                        v = j;
                    }
                }
            }
        }

        const double xgx = state.x.dot(state.gx);
        if (v < 0 || fw_gap >= away_gap) {
            // toward a_s
            const double dgd = atoms.quad(g, s) - 2.0 * atoms.dot(state.gx, s) + xgx;
            double step = 1.0;
            if (curvature * dgd > 0.0)
                step = std::min(1.0, fw_gap / (2.0 * curvature * dgd));
            if (step >= 1.0) {
                state = vertex_state(atoms, g, s);
                continue;
            }
            state.x *= (1.0 - step);
            atoms.add_scaled(state.x, step, s);
            state.gx *= (1.0 - step);
            atoms.add_scaled_gram_col(state.gx, g, step, s);
            state.alpha *= (1.0 - step);
            state.alpha[s] += step;
        } else {
            // away from a_v
            const double weight = state.alpha[v];
            const double max_step = weight < 1.0 ? weight / (1.0 - weight)
                                                 : std::numeric_limits<double>::infinity();
            const double dgd = xgx - 2.0 * atoms.dot(state.gx, v) + atoms.quad(g, v);
            double step = max_step;
            if (curvature * dgd > 0.0)
                step = std::min(max_step, away_gap / (2.0 * curvature * dgd));
            if (!std::isfinite(step))
                break;  // a single active atom cannot be an away direction
            state.x *= (1.0 + step);
            atoms.add_scaled(state.x, -step, v);
            state.gx *= (1.0 + step);
            atoms.add_scaled_gram_col(state.gx, g, -step, v);
            state.alpha *= (1.0 + step);
            if (step >= max_step)
                state.alpha[v] = 0.0;
            else
                state.alpha[v] -= step;
        }
    }

    refresh(atoms, g, state);
    grad = 2.0 * (curvature * state.gx - b);
    res.gap = std::max(grad.dot(state.x) - atoms.dot(grad, atoms.argmin_dot(grad)), 0.0);
    res.converged = res.converged || res.gap <= opts.gap_tol;
    res.objective = objective(state);
    res.iterations = it;
    res.state = std::move(state);
    return res;
}

} // namespace lgw::fw
