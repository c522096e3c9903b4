#pragma once

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lgw/core.hpp"
#include "lgw/random.hpp"

namespace lgw {

/// m i.i.d. categorical draws with probabilities θ̄, returned as counts.
SparseGridWeight sample_sparse(const SimplexWeight& theta_bar, long m, const SeededStream& stream);

/// Empirical record of Q(θ̂) over all trials of sparsify_certified.
struct SparsifyCertificate {
    double q_bar = 0.0;
    double q_hat_mean = 0.0;
    double q_hat_stderr = 0.0;
    double q_best = 0.0;
    long m = 0;
    double r_squared_over_m = 0.0;
    long n_trials = 0;
};

struct SparsifyResult {
    SparseGridWeight weight;
    SparsifyCertificate certificate;
};

/// Thrown when no trial reaches Q(θ̂) ≤ Q(θ̄) + R²/m; carries the best draw.
class SparsifyBoundNotMet : public BoundNotMet {
public:
    SparsifyBoundNotMet(const std::string& what, SparsifyResult best)
        : BoundNotMet(what), best_(std::move(best))
    {
    }
    const SparsifyResult& best() const { return best_; }

private:
    SparsifyResult best_;
};

/// Best of `max_trials` draws by (Q(θ̂), trial index). Trial t uses stream.split(t).
SparsifyResult sparsify_certified(const SimplexWeight& theta_bar, const GramMatrix& gram, long m,
                                  long max_trials, const SeededStream& stream, int threads = 1);

/// E Q(θ̂) = Q(θ̄) + (Σ_j θ̄_j Σ_jj − Q(θ̄)) / m.
double maurey_expected_q(const SimplexWeight& theta_bar, const GramMatrix& gram, long m);

struct GridCardinality {
    boost::multiprecision::cpp_int exact;  ///< C(M + m − 1, m)
    double log_exact = 0.0;
    double log_bound = 0.0;                ///< m·ln(2eM/m); checked against log_exact when m ≤ M
};

GridCardinality grid_cardinality(long M, long m);

/// All count vectors of length M summing to m, in descending lexicographic
/// order starting at (m, 0, ..., 0). Throws CapExceeded above `cap` elements.
std::vector<SparseGridWeight> enumerate_grid(long M, long m, long cap);

} // namespace lgw
