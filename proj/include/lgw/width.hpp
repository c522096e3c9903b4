#pragma once

#include <cstdint>
#include <vector>

#include "lgw/core.hpp"
#include "lgw/random.hpp"

namespace lgw {

struct SupportOptions {
    double feas_tol = 1e-8;      ///< absolute tolerance on Q when testing feasibility of the anchor
    double rel_gap = 1e-6;       ///< target duality gap relative to max(s·|g|₂, 1e-3·max_j |μ_jᵀg|)
    int bisection_steps = 60;
    long inner_iterations = 5000;
};

/// One inner maximization sup{gᵀμ_θ : θ ∈ Λ^M, Q(θ) ≤ s²} with its certificate.
struct SupportSolution {
    double value = 0.0;     ///< gᵀμ_θ at the returned (feasible) θ
    SimplexWeight theta;
    double q_value = 0.0;
    double lambda = 0.0;    ///< multiplier of the active constraint (0 when inactive)
    double dual_gap = 0.0;  ///< value + dual_gap bounds the true supremum from above
    bool feasible = true;
    bool converged = true;
};

/// A dictionary together with its Gram matrix and the min-Q point of the
/// hull, which every localized solve uses as its feasibility anchor.
class HullGeometry {
public:
    explicit HullGeometry(Dictionary dict);
    HullGeometry(Dictionary dict, GramMatrix gram);

    const Dictionary& dictionary() const { return dict_; }
    const GramMatrix& gram() const { return gram_; }
    const SimplexWeight& anchor() const { return anchor_; }
    double anchor_q() const { return anchor_q_; }

    /// Throws EmptyIntersection when T ∩ sB₂ = ∅.
    void require_nonempty(double s) const;

    SupportSolution solve(const VectorXd& g, double s, const SupportOptions& opts = {}) const;

    /// Same problem with the linear objective given directly as c = μᵀg.
    /// `scale` bounds |value| and sets the units of opts.rel_gap.
    SupportSolution solve_coefficients(const VectorXd& c, double s, double scale,
                                       const SupportOptions& opts = {}) const;

private:
    Dictionary dict_;
    GramMatrix gram_;
    SimplexWeight anchor_;
    VectorXd anchor_sigma_;
    double anchor_q_ = 0.0;
    double anchor_q_lower_ = 0.0;
};

SupportSolution local_support(const Dictionary& dict, const VectorXd& g, double s,
                              const SupportOptions& opts = {});

struct WidthOptions {
    SupportOptions support;
    int threads = 1;
    double max_failure_fraction = 0.01;
};

struct WidthEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
    double s = 0.0;
    double mean_dual_gap = 0.0;
    long non_converged = 0;
};

/// Per-sample inner solutions for g_k drawn from stream.split(k).
std::vector<SupportSolution> width_samples(const HullGeometry& hull, double s, long n_samples,
                                           const SeededStream& stream, const WidthOptions& opts = {});

WidthEstimate summarize_width(const std::vector<SupportSolution>& samples, double s,
                              double max_failure_fraction = 0.01);

/// Monte Carlo estimate of ℓ(T ∩ sB₂).
WidthEstimate estimate_width(const HullGeometry& hull, double s, long n_samples,
                             const SeededStream& stream, const WidthOptions& opts = {});
WidthEstimate estimate_width(const Dictionary& dict, double s, long n_samples,
                             const SeededStream& stream, const WidthOptions& opts = {});

/// max(1, ln a).
double log_plus(double a);

/// min(4·√log₊(4eM·min(s², 1)), s·√min(n, M)) for hulls inside B₂.
double upper_bound_closed_form(long M, long n, double s);

/// min(4R·√log₊(4eM·min(1, r²/R²)), r·√min(n, M)) for vertices of norm ≤ R.
double upper_bound_scaled(long M, long n, double r, double R);

/// (√2/4)·κ·√ln(Ms²/5); requires 1/s² integral and at most M/5.
double lower_bound_rip(long M, double s, double kappa);

struct RipResult {
    double kappa = 0.0;
    bool exact = false;  ///< false: minimum over sampled supports, an upper estimate of κ
    long supports_evaluated = 0;
};

/// min over supports S with |S| ≤ sparsity of √λ_min(Σ_S).
RipResult rip_constant(const Dictionary& dict, long sparsity, long budget, const SeededStream& stream);

/// C(n, k) if it is at most cap, otherwise cap + 1.
std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap);

struct Packing {
    std::vector<Eigen::VectorXi> signed_vectors;  ///< entries in {−1, 0, 1}, m nonzeros each
    long m = 0;
    long M = 0;
};

struct PackingOptions {
    long max_consecutive_rejections = 10000;
    long max_candidates = 20000000;
    long max_sign_draws = 1000000;
    long enumerate_below = 200000;  ///< shuffle the full candidate list when C(M, m) is this small
};

/// Greedy randomized Varshamov–Gilbert packing of weight-m supports with
/// pairwise Hamming distance > m, each signed so that |μ_{s(ω)}|₂² ≤ m.
Packing build_packing(const Dictionary& dict, long m, const SeededStream& stream,
                      const PackingOptions& opts = {});

/// Checks the distance and norm invariants; returns an empty string when valid.
std::string check_packing(const Packing& packing, const Dictionary& dict);

} // namespace lgw
