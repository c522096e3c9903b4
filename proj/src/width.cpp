#include "lgw/width.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lgw/fw.hpp"
#include "lgw/parallel.hpp"

namespace lgw {

namespace {

// Best feasible point seen so far during one solve.
struct Incumbent {
    VectorXd theta;
    double value = -std::numeric_limits<double>::infinity();
    double q = 0.0;

    void offer(const VectorXd& t, double v, double qv)
    {
        if (v > value) {
            theta = t;
            value = v;
            q = qv;
        }
    }
};

// Walk from an infeasible point a toward a feasible point b and stop at the
// first point with Q ≤ s². Q along the segment is a convex quadratic in t.
void repair(const VectorXd& c, double s2, const VectorXd& xa, const VectorXd& ga, const VectorXd& xb,
            const VectorXd& gb, Incumbent& best)
{
    const double qa = xa.dot(ga);
    const double qb = xb.dot(gb);
    if (qb > s2)
        return;
    const VectorXd d = xb - xa;
    const double a = d.dot(gb - ga);
    const double b = 2.0 * xa.dot(gb - ga);
    const double c0 = qa - s2;
    double t = 1.0;
    if (c0 <= 0.0) {
        t = 0.0;
    } else {
        const double disc = std::max(b * b - 4.0 * a * c0, 0.0);
        const double denom = -b + std::sqrt(disc);
        if (denom > 0.0)
            t = std::min(1.0, 2.0 * c0 / denom);
    }
    auto q_at = [&](double tt) { return qa + tt * b + tt * tt * a; };
    for (int k = 0; k < 60 && t < 1.0 && q_at(t) > s2; ++k)
        t = std::min(1.0, t + 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + t) * (1 << std::min(k, 30)));
    VectorXd theta = xa + t * d;
    theta = theta.cwiseMax(0.0);
    theta /= theta.sum();
    const double q = t >= 1.0 ? qb : std::min(q_at(t), s2);
    best.offer(theta, c.dot(theta), q);
}

} // namespace

HullGeometry::HullGeometry(Dictionary dict) : HullGeometry(dict, lgw::gram(dict)) {}

HullGeometry::HullGeometry(Dictionary dict, GramMatrix g) : dict_(std::move(dict)), gram_(std::move(g))
{
    if (gram_.M() != dict_.M())
        throw DimensionMismatch("HullGeometry: Gram size differs from dictionary");
    MinQResult r;
    try {
        r = min_q_over_simplex(gram_);
    } catch (const MinQNonConvergence& e) {
        r = e.best();
    }
    anchor_ = r.theta;
    anchor_sigma_ = gram_.sigma() * anchor_.theta();
    anchor_q_ = anchor_.theta().dot(anchor_sigma_);
    anchor_q_lower_ = anchor_q_ - r.gap;
}

void HullGeometry::require_nonempty(double s) const
{
    if (!(s > 0.0) || !std::isfinite(s))
        throw InvalidInput("radius must be positive and finite");
    const double s2 = s * s;
    if (anchor_q_lower_ > s2 || anchor_q_ > s2 + 1e-8 * std::max(1.0, s2)) {
        std::ostringstream msg;
        msg << "T ∩ sB2 is empty: min Q over the simplex is " << anchor_q_ << " > s^2 = " << s2;
        throw EmptyIntersection(msg.str());
    }
}

SupportSolution HullGeometry::solve(const VectorXd& g, double s, const SupportOptions& opts) const
{
    if (g.size() != dict_.n())
        throw DimensionMismatch("local_support: g has wrong length");
    const VectorXd c = dict_.points().transpose() * g;
    return solve_coefficients(c, s, s * g.norm(), opts);
}

SupportSolution HullGeometry::solve_coefficients(const VectorXd& c, double s, double scale,
                                                 const SupportOptions& opts) const
{
    if (c.size() != dict_.M())
        throw DimensionMismatch("local_support: coefficient vector has wrong length");
    require_nonempty(s);
    const MatrixXd& sigma = gram_.sigma();
    const double s2 = s * s;
    // Below s ≈ 1e-3·|μ| the relative target falls under the rounding error of
    // λ·Σθ, so the gap target is floored at 1e-3 of the unlocalized scale ‖c‖∞.
    const double tol = opts.rel_gap * std::max({scale, 1e-3 * c.cwiseAbs().maxCoeff(),
                                                std::numeric_limits<double>::min()});
    const Index M = dict_.M();

    auto finish = [&](const VectorXd& theta, double value, double q, double lambda, double gap) {
        SupportSolution out;
        out.theta = SimplexWeight(theta);
        out.value = value;
        out.q_value = q;
        out.lambda = lambda;
        out.dual_gap = std::max(gap, 0.0);
        out.feasible = q <= s2 + 1e-8 * std::max(1.0, s2);
        out.converged = out.dual_gap <= tol;
        return out;
    };

    // Constraint inactive at a maximizing vertex.
    const double cmax = c.maxCoeff();
    Index top = -1;
    for (Index j = 0; j < M; ++j) {
        if (c[j] == cmax && sigma(j, j) <= s2 && (top < 0 || sigma(j, j) < sigma(top, top)))
            top = j;
    }
    if (top >= 0)
        return finish(SimplexWeight::vertex(M, top).theta(), cmax, sigma(top, top), 0.0, 0.0);

    Incumbent best;
    const VectorXd& xa = anchor_.theta();
    const double q_anchor = std::min(anchor_q_, s2);
    best.offer(xa, c.dot(xa), q_anchor);

    const double range = cmax - c.minCoeff();
    const double slack = s2 - anchor_q_;
    if (range <= 0.0 || slack <= 0.0) {
        // Constant objective, or the feasible set is (numerically) the anchor alone.
        return finish(best.theta, best.value, best.q, 0.0, range <= 0.0 ? 0.0 : cmax - best.value);
    }

    const fw::SimplexAtoms atoms{M};
    const VectorXd b = 0.5 * c;
    fw::Options fo;
    fo.gap_tol = 0.1 * tol;
    fo.max_iter = opts.inner_iterations;

    double upper = cmax;  // the dual function at λ = 0
    auto dual_at = [&](double lambda, const fw::Result& r) {
        // max_θ cᵀθ − λ(Q − s²) ≤ cᵀθ_λ − λQ(θ_λ) + gap + λs²
        const double v = c.dot(r.state.x);
        const double q = r.state.x.dot(r.state.gx);
        return v - lambda * q + r.gap + lambda * s2;
    };
    bool all_inner_converged = true;
    auto solve_at = [&](double lambda, fw::State start) {
        fw::Result r = fw::minimize(sigma, lambda, b, atoms, std::move(start), fo);
        all_inner_converged = all_inner_converged && r.converged;
        upper = std::min(upper, dual_at(lambda, r));
        const double q = r.state.x.dot(r.state.gx);
        if (q <= s2)
            best.offer(r.state.x, c.dot(r.state.x), q);
        return r;
    };

    Index jmax = 0;
    c.maxCoeff(&jmax);
    fw::State lo_state = fw::vertex_state(atoms, sigma, jmax);
    double lo = 0.0;

    // λ(Q(θ_λ) − q_min) ≤ range(c), so Q(θ_λ) ≤ s² once λ ≥ range / (s² − q_min).
    double hi = 2.0 * range / slack;
    fw::State anchor_state = fw::state_from_weights(atoms, sigma, xa);
    fw::Result hi_res = solve_at(hi, anchor_state);
    for (int k = 0; k < 30 && hi_res.state.x.dot(hi_res.state.gx) > s2; ++k) {
        lo = hi;
        lo_state = hi_res.state;
        hi *= 4.0;
        hi_res = solve_at(hi, hi_res.state);
    }
    fw::State hi_state = hi_res.state;
    double lambda_used = hi;

    auto hi_feasible = [&] { return hi_state.x.dot(hi_state.gx) <= s2; };
    auto repair_lo = [&] {
        if (lo_state.x.dot(lo_state.gx) <= s2)
            return;
        if (hi_feasible())
            repair(c, s2, lo_state.x, lo_state.gx, hi_state.x, hi_state.gx, best);
        repair(c, s2, lo_state.x, lo_state.gx, xa, anchor_sigma_, best);
    };
    repair_lo();

    for (int step = 0; step < opts.bisection_steps && upper - best.value > tol; ++step) {
        const double lambda = 0.5 * (lo + hi);
        if (!(lambda > lo && lambda < hi))
            break;
        fw::Result r = solve_at(lambda, hi_state);
        const double q = r.state.x.dot(r.state.gx);
        if (q <= s2) {
            hi = lambda;
            hi_state = std::move(r.state);
            lambda_used = lambda;
        } else {
            lo = lambda;
            lo_state = std::move(r.state);
        }
        repair_lo();
        if (std::abs(q - s2) <= opts.feas_tol && upper - best.value <= tol)
            break;
    }

    SupportSolution out = finish(best.theta, best.value, best.q, lambda_used, upper - best.value);
    out.converged = out.converged && (all_inner_converged || out.dual_gap <= tol);
    return out;
}

SupportSolution local_support(const Dictionary& dict, const VectorXd& g, double s, const SupportOptions& opts)
{
    return HullGeometry(dict).solve(g, s, opts);
}

std::vector<SupportSolution> width_samples(const HullGeometry& hull, double s, long n_samples,
                                           const SeededStream& stream, const WidthOptions& opts)
{
    if (n_samples < 1)
        throw InvalidInput("estimate_width: need at least one sample");
    hull.require_nonempty(s);
    std::vector<SupportSolution> out(static_cast<std::size_t>(n_samples));
    const Index n = hull.dictionary().n();
    parallel_for(out.size(), opts.threads, [&](std::size_t k) {
        auto engine = stream.split(k).engine();
        const VectorXd g = engine.normal_vector(n);
        out[k] = hull.solve(g, s, opts.support);
    });
    return out;
}

WidthEstimate summarize_width(const std::vector<SupportSolution>& samples, double s, double max_failure_fraction)
{
    WidthEstimate est;
    est.s = s;
    est.n_samples = static_cast<long>(samples.size());
    if (samples.empty())
        return est;
    double sum = 0.0;
    double gap_sum = 0.0;
    for (const auto& x : samples) {
        sum += x.value;
        gap_sum += x.dual_gap;
        if (!x.converged)
            ++est.non_converged;
    }
    const double n = static_cast<double>(samples.size());
    est.mean = sum / n;
    est.mean_dual_gap = gap_sum / n;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (const auto& x : samples)
            ss += (x.value - est.mean) * (x.value - est.mean);
        est.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    if (static_cast<double>(est.non_converged) > max_failure_fraction * n) {
        std::ostringstream msg;
        msg << est.non_converged << " of " << samples.size()
            << " inner solves did not reach the duality-gap target";
        throw NonConvergence(msg.str());
    }
    return est;
}

WidthEstimate estimate_width(const HullGeometry& hull, double s, long n_samples, const SeededStream& stream,
                             const WidthOptions& opts)
{
    if (n_samples < 2)
        throw InvalidInput("estimate_width: n_samples must be at least 2");
    return summarize_width(width_samples(hull, s, n_samples, stream, opts), s, opts.max_failure_fraction);
}

WidthEstimate estimate_width(const Dictionary& dict, double s, long n_samples, const SeededStream& stream,
                             const WidthOptions& opts)
{
    return estimate_width(HullGeometry(dict), s, n_samples, stream, opts);
}

double log_plus(double a) { return a > std::numbers::e ? std::log(a) : 1.0; }

double upper_bound_closed_form(long M, long n, double s)
{
    if (M < 1 || n < 1 || !(s > 0.0))
        throw InvalidInput("upper_bound_closed_form: need M, n >= 1 and s > 0");
    const double e = std::numbers::e;
    const double log_branch = 4.0 * std::sqrt(log_plus(4.0 * e * static_cast<double>(M) * std::min(s * s, 1.0)));
    const double dim_branch = s * std::sqrt(static_cast<double>(std::min(n, M)));
    return std::min(log_branch, dim_branch);
}

double upper_bound_scaled(long M, long n, double r, double R)
{
    if (M < 1 || n < 1 || !(r > 0.0) || !(R > 0.0))
        throw InvalidInput("upper_bound_scaled: need M, n >= 1 and r, R > 0");
    const double e = std::numbers::e;
    const double ratio = std::min(1.0, (r * r) / (R * R));
    const double log_branch = 4.0 * R * std::sqrt(log_plus(4.0 * e * static_cast<double>(M) * ratio));
    const double dim_branch = r * std::sqrt(static_cast<double>(std::min(n, M)));
    return std::min(log_branch, dim_branch);
}

double lower_bound_rip(long M, double s, double kappa)
{
    if (!(s > 0.0) || s > 1.0)
        throw InvalidRegime("lower_bound_rip: s must lie in (0, 1]");
    if (kappa < 0.0 || kappa > 1.0 + 1e-12)
        throw InvalidRegime("lower_bound_rip: kappa must lie in [0, 1]");
    const double m_real = 1.0 / (s * s);
    const double m = std::round(m_real);
    if (std::abs(m_real - m) > 1e-9 * m || m < 1.0)
        throw InvalidRegime("lower_bound_rip: 1/s^2 must be a positive integer");
    if (5.0 * m > static_cast<double>(M))
        throw InvalidRegime("lower_bound_rip: need 1/s^2 <= M/5");
    const double arg = static_cast<double>(M) * s * s / 5.0;
    return std::numbers::sqrt2 / 4.0 * kappa * std::sqrt(std::max(std::log(arg), 0.0));
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    unsigned __int128 value = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        value = value * (n - k + i) / i;  // exact: the running product is C(n-k+i, i)
        if (value > cap)
            return cap + 1;
    }
    return static_cast<std::uint64_t>(value);
}

namespace {

double min_eigenvalue(const MatrixXd& sigma, const std::vector<Index>& support)
{
    const Index k = static_cast<Index>(support.size());
    MatrixXd sub(k, k);
    for (Index a = 0; a < k; ++a)
        for (Index b = 0; b < k; ++b)
            sub(a, b) = sigma(support[a], support[b]);
    if (k == 1)
        return sub(0, 0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sub, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

// Floyd's algorithm: a uniform k-subset of {0..n-1}, sorted.
std::vector<Index> random_subset(Index n, Index k, RandomEngine& engine)
{
    std::vector<Index> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    for (Index j = n - k; j < n; ++j) {
        const auto t = static_cast<Index>(engine.index(static_cast<std::uint64_t>(j + 1)));
        if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
            chosen.push_back(t);
        else
            chosen.push_back(j);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

// Advances a sorted k-subset of {0..n-1} to the next one in lexicographic order.
bool next_combination(std::vector<Index>& idx, Index n)
{
    const Index k = static_cast<Index>(idx.size());
    Index i = k - 1;
    while (i >= 0 && idx[i] == n - k + i)
        --i;
    if (i < 0)
        return false;
    ++idx[i];
    for (Index j = i + 1; j < k; ++j)
        idx[j] = idx[j - 1] + 1;
    return true;
}

} // namespace

RipResult rip_constant(const Dictionary& dict, long sparsity, long budget, const SeededStream& stream)
{
    if (sparsity < 1)
        throw InvalidInput("rip_constant: sparsity must be positive");
    if (budget < 1)
        throw InvalidInput("rip_constant: budget must be positive");
    const GramMatrix g = gram(dict);
    const MatrixXd& sigma = g.sigma();
    const Index M = dict.M();
    const Index k = std::min<Index>(sparsity, M);

    // λ_min is monotone under inclusion, so the full-size supports suffice.
    RipResult out;
    double lam = std::numeric_limits<double>::infinity();
    const std::uint64_t count = binomial_capped(static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(k),
                                                static_cast<std::uint64_t>(budget));
    if (count <= static_cast<std::uint64_t>(budget)) {
        out.exact = true;
        std::vector<Index> idx(static_cast<std::size_t>(k));
        std::iota(idx.begin(), idx.end(), Index{0});
        do {
            lam = std::min(lam, min_eigenvalue(sigma, idx));
            ++out.supports_evaluated;
        } while (next_combination(idx, M));
    } else {
        auto engine = stream.engine();
        for (long t = 0; t < budget; ++t) {
            lam = std::min(lam, min_eigenvalue(sigma, random_subset(M, k, engine)));
            ++out.supports_evaluated;
        }
    }
    out.kappa = std::sqrt(std::max(lam, 0.0));
    return out;
}

Packing build_packing(const Dictionary& dict, long m, const SeededStream& stream, const PackingOptions& opts)
{
    const Index M = dict.M();
    if (m < 1 || m > M)
        throw InvalidInput("build_packing: need 1 <= m <= M");
    for (Index j = 0; j < M; ++j)
        if (std::abs(dict.column(j).norm() - 1.0) > 1e-6)
            throw InvalidInput("build_packing: dictionary columns must have unit norm");

    std::vector<std::vector<Index>> supports;
    std::vector<std::vector<std::size_t>> containing(static_cast<std::size_t>(M));
    std::vector<long> overlap;

    // Pairwise distance 2(m − |S ∩ S'|) > m, i.e. 2|S ∩ S'| < m.
    auto try_accept = [&](const std::vector<Index>& cand) {
        overlap.assign(supports.size(), 0);
        for (Index j : cand) {
            for (std::size_t w : containing[static_cast<std::size_t>(j)]) {
                if (2 * ++overlap[w] >= m)
                    return false;
            }
        }
        const std::size_t id = supports.size();
        for (Index j : cand)
            containing[static_cast<std::size_t>(j)].push_back(id);
        supports.push_back(cand);
        return true;
    };

    auto engine = stream.split(0).engine();
    const std::uint64_t total = binomial_capped(static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(m),
                                                static_cast<std::uint64_t>(opts.enumerate_below));
    if (total <= static_cast<std::uint64_t>(opts.enumerate_below)) {
        std::vector<std::vector<Index>> all;
        all.reserve(total);
        std::vector<Index> idx(static_cast<std::size_t>(m));
        std::iota(idx.begin(), idx.end(), Index{0});
        do
            all.push_back(idx);
        while (next_combination(idx, M));
        // Fisher-Yates by hand: std::shuffle's draw pattern differs between standard libraries.
        for (std::size_t i = all.size(); i > 1; --i)
            std::swap(all[i - 1], all[engine.index(i)]);
        for (const auto& cand : all)
            try_accept(cand);
    } else {
        long rejections = 0;
        for (long t = 0; t < opts.max_candidates && rejections < opts.max_consecutive_rejections; ++t) {
            if (try_accept(random_subset(M, m, engine)))
                rejections = 0;
            else
                ++rejections;
        }
    }

    if (5 * m <= M) {
        const double guarantee = 0.5 * static_cast<double>(m) * std::log(static_cast<double>(M) / (5.0 * static_cast<double>(m)));
        if (std::log(static_cast<double>(supports.size())) < guarantee) {
            std::ostringstream msg;
            msg << "build_packing: greedy packing has " << supports.size()
                << " supports, below the guaranteed exp(" << guarantee << ")";
            throw BoundNotMet(msg.str());
        }
    }

    Packing out;
    out.m = m;
    out.M = M;
    out.signed_vectors.resize(supports.size());
    const SeededStream sign_root = stream.split(1);
    const double cap = static_cast<double>(m) * (1.0 + 1e-12);
    std::vector<char> failed(supports.size(), 0);
    parallel_for(supports.size(), 1, [&](std::size_t w) {
        auto signs = sign_root.split(w).engine();
        Eigen::VectorXi omega = Eigen::VectorXi::Zero(M);
        VectorXd v(dict.n());
        for (long draw = 0; draw < opts.max_sign_draws; ++draw) {
            v.setZero();
            for (Index j : supports[w]) {
                omega[j] = signs.rademacher();
                v += static_cast<double>(omega[j]) * dict.column(j);
            }
            if (v.squaredNorm() <= cap) {
                out.signed_vectors[w] = std::move(omega);
                return;
            }
        }
        failed[w] = 1;
    });
    for (std::size_t w = 0; w < failed.size(); ++w)
        if (failed[w])
            throw SignSearchExhausted("build_packing: no admissible signs for support " + std::to_string(w));
    return out;
}

std::string check_packing(const Packing& packing, const Dictionary& dict)
{
    const auto& vs = packing.signed_vectors;
    for (std::size_t a = 0; a < vs.size(); ++a) {
        if (vs[a].size() != dict.M())
            return "vector " + std::to_string(a) + " has wrong length";
        if (vs[a].cwiseAbs().sum() != packing.m || vs[a].cwiseAbs().maxCoeff() > 1)
            return "vector " + std::to_string(a) + " is not a signed weight-m vector";
        const VectorXd v = dict.points() * vs[a].cast<double>();
        if (v.squaredNorm() > static_cast<double>(packing.m) * (1.0 + 1e-9))
            return "vector " + std::to_string(a) + " violates the norm cap";
        for (std::size_t b = a + 1; b < vs.size(); ++b) {
            long distance = 0;
            for (Index j = 0; j < dict.M(); ++j)
                distance += (vs[a][j] != 0) != (vs[b][j] != 0);
            if (distance <= packing.m)
                return "supports " + std::to_string(a) + " and " + std::to_string(b) + " are too close";
        }
    }
    return {};
}

} // namespace lgw
