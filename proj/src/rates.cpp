#include "lgw/rates.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace lgw {

namespace {

constexpr double e = std::numbers::e;

void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidInput(std::string(name) + " must be positive and finite");
}

void require_count(long v, long lo, const char* name)
{
    if (v < lo)
        throw InvalidInput(std::string(name) + " must be at least " + std::to_string(lo));
}

FixedPointReport take_min(FixedPointReport r)
{
    if (std::isnan(r.width_term) || r.dimension_term <= r.width_term) {
        r.value = r.dimension_term;
        r.branch = Branch::DimensionTerm;
    } else {
        r.value = r.width_term;
        r.branch = Branch::WidthTerm;
    }
    return r;
}

double dn(long v) { return static_cast<double>(v); }

} // namespace

std::string to_string(Branch b)
{
    switch (b) {
    case Branch::DimensionTerm:
        return "dimension-term";
    case Branch::WidthTerm:
        return "width-term";
    case Branch::Clamped:
        return "clamped";
    case Branch::Bisection:
        return "bisection";
    }
    return "unknown";
}

FixedPointReport t_star_convex_agg(double sigma, double R, long n, long M)
{
    require_positive(sigma, "sigma");
    require_positive(R, "R");
    require_count(n, 1, "n");
    require_count(M, 2, "M");
    FixedPointReport r;
    r.inputs = {{"sigma", sigma}, {"R", R}, {"n", dn(n)}, {"M", dn(M)}};
    r.dimension_term = 4.0 * sigma * sigma * dn(M) / dn(n);
    const double sqrt_n = std::sqrt(dn(n));
    if (R * sqrt_n <= dn(M) * sigma)
        r.width_term = 31.0 * sigma * R * std::sqrt(std::log(e * dn(M) * sigma / (R * sqrt_n))) / sqrt_n;
    return take_min(std::move(r));
}

FixedPointReport t_star_lasso(double sigma, double R, long n, long M, long rank)
{
    require_positive(sigma, "sigma");
    require_positive(R, "R");
    require_count(n, 1, "n");
    require_count(M, 1, "M");
    if (rank < 0 || rank > std::min(n, M))
        throw InvalidInput("rank must lie in [0, min(n, M)]");
    FixedPointReport r;
    r.inputs = {{"sigma", sigma}, {"R", R}, {"n", dn(n)}, {"M", dn(M)}, {"rank", dn(rank)}};
    r.dimension_term = 4.0 * sigma * sigma * dn(rank) / dn(n);
    const double sqrt_n = std::sqrt(dn(n));
    if (R * sqrt_n <= 2.0 * dn(M) * sigma)
        r.width_term = 62.0 * sigma * R * std::sqrt(std::log(2.0 * e * dn(M) * sigma / (R * sqrt_n))) / sqrt_n;
    return take_min(std::move(r));
}

FixedPointReport t_star_kappa(double sigma, double R, long n, long M)
{
    require_positive(sigma, "sigma");
    require_positive(R, "R");
    require_count(n, 1, "n");
    require_count(M, 2, "M");
    const double sqrt_n = std::sqrt(dn(n));
    if (R * sqrt_n > dn(M) * sigma) {
        std::ostringstream msg;
        msg << "t_star_kappa: needs R*sqrt(n) <= M*sigma, got " << R * sqrt_n << " > " << dn(M) * sigma;
        throw InvalidRegime(msg.str());
    }
    FixedPointReport r;
    r.inputs = {{"sigma", sigma}, {"R", R}, {"n", dn(n)}, {"M", dn(M)}};
    r.width_term = 31.0 * sigma * R * std::sqrt(std::log(e * dn(M) * sigma / (R * sqrt_n)) / dn(n));
    r.value = r.width_term;
    r.valid = std::sqrt(r.value) <= R;
    r.branch = r.valid ? Branch::WidthTerm : Branch::Clamped;
    return r;
}

FixedPointReport phi_convex(long M, long n)
{
    require_count(M, 2, "M");
    require_count(n, 1, "n");
    FixedPointReport r;
    r.inputs = {{"M", dn(M)}, {"n", dn(n)}};
    r.dimension_term = dn(M) / dn(n);
    const double arg = e * dn(M) / std::sqrt(dn(n));
    if (arg > 1.0)
        r.width_term = std::sqrt(std::log(arg) / dn(n));
    r = take_min(std::move(r));
    r.valid = r.value <= 1.0;
    return r;
}

FixedPointReport r_star_bounded(double b, double L, double R, long M, long n, double C)
{
    require_positive(b, "b");
    require_positive(L, "L");
    require_positive(R, "R");
    require_count(M, 1, "M");
    require_count(n, 1, "n");
    if (!(C >= 1.0))
        throw InvalidInput("C must be at least 1");
    const double K = std::max(b, std::sqrt(L));
    const double sqrt_n = std::sqrt(dn(n));
    if (!(dn(M) * K > R * sqrt_n))
        throw InvalidRegime("r_star_bounded: needs M*K > R*sqrt(n)");
    FixedPointReport r;
    r.inputs = {{"b", b}, {"L", L}, {"R", R}, {"M", dn(M)}, {"n", dn(n)}, {"C", C}, {"K", K}};
    r.width_term = C * R * K * std::sqrt(std::log(e * dn(M) * K / (R * sqrt_n)) / dn(n));
    r.value = r.width_term;
    r.branch = Branch::WidthTerm;
    return r;
}

double bounded_process_bound(double L, double R, double b, long M, long n, double r, double c)
{
    require_positive(L, "L");
    require_positive(R, "R");
    require_positive(b, "b");
    require_positive(r, "r");
    require_positive(c, "c");
    require_count(M, 1, "M");
    require_count(n, 1, "n");
    const double slack = 1e-12 * R;
    if (r < R / std::sqrt(dn(M)) - slack || r > R + slack)
        throw InvalidRegime("bounded_process_bound: needs R/sqrt(M) <= r <= R");
    const double lg = std::log(e * dn(M) * r * r / (R * R));
    const double first = std::sqrt(L) * R * std::sqrt(lg / dn(n));
    const double second = b * R * R * lg / (r * r * dn(n));
    return c * std::max(first, second);
}

double t_star_finite_dim(double p0_sup, long d, long n)
{
    require_positive(p0_sup, "p0_sup");
    require_count(d, 1, "d");
    require_count(n, 1, "n");
    return 256.0 * p0_sup * dn(d) / dn(n);
}

double rademacher_sup_bound(double rad, double v, double b_inf, double x, long n)
{
    if (!(rad >= 0.0) || !(v >= 0.0))
        throw InvalidInput("rad and v must be nonnegative");
    require_positive(b_inf, "b_inf");
    require_positive(x, "x");
    require_count(n, 1, "n");
    return 4.0 * rad + std::sqrt(2.0 * v * x / dn(n)) + 8.0 * b_inf * x / (3.0 * dn(n));
}

AnisotropicBounds anisotropic_rate_bounds(double R, double sigma, long n, long M, const AnisotropicConstants& c)
{
    require_positive(R, "R");
    require_positive(sigma, "sigma");
    require_count(n, 1, "n");
    require_count(M, 1, "M");
    for (double v : {c.c3, c.c4, c.c5, c.c6})
        require_positive(v, "anisotropic constant");
    AnisotropicBounds out;
    if (dn(n) <= c.c4 * dn(M)) {
        const double arg = c.c3 * dn(M) / dn(n);
        if (arg <= 1.0)
            out.r_log_clamped = true;
        else
            out.r_bound = c.c3 * R * R / dn(n) * std::log(arg);
    }
    const double sqrt_n = std::sqrt(dn(n));
    if (dn(n) <= c.c6 * sigma * sigma * dn(M) * dn(M) / (R * R)) {
        const double arg = c.c5 * dn(M) * sigma / (sqrt_n * R);
        if (arg <= 1.0)
            out.s_log_clamped = true;
        else
            out.s_bound = c.c5 * R * sigma / sqrt_n * std::sqrt(std::log(arg));
    } else {
        out.s_bound = c.c5 * sigma * sigma * dn(M) / dn(n);
    }
    return out;
}

RadiusConvention parse_radius_convention(const std::string& name)
{
    if (name == "quarter-max")
        return RadiusConvention::QuarterMax;
    if (name == "direct")
        return RadiusConvention::Direct;
    throw InvalidInput("unknown radius convention '" + name + "' (expected quarter-max or direct)");
}

std::string to_string(RadiusConvention c) { return c == RadiusConvention::QuarterMax ? "quarter-max" : "direct"; }

double aggregation_radius(const MatrixXd& design, RadiusConvention convention)
{
    if (design.rows() < 1 || design.cols() < 1)
        throw InvalidInput("aggregation_radius: empty design");
    const double max_sq = design.colwise().squaredNorm().maxCoeff() / static_cast<double>(design.rows());
    return std::sqrt(convention == RadiusConvention::QuarterMax ? 0.25 * max_sq : max_sq);
}

MatrixXd sqrt_psd(const MatrixXd& sigma)
{
    if (sigma.rows() != sigma.cols())
        throw DimensionMismatch("sqrt_psd: matrix must be square");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
    const double tol = 1e-10 * std::max(sigma.trace(), 0.0);
    VectorXd ev = es.eigenvalues();
    if (ev.size() > 0 && ev.minCoeff() < -tol)
        throw InvalidInput("sqrt_psd: matrix has a negative eigenvalue");
    ev = ev.cwiseMax(0.0).cwiseSqrt();
    MatrixXd root = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (root + root.transpose());
}

namespace {

Dictionary persistence_dictionary(const GramMatrix& sigma, double R)
{
    require_positive(R, "R");
    const MatrixXd root = sqrt_psd(sigma.sigma());
    const Index M = sigma.M();
    MatrixXd pts(M, 2 * M);
    for (Index j = 0; j < M; ++j) {
        pts.col(2 * j) = 2.0 * R * root.col(j);
        pts.col(2 * j + 1) = -2.0 * R * root.col(j);
    }
    return Dictionary(std::move(pts));
}

// Smallest r in the bracket with W(r) ≤ threshold(r), by geometric bisection.
FixedPointReport bisect(const WidthOracle& width, const std::function<double(double)>& threshold, double R,
                        const FixedPointOptions& opts)
{
    require_positive(R, "R");
    double lo = opts.lo_factor * R;
    double hi = opts.hi_factor * R;
    if (!(lo > 0.0) || !(hi > lo))
        throw InvalidInput("fixed point: bracket must satisfy 0 < lo < hi");

    FixedPointReport rep;
    auto residual = [&](double r, WidthEstimate& w) {
        w = width(r);
        return w.mean - threshold(r);
    };

    WidthEstimate w_hi;
    const double h_hi = residual(hi, w_hi);
    if (h_hi > 0.0) {
        std::ostringstream msg;
        msg << "no crossing in [" << lo << ", " << hi << "]: W(" << hi << ") = " << w_hi.mean
            << " exceeds the threshold " << threshold(hi);
        throw NoCrossing(msg.str());
    }
    WidthEstimate w_lo;
    const double h_lo = residual(lo, w_lo);
    rep.iterations = 2;
    if (h_lo <= 0.0) {
        rep.value = lo * lo;
        rep.branch = Branch::Clamped;
        rep.residual = h_lo;
        rep.residual_stderr = w_lo.std_error;
        return rep;
    }

    double h_best = h_hi;
    WidthEstimate w_best = w_hi;
    for (int it = 0; it < opts.max_iter && hi / lo - 1.0 > opts.rel_tol; ++it) {
        const double mid = std::sqrt(lo * hi);
        WidthEstimate w;
        const double h = residual(mid, w);
        ++rep.iterations;
        if (h <= 0.0) {
            hi = mid;
            h_best = h;
            w_best = w;
        } else {
            lo = mid;
        }
    }
    rep.value = hi * hi;
    rep.branch = Branch::Bisection;
    rep.residual = h_best;
    rep.residual_stderr = w_best.std_error;
    return rep;
}

} // namespace

PersistenceWidthOracle::PersistenceWidthOracle(const GramMatrix& sigma, double R, long samples,
                                               const SeededStream& stream, const WidthOptions& opts)
    : hull_(persistence_dictionary(sigma, R)), samples_(samples), stream_(stream), opts_(opts)
{
    if (samples < 2)
        throw InvalidInput("PersistenceWidthOracle: need at least two samples");
}

WidthEstimate PersistenceWidthOracle::operator()(double r) const
{
    return estimate_width(hull_, r, samples_, stream_, opts_);
}

FixedPointReport r_n_fixed_point(const WidthOracle& width, double R, double gamma, long n,
                                 const FixedPointOptions& opts)
{
    require_positive(gamma, "gamma");
    require_count(n, 1, "n");
    const double slope = gamma * std::sqrt(dn(n));
    FixedPointReport rep = bisect(width, [&](double r) { return slope * r; }, R, opts);
    rep.inputs = {{"R", R}, {"gamma", gamma}, {"n", dn(n)}, {"rel_tol", opts.rel_tol}};
    return rep;
}

FixedPointReport s_n_fixed_point(const WidthOracle& width, double R, double gamma, long n, double sigma,
                                 const FixedPointOptions& opts)
{
    require_positive(gamma, "gamma");
    require_positive(sigma, "sigma");
    require_count(n, 1, "n");
    const double curvature = gamma * std::sqrt(dn(n)) / sigma;
    FixedPointReport rep = bisect(width, [&](double s) { return curvature * s * s; }, R, opts);
    rep.inputs = {{"R", R}, {"gamma", gamma}, {"n", dn(n)}, {"sigma", sigma}, {"rel_tol", opts.rel_tol}};
    return rep;
}

} // namespace lgw
