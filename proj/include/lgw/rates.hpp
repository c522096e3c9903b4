#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lgw/core.hpp"
#include "lgw/random.hpp"
#include "lgw/width.hpp"

namespace lgw {

enum class Branch { DimensionTerm, WidthTerm, Clamped, Bisection };

std::string to_string(Branch b);

/// A squared rate together with how it was obtained.
struct FixedPointReport {
    double value = 0.0;  ///< squared rate
    Branch branch = Branch::DimensionTerm;
    std::vector<std::pair<std::string, double>> inputs;
    double dimension_term = std::numeric_limits<double>::quiet_NaN();
    double width_term = std::numeric_limits<double>::quiet_NaN();  ///< NaN when outside its regime
    double residual = 0.0;
    double residual_stderr = 0.0;
    long iterations = 0;
    bool valid = true;  ///< regime side condition (t* ≤ R, φ ≤ 1, ...)

    double root() const { return std::sqrt(value); }
};

/// min(4σ²M/n, 31σR√(ln(eMσ/(R√n)))/√n); the second term only when R√n ≤ Mσ.
FixedPointReport t_star_convex_agg(double sigma, double R, long n, long M);

/// min(4σ²·rank/n, 62σR√(ln(2eMσ/(R√n)))/√n); the second term only when R√n ≤ 2Mσ.
FixedPointReport t_star_lasso(double sigma, double R, long n, long M, long rank);

/// 31σR√(ln(eMσ/(R√n))/n). Requires R√n ≤ Mσ; branch Clamped flags t* > R.
FixedPointReport t_star_kappa(double sigma, double R, long n, long M);

/// min(M/n, √(ln(eM/√n)/n)); valid iff the value is at most 1.
FixedPointReport phi_convex(long M, long n);

/// C·R·K·√(ln(eMK/(R√n))/n) with K = max(b, √L). Requires MK > R√n.
FixedPointReport r_star_bounded(double b, double L, double R, long M, long n, double C = 1.0);

/// c·max(√L·R·√(ln(eMr²/R²)/n), bR²·ln(eMr²/R²)/(r²n)) for R/√M ≤ r ≤ R.
double bounded_process_bound(double L, double R, double b, long M, long n, double r, double c = 1.0);

/// 256·p0_sup·d/n.
double t_star_finite_dim(double p0_sup, long d, long n);

/// 4·rad + √(2vx/n) + 8·b_inf·x/(3n).
double rademacher_sup_bound(double rad, double v, double b_inf, double x, long n);

struct AnisotropicConstants {
    double c3 = 1.0, c4 = 1.0, c5 = 1.0, c6 = 1.0;
};

struct AnisotropicBounds {
    double r_bound = 0.0;
    double s_bound = 0.0;
    bool r_log_clamped = false;  ///< log argument ≤ 1: the log term was set to 0
    bool s_log_clamped = false;
};

AnisotropicBounds anisotropic_rate_bounds(double R, double sigma, long n, long M, const AnisotropicConstants& c = {});

/// How the aggregation radius R is derived from the dictionary.
enum class RadiusConvention {
    QuarterMax,  ///< R² = ¼·max_j |f_j|₂²/n
    Direct,      ///< R² = max_j |f_j|₂²/n
};

RadiusConvention parse_radius_convention(const std::string& name);
std::string to_string(RadiusConvention c);
double aggregation_radius(const MatrixXd& design, RadiusConvention convention);

/// Symmetric square root; eigenvalues in [−1e-10·trace, 0) are clamped to 0.
MatrixXd sqrt_psd(const MatrixXd& sigma);

/// W(r) for the persistence reduction: the width of the hull of ±2R·Σ^{1/2}e_j
/// at radius r, every call using the same Gaussian draws.
class PersistenceWidthOracle {
public:
    PersistenceWidthOracle(const GramMatrix& sigma, double R, long samples, const SeededStream& stream,
                           const WidthOptions& opts = {});

    WidthEstimate operator()(double r) const;
    const HullGeometry& hull() const { return hull_; }

private:
    HullGeometry hull_;
    long samples_;
    SeededStream stream_;
    WidthOptions opts_;
};

using WidthOracle = std::function<WidthEstimate(double)>;

struct FixedPointOptions {
    double lo_factor = 1e-6;  ///< bracket [lo_factor·R, hi_factor·R]
    double hi_factor = 2.0;
    double rel_tol = 1e-3;
    int max_iter = 60;
};

/// inf{r : W(r) ≤ γ·r·√n}; value = r̂².
FixedPointReport r_n_fixed_point(const WidthOracle& width, double R, double gamma, long n,
                                 const FixedPointOptions& opts = {});

/// inf{s : W(s) ≤ γ·s²·√n/σ}; value = ŝ².
FixedPointReport s_n_fixed_point(const WidthOracle& width, double R, double gamma, long n, double sigma,
                                 const FixedPointOptions& opts = {});

} // namespace lgw
