#include "lgw/experiments.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/QR>

#include "lgw/estimators.hpp"
#include "lgw/io.hpp"
#include "lgw/maurey.hpp"
#include "lgw/parallel.hpp"
#include "lgw/rates.hpp"
#include "lgw/width.hpp"

namespace lgw {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_number(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty())
            return v;
    } catch (const std::exception&) {
    }
    throw ParseError("config key '" + key + "': '" + text + "' is not a number");
}

std::string describe(double v)
{
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

MatrixXd gaussian_matrix(Index rows, Index cols, const SeededStream& stream)
{
    auto engine = stream.engine();
    MatrixXd a(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            a(i, j) = engine.normal();
    return a;
}

void normalize_columns(MatrixXd& a, double target_norm)
{
    for (Index j = 0; j < a.cols(); ++j)
        a.col(j) *= target_norm / a.col(j).norm();
}

VectorXd random_simplex_point(Index M, const SeededStream& stream)
{
    auto engine = stream.engine();
    VectorXd w(M);
    for (Index j = 0; j < M; ++j)
        w[j] = -std::log(1.0 - engine.uniform());
    return w / w.sum();
}

struct MeanStd {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanStd mean_stderr(const std::vector<double>& v)
{
    MeanStd out;
    if (v.empty())
        return out;
    const double n = static_cast<double>(v.size());
    for (double x : v)
        out.mean += x;
    out.mean /= n;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v)
            ss += (x - out.mean) * (x - out.mean);
        out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

Criterion coverage_criterion(const std::vector<char>& violations, double x)
{
    long count = 0;
    for (char v : violations)
        count += v;
    const auto reps = static_cast<long>(violations.size());
    const double rate = reps ? static_cast<double>(count) / static_cast<double>(reps) : 0.0;
    const double tol = coverage_tolerance(x, reps);
    return {"violation rate within e^-x plus 3 binomial stderr", rate <= tol,
            std::to_string(count) + "/" + std::to_string(reps) + " violations, rate " + describe(rate) +
                " vs tolerance " + describe(tol)};
}

Criterion failure_criterion(const std::vector<char>& converged)
{
    long failed = 0;
    for (char c : converged)
        failed += !c;
    const double n = static_cast<double>(std::max<std::size_t>(converged.size(), 1));
    return {"solver failures at most 1%", static_cast<double>(failed) <= 0.01 * n,
            std::to_string(failed) + " of " + std::to_string(converged.size()) + " solves not certified"};
}

const std::map<std::string, std::vector<std::string>>& key_table()
{
    static const std::map<std::string, std::vector<std::string>> table = {
        {"width-sandwich",
         {"dictionary", "n", "path", "radii", "samples", "kappa", "rip_budget", "rel_gap", "reference_width"}},
        {"maurey-check", {"instances", "M", "n", "m", "trials", "include_reference"}},
        {"lasso-oracle",
         {"n", "M", "R", "sigma", "x", "replicates", "target", "target_l1", "sparsity", "gap_tol", "oracle_gap_tol"}},
        {"agg-oracle",
         {"n", "M", "sigma", "x", "replicates", "target", "offset", "radius_convention", "gap_tol",
          "oracle_gap_tol"}},
        {"density-oracle", {"dictionary", "bins", "M", "truth", "n", "replicates", "x", "c", "gap_tol"}},
        {"persistence-run",
         {"M", "R", "sigma", "ns", "replicates", "covariance", "decay", "gamma", "width_samples", "sparsity",
          "compute_rates"}},
        {"rates-sweep", {"sigma", "R", "ns", "Ms"}},
    };
    return table;
}

} // namespace

double ExperimentConfig::number(const std::string& key, std::optional<double> fallback) const
{
    const auto it = params.find(key);
    if (it == params.end()) {
        if (!fallback)
            throw InvalidInput("config: missing key '" + key + "'");
        return *fallback;
    }
    return to_number(key, it->second);
}

long ExperimentConfig::integer(const std::string& key, std::optional<long> fallback) const
{
    const auto it = params.find(key);
    if (it == params.end()) {
        if (!fallback)
            throw InvalidInput("config: missing key '" + key + "'");
        return *fallback;
    }
    const double v = to_number(key, it->second);
    if (v != std::floor(v) || std::abs(v) > 9.0e15)
        throw ParseError("config key '" + key + "': '" + it->second + "' is not an integer");
    return static_cast<long>(v);
}

std::vector<double> ExperimentConfig::grid(const std::string& key, std::optional<std::vector<double>> fallback) const
{
    const auto it = params.find(key);
    if (it == params.end()) {
        if (!fallback)
            throw InvalidInput("config: missing key '" + key + "'");
        return *fallback;
    }
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(to_number(key, trim(item)));
    if (out.empty())
        throw InvalidInput("config key '" + key + "': grid is empty");
    return out;
}

std::string ExperimentConfig::text(const std::string& key, std::optional<std::string> fallback) const
{
    const auto it = params.find(key);
    if (it == params.end()) {
        if (!fallback)
            throw InvalidInput("config: missing key '" + key + "'");
        return *fallback;
    }
    return it->second;
}

bool ExperimentConfig::flag(const std::string& key, bool fallback) const
{
    const auto it = params.find(key);
    if (it == params.end())
        return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes")
        return true;
    if (it->second == "false" || it->second == "0" || it->second == "no")
        return false;
    throw ParseError("config key '" + key + "': expected true or false");
}

const std::vector<std::string>& experiment_keys(const std::string& kind)
{
    const auto& table = key_table();
    const auto it = table.find(kind);
    if (it == table.end())
        throw InvalidInput("unknown experiment kind '" + kind + "'");
    return it->second;
}

ExperimentConfig parse_config(std::istream& in)
{
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError("config line " + std::to_string(line_no) + ": empty key or value");
        if (!seen.insert(key).second)
            throw ParseError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        if (key == "kind")
            cfg.kind = value;
        else if (key == "seed")
            cfg.seed = std::stoull(value);
        else if (key == "output")
            cfg.output_path = value;
        else if (key == "format")
            cfg.format = parse_report_format(value);
        else
            cfg.params[key] = value;
    }
    if (cfg.kind.empty())
        throw ParseError("config: missing 'kind'");
    const auto& keys = experiment_keys(cfg.kind);
    for (const auto& [key, value] : cfg.params)
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ParseError("config: key '" + key + "' is not used by kind " + cfg.kind);
    if (cfg.output_path.empty())
        cfg.output_path = cfg.kind + (cfg.format == ReportFormat::Csv ? ".csv" : ".json");
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path);
    return parse_config(in);
}

bool ExperimentResult::passed() const
{
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.passed; });
}

Table ExperimentResult::criteria_table() const
{
    Table t;
    t.columns = {"criterion", "passed", "detail"};
    for (const auto& c : criteria)
        t.add_row({c.name, c.passed, c.detail});
    return t;
}

double coverage_tolerance(double x, long replicates)
{
    const double p = std::exp(-x);
    return p + 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(std::max(replicates, 1L)));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads)
{
    experiment_keys(cfg.kind);
    if (cfg.kind == "width-sandwich")
        return run_width_sandwich(cfg, threads);
    if (cfg.kind == "lasso-oracle" || cfg.kind == "agg-oracle")
        return run_oracle_coverage(cfg, threads);
    if (cfg.kind == "density-oracle")
        return run_density_oracle(cfg, threads);
    if (cfg.kind == "maurey-check")
        return run_maurey_check(cfg, threads);
    if (cfg.kind == "persistence-run")
        return run_persistence(cfg, threads);
    return run_rates_sweep(cfg, threads);
}

// ---------------------------------------------------------------------------

ExperimentResult run_width_sandwich(const ExperimentConfig& cfg, int threads)
{
    const std::string kind = cfg.text("dictionary", "signed-identity");
    MatrixXd base;
    MatrixXd points;
    if (kind == "signed-identity") {
        const long n = cfg.integer("n", 64);
        base = MatrixXd::Identity(n, n);
        points.resize(n, 2 * n);
        for (long j = 0; j < n; ++j) {
            points.col(2 * j) = base.col(j);
            points.col(2 * j + 1) = -base.col(j);
        }
    } else if (kind == "segment") {
        const long n = cfg.integer("n", 1);
        base = MatrixXd::Zero(n, 1);
        base(0, 0) = 1.0;
        points.resize(n, 2);
        points.col(0) = base.col(0);
        points.col(1) = -base.col(0);
    } else if (kind == "file") {
        points = io::read_dictionary(cfg.text("path")).points();
        base = points;
    } else {
        throw InvalidInput("width-sandwich: unknown dictionary '" + kind + "'");
    }
    const HullGeometry hull{Dictionary(points)};
    const long M = hull.dictionary().M();
    const long n = hull.dictionary().n();
    const double vertex_radius = std::sqrt(hull.gram().max_diag());

    WidthOptions opts;
    opts.threads = threads;
    opts.support.rel_gap = cfg.number("rel_gap", 1e-6);
    const long samples = cfg.integer("samples", 10000);
    const long rip_budget = cfg.integer("rip_budget", 100000);
    const std::string kappa_mode = cfg.text("kappa", "auto");
    const SeededStream draws{cfg.seed, 0};

    ExperimentResult res;
    res.table.columns = {"s", "M", "n", "samples", "mean", "stderr", "mean_dual_gap", "non_converged", "upper",
                         "lower", "kappa", "kappa_exact", "upper_ok", "lower_ok"};
    bool all_upper = true;
    bool all_lower = true;
    bool reference_ok = true;
    std::string reference_detail;
    const auto radii = cfg.grid("radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double s = radii[i];
        const WidthEstimate est = estimate_width(hull, s, samples, draws, opts);
        const double upper = upper_bound_scaled(M, n, s, vertex_radius);

        double lower = std::numeric_limits<double>::quiet_NaN();
        double kappa = std::numeric_limits<double>::quiet_NaN();
        bool kappa_exact = false;
        const double m_real = 1.0 / (s * s);
        const long m = std::lround(m_real);
        if (s <= 1.0 && std::abs(m_real - static_cast<double>(m)) <= 1e-9 * m_real && 5 * m <= M) {
            if (kappa_mode == "auto") {
                const RipResult rip = rip_constant(Dictionary(base), 2 * m, rip_budget, SeededStream{cfg.seed, 1});
                kappa = rip.kappa;
                kappa_exact = rip.exact;
            } else {
                kappa = to_number("kappa", kappa_mode);
                kappa_exact = true;
            }
            lower = lower_bound_rip(M, s, std::min(kappa, 1.0));
        }
        const bool upper_ok = est.mean <= upper + 2.0 * est.std_error;
        const bool lower_ok = std::isnan(lower) || lower - 2.0 * est.std_error <= est.mean;
        all_upper = all_upper && upper_ok;
        all_lower = all_lower && lower_ok;
        res.table.add_row({s, std::int64_t{M}, std::int64_t{n}, std::int64_t{samples}, est.mean, est.std_error,
                           est.mean_dual_gap, std::int64_t{est.non_converged}, upper, lower, kappa, kappa_exact,
                           upper_ok, lower_ok});
        if (cfg.has("reference_width")) {
            const double ref = cfg.number("reference_width");
            const bool ok = std::abs(est.mean - ref) <= 3.0 * est.std_error;
            reference_ok = reference_ok && ok;
            reference_detail += "s=" + describe(s) + ": " + describe(est.mean) + " vs " + describe(ref) + " (3se " +
                                describe(3.0 * est.std_error) + ") ";
        }
    }
    res.criteria.push_back({"mean below upper bound + 2 stderr", all_upper, ""});
    res.criteria.push_back({"lower bound - 2 stderr below mean", all_lower, ""});
    if (cfg.has("reference_width"))
        res.criteria.push_back({"mean within 3 stderr of reference width", reference_ok, trim(reference_detail)});
    return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_oracle_coverage(const ExperimentConfig& cfg, int threads)
{
    const bool lasso = cfg.kind == "lasso-oracle";
    const long n = cfg.integer("n", 100);
    const long M = cfg.integer("M", 200);
    const double sigma = cfg.number("sigma", 0.5);
    const double x = cfg.number("x", 2.0);
    const long reps = cfg.integer("replicates", 500);
    const std::string target = cfg.text("target", "outside");
    if (!(sigma > 0.0))
        throw InvalidInput("oracle coverage: sigma must be positive");
    if (reps < 1)
        throw InvalidInput("oracle coverage: replicates must be at least 1");
    if (target != "outside" && target != "inside")
        throw InvalidInput("oracle coverage: target must be outside or inside");
    SolverOptions solver;
    solver.gap_tol = cfg.number("gap_tol", 1e-8);
    SolverOptions oracle_solver;
    oracle_solver.gap_tol = cfg.number("oracle_gap_tol", 1e-10);

    const double dn = static_cast<double>(n);
    MatrixXd design = gaussian_matrix(n, M, SeededStream{cfg.seed, 0});
    normalize_columns(design, std::sqrt(dn));

    VectorXd f0;
    double radius = 0.0;
    FixedPointReport tstar;
    if (lasso) {
        radius = cfg.number("R", 1.0);
        const double l1 = cfg.number("target_l1", target == "outside" ? 2.0 * radius : 0.5 * radius);
        const long k = std::min<long>(cfg.integer("sparsity", 5), M);
        auto engine = SeededStream{cfg.seed, 1}.engine();
        VectorXd beta = VectorXd::Zero(M);
        for (long t = 0; t < k; ++t) {
            const auto j = static_cast<Index>(engine.index(static_cast<std::uint64_t>(M)));
            beta[j] += engine.rademacher() * (0.5 + engine.uniform());
        }
        beta *= l1 / std::max(beta.lpNorm<1>(), 1e-300);
        f0 = design * beta;
        const long rank = Eigen::ColPivHouseholderQR<MatrixXd>(design).rank();
        tstar = t_star_lasso(sigma, radius, n, M, rank);
    } else {
        const RadiusConvention conv = parse_radius_convention(cfg.text("radius_convention", "quarter-max"));
        radius = aggregation_radius(design, conv);
        f0 = design * random_simplex_point(M, SeededStream{cfg.seed, 1});
        if (target == "outside") {
            const double offset = cfg.number("offset", 0.5);
            f0 += offset * gaussian_matrix(n, 1, SeededStream{cfg.seed, 2}).col(0);
        }
        tstar = t_star_convex_agg(sigma, radius, n, M);
    }

    const RegressionProblem noiseless(design, f0, 0.0, radius);
    const EstimatorResult oracle_fit = lasso ? lasso_constrained(noiseless, oracle_solver)
                                             : convex_aggregate(noiseless, oracle_solver);
    const double oracle = oracle_fit.objective / dn;
    const double oracle_gap = oracle_fit.certified_gap / dn;
    const double remainder = 4.0 * sigma * sigma * x / dn;

    std::vector<double> lhs(static_cast<std::size_t>(reps));
    std::vector<double> gaps(lhs.size());
    std::vector<char> converged(lhs.size());
    const SeededStream noise_root{cfg.seed, 3};
    parallel_for(lhs.size(), threads, [&](std::size_t r) {
        auto engine = noise_root.split(r).engine();
        const VectorXd y = f0 + sigma * engine.normal_vector(n);
        const RegressionProblem prob(design, y, sigma, radius);
        const EstimatorResult fit = lasso ? lasso_constrained(prob, solver) : convex_aggregate(prob, solver);
        lhs[r] = (design * fit.weights - f0).squaredNorm() / dn;
        gaps[r] = fit.certified_gap;
        converged[r] = fit.converged;
    });

    ExperimentResult res;
    res.table.columns = {"replicate", "lhs", "oracle", "t_star_sq", "branch", "remainder", "slack", "rhs",
                         "violation", "solver_gap", "converged"};
    std::vector<char> violations(lhs.size());
    for (std::size_t r = 0; r < lhs.size(); ++r) {
        // |X(β̂ − β_exact)|² ≤ gap, so the exact left side is at least lhs − slack.
        const double slack = 2.0 * std::sqrt(gaps[r] * lhs[r] * dn) / dn + oracle_gap;
        const double rhs = oracle + 2.0 * tstar.value + remainder;
        violations[r] = lhs[r] > rhs + slack;
        res.table.add_row({static_cast<std::int64_t>(r), lhs[r], oracle, tstar.value, to_string(tstar.branch),
                           remainder, slack, rhs, static_cast<bool>(violations[r]), gaps[r],
                           static_cast<bool>(converged[r])});
    }
    res.criteria.push_back(coverage_criterion(violations, x));
    res.criteria.push_back(failure_criterion(converged));
    return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_density_oracle(const ExperimentConfig& cfg, int threads)
{
    const std::string dict = cfg.text("dictionary", "two-bin");
    const long n = cfg.integer("n", 1000);
    const long reps = cfg.integer("replicates", 500);
    const double x = cfg.number("x", 2.0);
    const double c = cfg.number("c", 1.0);
    SolverOptions solver;
    solver.gap_tol = cfg.number("gap_tol", 1e-12);
    if (n < 1 || reps < 1)
        throw InvalidInput("density-oracle: n and replicates must be positive");

    // h(b, j): height of p_j on bin b of the uniform partition of [0, 1].
    MatrixXd h;
    if (dict == "two-bin") {
        h = MatrixXd::Zero(2, 2);
        h(0, 0) = 2.0;
        h(1, 1) = 2.0;
    } else if (dict == "blocks") {
        const long bins = cfg.integer("bins", 20);
        const long M = cfg.integer("M", 10);
        if (bins < 2 || M < 1)
            throw InvalidInput("density-oracle: need bins >= 2 and M >= 1");
        h = MatrixXd::Zero(bins, M);
        auto engine = SeededStream{cfg.seed, 0}.engine();
        for (long j = 0; j < M; ++j) {
            const long len = 1 + static_cast<long>(engine.index(static_cast<std::uint64_t>(bins / 2)));
            const long start = static_cast<long>(engine.index(static_cast<std::uint64_t>(bins - len + 1)));
            h.col(j).segment(start, len).setConstant(static_cast<double>(bins) / static_cast<double>(len));
        }
    } else {
        throw InvalidInput("density-oracle: unknown dictionary '" + dict + "'");
    }
    const Index bins = h.rows();
    const Index M = h.cols();
    const MatrixXd G = h.transpose() * h / static_cast<double>(bins);

    const std::string truth = cfg.text("truth", "uniform");
    VectorXd theta0;
    if (truth == "uniform")
        theta0 = VectorXd::Constant(M, 1.0 / static_cast<double>(M));
    else if (truth == "vertex")
        theta0 = SimplexWeight::vertex(M, 0).theta();
    else if (truth == "random")
        theta0 = random_simplex_point(M, SeededStream{cfg.seed, 1});
    else
        throw InvalidInput("density-oracle: truth must be uniform, vertex or random");
    const VectorXd h0 = h * theta0;

    std::vector<double> cum(static_cast<std::size_t>(bins));
    double acc = 0.0;
    for (Index b = 0; b < bins; ++b)
        cum[static_cast<std::size_t>(b)] = acc += h0[b] / static_cast<double>(bins);
    Index last = 0;
    for (Index b = 0; b < bins; ++b)
        if (h0[b] > 0.0)
            last = b;
    for (Index b = last; b < bins; ++b)
        cum[static_cast<std::size_t>(b)] = std::numeric_limits<double>::infinity();

    const double b_inf = std::max(h.maxCoeff(), h0.maxCoeff());
    const double R = std::sqrt(0.25 * G.diagonal().maxCoeff());
    const double dn = static_cast<double>(n);
    const double dM = static_cast<double>(M);
    const double arg = std::numbers::e * dM * std::sqrt(b_inf) / (R * std::sqrt(dn));
    const double width_term = arg > 1.0 ? R * std::sqrt(b_inf) * std::sqrt(std::log(arg) / dn) : 0.0;
    const double bound = c * std::max(b_inf * dM / dn, width_term) + 88.0 * b_inf * x / (3.0 * dn);

    std::vector<std::int64_t> first_bin(static_cast<std::size_t>(reps));
    std::vector<double> theta_first(first_bin.size());
    std::vector<double> excess(first_bin.size());
    std::vector<double> gaps(first_bin.size());
    std::vector<char> converged(first_bin.size());
    const SeededStream sample_root{cfg.seed, 2};
    parallel_for(first_bin.size(), threads, [&](std::size_t r) {
        auto engine = sample_root.split(r).engine();
        MatrixXd evals(n, M);
        std::int64_t count0 = 0;
        for (long i = 0; i < n; ++i) {
            const auto it = std::upper_bound(cum.begin(), cum.end(), engine.uniform());
            const auto b = static_cast<Index>(it - cum.begin());
            count0 += b == 0;
            evals.row(i) = h.row(b);
        }
        const EstimatorResult fit = density_erm(DensityProblem(G, evals, b_inf), solver);
        const VectorXd d = fit.weights - theta0;
        first_bin[r] = count0;
        theta_first[r] = fit.weights[0];
        excess[r] = d.dot(G * d);
        gaps[r] = fit.certified_gap;
        converged[r] = fit.converged;
    });

    ExperimentResult res;
    res.table.columns = {"replicate", "n_first_bin", "theta_hat_1", "excess", "bound", "slack", "violation",
                         "solver_gap", "converged"};
    std::vector<char> violations(excess.size());
    for (std::size_t r = 0; r < excess.size(); ++r) {
        const double slack = 2.0 * std::sqrt(gaps[r] * excess[r]) + gaps[r];
        violations[r] = excess[r] > bound + slack;
        res.table.add_row({static_cast<std::int64_t>(r), first_bin[r], theta_first[r], excess[r], bound, slack,
                           static_cast<bool>(violations[r]), gaps[r], static_cast<bool>(converged[r])});
    }
    res.criteria.push_back(coverage_criterion(violations, x));
    res.criteria.push_back(failure_criterion(converged));

    if (dict == "two-bin") {
        double worst = 0.0;
        for (std::size_t r = 0; r < excess.size(); ++r)
            worst = std::max(worst, std::abs(theta_first[r] - static_cast<double>(first_bin[r]) / dn));
        res.criteria.push_back({"theta_hat_1 equals n_1/n within 1e-8", worst <= 1e-8,
                                "max deviation " + describe(worst)});
        // excess = 4(n₁/n − p)², whose mean is 4p(1 − p)/n.
        const double p = theta0[0];
        const double exact = 4.0 * p * (1.0 - p) / dn;
        const MeanStd ms = mean_stderr(excess);
        const bool ok = std::abs(ms.mean - exact) <= 3.0 * ms.stderr_ + 1e-15;
        res.criteria.push_back({"mean excess risk within 3 stderr of the binomial value", ok,
                                "mean " + describe(ms.mean) + " vs exact " + describe(exact) + " (3se " +
                                    describe(3.0 * ms.stderr_) + ")"});
    }
    return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_maurey_check(const ExperimentConfig& cfg, int threads)
{
    const long instances = cfg.integer("instances", 20);
    const long M = cfg.integer("M", 8);
    const long n = cfg.integer("n", 5);
    const long trials = cfg.integer("trials", 10000);
    const auto ms = cfg.grid("m", std::vector<double>{1, 2, 4, 8});

    struct Case {
        std::string label;
        SimplexWeight theta;
        GramMatrix gram;
        long m;
    };
    std::vector<Case> cases;
    if (cfg.flag("include_reference", true)) {
        cases.push_back({"vertex", SimplexWeight::vertex(M, 0), GramMatrix(MatrixXd::Identity(M, M)), 3});
        cases.push_back({"identity-half", SimplexWeight::uniform(2), GramMatrix(MatrixXd::Identity(2, 2)), 2});
        cases.push_back({"identity-uniform", SimplexWeight::uniform(M), GramMatrix(MatrixXd::Identity(M, M)), M});
    }
    for (long i = 0; i < instances; ++i) {
        const SeededStream base{cfg.seed, 100 + static_cast<std::uint64_t>(i)};
        const Dictionary dict(gaussian_matrix(n, M, base.split(0)) / std::sqrt(static_cast<double>(n)));
        const GramMatrix g = gram(dict);
        const SimplexWeight theta(random_simplex_point(M, base.split(1)));
        for (double m : ms)
            cases.push_back({"random-" + std::to_string(i), theta, g, std::lround(m)});
    }

    ExperimentResult res;
    res.table.columns = {"case", "label", "M", "m", "trials", "q_bar", "q_hat_mean", "q_hat_stderr", "identity",
                         "bound", "q_best", "identity_ok", "bound_ok", "best_ok"};
    bool bound_all = true;
    bool best_all = true;
    bool reference_identity = true;
    std::string reference_detail;
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const Case& c = cases[k];
        SparsifyResult out;
        try {
            out = sparsify_certified(c.theta, c.gram, c.m, trials, SeededStream{cfg.seed, 2}.split(k), threads);
        } catch (const SparsifyBoundNotMet& e) {
            out = e.best();
        }
        const auto& cert = out.certificate;
        const double identity = maurey_expected_q(c.theta, c.gram, c.m);
        const double bound = cert.q_bar + cert.r_squared_over_m;
        const bool identity_ok = std::abs(cert.q_hat_mean - identity) <= 3.0 * cert.q_hat_stderr + 1e-12;
        const bool bound_ok = cert.q_hat_mean <= bound + 3.0 * cert.q_hat_stderr;
        const bool best_ok = cert.q_best <= bound * (1.0 + 1e-12);
        bound_all = bound_all && bound_ok;
        best_all = best_all && best_ok;
        if (c.label == "identity-half") {
            reference_identity = identity_ok;
            reference_detail = "mean " + describe(cert.q_hat_mean) + " vs " + describe(identity) + " (3se " +
                               describe(3.0 * cert.q_hat_stderr) + ")";
        }
        res.table.add_row({static_cast<std::int64_t>(k), c.label, std::int64_t{c.theta.size()}, std::int64_t{c.m},
                           std::int64_t{trials}, cert.q_bar, cert.q_hat_mean, cert.q_hat_stderr, identity, bound,
                           cert.q_best, identity_ok, bound_ok, best_ok});
    }
    res.criteria.push_back({"mean Q below Q(theta_bar) + R^2/m + 3 stderr", bound_all, ""});
    res.criteria.push_back({"best draw below Q(theta_bar) + R^2/m", best_all, ""});
    if (cfg.flag("include_reference", true))
        res.criteria.push_back({"identity case matches 0.75 within 3 stderr", reference_identity, reference_detail});
    return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_persistence(const ExperimentConfig& cfg, int threads)
{
    const long M = cfg.integer("M", 20);
    const double R = cfg.number("R", 1.0);
    const double sigma = cfg.number("sigma", 0.5);
    const auto ns = cfg.grid("ns", std::vector<double>{50, 100, 200, 400});
    const long reps = cfg.integer("replicates", 20);
    const double gamma = cfg.number("gamma", 1.0);
    const long width_samples = cfg.integer("width_samples", 500);
    const long k = std::min<long>(cfg.integer("sparsity", 3), M);
    const std::string cov = cfg.text("covariance", "isotropic");
    if (!(sigma >= 0.0))
        throw InvalidInput("persistence-run: sigma must be nonnegative");

    VectorXd diag = VectorXd::Ones(M);
    if (cov == "anisotropic") {
        const double decay = cfg.number("decay", 1.0);
        for (long j = 0; j < M; ++j)
            diag[j] = std::pow(static_cast<double>(j + 1), -decay);
    } else if (cov != "isotropic") {
        throw InvalidInput("persistence-run: covariance must be isotropic or anisotropic");
    }
    const MatrixXd Sigma = diag.asDiagonal();
    const MatrixXd root = sqrt_psd(Sigma);

    VectorXd beta = VectorXd::Zero(M);
    {
        auto engine = SeededStream{cfg.seed, 0}.engine();
        for (long t = 0; t < k; ++t)
            beta[t] = engine.rademacher() * (0.5 + engine.uniform());
        beta *= R / beta.lpNorm<1>();
    }

    std::unique_ptr<PersistenceWidthOracle> oracle;
    if (cfg.flag("compute_rates", true)) {
        WidthOptions wopts;
        wopts.threads = threads;
        oracle = std::make_unique<PersistenceWidthOracle>(GramMatrix(Sigma), R, width_samples,
                                                          SeededStream{cfg.seed, 1}, wopts);
    }

    ExperimentResult res;
    res.table.columns = {"n", "replicates", "mean_excess", "stderr_excess", "max_excess", "r_n_sq", "r_branch",
                         "s_n_sq", "s_branch", "rate", "ratio"};
    std::vector<MeanStd> per_n;
    double worst_excess = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const long n = std::lround(ns[i]);
        std::vector<double> excess(static_cast<std::size_t>(reps));
        const SeededStream rep_root = SeededStream{cfg.seed, 2}.split(i);
        parallel_for(excess.size(), threads, [&](std::size_t r) {
            auto engine = rep_root.split(r).engine();
            MatrixXd X(n, M);
            for (long row = 0; row < n; ++row)
                X.row(row) = (root * engine.normal_vector(M)).transpose();
            const VectorXd y = X * beta + sigma * engine.normal_vector(n);
            const EstimatorResult fit = persistence_erm(X, y, R);
            const VectorXd d = fit.weights - beta;
            excess[r] = d.dot(Sigma * d);
        });
        const MeanStd ms = mean_stderr(excess);
        per_n.push_back(ms);
        const double max_excess = *std::max_element(excess.begin(), excess.end());
        worst_excess = std::max(worst_excess, max_excess);

        double r_sq = std::numeric_limits<double>::quiet_NaN();
        double s_sq = std::numeric_limits<double>::quiet_NaN();
        std::string r_branch = "n/a";
        std::string s_branch = "n/a";
        if (oracle) {
            const WidthOracle w = [&](double r) { return (*oracle)(r); };
            try {
                const auto rep = r_n_fixed_point(w, R, gamma, n);
                r_sq = rep.value;
                r_branch = to_string(rep.branch);
            } catch (const NoCrossing&) {
                r_branch = "no-crossing";
            }
            if (sigma > 0.0) {
                try {
                    const auto rep = s_n_fixed_point(w, R, gamma, n, sigma);
                    s_sq = rep.value;
                    s_branch = to_string(rep.branch);
                } catch (const NoCrossing&) {
                    s_branch = "no-crossing";
                }
            }
        }
        const double rate = std::isnan(s_sq) ? r_sq : std::max(r_sq, s_sq);
        res.table.add_row({std::int64_t{n}, std::int64_t{reps}, ms.mean, ms.stderr_, max_excess, r_sq, r_branch,
                           s_sq, s_branch, rate, ms.mean / rate});
    }
    if (sigma == 0.0) {
        res.criteria.push_back({"realizable design has zero excess risk", worst_excess <= 1e-6,
                                "max excess " + describe(worst_excess)});
    } else {
        bool monotone = true;
        for (std::size_t i = 1; i < per_n.size(); ++i)
            monotone = monotone && per_n[i].mean <= per_n[i - 1].mean + 2.0 * std::hypot(per_n[i].stderr_, per_n[i - 1].stderr_);
        res.criteria.push_back({"mean excess risk nonincreasing in n within 2 stderr", monotone, ""});
    }
    return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_rates_sweep(const ExperimentConfig& cfg, int)
{
    const double sigma = cfg.number("sigma", 1.0);
    const double R = cfg.number("R", 1.0);
    const auto ns = cfg.grid("ns", std::vector<double>{100, 1000, 10000});
    const auto Ms = cfg.grid("Ms", std::vector<double>{10, 100, 1000});

    ExperimentResult res;
    res.table.columns = {"n", "M", "t_agg_sq", "t_agg_branch", "t_lasso_sq", "t_lasso_branch", "phi", "phi_branch",
                         "phi_valid", "branch_ok"};
    bool all_ok = true;
    const double e = std::numbers::e;
    for (double nv : ns) {
        for (double Mv : Ms) {
            const long n = std::lround(nv);
            const long M = std::lround(Mv);
            const long rank = std::min(n, M);
            const auto agg = t_star_convex_agg(sigma, R, n, M);
            const auto las = t_star_lasso(sigma, R, n, M, rank);
            const auto phi = phi_convex(M, n);

            // Independent recomputation of both arguments of each min.
            const double sn = std::sqrt(nv);
            const double agg_dim = 4 * sigma * sigma * Mv / nv;
            const double agg_w = R * sn <= Mv * sigma ? 31 * sigma * R * std::sqrt(std::log(e * Mv * sigma / (R * sn))) / sn
                                                      : HUGE_VAL;
            const double las_dim = 4 * sigma * sigma * static_cast<double>(rank) / nv;
            const double las_w = R * sn <= 2 * Mv * sigma
                                     ? 62 * sigma * R * std::sqrt(std::log(2 * e * Mv * sigma / (R * sn))) / sn
                                     : HUGE_VAL;
            const double phi_dim = Mv / nv;
            const double phi_w = e * Mv / sn > 1 ? std::sqrt(std::log(e * Mv / sn) / nv) : HUGE_VAL;
            const bool ok = ((agg.branch == Branch::DimensionTerm) == (agg_dim <= agg_w)) &&
                            ((las.branch == Branch::DimensionTerm) == (las_dim <= las_w)) &&
                            ((phi.branch == Branch::DimensionTerm) == (phi_dim <= phi_w)) &&
                            std::abs(agg.value - std::min(agg_dim, agg_w)) <= 1e-12 * agg.value &&
                            std::abs(las.value - std::min(las_dim, las_w)) <= 1e-12 * std::max(las.value, 1e-300) &&
                            std::abs(phi.value - std::min(phi_dim, phi_w)) <= 1e-12 * phi.value;
            all_ok = all_ok && ok;
            res.table.add_row({std::int64_t{n}, std::int64_t{M}, agg.value, to_string(agg.branch), las.value,
                               to_string(las.branch), phi.value, to_string(phi.branch), phi.valid, ok});
        }
    }
    res.criteria.push_back({"reported branch matches independent recomputation", all_ok, ""});
    return res;
}

// ---------------------------------------------------------------------------

FixedPointWidthCheck fixed_point_width_check(long n, long M, double sigma, double R, long samples,
                                             const SeededStream& stream, int threads)
{
    if (M < 2 || M % 2 != 0)
        throw InvalidInput("fixed_point_width_check: M must be even and at least 2");
    FixedPointWidthCheck out;
    const FixedPointReport t = t_star_kappa(sigma, R, n, M);
    out.t_star_sq = t.value;
    out.side_condition = t.valid;

    // Columns of empirical norm R, i.e. Euclidean norm R after the 1/√n rescaling.
    MatrixXd half = gaussian_matrix(n, M / 2, stream.split(0));
    normalize_columns(half, R);
    MatrixXd pts(n, M);
    pts << half, -half;
    WidthOptions opts;
    opts.threads = threads;
    const WidthEstimate w = estimate_width(Dictionary(pts), std::sqrt(t.value), samples, stream.split(1), opts);
    const double scale = sigma / std::sqrt(static_cast<double>(n));
    out.lhs = scale * w.mean;
    out.lhs_stderr = scale * w.std_error;
    out.rhs = 0.5 * t.value;
    out.passed = out.lhs <= out.rhs + 3.0 * out.lhs_stderr;
    return out;
}

} // namespace lgw
