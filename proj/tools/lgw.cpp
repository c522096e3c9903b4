// lgw: command-line front end for the localized Gaussian width library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "lgw/estimators.hpp"
#include "lgw/experiments.hpp"
#include "lgw/io.hpp"
#include "lgw/maurey.hpp"
#include "lgw/rates.hpp"
#include "lgw/width.hpp"

using nlohmann::ordered_json;

namespace {

ordered_json vector_json(const lgw::VectorXd& v)
{
    ordered_json a = ordered_json::array();
    for (lgw::Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

void emit(const ordered_json& j, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw lgw::Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

ordered_json report_json(const lgw::FixedPointReport& r)
{
    ordered_json j;
    j["value"] = r.value;
    j["root"] = r.root();
    j["branch"] = lgw::to_string(r.branch);
    j["dimension_term"] = number_or_null(r.dimension_term);
    j["width_term"] = number_or_null(r.width_term);
    j["valid"] = r.valid;
    if (r.branch == lgw::Branch::Bisection || r.branch == lgw::Branch::Clamped) {
        j["residual"] = r.residual;
        j["residual_stderr"] = r.residual_stderr;
        j["iterations"] = r.iterations;
    }
    ordered_json in;
    for (const auto& [k, v] : r.inputs)
        in[k] = v;
    j["inputs"] = in;
    return j;
}

ordered_json estimator_json(const lgw::EstimatorResult& r)
{
    ordered_json j;
    j["weights"] = vector_json(r.weights);
    j["objective"] = r.objective;
    j["certified_gap"] = r.certified_gap;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    return j;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Localized Gaussian widths of convex hulls, Maurey sparsification, ERM estimators and rates"};
    app.require_subcommand(1);
    std::string out_path;

    // width
    auto* width = app.add_subcommand("width", "Monte Carlo estimate of the localized width");
    std::string dict_path;
    double radius = 1.0;
    long samples = 10000;
    std::uint64_t seed = 0;
    int threads = 1;
    lgw::SupportOptions support;
    width->add_option("--dict", dict_path, "dictionary CSV")->required();
    width->add_option("--radius", radius, "localization radius s")->required();
    width->add_option("--samples", samples, "Gaussian draws")->capture_default_str();
    width->add_option("--seed", seed, "root seed")->capture_default_str();
    width->add_option("--tol", support.rel_gap, "relative duality-gap target")->capture_default_str();
    width->add_option("--feas-tol", support.feas_tol, "absolute tolerance on Q")->capture_default_str();
    width->add_option("--bisection-steps", support.bisection_steps)->capture_default_str();
    width->add_option("--inner-iterations", support.inner_iterations)->capture_default_str();
    width->add_option("--threads", threads)->capture_default_str();
    width->add_option("--out", out_path, "output JSON (stdout if omitted)");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Closed-form upper and lower width bounds");
    long bM = 0, bn = 0;
    std::optional<double> scale, kappa;
    bounds->add_option("--M", bM, "number of points")->required();
    bounds->add_option("--n", bn, "ambient dimension")->required();
    bounds->add_option("--radius", radius, "localization radius")->required();
    bounds->add_option("--scale", scale, "bound R on the vertex norms");
    bounds->add_option("--kappa", kappa, "one-sided RIP constant for the lower bound");

    // rip
    auto* rip = app.add_subcommand("rip", "One-sided RIP constant of a dictionary");
    long sparsity = 1, budget = 100000;
    rip->add_option("--dict", dict_path)->required();
    rip->add_option("--sparsity", sparsity)->required();
    rip->add_option("--budget", budget)->capture_default_str();
    rip->add_option("--seed", seed)->capture_default_str();
    rip->add_option("--out", out_path);

    // packing
    auto* packing = app.add_subcommand("packing", "Greedy Varshamov-Gilbert packing with admissible signs");
    long pm = 1;
    std::string packing_out;
    packing->add_option("--dict", dict_path)->required();
    packing->add_option("--m", pm)->required();
    packing->add_option("--seed", seed)->capture_default_str();
    packing->add_option("--out", packing_out, "signed vectors as CSV rows")->required();

    // maurey
    auto* maurey = app.add_subcommand("maurey", "Certified Maurey sparsification of a simplex weight");
    std::string theta_path;
    long mm = 1, trials = 10000;
    maurey->add_option("--dict", dict_path)->required();
    maurey->add_option("--theta", theta_path)->required();
    maurey->add_option("--m", mm)->required();
    maurey->add_option("--trials", trials)->capture_default_str();
    maurey->add_option("--seed", seed)->capture_default_str();
    maurey->add_option("--threads", threads)->capture_default_str();
    maurey->add_option("--out", out_path);

    // estimators
    std::string design_path, response_path, gram_path, evals_path, convention = "quarter-max";
    double est_radius = 1.0;
    std::optional<double> b_inf;
    lgw::SolverOptions solver;
    auto* lasso = app.add_subcommand("lasso", "l1-constrained least squares");
    lasso->add_option("--design", design_path)->required();
    lasso->add_option("--response", response_path)->required();
    lasso->add_option("--radius", est_radius)->required();
    lasso->add_option("--gap-tol", solver.gap_tol)->capture_default_str();
    lasso->add_option("--max-iter", solver.max_iter)->capture_default_str();
    lasso->add_option("--out", out_path);

    auto* agg = app.add_subcommand("cvx-agg", "Convex aggregation over the simplex");
    agg->add_option("--design", design_path)->required();
    agg->add_option("--response", response_path)->required();
    agg->add_option("--radius-convention", convention, "quarter-max or direct")->capture_default_str();
    agg->add_option("--gap-tol", solver.gap_tol)->capture_default_str();
    agg->add_option("--max-iter", solver.max_iter)->capture_default_str();
    agg->add_option("--out", out_path);

    auto* density = app.add_subcommand("density", "Density aggregation ERM");
    density->add_option("--gram", gram_path)->required();
    density->add_option("--evals", evals_path)->required();
    density->add_option("--b-inf", b_inf, "sup-norm bound (default: max |evals|)");
    density->add_option("--gap-tol", solver.gap_tol)->capture_default_str();
    density->add_option("--max-iter", solver.max_iter)->capture_default_str();
    density->add_option("--out", out_path);

    // rates
    auto* rates = app.add_subcommand("rates", "Closed-form rate quantities");
    rates->require_subcommand(1);
    double sigma = 1.0, R = 1.0, b = 1.0, L = 1.0, C = 1.0, r = 1.0, c = 1.0, p0 = 1.0, rad = 0.0, v = 0.0, x = 1.0;
    long n = 1, M = 2, rank = 0, d = 1;
    lgw::AnisotropicConstants ac;
    auto add_common = [&](CLI::App* sub, bool with_sigma, bool with_R) {
        if (with_sigma)
            sub->add_option("--sigma", sigma)->required();
        if (with_R)
            sub->add_option("--R", R)->required();
        sub->add_option("--out", out_path);
    };
    auto* r_agg = rates->add_subcommand("t-star-agg", "t*^2 for convex aggregation");
    add_common(r_agg, true, true);
    r_agg->add_option("--n", n)->required();
    r_agg->add_option("--M", M)->required();
    auto* r_lasso = rates->add_subcommand("t-star-lasso", "t*^2 for the constrained Lasso");
    add_common(r_lasso, true, true);
    r_lasso->add_option("--n", n)->required();
    r_lasso->add_option("--M", M)->required();
    r_lasso->add_option("--rank", rank)->required();
    auto* r_kappa = rates->add_subcommand("t-star-kappa", "t*^2 for a general M-point hull");
    add_common(r_kappa, true, true);
    r_kappa->add_option("--n", n)->required();
    r_kappa->add_option("--M", M)->required();
    auto* r_phi = rates->add_subcommand("phi-convex", "Convex aggregation rate");
    add_common(r_phi, false, false);
    r_phi->add_option("--n", n)->required();
    r_phi->add_option("--M", M)->required();
    auto* r_star = rates->add_subcommand("r-star", "r*^2 for bounded processes");
    add_common(r_star, false, true);
    r_star->add_option("--b", b)->required();
    r_star->add_option("--L", L)->required();
    r_star->add_option("--M", M)->required();
    r_star->add_option("--n", n)->required();
    r_star->add_option("--C", C)->capture_default_str();
    auto* r_finite = rates->add_subcommand("finite-dim", "256 p0 d / n");
    add_common(r_finite, false, false);
    r_finite->add_option("--p0-sup", p0)->required();
    r_finite->add_option("--d", d)->required();
    r_finite->add_option("--n", n)->required();
    auto* r_bounded = rates->add_subcommand("bounded", "Bounded-process localized bound");
    add_common(r_bounded, false, true);
    r_bounded->add_option("--L", L)->required();
    r_bounded->add_option("--b", b)->required();
    r_bounded->add_option("--M", M)->required();
    r_bounded->add_option("--n", n)->required();
    r_bounded->add_option("--r", r)->required();
    r_bounded->add_option("--c", c)->capture_default_str();
    auto* r_tal = rates->add_subcommand("talagrand", "Concentration bound for a Rademacher supremum");
    add_common(r_tal, false, false);
    r_tal->add_option("--rad", rad)->required();
    r_tal->add_option("--v", v)->required();
    r_tal->add_option("--b-inf", b)->required();
    r_tal->add_option("--x", x)->required();
    r_tal->add_option("--n", n)->required();
    auto* r_aniso = rates->add_subcommand("anisotropic", "Anisotropic persistence rate bounds");
    add_common(r_aniso, true, true);
    r_aniso->add_option("--n", n)->required();
    r_aniso->add_option("--M", M)->required();
    r_aniso->add_option("--c3", ac.c3)->capture_default_str();
    r_aniso->add_option("--c4", ac.c4)->capture_default_str();
    r_aniso->add_option("--c5", ac.c5)->capture_default_str();
    r_aniso->add_option("--c6", ac.c6)->capture_default_str();

    // persistence-rates
    auto* pers = app.add_subcommand("persistence-rates", "Fixed points r_n and s_n by bisection");
    double gamma = 1.0;
    long width_samples = 2000;
    lgw::FixedPointOptions fp;
    pers->add_option("--gram", gram_path, "covariance CSV")->required();
    pers->add_option("--R", R)->required();
    pers->add_option("--gamma", gamma)->required();
    pers->add_option("--n", n)->required();
    pers->add_option("--sigma", sigma)->required();
    pers->add_option("--seed", seed)->capture_default_str();
    pers->add_option("--samples", width_samples)->capture_default_str();
    pers->add_option("--rel-tol", fp.rel_tol)->capture_default_str();
    pers->add_option("--threads", threads)->capture_default_str();
    pers->add_option("--out", out_path);

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Configuration-driven experiments");
    experiment->require_subcommand(1);
    auto* run = experiment->add_subcommand("run", "Run one experiment config");
    std::string config_path, out_dir = ".";
    run->add_option("--config", config_path)->required();
    run->add_option("--threads", threads)->capture_default_str();
    run->add_option("--out-dir", out_dir)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (width->parsed()) {
            const lgw::Dictionary dict = lgw::io::read_dictionary(dict_path);
            lgw::WidthOptions opts;
            opts.support = support;
            opts.threads = threads;
            const auto est = lgw::estimate_width(dict, radius, samples, lgw::SeededStream{seed, 0}, opts);
            ordered_json j;
            j["mean"] = est.mean;
            j["stderr"] = est.std_error;
            j["n_samples"] = est.n_samples;
            j["s"] = est.s;
            j["mean_dual_gap"] = est.mean_dual_gap;
            j["non_converged"] = est.non_converged;
            j["options"] = {{"dict", dict_path},          {"radius", radius},
                            {"samples", samples},         {"seed", seed},
                            {"rel_gap", support.rel_gap}, {"feas_tol", support.feas_tol},
                            {"bisection_steps", support.bisection_steps},
                            {"inner_iterations", support.inner_iterations},
                            {"threads", threads}};
            emit(j, out_path);
        } else if (bounds->parsed()) {
            ordered_json j;
            j["upper_closed_form"] = lgw::upper_bound_closed_form(bM, bn, radius);
            if (scale)
                j["upper_scaled"] = lgw::upper_bound_scaled(bM, bn, radius, *scale);
            if (kappa) {
                try {
                    j["lower_rip"] = lgw::lower_bound_rip(bM, radius, *kappa);
                } catch (const lgw::InvalidRegime& e) {
                    j["lower_rip"] = nullptr;
                    j["lower_rip_error"] = e.what();
                }
            }
            j["inputs"] = {{"M", bM}, {"n", bn}, {"radius", radius}};
            emit(j, "");
        } else if (rip->parsed()) {
            const auto res = lgw::rip_constant(lgw::io::read_dictionary(dict_path), sparsity, budget,
                                               lgw::SeededStream{seed, 0});
            emit({{"kappa", res.kappa},
                  {"exact", res.exact},
                  {"supports_evaluated", res.supports_evaluated},
                  {"options", {{"dict", dict_path}, {"sparsity", sparsity}, {"budget", budget}, {"seed", seed}}}},
                 out_path);
        } else if (packing->parsed()) {
            const lgw::Dictionary dict = lgw::io::read_dictionary(dict_path);
            const auto pk = lgw::build_packing(dict, pm, lgw::SeededStream{seed, 0});
            lgw::MatrixXd rows(static_cast<lgw::Index>(pk.signed_vectors.size()), dict.M());
            for (std::size_t i = 0; i < pk.signed_vectors.size(); ++i)
                rows.row(static_cast<lgw::Index>(i)) = pk.signed_vectors[i].cast<double>().transpose();
            lgw::io::write_matrix_csv(packing_out, rows);
            const double guarantee = 5 * pm <= dict.M()
                                         ? std::exp(0.5 * static_cast<double>(pm) *
                                                    std::log(static_cast<double>(dict.M()) / (5.0 * static_cast<double>(pm))))
                                         : 0.0;
            emit({{"size", pk.signed_vectors.size()}, {"m", pk.m}, {"M", pk.M}, {"guaranteed_size", guarantee},
                  {"out", packing_out}},
                 "");
        } else if (maurey->parsed()) {
            const lgw::Dictionary dict = lgw::io::read_dictionary(dict_path);
            const lgw::SimplexWeight theta(lgw::io::read_vector(theta_path));
            const lgw::GramMatrix g = lgw::gram(dict);
            ordered_json j;
            lgw::SparsifyResult res;
            bool met = true;
            try {
                res = lgw::sparsify_certified(theta, g, mm, trials, lgw::SeededStream{seed, 0}, threads);
            } catch (const lgw::SparsifyBoundNotMet& e) {
                res = e.best();
                met = false;
            }
            const auto& cert = res.certificate;
            j["counts"] = res.weight.counts();
            j["bound_met"] = met;
            j["certificate"] = {{"q_bar", cert.q_bar},
                                {"q_hat_mean", cert.q_hat_mean},
                                {"q_hat_stderr", cert.q_hat_stderr},
                                {"q_best", cert.q_best},
                                {"m", cert.m},
                                {"r_squared_over_m", cert.r_squared_over_m},
                                {"n_trials", cert.n_trials}};
            j["options"] = {{"dict", dict_path}, {"theta", theta_path}, {"m", mm}, {"trials", trials}, {"seed", seed}};
            emit(j, out_path);
            if (!met)
                return 1;
        } else if (lasso->parsed() || agg->parsed()) {
            const lgw::MatrixXd X = lgw::io::read_matrix_csv(design_path);
            const lgw::VectorXd y = lgw::io::read_vector(response_path);
            ordered_json j;
            if (lasso->parsed()) {
                j = estimator_json(lgw::lasso_constrained(lgw::RegressionProblem(X, y, 0.0, est_radius), solver));
                j["config"] = {{"design", design_path}, {"response", response_path}, {"radius", est_radius}};
            } else {
                const auto conv = lgw::parse_radius_convention(convention);
                j = estimator_json(lgw::convex_aggregate(lgw::RegressionProblem(X, y), solver));
                j["radius"] = lgw::aggregation_radius(X, conv);
                j["config"] = {{"design", design_path}, {"response", response_path}, {"radius_convention", convention}};
            }
            j["config"]["gap_tol"] = solver.gap_tol;
            j["config"]["max_iter"] = solver.max_iter;
            emit(j, out_path);
        } else if (density->parsed()) {
            const lgw::MatrixXd G = lgw::io::read_matrix_csv(gram_path);
            const lgw::MatrixXd P = lgw::io::read_matrix_csv(evals_path);
            const double bound = b_inf ? *b_inf : P.cwiseAbs().maxCoeff();
            ordered_json j = estimator_json(lgw::density_erm(lgw::DensityProblem(G, P, bound), solver));
            j["config"] = {{"gram", gram_path}, {"evals", evals_path}, {"b_inf", bound},
                           {"gap_tol", solver.gap_tol}, {"max_iter", solver.max_iter}};
            emit(j, out_path);
        } else if (rates->parsed()) {
            if (r_agg->parsed())
                emit(report_json(lgw::t_star_convex_agg(sigma, R, n, M)), out_path);
            else if (r_lasso->parsed())
                emit(report_json(lgw::t_star_lasso(sigma, R, n, M, rank)), out_path);
            else if (r_kappa->parsed())
                emit(report_json(lgw::t_star_kappa(sigma, R, n, M)), out_path);
            else if (r_phi->parsed())
                emit(report_json(lgw::phi_convex(M, n)), out_path);
            else if (r_star->parsed())
                emit(report_json(lgw::r_star_bounded(b, L, R, M, n, C)), out_path);
            else if (r_finite->parsed())
                emit({{"value", lgw::t_star_finite_dim(p0, d, n)}, {"inputs", {{"p0_sup", p0}, {"d", d}, {"n", n}}}},
                     out_path);
            else if (r_bounded->parsed())
                emit({{"value", lgw::bounded_process_bound(L, R, b, M, n, r, c)},
                      {"inputs", {{"L", L}, {"R", R}, {"b", b}, {"M", M}, {"n", n}, {"r", r}, {"c", c}}}},
                     out_path);
            else if (r_tal->parsed())
                emit({{"value", lgw::rademacher_sup_bound(rad, v, b, x, n)},
                      {"inputs", {{"rad", rad}, {"v", v}, {"b_inf", b}, {"x", x}, {"n", n}}}},
                     out_path);
            else if (r_aniso->parsed()) {
                const auto res = lgw::anisotropic_rate_bounds(R, sigma, n, M, ac);
                emit({{"r_bound", res.r_bound},
                      {"s_bound", res.s_bound},
                      {"r_log_clamped", res.r_log_clamped},
                      {"s_log_clamped", res.s_log_clamped},
                      {"inputs",
                       {{"R", R}, {"sigma", sigma}, {"n", n}, {"M", M}, {"c3", ac.c3}, {"c4", ac.c4}, {"c5", ac.c5},
                        {"c6", ac.c6}}}},
                     out_path);
            }
        } else if (pers->parsed()) {
            const lgw::GramMatrix S(lgw::io::read_matrix_csv(gram_path));
            lgw::WidthOptions wopts;
            wopts.threads = threads;
            const lgw::PersistenceWidthOracle oracle(S, R, width_samples, lgw::SeededStream{seed, 0}, wopts);
            const lgw::WidthOracle w = [&](double rr) { return oracle(rr); };
            ordered_json j;
            try {
                j["r_n"] = report_json(lgw::r_n_fixed_point(w, R, gamma, n, fp));
            } catch (const lgw::NoCrossing& e) {
                j["r_n"] = {{"error", e.what()}};
            }
            try {
                j["s_n"] = report_json(lgw::s_n_fixed_point(w, R, gamma, n, sigma, fp));
            } catch (const lgw::NoCrossing& e) {
                j["s_n"] = {{"error", e.what()}};
            }
            j["options"] = {{"gram", gram_path}, {"R", R},         {"gamma", gamma},
                            {"n", n},            {"sigma", sigma}, {"seed", seed},
                            {"samples", width_samples}, {"rel_tol", fp.rel_tol}};
            emit(j, out_path);
        } else if (run->parsed()) {
            const lgw::ExperimentConfig cfg = lgw::load_config(config_path);
            const lgw::ExperimentResult res = lgw::run_experiment(cfg, threads);
            std::filesystem::create_directories(out_dir);
            const std::filesystem::path report = std::filesystem::path(out_dir) / cfg.output_path;
            lgw::emit_report(res.table, report.string(), cfg.format);
            std::filesystem::path criteria = report;
            criteria.replace_extension(".criteria.csv");
            lgw::emit_report(res.criteria_table(), criteria.string(), lgw::ReportFormat::Csv);
            for (const auto& crit : res.criteria)
                std::cout << (crit.passed ? "PASS " : "FAIL ") << crit.name
                          << (crit.detail.empty() ? "" : " (" + crit.detail + ")") << '\n';
            std::cout << "report: " << report.string() << '\n';
            return res.passed() ? 0 : 1;
        }
    } catch (const lgw::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
