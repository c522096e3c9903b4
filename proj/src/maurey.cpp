#include "lgw/maurey.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lgw/parallel.hpp"

namespace lgw {

namespace {

std::vector<double> cumulative(const VectorXd& theta)
{
    std::vector<double> cum(static_cast<std::size_t>(theta.size()));
    double total = 0.0;
    Index last = 0;
    for (Index j = 0; j < theta.size(); ++j) {
        total += theta[j];
        cum[static_cast<std::size_t>(j)] = total;
        if (theta[j] > 0.0)
            last = j;
    }
    // Rounding must never send a draw past the last category with mass.
    for (std::size_t j = static_cast<std::size_t>(last); j < cum.size(); ++j)
        cum[j] = std::numeric_limits<double>::infinity();
    return cum;
}

SparseGridWeight draw(const std::vector<double>& cum, long m, const SeededStream& stream)
{
    auto engine = stream.engine();
    std::vector<std::int64_t> counts(cum.size(), 0);
    for (long k = 0; k < m; ++k) {
        const double u = engine.uniform();
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        ++counts[static_cast<std::size_t>(it - cum.begin())];
    }
    return SparseGridWeight(std::move(counts), m);
}

double log_of(const boost::multiprecision::cpp_int& x)
{
    const auto bits = boost::multiprecision::msb(x);
    const unsigned shift = bits > 60 ? static_cast<unsigned>(bits - 60) : 0u;
    const auto head = static_cast<double>(static_cast<std::uint64_t>(x >> shift));
    return std::log(head) + static_cast<double>(shift) * std::numbers::ln2;
}

} // namespace

SparseGridWeight sample_sparse(const SimplexWeight& theta_bar, long m, const SeededStream& stream)
{
    if (m < 1)
        throw InvalidInput("sample_sparse: m must be positive");
    return draw(cumulative(theta_bar.theta()), m, stream);
}

double maurey_expected_q(const SimplexWeight& theta_bar, const GramMatrix& gram, long m)
{
    if (m < 1)
        throw InvalidInput("maurey_expected_q: m must be positive");
    const double q = q_form(gram, theta_bar);
    const double vertex_mean = theta_bar.theta().dot(gram.sigma().diagonal());
    return q + (vertex_mean - q) / static_cast<double>(m);
}

SparsifyResult sparsify_certified(const SimplexWeight& theta_bar, const GramMatrix& gram, long m,
                                  long max_trials, const SeededStream& stream, int threads)
{
    if (m < 1)
        throw InvalidInput("sparsify_certified: m must be positive");
    if (max_trials < 1)
        throw InvalidInput("sparsify_certified: max_trials must be positive");
    if (theta_bar.size() != gram.M())
        throw DimensionMismatch("sparsify_certified: theta has wrong length");

    const auto cum = cumulative(theta_bar.theta());
    std::vector<double> q(static_cast<std::size_t>(max_trials));
    parallel_for(q.size(), threads, [&](std::size_t t) {
        q[t] = q_form(gram, draw(cum, m, stream.split(t)).weight());
    });

    std::size_t best = 0;
    double sum = 0.0;
    for (std::size_t t = 0; t < q.size(); ++t) {
        sum += q[t];
        if (q[t] < q[best])
            best = t;
    }
    const double n = static_cast<double>(q.size());
    SparsifyCertificate cert;
    cert.q_bar = q_form(gram, theta_bar);
    cert.q_hat_mean = sum / n;
    if (q.size() > 1) {
        double ss = 0.0;
        for (double v : q)
            ss += (v - cert.q_hat_mean) * (v - cert.q_hat_mean);
        cert.q_hat_stderr = std::sqrt(ss / (n - 1.0) / n);
    }
    cert.q_best = q[best];
    cert.m = m;
    cert.r_squared_over_m = gram.max_diag() / static_cast<double>(m);
    cert.n_trials = max_trials;

    SparsifyResult out{draw(cum, m, stream.split(best)), cert};
    const double bound = cert.q_bar + cert.r_squared_over_m;
    if (cert.q_best > bound + 1e-12 * std::max(1.0, std::abs(bound))) {
        std::ostringstream msg;
        msg << "sparsify_certified: best Q(theta_hat) = " << cert.q_best << " exceeds Q(theta_bar) + R^2/m = "
            << bound << " after " << max_trials << " trials";
        throw SparsifyBoundNotMet(msg.str(), std::move(out));
    }
    return out;
}

GridCardinality grid_cardinality(long M, long m)
{
    if (M < 1 || m < 1)
        throw InvalidInput("grid_cardinality: need M, m >= 1");
    using boost::multiprecision::cpp_int;
    cpp_int c = 1;
    for (long i = 1; i <= m; ++i) {
        c *= M - 1 + i;
        c /= i;  // exact: c is C(M - 1 + i, i)
    }
    GridCardinality out;
    out.exact = c;
    out.log_exact = log_of(c);
    const double dm = static_cast<double>(m);
    out.log_bound = dm * std::log(2.0 * std::numbers::e * static_cast<double>(M) / dm);
    // The bound is derived for m ≤ M; past m > 2eM it is negative.
    if (m <= M && out.log_exact > out.log_bound * (1.0 + 1e-12))
        throw Error("grid_cardinality: log bound violated for M=" + std::to_string(M) + ", m=" + std::to_string(m));
    return out;
}

std::vector<SparseGridWeight> enumerate_grid(long M, long m, long cap)
{
    const GridCardinality card = grid_cardinality(M, m);
    if (card.exact > cap) {
        std::ostringstream msg;
        msg << "enumerate_grid: " << card.exact << " elements exceed the cap " << cap;
        throw CapExceeded(msg.str());
    }
    std::vector<SparseGridWeight> out;
    out.reserve(static_cast<std::size_t>(card.exact));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(M), 0);
    counts[0] = m;
    for (;;) {
        out.emplace_back(counts, m);
        // Predecessor in lexicographic order: take one unit from the rightmost
        // nonzero position before the last, and put everything after it in the next slot.
        Index i = M - 2;
        while (i >= 0 && counts[static_cast<std::size_t>(i)] == 0)
            --i;
        if (i < 0)
            break;
        const auto ui = static_cast<std::size_t>(i);
        std::int64_t tail = counts.back();
        counts.back() = 0;
        --counts[ui];
        counts[ui + 1] = tail + 1;
    }
    return out;
}

} // namespace lgw
