#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include <Eigen/Core>

namespace lgw {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class RandomEngine;

/// Identifies a reproducible random substream.
///
/// The k-th 64-bit draw of a stream is a pure function of
/// (root_seed, stream_id, k), so results never depend on which thread
/// consumes which substream or in what order.
struct SeededStream {
    std::uint64_t root_seed = 0;
    std::uint64_t stream_id = 0;

    /// Child stream number `k`. Children of distinct parents or with
    /// distinct indices are keyed independently.
    constexpr SeededStream split(std::uint64_t k) const noexcept
    {
        return {root_seed, mix64(stream_id ^ mix64(k + 0x632be59bd9b4e019ull))};
    }

    RandomEngine engine() const noexcept;

    friend constexpr bool operator==(const SeededStream&, const SeededStream&) = default;
};

/// Counter-based generator; satisfies UniformRandomBitGenerator.
class RandomEngine {
public:
    using result_type = std::uint64_t;

    constexpr explicit RandomEngine(SeededStream stream) noexcept
        : key_a_(mix64(stream.root_seed + 0x9e3779b97f4a7c15ull))
        , key_b_(mix64(stream.stream_id ^ mix64(key_a_ + 0xa0761d6478bd642full)))
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        const std::uint64_t k = counter_++;
        return mix64(mix64(k + key_b_) ^ key_a_);
    }

    std::uint64_t counter() const noexcept { return counter_; }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, n), unbiased (Lemire's multiply-and-reject).
    std::uint64_t index(std::uint64_t n) noexcept
    {
        unsigned __int128 product = static_cast<unsigned __int128>((*this)()) * n;
        auto low = static_cast<std::uint64_t>(product);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                product = static_cast<unsigned __int128>((*this)()) * n;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

    /// ±1 with equal probability.
    int rademacher() noexcept { return ((*this)() >> 63) ? 1 : -1; }

    /// Standard normal via Box–Muller; the second variate of each pair is cached.
    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n)
    {
        Eigen::VectorXd g(n);
        for (Eigen::Index i = 0; i < n; ++i)
            g[i] = normal();
        return g;
    }

private:
    std::uint64_t key_a_;
    std::uint64_t key_b_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline RandomEngine SeededStream::engine() const noexcept { return RandomEngine(*this); }

} // namespace lgw
