#pragma once

// Shared error types, tolerances, seeded RNG helpers and a tiny deterministic
// parallel-for used across the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace concentra {

/// Argument outside the mathematical domain of an operation (e.g. p outside (0,1)).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent input data.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A requested grid (scenario grid or copula grid) does not align with a level.
class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The LP solver failed to terminate or hit a numerical breakdown.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace tol {
inline constexpr double kProbSum = 1e-12;     // accepted |sum(probs) - 1|
inline constexpr double kRenormalize = 1e-9;  // renormalize if within, reject beyond
inline constexpr double kLevel = 1e-12;       // snapping of cumulative sums to a level
inline constexpr double kSliver = 1e-13;      // quantile intervals shorter than this are dropped
}  // namespace tol

inline void require_level(double p, const char* what = "p") {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError(std::string(what) + " must lie in (0,1), got " + std::to_string(p));
    }
}

/// Value on the extended half-line (-inf, +inf]. Objectives that are "+infinity
/// outside a constraint" are represented by the flag, never by a float infinity.
struct ExtendedReal {
    double value = 0.0;
    bool infinite = false;

    static ExtendedReal finite(double v) { return {v, false}; }
    static ExtendedReal plus_infinity() { return {0.0, true}; }
};

/// a <= b on the extended line with an absolute+relative slack.
inline bool leq(const ExtendedReal& a, const ExtendedReal& b, double slack) {
    if (b.infinite) return true;
    if (a.infinite) return false;
    return a.value <= b.value + slack * (1.0 + std::max(std::abs(a.value), std::abs(b.value)));
}

inline bool approx_equal(const ExtendedReal& a, const ExtendedReal& b, double slack) {
    return leq(a, b, slack) && leq(b, a, slack);
}

// splitmix64 finalizer; used to derive independent per-trial / per-replication seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

/// Uniform on [0,1) with 53 random bits; identical on every platform for a given engine state.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

inline double standard_normal(Rng& rng) {
    // Box-Muller; avoids implementation-defined std::normal_distribution output.
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_index(rng, i)]);
    }
}

/// Thread cap from CONCENTRA_THREADS (default 1).
inline unsigned default_threads() {
    if (const char* env = std::getenv("CONCENTRA_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
/// contiguous blocks so results written by index are independent of the count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t block = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * block;
        const std::size_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace concentra
