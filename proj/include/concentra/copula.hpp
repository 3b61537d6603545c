#pragma once

// Checkerboard copulas: n x n cell masses, uniform inside each cell. Row i
// covers U in [i/n, (i+1)/n], column j covers V in [j/n, (j+1)/n].

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "concentra/core.hpp"

namespace concentra {

class CheckerboardCopula {
public:
    /// mass is row-major; rows and columns must each sum to 1/n within 1e-12.
    CheckerboardCopula(std::size_t n, std::vector<double> mass) : n_(n), mass_(std::move(mass)) {
        if (n_ == 0) throw InputError("copula grid needs n >= 1");
        if (mass_.size() != n_ * n_) {
            throw InputError("copula mass has " + std::to_string(mass_.size()) + " entries, expected " +
                             std::to_string(n_ * n_));
        }
        for (std::size_t k = 0; k < mass_.size(); ++k) {
            if (!std::isfinite(mass_[k]) || mass_[k] < 0.0) {
                throw InputError("copula cell (" + std::to_string(k / n_) + "," + std::to_string(k % n_) +
                                 ") has invalid mass");
            }
        }
        const double target = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            double row = 0.0, col = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                row += at(i, j);
                col += at(j, i);
            }
            if (std::abs(row - target) > 1e-12) throw InputError("copula row " + std::to_string(i) + " does not sum to 1/n");
            if (std::abs(col - target) > 1e-12) {
                throw InputError("copula column " + std::to_string(i) + " does not sum to 1/n");
            }
        }
    }

    static CheckerboardCopula independence(std::size_t n) {
        return {n, std::vector<double>(n * n, 1.0 / static_cast<double>(n * n))};
    }

    /// Mass 1/n on the diagonal cells: the checkerboard version of min(u, v).
    static CheckerboardCopula comonotone(std::size_t n) {
        std::vector<double> m(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0 / static_cast<double>(n);
        return {n, std::move(m)};
    }

    static CheckerboardCopula countermonotone(std::size_t n) {
        std::vector<double> m(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m[i * n + (n - 1 - i)] = 1.0 / static_cast<double>(n);
        return {n, std::move(m)};
    }

    /// Independence inside the blocks [0, k/n]^2 and [k/n, 1]^2, no mass elsewhere.
    static CheckerboardCopula block_diagonal(std::size_t n, std::size_t k) {
        if (k == 0 || k >= n) throw GridError("block split must satisfy 0 < k < n");
        std::vector<double> m(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const bool lower = i < k;
            const std::size_t lo = lower ? 0 : k;
            const std::size_t hi = lower ? k : n;
            const double w = 1.0 / (static_cast<double>(n) * static_cast<double>(hi - lo));
            for (std::size_t j = lo; j < hi; ++j) m[i * n + j] = w;
        }
        return {n, std::move(m)};
    }

    /// Permutation copula: mass 1/n on cells (i, perm[i]).
    static CheckerboardCopula permutation(const std::vector<std::size_t>& perm) {
        const std::size_t n = perm.size();
        std::vector<double> m(n * n, 0.0);
        std::vector<char> used(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (perm[i] >= n || used[perm[i]]) throw InputError("not a permutation");
            used[perm[i]] = 1;
            m[i * n + perm[i]] = 1.0 / static_cast<double>(n);
        }
        return {n, std::move(m)};
    }

    std::size_t n() const { return n_; }
    const std::vector<double>& mass() const { return mass_; }
    double at(std::size_t i, std::size_t j) const { return mass_[i * n_ + j]; }

    /// Same copula on a grid `factor` times finer.
    CheckerboardCopula refine(std::size_t factor) const {
        if (factor == 0) throw InputError("refinement factor must be positive");
        if (factor == 1) return *this;
        const std::size_t nn = n_ * factor;
        const double share = 1.0 / static_cast<double>(factor * factor);
        std::vector<double> m(nn * nn);
        for (std::size_t i = 0; i < nn; ++i)
            for (std::size_t j = 0; j < nn; ++j) m[i * nn + j] = at(i / factor, j / factor) * share;
        return {nn, std::move(m)};
    }

private:
    std::size_t n_;
    std::vector<double> mass_;
};

/// Exact C(u, v): integral of the cell densities over [0,u] x [0,v].
inline double eval_c(const CheckerboardCopula& c, double u, double v) {
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) throw DomainError("copula arguments must lie in [0,1]");
    const std::size_t n = c.n();
    const double nd = static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fu = std::clamp(u * nd - static_cast<double>(i), 0.0, 1.0);
        if (fu == 0.0) break;
        for (std::size_t j = 0; j < n; ++j) {
            const double fv = std::clamp(v * nd - static_cast<double>(j), 0.0, 1.0);
            if (fv == 0.0) break;
            s += c.at(i, j) * fu * fv;
        }
    }
    return s;
}

/// C at all grid corners: entry (a, b) is C(a/n, b/n), a, b = 0..n.
inline std::vector<double> corner_values(const CheckerboardCopula& c) {
    const std::size_t n = c.n();
    std::vector<double> f((n + 1) * (n + 1), 0.0);
    for (std::size_t a = 1; a <= n; ++a)
        for (std::size_t b = 1; b <= n; ++b)
            f[a * (n + 1) + b] = c.at(a - 1, b - 1) + f[(a - 1) * (n + 1) + b] + f[a * (n + 1) + b - 1] -
                                 f[(a - 1) * (n + 1) + b - 1];
    return f;
}

/// C(p, p) = p within 1e-12.
inline bool in_dp(const CheckerboardCopula& c, double p) {
    require_level(p);
    return std::abs(eval_c(c, p, p) - p) <= 1e-12;
}

inline std::pair<CheckerboardCopula, CheckerboardCopula> common_grid(const CheckerboardCopula& a,
                                                                     const CheckerboardCopula& b) {
    const std::size_t l = std::lcm(a.n(), b.n());
    return {a.refine(l / a.n()), b.refine(l / b.n())};
}

/// c1 <= c2 pointwise. Both are bilinear on each cell of the common grid, so
/// comparing grid corners suffices.
inline bool concordance_leq(const CheckerboardCopula& c1, const CheckerboardCopula& c2, double tol = 1e-12) {
    const auto [a, b] = common_grid(c1, c2);
    const auto fa = corner_values(a);
    const auto fb = corner_values(b);
    for (std::size_t k = 0; k < fa.size(); ++k)
        if (fa[k] > fb[k] + tol) return false;
    return true;
}

/// Cellwise convex combination on the common refined grid.
inline CheckerboardCopula mix(const std::vector<std::pair<CheckerboardCopula, double>>& parts) {
    if (parts.empty()) throw InputError("mix needs at least one copula");
    std::size_t l = 1;
    double total = 0.0;
    for (const auto& [c, w] : parts) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("mixing weights must be nonnegative");
        l = std::lcm(l, c.n());
        total += w;
    }
    if (std::abs(total - 1.0) > tol::kRenormalize) throw InputError("mixing weights must sum to 1");
    std::vector<double> m(l * l, 0.0);
    for (const auto& [c, w] : parts) {
        const auto r = c.refine(l / c.n());
        for (std::size_t k = 0; k < m.size(); ++k) m[k] += (w / total) * r.mass()[k];
    }
    return {l, std::move(m)};
}

inline std::size_t grid_index(const CheckerboardCopula& c, double p) {
    require_level(p);
    const double x = p * static_cast<double>(c.n());
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9) {
        throw GridError("level " + std::to_string(p) + " is not on the 1/" + std::to_string(c.n()) + " grid");
    }
    return static_cast<std::size_t>(r);
}

struct TailCurves {
    double t = 0.0;  // essential infimum of V given U >= p
    double s = 1.0;  // essential supremum of V given U <= p
};

namespace copula_detail {

// Lowest column with mass in rows [k, n), and highest column with mass in rows [0, k).
inline std::pair<std::size_t, std::size_t> tail_columns(const CheckerboardCopula& c, std::size_t upper_from,
                                                        std::size_t lower_to) {
    const std::size_t n = c.n();
    std::size_t lo = n, hi = 0;
    for (std::size_t i = upper_from; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (c.at(i, j) > 0.0) lo = std::min(lo, j);
    for (std::size_t i = 0; i < lower_to; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (c.at(i, j) > 0.0) hi = std::max(hi, j + 1);
    return {lo, hi};
}

}  // namespace copula_detail

/// (t_C(p), s_C(p)) at a grid level p = k/n.
inline TailCurves tail_curves(const CheckerboardCopula& c, double p) {
    const std::size_t k = grid_index(c, p);
    const auto [lo, hi] = copula_detail::tail_columns(c, k, k);
    const double nd = static_cast<double>(c.n());
    return {static_cast<double>(lo) / nd, static_cast<double>(hi) / nd};
}

/// Cells of row i that meet {t_C(u) < v < s_C(u)} for u inside the row:
/// columns [first, last], given as pairs per row (first > last if none).
inline std::vector<std::pair<std::size_t, std::size_t>> band_cells(const CheckerboardCopula& c) {
    const std::size_t n = c.n();
    std::vector<std::pair<std::size_t, std::size_t>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        // For u strictly inside row i, {U >= u} and {U <= u} both meet row i.
        const auto [lo, hi] = copula_detail::tail_columns(c, i, i + 1);
        rows[i] = hi > lo ? std::make_pair(lo, hi - 1) : std::make_pair(std::size_t{1}, std::size_t{0});
    }
    return rows;
}

/// One application of V~ = V 1_{A^c} + V' 1_A with (U',V') an independent
/// copy and A = {U > U', V < V'} or {U < U', V > V'}, evaluated exactly at
/// cell level. Given the two cells, {U > U'} and {V < V'} are independent
/// with probabilities alpha, beta in {0, 1/2, 1}, so
///   P(A) = alpha beta + (1 - alpha)(1 - beta).
/// That form separates over rows and columns, which brings the pair sum down
/// from O(n^4) to O(n^3).
inline CheckerboardCopula concordance_transfer(const CheckerboardCopula& c) {
    const std::size_t n = c.n();
    auto gt = [](std::size_t a, std::size_t b) { return a > b ? 1.0 : (a == b ? 0.5 : 0.0); };
    // alpha(i, i') = P(U > U'), beta(j, j') = P(V < V') = gt(j', j).
    // Q1(i, j) = sum_{i',j'} M(i',j') alpha(i,i') beta(j,j')
    // Q0(i, j) = sum_{i',j'} M(i',j') (1 - alpha)(1 - beta)
    std::vector<double> rb(n * n, 0.0), rnb(n * n, 0.0);  // over j': M(i',j') beta(j,j'), M(i',j')(1-beta)
    for (std::size_t ip = 0; ip < n; ++ip)
        for (std::size_t j = 0; j < n; ++j) {
            double b = 0.0, nb = 0.0;
            for (std::size_t jp = 0; jp < n; ++jp) {
                const double beta = gt(jp, j);
                b += c.at(ip, jp) * beta;
                nb += c.at(ip, jp) * (1.0 - beta);
            }
            rb[ip * n + j] = b;
            rnb[ip * n + j] = nb;
        }
    // Incoming mass into cell (a, b) from V' landing in column b:
    // In(a,b) = [sum_j M(a,j) beta(j,b)] [sum_i' M(i',b) alpha(a,i')]
    //         + [sum_j M(a,j)(1-beta(j,b))] [sum_i' M(i',b)(1-alpha(a,i'))]
    std::vector<double> out(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            double q1 = 0.0, q0 = 0.0, rowb = 0.0, rownb = 0.0, cola = 0.0, colna = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double alpha = gt(a, k);
                q1 += alpha * rb[k * n + b];
                q0 += (1.0 - alpha) * rnb[k * n + b];
                const double beta = gt(b, k);  // P(V < V') with V in column k, V' in column b
                rowb += c.at(a, k) * beta;
                rownb += c.at(a, k) * (1.0 - beta);
                cola += c.at(k, b) * alpha;
                colna += c.at(k, b) * (1.0 - alpha);
            }
            const double stay = c.at(a, b) * (1.0 - q1 - q0);
            out[a * n + b] = std::max(0.0, stay + rowb * cola + rownb * colna);
        }
    // Rows and columns sum to 1/n exactly in exact arithmetic; absorb rounding.
    const double target = 1.0 / static_cast<double>(n);
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += out[i * n + j];
            if (s > 0.0)
                for (std::size_t j = 0; j < n; ++j) out[i * n + j] *= target / s;
        }
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += out[i * n + j];
            if (s > 0.0)
                for (std::size_t i = 0; i < n; ++i) out[i * n + j] *= target / s;
        }
    }
    return {n, std::move(out)};
}

/// C' = C/2 + C+/2 followed by two concordance transfers. The result
/// dominates c in concordance order and has positive mass on every cell of
/// the band between the tail curves of c.
inline CheckerboardCopula densify(const CheckerboardCopula& c) {
    const auto start = mix({{c, 0.5}, {CheckerboardCopula::comonotone(c.n()), 0.5}});
    return concordance_transfer(concordance_transfer(start));
}

/// Stationary Markov chain with consecutive pairs distributed as c:
/// X_1 uniform, and X_{k+1} drawn from the conditional law of V given U = X_k
/// (piecewise uniform across the cells of X_k's row).
class MarkovSampler {
public:
    explicit MarkovSampler(const CheckerboardCopula& c) : n_(c.n()), cum_(c.n() * c.n()) {
        const double nd = static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                s += nd * c.at(i, j);
                cum_[i * n_ + j] = s;
            }
            cum_[i * n_ + n_ - 1] = 1.0;
        }
    }

    double next(double x, Rng& rng) const {
        const double nd = static_cast<double>(n_);
        const std::size_t row = std::min(n_ - 1, static_cast<std::size_t>(x * nd));
        const double u = uniform01(rng);
        const auto first = cum_.begin() + static_cast<std::ptrdiff_t>(row * n_);
        const auto it = std::upper_bound(first, first + static_cast<std::ptrdiff_t>(n_), u);
        const auto j = std::min(n_ - 1, static_cast<std::size_t>(it - first));
        const double below = j == 0 ? 0.0 : *(first + static_cast<std::ptrdiff_t>(j) - 1);
        const double width = *(first + static_cast<std::ptrdiff_t>(j)) - below;
        const double frac = width > 0.0 ? std::clamp((u - below) / width, 0.0, 1.0) : 0.5;
        return (static_cast<double>(j) + frac) / nd;
    }

    std::vector<double> path(std::size_t length, Rng& rng) const {
        std::vector<double> xs;
        xs.reserve(length);
        if (length == 0) return xs;
        xs.push_back(uniform01(rng));
        while (xs.size() < length) xs.push_back(next(xs.back(), rng));
        return xs;
    }

private:
    std::size_t n_;
    std::vector<double> cum_;
};

inline std::vector<double> markov_chain(const CheckerboardCopula& c, std::size_t length, std::uint64_t seed) {
    if (length < 1) throw InputError("chain length must be at least 1");
    Rng rng(seed);
    return MarkovSampler(c).path(length, rng);
}

enum class Diversification { Diversifiable, NonDiversifiable, Inconclusive };

inline const char* to_string(Diversification d) {
    switch (d) {
        case Diversification::Diversifiable: return "Diversifiable";
        case Diversification::NonDiversifiable: return "NonDiversifiable";
        case Diversification::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct DiagnosticThresholds {
    double band_sigmas = 3.0;  // Diversifiable below band_sigmas / sqrt(12 N)
    double floor = 0.05;       // NonDiversifiable above this
    double quantile = 0.9;
};

struct ChainDiagnostics {
    std::size_t length = 0;
    std::size_t replications = 0;
    std::vector<std::size_t> checkpoints;           // n at which partial means are recorded
    std::vector<std::vector<double>> partial_means;  // [replication][checkpoint]
    std::vector<double> final_deviation;             // |mean_N - 1/2| per replication
    std::vector<double> sup_deviation;               // sup_{n >= N/10} |mean_n - 1/2| per replication
    double deviation_quantile = 0.0;                 // of final_deviation at thresholds.quantile
    double sup_deviation_median = 0.0;
    double sup_deviation_quantile = 0.0;
    double band = 0.0;
    DiagnosticThresholds thresholds;
    Diversification verdict = Diversification::Inconclusive;
    // Present when a tail level was requested and c is concentrated at it.
    std::optional<double> tail_level;
    std::size_t tail_count = 0;
    double tail_mean = 0.0;    // average of mean_N over replications with X_1 > p
    double tail_target = 0.0;  // (1 + p) / 2
};

/// Left empirical quantile.
inline double empirical_quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw InputError("empirical quantile of an empty sample");
    std::sort(xs.begin(), xs.end());
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size()) - 1e-12));
    return xs[std::min(xs.size() - 1, idx == 0 ? 0 : idx - 1)];
}

inline ChainDiagnostics lln_diagnostic(const CheckerboardCopula& c, std::size_t length, std::size_t replications,
                                       std::optional<double> tail_level, std::uint64_t seed,
                                       const DiagnosticThresholds& thresholds = {},
                                       unsigned threads = default_threads()) {
    if (length < 100) throw InputError("chain length N must be at least 100");
    if (replications < 10) throw InputError("replications R must be at least 10");
    if (tail_level) require_level(*tail_level);
    ChainDiagnostics d;
    d.length = length;
    d.replications = replications;
    d.thresholds = thresholds;
    for (std::size_t n = 10; n < length; n *= 2) d.checkpoints.push_back(n);
    d.checkpoints.push_back(length);
    d.partial_means.assign(replications, std::vector<double>(d.checkpoints.size()));
    d.final_deviation.assign(replications, 0.0);
    d.sup_deviation.assign(replications, 0.0);
    std::vector<double> first(replications);
    const MarkovSampler sampler(c);
    const std::size_t sup_from = std::max<std::size_t>(1, length / 10);
    parallel_for(replications, threads, [&](std::size_t r) {
        Rng rng(mix_seed(seed, r));
        double x = uniform01(rng);
        first[r] = x;
        double sum = 0.0;
        double sup = 0.0;
        std::size_t next_cp = 0;
        for (std::size_t k = 1; k <= length; ++k) {
            if (k > 1) x = sampler.next(x, rng);
            sum += x;
            const double mean = sum / static_cast<double>(k);
            if (k >= sup_from) sup = std::max(sup, std::abs(mean - 0.5));
            if (next_cp < d.checkpoints.size() && k == d.checkpoints[next_cp]) d.partial_means[r][next_cp++] = mean;
        }
        d.final_deviation[r] = std::abs(sum / static_cast<double>(length) - 0.5);
        d.sup_deviation[r] = sup;
    });
    d.deviation_quantile = empirical_quantile(d.final_deviation, thresholds.quantile);
    d.sup_deviation_median = empirical_quantile(d.sup_deviation, 0.5);
    d.sup_deviation_quantile = empirical_quantile(d.sup_deviation, thresholds.quantile);
    d.band = thresholds.band_sigmas / std::sqrt(12.0 * static_cast<double>(length));
    if (d.deviation_quantile < d.band) d.verdict = Diversification::Diversifiable;
    else if (d.deviation_quantile > thresholds.floor) d.verdict = Diversification::NonDiversifiable;
    else d.verdict = Diversification::Inconclusive;

    if (tail_level && in_dp(c, *tail_level)) {
        d.tail_level = *tail_level;
        d.tail_target = 0.5 * (1.0 + *tail_level);
        double s = 0.0;
        for (std::size_t r = 0; r < replications; ++r) {
            if (first[r] > *tail_level) {
                s += d.partial_means[r].back();
                ++d.tail_count;
            }
        }
        d.tail_mean = d.tail_count > 0 ? s / static_cast<double>(d.tail_count) : 0.0;
    }
    return d;
}

/// Random mixture of permutation copulas; handy for property tests.
inline CheckerboardCopula random_checkerboard(std::size_t n, std::size_t components, Rng& rng) {
    std::vector<std::pair<CheckerboardCopula, double>> parts;
    std::vector<double> w(components);
    double total = 0.0;
    for (double& x : w) total += (x = 0.05 + uniform01(rng));
    for (std::size_t k = 0; k < components; ++k) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        shuffle(perm, rng);
        parts.emplace_back(CheckerboardCopula::permutation(perm), w[k] / total);
    }
    return mix(parts);
}

}  // namespace concentra
