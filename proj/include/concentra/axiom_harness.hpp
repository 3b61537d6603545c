#pragma once

// Randomized falsification harness for risk-functional axioms. Each trial draws
// a small equally weighted scenario space, builds the pair of random variables
// an axiom compares, and checks the inequality. Trials use independent seeds
// derived from (seed, trial index), so a report depends only on the seed.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "concentra/concentration.hpp"

namespace concentra {

enum class Axiom {
    Monotonicity,
    TranslationInvariance,
    PositiveHomogeneity,
    Convexity,
    SsdConsistency,
    ConcentrationAversion,
};

inline const char* to_string(Axiom a) {
    switch (a) {
        case Axiom::Monotonicity: return "M";
        case Axiom::TranslationInvariance: return "TI";
        case Axiom::PositiveHomogeneity: return "PH";
        case Axiom::Convexity: return "Convexity";
        case Axiom::SsdConsistency: return "SSD";
        case Axiom::ConcentrationAversion: return "pCA";
    }
    return "?";
}

inline std::optional<Axiom> axiom_from_string(const std::string& s) {
    for (auto a : {Axiom::Monotonicity, Axiom::TranslationInvariance, Axiom::PositiveHomogeneity, Axiom::Convexity,
                   Axiom::SsdConsistency, Axiom::ConcentrationAversion}) {
        if (s == to_string(a)) return a;
    }
    return std::nullopt;
}

/// A law-invariant objective with values in (-inf, +inf].
using LawFunctional = std::function<ExtendedReal(const DiscreteDistribution&)>;

inline LawFunctional as_law_functional(const RiskFunctional& rf) {
    return [rf](const DiscreteDistribution& d) { return ExtendedReal::finite(rf(d)); };
}

struct HarnessOptions {
    std::size_t max_scenarios = 16;
    double tolerance = 1e-9;  // absolute + relative slack on every comparison
    int shrink_steps = 20;
    unsigned threads = 1;
};

struct Counterexample {
    ScenarioSet scenarios;  // columns hold the random variables being compared
    double parameter = 0.0; // shift c, scale lambda or mixing weight, where applicable
    ExtendedReal lhs;
    ExtendedReal rhs;
    std::string relation;
};

struct HarnessReport {
    Axiom axiom = Axiom::Monotonicity;
    bool passed = true;
    std::size_t trials = 0;  // trials run; on failure, up to and including the failing one
    std::optional<Counterexample> counterexample;
};

namespace harness_detail {

using Vec = std::vector<double>;

inline Vec add(const Vec& a, const Vec& b, double bscale = 1.0) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + bscale * b[i];
    return r;
}

inline Vec scaled(const Vec& a, double s) {
    Vec r(a);
    for (double& x : r) x *= s;
    return r;
}

inline ExtendedReal affine(const ExtendedReal& v, double scale, double shift) {
    return v.infinite ? v : ExtendedReal::finite(scale * v.value + shift);
}

inline ExtendedReal combine(double l1, const ExtendedReal& a, double l2, const ExtendedReal& b) {
    if (a.infinite || b.infinite) return ExtendedReal::plus_infinity();
    return ExtendedReal::finite(l1 * a.value + l2 * b.value);
}

inline double random_scale(Rng& rng) { return std::pow(10.0, uniform(rng, -1.0, 1.0)); }

// Mix of shapes so that deviations ES - E cover several orders of magnitude
// and ties occur regularly.
inline Vec random_values(Rng& rng, std::size_t m, double scale) {
    Vec v(m);
    const auto shape = uniform_index(rng, 4);
    const double offset = scale * standard_normal(rng);
    for (auto& x : v) {
        switch (shape) {
            case 0: x = scale * standard_normal(rng); break;
            case 1: x = uniform(rng, -scale, scale); break;
            case 2: x = scale * static_cast<double>(static_cast<long>(uniform_index(rng, 7)) - 3); break;
            default: x = scale * (std::exp(standard_normal(rng)) - 1.0); break;
        }
        x += offset;
    }
    return v;
}

inline std::size_t random_size(Rng& rng, const HarnessOptions& o) {
    return 2 + uniform_index(rng, std::max<std::size_t>(o.max_scenarios, 2) - 1);
}

// Smallest m with m * p integral (up to 1000).
inline std::size_t grid_unit(double p) {
    for (std::size_t m = 1; m <= 1000; ++m) {
        const double x = p * static_cast<double>(m);
        if (std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, x)) return m;
    }
    throw GridError("level p has no scenario grid of size <= 1000");
}

inline ScenarioSet columns(std::initializer_list<Vec> cols, std::vector<std::string> labels) {
    return ScenarioSet::from_columns(std::vector<Vec>(cols), std::move(labels));
}

struct Trial {
    const LawFunctional& rho;
    double p;
    const HarnessOptions& opt;

    ExtendedReal eval(const Vec& x) const { return rho(DiscreteDistribution::uniform(x)); }

    std::optional<Counterexample> monotonicity(Rng& rng) const {
        const std::size_t m = random_size(rng, opt);
        const double scale = random_scale(rng);
        const Vec x = random_values(rng, m, scale);
        Vec bump(m, 0.0);
        const auto kind = uniform_index(rng, 3);
        if (kind == 0) {
            for (auto& b : bump)
                if (uniform01(rng) < 0.5) b = scale * uniform01(rng);
        } else if (kind == 1) {
            Vec sorted = x;
            std::sort(sorted.begin(), sorted.end());
            const double cut = sorted[uniform_index(rng, m)];
            const double delta = scale * uniform01(rng);
            for (std::size_t i = 0; i < m; ++i)
                if (x[i] <= cut) bump[i] = delta * (0.5 + 0.5 * uniform01(rng));
        } else {
            bump[uniform_index(rng, m)] = scale * uniform01(rng);
        }
        auto violated = [&](const Vec& b, ExtendedReal& lhs, ExtendedReal& rhs) {
            lhs = eval(x);
            rhs = eval(add(x, b));
            return !leq(lhs, rhs, opt.tolerance);
        };
        ExtendedReal lhs, rhs;
        if (!violated(bump, lhs, rhs)) return std::nullopt;
        for (int s = 0; s < opt.shrink_steps; ++s) {
            const Vec half = scaled(bump, 0.5);
            ExtendedReal l2, r2;
            if (!violated(half, l2, r2)) break;
            bump = half;
            lhs = l2;
            rhs = r2;
        }
        return Counterexample{columns({x, add(x, bump)}, {"X", "Y"}), 0.0, lhs, rhs, "rho(X) <= rho(Y) with X <= Y"};
    }

    std::optional<Counterexample> translation(Rng& rng) const {
        const std::size_t m = random_size(rng, opt);
        const double scale = random_scale(rng);
        const Vec x = random_values(rng, m, scale);
        double c = 3.0 * scale * standard_normal(rng);
        auto violated = [&](double shift, ExtendedReal& lhs, ExtendedReal& rhs) {
            Vec y = x;
            for (double& v : y) v += shift;
            lhs = eval(y);
            rhs = affine(eval(x), 1.0, shift);
            return !approx_equal(lhs, rhs, opt.tolerance);
        };
        ExtendedReal lhs, rhs;
        if (!violated(c, lhs, rhs)) return std::nullopt;
        for (int s = 0; s < opt.shrink_steps; ++s) {
            ExtendedReal l2, r2;
            if (!violated(0.5 * c, l2, r2)) break;
            c *= 0.5;
            lhs = l2;
            rhs = r2;
        }
        Vec y = x;
        for (double& v : y) v += c;
        return Counterexample{columns({x, y}, {"X", "X_plus_c"}), c, lhs, rhs, "rho(X + c) == rho(X) + c"};
    }

    std::optional<Counterexample> homogeneity(Rng& rng) const {
        const std::size_t m = random_size(rng, opt);
        const double scale = random_scale(rng);
        const Vec x = random_values(rng, m, scale);
        double lambda = std::exp(uniform(rng, -2.0, 2.0));
        auto violated = [&](double l, ExtendedReal& lhs, ExtendedReal& rhs) {
            lhs = eval(scaled(x, l));
            rhs = affine(eval(x), l, 0.0);
            return !approx_equal(lhs, rhs, opt.tolerance);
        };
        ExtendedReal lhs, rhs;
        if (!violated(lambda, lhs, rhs)) return std::nullopt;
        for (int s = 0; s < opt.shrink_steps; ++s) {
            const double half = 1.0 + 0.5 * (lambda - 1.0);
            ExtendedReal l2, r2;
            if (!violated(half, l2, r2)) break;
            lambda = half;
            lhs = l2;
            rhs = r2;
        }
        return Counterexample{columns({x, scaled(x, lambda)}, {"X", "lambda_X"}), lambda, lhs, rhs,
                              "rho(lambda X) == lambda rho(X)"};
    }

    std::optional<Counterexample> convexity(Rng& rng) const {
        const std::size_t m = random_size(rng, opt);
        const double scale = random_scale(rng);
        const Vec x = random_values(rng, m, scale * random_scale(rng));
        Vec y = random_values(rng, m, scale * random_scale(rng));
        if (uniform01(rng) < 0.5) {
            // Rearrange y to move together with x: the deviations then add up.
            std::vector<std::size_t> idx(m);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
            Vec ys = y;
            std::sort(ys.begin(), ys.end());
            for (std::size_t r = 0; r < m; ++r) y[idx[r]] = ys[r];
        }
        const double lambda = uniform01(rng);
        auto violated = [&](const Vec& yy, ExtendedReal& lhs, ExtendedReal& rhs) {
            Vec z(m);
            for (std::size_t i = 0; i < m; ++i) z[i] = lambda * x[i] + (1.0 - lambda) * yy[i];
            lhs = eval(z);
            rhs = combine(lambda, eval(x), 1.0 - lambda, eval(yy));
            return !leq(lhs, rhs, opt.tolerance);
        };
        ExtendedReal lhs, rhs;
        if (!violated(y, lhs, rhs)) return std::nullopt;
        for (int s = 0; s < opt.shrink_steps; ++s) {
            const Vec closer = add(x, add(y, x, -1.0), 0.5);
            ExtendedReal l2, r2;
            if (!violated(closer, l2, r2)) break;
            y = closer;
            lhs = l2;
            rhs = r2;
        }
        Vec z(m);
        for (std::size_t i = 0; i < m; ++i) z[i] = lambda * x[i] + (1.0 - lambda) * y[i];
        return Counterexample{columns({x, y, z}, {"X", "Y", "mix"}), lambda, lhs, rhs,
                              "rho(lambda X + (1-lambda) Y) <= lambda rho(X) + (1-lambda) rho(Y)"};
    }

    std::optional<Counterexample> ssd(Rng& rng) const {
        const std::size_t m = random_size(rng, opt);
        const double scale = random_scale(rng);
        const Vec x = random_values(rng, m, scale);
        struct Spread {
            std::size_t i, j;
            double delta;
        };
        std::vector<Spread> spreads(1 + uniform_index(rng, 3));
        for (auto& s : spreads) {
            s.i = uniform_index(rng, m);
            s.j = (s.i + 1 + uniform_index(rng, m - 1)) % m;
            s.delta = scale * uniform01(rng);
        }
        Vec shift(m, 0.0);
        if (uniform01(rng) < 0.5) {
            for (auto& b : shift) b = scale * uniform01(rng) * (uniform01(rng) < 0.3 ? 1.0 : 0.0);
        }
        // Each spread moves the currently lower of two scenarios down and the
        // higher up by the same amount: a mean-preserving spread.
        auto build = [&](double f) {
            Vec y = x;
            for (const auto& s : spreads) {
                auto lo = s.i, hi = s.j;
                if (y[lo] > y[hi]) std::swap(lo, hi);
                y[lo] -= f * s.delta;
                y[hi] += f * s.delta;
            }
            return add(y, shift, f);
        };
        auto violated = [&](const Vec& y, ExtendedReal& lhs, ExtendedReal& rhs) {
            lhs = eval(x);
            rhs = eval(y);
            return !leq(lhs, rhs, opt.tolerance);
        };
        double f = 1.0;
        ExtendedReal lhs, rhs;
        if (!violated(build(f), lhs, rhs)) return std::nullopt;
        for (int s = 0; s < opt.shrink_steps; ++s) {
            ExtendedReal l2, r2;
            if (!violated(build(0.5 * f), l2, r2)) break;
            f *= 0.5;
            lhs = l2;
            rhs = r2;
        }
        return Counterexample{columns({x, build(f)}, {"X", "Y"}), f, lhs, rhs,
                              "rho(X) <= rho(Y) with X below Y in increasing convex order"};
    }

    std::optional<Counterexample> concentration_aversion(Rng& rng) const {
        const std::size_t unit = grid_unit(p);
        const std::size_t reps = std::max<std::size_t>(1, opt.max_scenarios / unit);
        const std::size_t m = unit * (1 + uniform_index(rng, reps));
        const double scale = random_scale(rng);
        const auto dx = DiscreteDistribution::uniform(random_values(rng, m, scale * random_scale(rng)));
        const auto dy = DiscreteDistribution::uniform(random_values(rng, m, scale * random_scale(rng)));
        const ScenarioSet conc = couple(dx, dy, p, CouplingStyle::TailBlockShuffle, m, rng());
        const Vec xc = conc.column(0);
        const Vec yc = conc.column(1);
        Vec y = yc;
        if (uniform01(rng) < 0.25) {
            std::sort(y.begin(), y.end(), std::greater<>());  // x is sorted ascending: counter-monotone
        } else {
            shuffle(y, rng);
        }
        const ExtendedReal lhs = eval(add(xc, y));
        const ExtendedReal rhs = eval(add(xc, yc));
        if (leq(lhs, rhs, opt.tolerance)) return std::nullopt;
        return Counterexample{columns({xc, y, xc, yc}, {"X", "Y", "X_conc", "Y_conc"}), p, lhs, rhs,
                              "rho(X + Y) <= rho(X' + Y') for p-concentrated (X', Y') with the same marginals"};
    }

    std::optional<Counterexample> run(Axiom a, Rng& rng) const {
        switch (a) {
            case Axiom::Monotonicity: return monotonicity(rng);
            case Axiom::TranslationInvariance: return translation(rng);
            case Axiom::PositiveHomogeneity: return homogeneity(rng);
            case Axiom::Convexity: return convexity(rng);
            case Axiom::SsdConsistency: return ssd(rng);
            case Axiom::ConcentrationAversion: return concentration_aversion(rng);
        }
        return std::nullopt;
    }
};

}  // namespace harness_detail

/// Searches `trials` random instances for a violation of `axiom` by `rho`.
/// `p` is the concentration level used for the pCA axiom.
inline HarnessReport axiom_harness(const LawFunctional& rho, double p, Axiom axiom, std::size_t trials,
                                   std::uint64_t seed, const HarnessOptions& options = {}) {
    require_level(p);
    if (trials < 1) throw InputError("harness needs at least one trial");
    const harness_detail::Trial trial{rho, p, options};
    constexpr std::size_t kChunk = 256;
    HarnessReport report{axiom, true, 0, std::nullopt};
    for (std::size_t start = 0; start < trials; start += kChunk) {
        const std::size_t count = std::min(kChunk, trials - start);
        std::vector<std::optional<Counterexample>> found(count);
        parallel_for(count, options.threads, [&](std::size_t i) {
            Rng rng(mix_seed(seed, start + i));
            found[i] = trial.run(axiom, rng);
        });
        for (std::size_t i = 0; i < count; ++i) {
            if (found[i]) {
                report.passed = false;
                report.trials = start + i + 1;
                report.counterexample = std::move(found[i]);
                return report;
            }
        }
        report.trials = start + count;
    }
    return report;
}

inline HarnessReport axiom_harness(const RiskFunctional& rf, Axiom axiom, std::size_t trials, std::uint64_t seed,
                                   const HarnessOptions& options = {}) {
    return axiom_harness(as_law_functional(rf), rf.level(), axiom, trials, seed, options);
}

}  // namespace concentra
