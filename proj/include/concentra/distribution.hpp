#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "concentra/core.hpp"

namespace concentra {

struct Atom {
    double value = 0.0;
    double prob = 0.0;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// A finitely supported loss distribution in canonical form: values strictly
/// increasing, probabilities positive and summing to one. Equal values are
/// coalesced on construction. Immutable after construction.
class DiscreteDistribution {
public:
    /// Accepts atoms in any order. Negative or non-finite entries are rejected,
    /// zero-probability atoms dropped, and a total within 1e-9 of one is
    /// renormalized.
    explicit DiscreteDistribution(std::vector<Atom> atoms) {
        if (atoms.empty()) throw InputError("distribution needs at least one atom");
        for (const auto& a : atoms) {
            if (!std::isfinite(a.value) || !std::isfinite(a.prob)) {
                throw InputError("distribution atoms must be finite");
            }
            if (a.prob < 0.0) throw InputError("negative probability " + std::to_string(a.prob));
        }
        std::stable_sort(atoms.begin(), atoms.end(),
                         [](const Atom& l, const Atom& r) { return l.value < r.value; });
        double total = 0.0;
        for (const auto& a : atoms) {
            if (a.prob <= 0.0) continue;
            total += a.prob;
            if (!atoms_.empty() && atoms_.back().value == a.value) {
                atoms_.back().prob += a.prob;
            } else {
                atoms_.push_back(a);
            }
        }
        if (atoms_.empty()) throw InputError("distribution has no positive-probability atom");
        if (std::abs(total - 1.0) > tol::kRenormalize) {
            throw InputError("probabilities sum to " + std::to_string(total) + ", not 1");
        }
        for (auto& a : atoms_) a.prob /= total;
        build_cumulative();
    }

    /// Point mass.
    static DiscreteDistribution constant(double c) { return DiscreteDistribution(std::vector<Atom>{{c, 1.0}}); }

    /// Equal weights on the given values (duplicates coalesce).
    static DiscreteDistribution uniform(std::span<const double> values) {
        if (values.empty()) throw InputError("uniform distribution needs values");
        std::vector<Atom> atoms;
        atoms.reserve(values.size());
        const double w = 1.0 / static_cast<double>(values.size());
        for (double v : values) atoms.push_back({v, w});
        return DiscreteDistribution(std::move(atoms));
    }

    /// Weighted sample; weights need to sum to one (within the renormalization band).
    static DiscreteDistribution weighted(std::span<const double> values, std::span<const double> weights) {
        if (values.size() != weights.size()) throw InputError("values/weights length mismatch");
        std::vector<Atom> atoms;
        atoms.reserve(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) atoms.push_back({values[i], weights[i]});
        return DiscreteDistribution(std::move(atoms));
    }

    /// Convex combination of distributions.
    static DiscreteDistribution mixture(std::span<const std::pair<double, DiscreteDistribution>> parts) {
        std::vector<Atom> atoms;
        for (const auto& [w, d] : parts) {
            if (w < 0.0) throw InputError("negative mixture weight");
            for (const auto& a : d.atoms()) atoms.push_back({a.value, w * a.prob});
        }
        return DiscreteDistribution(std::move(atoms));
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double min() const { return atoms_.front().value; }
    double max() const { return atoms_.back().value; }

    /// Cumulative probability at the right end of atom i; the last entry is exactly 1.
    const std::vector<double>& cumulative() const { return cum_; }

    double mean() const {
        double s = 0.0;
        for (const auto& a : atoms_) s += a.value * a.prob;
        return s;
    }

    double variance() const {
        const double mu = mean();
        double s = 0.0;
        for (const auto& a : atoms_) s += (a.value - mu) * (a.value - mu) * a.prob;
        return s;
    }

    /// F(x) = P(X <= x).
    double cdf(double x) const {
        auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                                   [](double v, const Atom& a) { return v < a.value; });
        if (it == atoms_.begin()) return 0.0;
        return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }

    friend bool operator==(const DiscreteDistribution& l, const DiscreteDistribution& r) {
        return l.atoms_ == r.atoms_;
    }

private:
    void build_cumulative() {
        cum_.resize(atoms_.size());
        double s = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            s += atoms_[i].prob;
            cum_[i] = s;
        }
        cum_.back() = 1.0;
    }

    std::vector<Atom> atoms_;
    std::vector<double> cum_;
};

/// Left quantile inf{x : F(x) >= p}. Cumulative sums within 1e-12 of p count
/// as reaching it, so p on an atom boundary resolves to the lower atom.
inline double quantile(const DiscreteDistribution& d, double p) {
    require_level(p);
    const auto& cum = d.cumulative();
    const auto it = std::lower_bound(cum.begin(), cum.end(), p - tol::kLevel);
    if (it == cum.end()) return d.max();
    return d.atoms()[static_cast<std::size_t>(it - cum.begin())].value;
}

/// Support width: max atom minus min atom.
inline double range_width(const DiscreteDistribution& d) { return d.max() - d.min(); }

/// Integral of the step quantile function over [a, b], 0 <= a <= b <= 1.
inline double quantile_integral(const DiscreteDistribution& d, double a, double b) {
    const auto& cum = d.cumulative();
    double lo = 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < cum.size(); ++i) {
        const double hi = cum[i];
        const double overlap = std::min(hi, b) - std::max(lo, a);
        if (overlap > 0.0) s += overlap * d.atoms()[i].value;
        lo = hi;
        if (lo >= b) break;
    }
    return s;
}

/// Law of F^{-1}(U) for U uniform on (a, b). Pieces shorter than the sliver
/// tolerance are discarded.
inline DiscreteDistribution restrict_quantiles(const DiscreteDistribution& d, double a, double b) {
    if (!(0.0 <= a && a < b && b <= 1.0)) throw DomainError("restrict_quantiles needs 0 <= a < b <= 1");
    std::vector<Atom> out;
    const auto& cum = d.cumulative();
    double lo = 0.0;
    for (std::size_t i = 0; i < cum.size(); ++i) {
        const double hi = cum[i];
        const double overlap = std::min(hi, b) - std::max(lo, a);
        if (overlap > tol::kSliver) out.push_back({d.atoms()[i].value, overlap / (b - a)});
        lo = hi;
    }
    if (out.empty()) {
        // Interval thinner than the sliver tolerance: fall back to the quantile at its midpoint.
        const double mid = std::clamp(0.5 * (a + b), 1e-300, std::nextafter(1.0, 0.0));
        return DiscreteDistribution::constant(quantile(d, mid));
    }
    double total = 0.0;
    for (const auto& x : out) total += x.prob;
    for (auto& x : out) x.prob /= total;
    return DiscreteDistribution(std::move(out));
}

/// Exact law of (F^{-1}(U) + F^{-1}(1-U)) / 2 for U uniform on (0,1).
///
/// u -> F^{-1}(u) is constant between the ascending cumulative sums, and
/// u -> F^{-1}(1-u) is constant between the cumulative sums taken from the top
/// atom downwards. Walking both partitions at once yields the common
/// refinement; each piece contributes the average of the two atoms it pairs.
/// Summing from the top (rather than using 1 - cum) keeps symmetric inputs
/// exactly symmetric.
inline DiscreteDistribution antithetic_midpoint(const DiscreteDistribution& d) {
    const auto& atoms = d.atoms();
    const std::size_t n = atoms.size();
    if (n == 1) return d;

    const auto& up = d.cumulative();
    std::vector<double> down(n);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        s += atoms[n - 1 - j].prob;
        down[j] = s;
    }
    down.back() = 1.0;

    std::vector<Atom> pieces;
    pieces.reserve(2 * n);
    double pos = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n && j < n) {
        const double end = std::min(up[i], down[j]);
        const double len = end - pos;
        if (len > 0.0) pieces.push_back({0.5 * (atoms[i].value + atoms[n - 1 - j].value), len});
        pos = std::max(pos, end);
        const bool adv_i = up[i] - pos <= tol::kSliver;
        const bool adv_j = down[j] - pos <= tol::kSliver;
        if (adv_i) ++i;
        if (adv_j) ++j;
    }
    return DiscreteDistribution(std::move(pieces));
}

}  // namespace concentra
