#pragma once

// Tail events and p-concentration on scenario sets, p-concentrated coupling
// constructors, and the iteration that collapses a law onto the two-point
// law carrying the same ES and mean.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "concentra/risk_measures.hpp"
#include "concentra/scenario_set.hpp"

namespace concentra {

struct TailCertificate {
    std::vector<std::size_t> event;  // scenario indices, ascending
    double level = 0.0;
    double weight = 0.0;             // equals 1 - level
    std::vector<double> thresholds;  // per position: event losses >= threshold >= complement losses
};

enum class TailVerdict { Certified, NotConcentrated, NotRepresentable };

inline const char* to_string(TailVerdict v) {
    switch (v) {
        case TailVerdict::Certified: return "Certified";
        case TailVerdict::NotConcentrated: return "NotConcentrated";
        case TailVerdict::NotRepresentable: return "NotRepresentable";
    }
    return "?";
}

struct TailSearch {
    TailVerdict verdict = TailVerdict::NotConcentrated;
    std::optional<TailCertificate> certificate;
    std::string reason;
};

/// True when `event` has weight 1 - p (within tol) and, for every position,
/// every loss inside the event is >= every loss outside it.
inline bool is_common_tail_event(const ScenarioSet& s, const std::vector<std::size_t>& event, double p,
                                 double tol = 1e-10) {
    std::vector<char> in(s.scenarios(), 0);
    double w = 0.0;
    for (auto i : event) {
        if (i >= s.scenarios() || in[i]) return false;
        in[i] = 1;
        w += s.weight(i);
    }
    if (std::abs(w - (1.0 - p)) > tol) return false;
    for (std::size_t j = 0; j < s.positions(); ++j) {
        double inside_min = std::numeric_limits<double>::infinity();
        double outside_max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s.scenarios(); ++i) {
            if (in[i]) inside_min = std::min(inside_min, s.loss(i, j));
            else outside_max = std::max(outside_max, s.loss(i, j));
        }
        if (inside_min < outside_max) return false;
    }
    return true;
}

namespace detail {

// Chooses a subset of `candidates` whose weights sum to `target` within tol.
// Greedy by descending weight first, then a bounded depth-first search.
inline std::optional<std::vector<std::size_t>> subset_with_weight(const ScenarioSet& s,
                                                                  std::vector<std::size_t> candidates,
                                                                  double target, double tol) {
    if (std::abs(target) <= tol) return std::vector<std::size_t>{};
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return s.weight(a) > s.weight(b); });
    std::vector<std::size_t> chosen;
    double remaining = target;
    for (auto c : candidates) {
        if (s.weight(c) <= remaining + tol) {
            chosen.push_back(c);
            remaining -= s.weight(c);
        }
    }
    if (std::abs(remaining) <= tol) return chosen;

    std::vector<double> suffix(candidates.size() + 1, 0.0);
    for (std::size_t i = candidates.size(); i-- > 0;) suffix[i] = suffix[i + 1] + s.weight(candidates[i]);
    std::vector<std::size_t> stack;
    long budget = 2'000'000;
    std::optional<std::vector<std::size_t>> found;
    auto dfs = [&](auto&& self, std::size_t idx, double rem) -> bool {
        if (std::abs(rem) <= tol) {
            found = stack;
            return true;
        }
        if (idx == candidates.size() || rem < -tol || suffix[idx] < rem - tol || --budget < 0) return false;
        stack.push_back(candidates[idx]);
        if (self(self, idx + 1, rem - s.weight(candidates[idx]))) return true;
        stack.pop_back();
        return self(self, idx + 1, rem);
    };
    dfs(dfs, 0, target);
    return found;
}

}  // namespace detail

/// Searches for an event A of weight 1 - p that is a tail event of every
/// position. With q_i = VaR_p of position i, any such A must contain
/// U_i = {x_i > q_i} and lie inside V_i = {x_i >= q_i}; conversely every A in
/// that sandwich with the right weight works. Scenarios in the gap all sit at
/// the thresholds, so only their weights matter.
inline TailSearch find_common_tail_event(const ScenarioSet& s, double p) {
    require_level(p);
    constexpr double kTol = 1e-10;
    const std::size_t m = s.scenarios();
    const std::size_t k = s.positions();
    std::vector<double> thresholds(k);
    std::vector<char> must(m, 0);
    std::vector<char> may(m, 1);
    for (std::size_t j = 0; j < k; ++j) {
        thresholds[j] = value_at_risk(s.marginal(j), p);
        for (std::size_t i = 0; i < m; ++i) {
            if (s.loss(i, j) > thresholds[j]) must[i] = 1;
            if (s.loss(i, j) < thresholds[j]) may[i] = 0;
        }
    }
    double w_must = 0.0;
    double w_may = 0.0;
    std::vector<std::size_t> event;
    std::vector<std::size_t> boundary;
    for (std::size_t i = 0; i < m; ++i) {
        if (must[i] && !may[i]) {
            return {TailVerdict::NotConcentrated, std::nullopt,
                    "scenario " + std::to_string(i) + " is above one position's threshold but below another's"};
        }
        if (may[i]) w_may += s.weight(i);
        if (must[i]) {
            w_must += s.weight(i);
            event.push_back(i);
        } else if (may[i]) {
            boundary.push_back(i);
        }
    }
    const double target = 1.0 - p;
    if (w_must > target + kTol) {
        return {TailVerdict::NotConcentrated, std::nullopt, "scenarios above the thresholds outweigh 1-p"};
    }
    if (w_may < target - kTol) {
        return {TailVerdict::NotConcentrated, std::nullopt, "scenarios at or above the thresholds weigh less than 1-p"};
    }
    auto fill = detail::subset_with_weight(s, boundary, target - w_must, kTol);
    if (!fill) {
        return {TailVerdict::NotRepresentable, std::nullopt,
                "no subset of threshold scenarios reaches weight 1-p exactly"};
    }
    event.insert(event.end(), fill->begin(), fill->end());
    std::sort(event.begin(), event.end());
    double w = 0.0;
    for (auto i : event) w += s.weight(i);
    return {TailVerdict::Certified, TailCertificate{std::move(event), p, w, std::move(thresholds)}, ""};
}

/// Sum of the positions' ES minus the ES of their sum (nonnegative up to rounding).
inline double es_additivity_gap(const ScenarioSet& s, double p) {
    double sum_es = 0.0;
    for (std::size_t j = 0; j < s.positions(); ++j) sum_es += expected_shortfall(s.marginal(j), p);
    return sum_es - expected_shortfall(s.total(), p);
}

/// ES_p is additive on the set: true iff ES(total) >= sum of ES - tol. With
/// more than two positions every pair is checked as well as the full sum.
inline bool es_additivity_test(const ScenarioSet& s, double p, double tol = 1e-10) {
    require_level(p);
    const std::size_t k = s.positions();
    std::vector<double> es(k);
    for (std::size_t j = 0; j < k; ++j) es[j] = expected_shortfall(s.marginal(j), p);
    if (k > 2) {
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = a + 1; b < k; ++b) {
                auto col = s.column(a);
                const auto cb = s.column(b);
                for (std::size_t i = 0; i < col.size(); ++i) col[i] += cb[i];
                if (expected_shortfall(s.law(col), p) < es[a] + es[b] - tol) return false;
            }
        }
    }
    double total = 0.0;
    for (double e : es) total += e;
    return expected_shortfall(s.total(), p) >= total - tol;
}

enum class CouplingStyle { Comonotone, TailBlockAntitone, TailBlockShuffle };

/// Integral grid size check: m*p and m*(1-p) must be whole numbers.
inline std::size_t lower_block_size(double p, std::size_t m) {
    require_level(p);
    const double lower = p * static_cast<double>(m);
    const double rounded = std::round(lower);
    if (m == 0 || std::abs(lower - rounded) > 1e-9 * std::max(1.0, lower)) {
        throw GridError("m*p = " + std::to_string(lower) + " is not integral");
    }
    return static_cast<std::size_t>(rounded);
}

/// m equally likely scenarios on the grid u_j = (j - 1/2)/m with X = F_X^{-1}(u_j).
/// Y pairs the grid points inside the lower block (0,p) and inside the upper
/// block (p,1): in the same order, reversed, or uniformly shuffled. Every style
/// shares the tail event {u > p}.
inline ScenarioSet couple(const DiscreteDistribution& dx, const DiscreteDistribution& dy, double p,
                          CouplingStyle style, std::size_t m, std::uint64_t seed = 0) {
    const std::size_t lower = lower_block_size(p, m);
    std::vector<double> x(m), yq(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
        x[j] = quantile(dx, u);
        yq[j] = quantile(dy, u);
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    switch (style) {
        case CouplingStyle::Comonotone: break;
        case CouplingStyle::TailBlockAntitone:
            std::reverse(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(lower));
            std::reverse(order.begin() + static_cast<std::ptrdiff_t>(lower), order.end());
            break;
        case CouplingStyle::TailBlockShuffle: {
            Rng rng(seed);
            std::vector<std::size_t> lo(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(lower));
            std::vector<std::size_t> hi(order.begin() + static_cast<std::ptrdiff_t>(lower), order.end());
            shuffle(lo, rng);
            shuffle(hi, rng);
            std::copy(lo.begin(), lo.end(), order.begin());
            std::copy(hi.begin(), hi.end(), order.begin() + static_cast<std::ptrdiff_t>(lower));
            break;
        }
    }
    std::vector<double> y(m);
    for (std::size_t j = 0; j < m; ++j) y[j] = yq[order[j]];
    return ScenarioSet::from_columns({x, y}, {"X", "Y"});
}

struct CollapseStep {
    int iteration = 0;
    double es = 0.0;
    double lower_es = 0.0;
    double mean = 0.0;
    double upper_width = 0.0;  // support width of the part above level p
    double lower_width = 0.0;  // support width of the part below level p
    std::size_t atoms = 0;
};

struct CollapseResult {
    DiscreteDistribution terminal;
    DiscreteDistribution limit;  // {ES_p w.p. 1-p, lower ES_p w.p. p}
    std::vector<CollapseStep> trace;
    int iterations = 0;
};

/// Repeatedly replaces the law by (1-p) T(G) + p T(H), where G and H are the
/// laws of the quantile function restricted to (p,1) and (0,p) and T is the
/// antithetic midpoint transform. Each step keeps ES_p, lower ES_p and the mean
/// while at least halving the width of both parts, so the iteration ends once
/// both widths drop below eps.
///
/// T(G) stays inside the support of G and T(H) inside that of H, so the parts
/// of the next iterate are exactly T(G) and T(H); they are carried separately
/// rather than re-split from the mixture.
inline CollapseResult collapse(const DiscreteDistribution& d, double p, double eps, int max_iterations = 4096) {
    require_level(p);
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    DiscreteDistribution upper = restrict_quantiles(d, p, 1.0);
    DiscreteDistribution lower = restrict_quantiles(d, 0.0, p);
    auto assemble = [p](const DiscreteDistribution& up, const DiscreteDistribution& lo) {
        const std::pair<double, DiscreteDistribution> parts[] = {{1.0 - p, up}, {p, lo}};
        return DiscreteDistribution::mixture(parts);
    };
    const double es = expected_shortfall(d, p);
    const double les = lower_expected_shortfall(d, p);
    const std::pair<double, DiscreteDistribution> limit_parts[] = {
        {1.0 - p, DiscreteDistribution::constant(es)}, {p, DiscreteDistribution::constant(les)}};

    CollapseResult result{d, DiscreteDistribution::mixture(limit_parts), {}, 0};
    for (int it = 0;; ++it) {
        DiscreteDistribution z = it == 0 ? d : assemble(upper, lower);
        result.trace.push_back({it, expected_shortfall(z, p), lower_expected_shortfall(z, p), z.mean(),
                                range_width(upper), range_width(lower), z.size()});
        if (range_width(upper) < eps && range_width(lower) < eps) {
            result.terminal = std::move(z);
            result.iterations = it;
            return result;
        }
        if (it >= max_iterations) throw SolverError("collapse did not reach the requested width");
        upper = antithetic_midpoint(upper);
        lower = antithetic_midpoint(lower);
    }
}

}  // namespace concentra
