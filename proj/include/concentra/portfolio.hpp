#pragma once

// Mean-ES portfolio selection on a scenario set through the linear program
//   min  t + sum_s w_s z_s / (1 - p)   s.t.  z_s >= a^T x_s - t,  z_s >= 0,
// with either a return floor (MinEsGivenReturn) or, swapping the roles, a
// cap on the ES expression while maximizing return (MaxReturnGivenEs).
// Returns are negative losses: return(a) = E[-a^T X].

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "concentra/axiom_harness.hpp"
#include "concentra/simplex.hpp"

namespace concentra {

struct FeasibleSet {
    enum class Kind { Simplex, Box, Linear };
    Kind kind = Kind::Simplex;
    std::vector<double> lo, hi;            // Box
    std::vector<std::vector<double>> G;    // Linear: G a <= h
    std::vector<double> h;

    static FeasibleSet simplex() { return {}; }
    static FeasibleSet box(std::vector<double> lo, std::vector<double> hi) {
        FeasibleSet f;
        f.kind = Kind::Box;
        f.lo = std::move(lo);
        f.hi = std::move(hi);
        return f;
    }
    static FeasibleSet linear(std::vector<std::vector<double>> G, std::vector<double> h) {
        FeasibleSet f;
        f.kind = Kind::Linear;
        f.G = std::move(G);
        f.h = std::move(h);
        return f;
    }
};

enum class PortfolioMode { MinEsGivenReturn, MaxReturnGivenEs };

struct PortfolioProblem {
    ScenarioSet scenarios;
    double p = 0.9;
    FeasibleSet feasible;
    PortfolioMode mode = PortfolioMode::MinEsGivenReturn;
    double target = 0.0;  // return floor u, or ES cap r
};

struct PortfolioSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> weights;
    double es_value = 0.0;     // ES_p of a^T X recomputed from the scenarios
    double mean_return = 0.0;  // E[-a^T X]
    double lp_value = 0.0;     // t + sum w z / (1-p) at the LP solution
};

namespace portfolio_detail {

// Variable layout: asset block (k, or 2k split as y+ - y- for Linear), t+, t-, z_1..z_m.
struct Layout {
    std::size_t k, m, asset_vars, t_pos, z0, total;
    bool split;
};

inline Layout layout(const PortfolioProblem& prob) {
    const std::size_t k = prob.scenarios.positions();
    const std::size_t m = prob.scenarios.scenarios();
    const bool split = prob.feasible.kind == FeasibleSet::Kind::Linear;
    const std::size_t av = split ? 2 * k : k;
    return {k, m, av, av, av + 2, av + 2 + m, split};
}

inline std::vector<double> asset_offset(const PortfolioProblem& prob) {
    const std::size_t k = prob.scenarios.positions();
    if (prob.feasible.kind == FeasibleSet::Kind::Box) return prob.feasible.lo;
    return std::vector<double>(k, 0.0);
}

inline void validate(const PortfolioProblem& prob) {
    require_level(prob.p);
    const std::size_t k = prob.scenarios.positions();
    const auto& f = prob.feasible;
    if (f.kind == FeasibleSet::Kind::Box) {
        if (f.lo.size() != k || f.hi.size() != k) throw InputError("box bounds need one entry per asset");
        for (std::size_t j = 0; j < k; ++j) {
            if (!(f.lo[j] <= f.hi[j])) throw InputError("box bound lo > hi for asset " + std::to_string(j + 1));
        }
    } else if (f.kind == FeasibleSet::Kind::Linear) {
        if (f.G.size() != f.h.size() || f.G.empty()) throw InputError("linear constraints need matching G and h");
        for (const auto& row : f.G) {
            if (row.size() != k) throw InputError("constraint row has wrong number of asset coefficients");
        }
    }
}

// Coefficients of a^T v in the LP variables, plus the constant part.
inline std::pair<std::vector<double>, double> linear_in_assets(const PortfolioProblem& prob, const Layout& L,
                                                               std::span<const double> v) {
    std::vector<double> c(L.total, 0.0);
    const auto off = asset_offset(prob);
    double constant = 0.0;
    for (std::size_t j = 0; j < L.k; ++j) {
        c[j] = v[j];
        if (L.split) c[L.k + j] = -v[j];
        constant += off[j] * v[j];
    }
    return {c, constant};
}

inline void add_feasible_set(LinearProgram& lp, const PortfolioProblem& prob, const Layout& L) {
    const auto& f = prob.feasible;
    switch (f.kind) {
        case FeasibleSet::Kind::Simplex: {
            std::vector<double> row(L.total, 0.0);
            for (std::size_t j = 0; j < L.k; ++j) row[j] = 1.0;
            lp.add(std::move(row), Relation::Equal, 1.0);
            break;
        }
        case FeasibleSet::Kind::Box:
            for (std::size_t j = 0; j < L.k; ++j) {
                std::vector<double> row(L.total, 0.0);
                row[j] = 1.0;
                lp.add(std::move(row), Relation::LessEqual, f.hi[j] - f.lo[j]);
            }
            break;
        case FeasibleSet::Kind::Linear:
            for (std::size_t r = 0; r < f.G.size(); ++r) {
                auto [row, constant] = linear_in_assets(prob, L, f.G[r]);
                lp.add(std::move(row), Relation::LessEqual, f.h[r] - constant);
            }
            break;
    }
}

inline std::vector<double> asset_means(const ScenarioSet& s) {
    std::vector<double> mu(s.positions(), 0.0);
    for (std::size_t i = 0; i < s.scenarios(); ++i)
        for (std::size_t j = 0; j < s.positions(); ++j) mu[j] += s.weight(i) * s.loss(i, j);
    return mu;
}

// ES expression coefficients: t + sum w z / (1-p).
inline std::vector<double> es_expression(const PortfolioProblem& prob, const Layout& L) {
    std::vector<double> c(L.total, 0.0);
    c[L.t_pos] = 1.0;
    c[L.t_pos + 1] = -1.0;
    for (std::size_t s = 0; s < L.m; ++s) c[L.z0 + s] = prob.scenarios.weight(s) / (1.0 - prob.p);
    return c;
}

inline void add_shortfall_rows(LinearProgram& lp, const PortfolioProblem& prob, const Layout& L) {
    // z_s - a^T x_s + t >= 0
    std::vector<double> xs(L.k);
    for (std::size_t s = 0; s < L.m; ++s) {
        for (std::size_t j = 0; j < L.k; ++j) xs[j] = prob.scenarios.loss(s, j);
        auto [row, constant] = linear_in_assets(prob, L, xs);
        for (double& v : row) v = -v;
        row[L.t_pos] = 1.0;
        row[L.t_pos + 1] = -1.0;
        row[L.z0 + s] = 1.0;
        lp.add(std::move(row), Relation::GreaterEqual, constant);
    }
}

inline std::vector<double> extract_weights(const PortfolioProblem& prob, const Layout& L, const std::vector<double>& x) {
    auto a = asset_offset(prob);
    for (std::size_t j = 0; j < L.k; ++j) {
        a[j] += x[j];
        if (L.split) a[j] -= x[L.k + j];
    }
    return a;
}

}  // namespace portfolio_detail

/// ES_p and mean return of fixed weights.
inline std::pair<double, double> evaluate_weights(const ScenarioSet& s, const std::vector<double>& a, double p) {
    const auto law = s.law(s.combine(a));
    return {expected_shortfall(law, p), -law.mean()};
}

inline PortfolioSolution solve(const PortfolioProblem& prob) {
    using namespace portfolio_detail;
    validate(prob);
    const Layout L = layout(prob);
    LinearProgram lp;
    lp.num_vars = L.total;
    add_feasible_set(lp, prob, L);
    add_shortfall_rows(lp, prob, L);
    const auto mu = asset_means(prob.scenarios);
    auto [loss_row, loss_const] = linear_in_assets(prob, L, mu);  // E[a^T X] = row . y + const
    const auto es_row = es_expression(prob, L);
    if (prob.mode == PortfolioMode::MinEsGivenReturn) {
        // -E[a^T X] >= u  <=>  row . y <= -u - const
        lp.add(loss_row, Relation::LessEqual, -prob.target - loss_const);
        lp.objective = es_row;
    } else {
        lp.add(es_row, Relation::LessEqual, prob.target);
        lp.objective = loss_row;
    }
    const LpSolution lps = solve_lp(lp);
    PortfolioSolution out;
    out.status = lps.status;
    if (lps.status != LpStatus::Optimal) return out;
    out.weights = extract_weights(prob, L, lps.x);
    std::tie(out.es_value, out.mean_return) = evaluate_weights(prob.scenarios, out.weights, prob.p);
    out.lp_value = 0.0;
    for (std::size_t i = 0; i < L.total; ++i) out.lp_value += es_row[i] * lps.x[i];
    return out;
}

/// Extreme attainable returns over the feasible set: (min, max), or nullopt
/// when the feasible set is empty or unbounded in the return direction.
inline std::optional<std::pair<double, double>> return_range(const PortfolioProblem& prob) {
    using namespace portfolio_detail;
    validate(prob);
    const Layout L = layout(prob);
    const auto mu = asset_means(prob.scenarios);
    auto [loss_row, loss_const] = linear_in_assets(prob, L, mu);
    auto extreme = [&](double sign) -> std::optional<double> {
        LinearProgram lp;
        lp.num_vars = L.total;
        add_feasible_set(lp, prob, L);
        lp.objective = loss_row;
        for (double& v : lp.objective) v *= sign;
        const auto sol = solve_lp(lp);
        if (sol.status != LpStatus::Optimal) return std::nullopt;
        return -(sign * sol.objective + loss_const);
    };
    const auto hi = extreme(1.0);   // least expected loss
    const auto lo = extreme(-1.0);  // most expected loss
    if (!hi || !lo) return std::nullopt;
    return std::make_pair(*lo, *hi);
}

struct FrontierPoint {
    double target = 0.0;
    PortfolioSolution solution;
};

/// Sweeps n_points evenly spaced targets. In MinEsGivenReturn mode the targets
/// run over the attainable return range; in MaxReturnGivenEs mode over the
/// ES values between the minimum-ES portfolio and the minimum-ES portfolio at
/// the largest attainable return. Throws SolverError if the range itself
/// cannot be established.
inline std::vector<FrontierPoint> frontier(const PortfolioProblem& prob, std::size_t n_points,
                                           unsigned threads = default_threads()) {
    if (n_points < 2) throw InputError("frontier needs at least two points");
    const auto range = return_range(prob);
    if (!range) throw SolverError("attainable return range is empty or unbounded");
    double lo = range->first;
    double hi = range->second;
    if (prob.mode == PortfolioMode::MaxReturnGivenEs) {
        PortfolioProblem at = prob;
        at.mode = PortfolioMode::MinEsGivenReturn;
        at.target = range->first;
        const auto low = solve(at);
        at.target = range->second;
        const auto high = solve(at);
        if (low.status != LpStatus::Optimal || high.status != LpStatus::Optimal) {
            throw SolverError("could not bracket the ES range of the frontier");
        }
        lo = low.lp_value;
        hi = high.lp_value;
    }
    std::vector<FrontierPoint> points(n_points);
    parallel_for(n_points, threads, [&](std::size_t i) {
        const double f = static_cast<double>(i) / static_cast<double>(n_points - 1);
        PortfolioProblem pt = prob;
        pt.target = i + 1 == n_points ? hi : lo + f * (hi - lo);
        points[i] = {pt.target, solve(pt)};
    });
    return points;
}

/// Objective on a scenario column: losses with their probabilities.
using ScenarioObjective =
    std::function<ExtendedReal(std::span<const double> losses, std::span<const double> weights)>;

struct MeanEsReport {
    bool passed = true;
    HarnessReport monotonicity;
    HarnessReport concentration_aversion;
};

/// Evidence that minimizing `objective` is a mean-ES optimization: runs the
/// monotonicity and p-concentration-aversion harnesses against it. Each law
/// the harness builds is handed over as its atoms and probabilities.
inline MeanEsReport objective_is_mean_es(const ScenarioObjective& objective, double p, std::size_t trials,
                                         std::uint64_t seed, const HarnessOptions& options = {}) {
    const LawFunctional law = [&objective](const DiscreteDistribution& d) {
        std::vector<double> values, probs;
        for (const auto& a : d.atoms()) {
            values.push_back(a.value);
            probs.push_back(a.prob);
        }
        return objective(values, probs);
    };
    MeanEsReport r;
    r.monotonicity = axiom_harness(law, p, Axiom::Monotonicity, trials, seed, options);
    r.concentration_aversion = axiom_harness(law, p, Axiom::ConcentrationAversion, trials, mix_seed(seed, 1), options);
    r.passed = r.monotonicity.passed && r.concentration_aversion.passed;
    return r;
}

}  // namespace concentra
