#pragma once

// Dense two-phase tableau simplex with Bland's anti-cycling rule. Intended for
// small problems (tens of variables); every variable is nonnegative.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "concentra/core.hpp"

namespace concentra {

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearConstraint {
    std::vector<double> coeffs;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

/// minimize objective^T x subject to rows, x >= 0.
struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<LinearConstraint> rows;

    void add(std::vector<double> coeffs, Relation rel, double rhs) {
        if (coeffs.size() != num_vars) throw InputError("constraint has wrong number of coefficients");
        rows.push_back({std::move(coeffs), rel, rhs});
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    std::size_t iterations = 0;
};

struct SimplexOptions {
    double pivot_eps = 1e-9;
    std::size_t max_iterations = 100000;
};

namespace simplex_detail {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * (cols + 1), 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double rhs(std::size_t r) const { return at(r, cols_); }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
    }

    void drop_row(std::size_t r) {
        a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r * (cols_ + 1)),
                 a_.begin() + static_cast<std::ptrdiff_t>((r + 1) * (cols_ + 1)));
        --rows_;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> a_;
};

enum class Outcome { Optimal, Unbounded };

// Minimizes cost^T x over the tableau's columns [0, active) starting from the
// current basis. Entering column: lowest index with negative reduced cost.
// Leaving row: minimum ratio, ties to the lowest basic variable index.
inline Outcome optimize(Tableau& t, std::vector<std::size_t>& basis, const std::vector<double>& cost,
                        std::size_t active, const SimplexOptions& opt, std::size_t& iterations) {
    const std::size_t m = t.rows();
    while (true) {
        if (++iterations > opt.max_iterations) throw SolverError("simplex iteration limit reached");
        std::size_t enter = active;
        for (std::size_t j = 0; j < active; ++j) {
            double reduced = cost[j];
            for (std::size_t r = 0; r < m; ++r) reduced -= cost[basis[r]] * t.at(r, j);
            if (reduced < -opt.pivot_eps) {
                enter = j;
                break;
            }
        }
        if (enter == active) return Outcome::Optimal;
        std::size_t leave = m;
        double best = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double a = t.at(r, enter);
            if (a <= opt.pivot_eps) continue;
            const double ratio = t.rhs(r) / a;
            if (leave == m || ratio < best - 1e-12 ||
                (ratio <= best + 1e-12 && basis[r] < basis[leave])) {
                leave = r;
                best = ratio;
            }
        }
        if (leave == m) return Outcome::Unbounded;
        t.pivot(leave, enter);
        basis[leave] = enter;
    }
}

}  // namespace simplex_detail

inline LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {}) {
    using simplex_detail::Outcome;
    const std::size_t n = lp.num_vars;
    if (lp.objective.size() != n) throw InputError("objective has wrong length");
    const std::size_t m = lp.rows.size();

    // Column layout: originals, one slack/surplus per inequality, one artificial per row.
    std::size_t n_slack = 0;
    for (const auto& row : lp.rows) {
        if (row.coeffs.size() != n) throw InputError("constraint has wrong number of coefficients");
        if (row.relation != Relation::Equal) ++n_slack;
    }
    const std::size_t first_art = n + n_slack;
    const std::size_t cols = first_art + m;
    simplex_detail::Tableau t(m, cols);
    std::vector<std::size_t> basis(m);
    std::size_t slack = n;
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = lp.rows[r];
        const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t.at(r, j) = sign * row.coeffs[j];
        if (row.relation != Relation::Equal) {
            t.at(r, slack++) = sign * (row.relation == Relation::LessEqual ? 1.0 : -1.0);
        }
        t.at(r, first_art + r) = 1.0;
        t.rhs(r) = sign * row.rhs;
        basis[r] = first_art + r;
    }

    LpSolution sol;
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = first_art; j < cols; ++j) phase1[j] = 1.0;
    simplex_detail::optimize(t, basis, phase1, first_art, opt, sol.iterations);

    double infeasibility = 0.0;
    double scale = 1.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        if (basis[r] >= first_art) infeasibility += t.rhs(r);
    }
    for (const auto& row : lp.rows) scale = std::max(scale, std::abs(row.rhs));
    if (infeasibility > 1e-9 * scale) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    // Drive remaining (zero-level) artificials out of the basis; rows with no
    // usable pivot are redundant and dropped.
    for (std::size_t r = 0; r < t.rows();) {
        if (basis[r] < first_art) {
            ++r;
            continue;
        }
        std::size_t pc = first_art;
        for (std::size_t j = 0; j < first_art; ++j) {
            if (std::abs(t.at(r, j)) > opt.pivot_eps) {
                pc = j;
                break;
            }
        }
        if (pc == first_art) {
            t.drop_row(r);
            basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
            continue;
        }
        t.pivot(r, pc);
        basis[r] = pc;
        ++r;
    }

    std::vector<double> cost(cols, 0.0);
    std::copy(lp.objective.begin(), lp.objective.end(), cost.begin());
    if (simplex_detail::optimize(t, basis, cost, first_art, opt, sol.iterations) == Outcome::Unbounded) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }
    sol.status = LpStatus::Optimal;
    sol.x.assign(n, 0.0);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        if (basis[r] < n) sol.x[basis[r]] = std::max(0.0, t.rhs(r));
    }
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];
    return sol;
}

}  // namespace concentra
