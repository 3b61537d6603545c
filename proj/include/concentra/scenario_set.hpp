#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "concentra/distribution.hpp"

namespace concentra {

/// Joint loss outcomes: m weighted scenarios by k positions, stored row-major.
class ScenarioSet {
public:
    ScenarioSet(std::size_t scenarios, std::size_t positions, std::vector<double> losses,
                std::vector<double> weights, std::vector<std::string> labels = {})
        : m_(scenarios), k_(positions), losses_(std::move(losses)), weights_(std::move(weights)),
          labels_(std::move(labels)) {
        if (m_ == 0 || k_ == 0) throw InputError("scenario set needs m >= 1 and k >= 1");
        if (losses_.size() != m_ * k_) throw InputError("loss matrix has wrong size");
        if (weights_.size() != m_) throw InputError("need one weight per scenario");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w > 0.0) || !std::isfinite(w)) throw InputError("scenario weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > tol::kRenormalize) {
            throw InputError("scenario weights sum to " + std::to_string(total));
        }
        for (double& w : weights_) w /= total;
        for (double x : losses_) {
            if (!std::isfinite(x)) throw InputError("losses must be finite");
        }
        if (labels_.empty()) {
            for (std::size_t i = 0; i < k_; ++i) labels_.push_back("X" + std::to_string(i + 1));
        }
        if (labels_.size() != k_) throw InputError("need one label per position");
    }

    /// Equal-weight scenarios from column vectors of identical length.
    static ScenarioSet from_columns(const std::vector<std::vector<double>>& columns,
                                    std::vector<std::string> labels = {}) {
        if (columns.empty() || columns.front().empty()) throw InputError("empty scenario columns");
        const std::size_t m = columns.front().size();
        const std::size_t k = columns.size();
        std::vector<double> losses(m * k);
        for (std::size_t j = 0; j < k; ++j) {
            if (columns[j].size() != m) throw InputError("scenario columns differ in length");
            for (std::size_t s = 0; s < m; ++s) losses[s * k + j] = columns[j][s];
        }
        return ScenarioSet(m, k, std::move(losses), std::vector<double>(m, 1.0 / static_cast<double>(m)),
                           std::move(labels));
    }

    std::size_t scenarios() const { return m_; }
    std::size_t positions() const { return k_; }
    double loss(std::size_t s, std::size_t j) const { return losses_[s * k_ + j]; }
    double weight(std::size_t s) const { return weights_[s]; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& losses() const { return losses_; }
    const std::vector<std::string>& labels() const { return labels_; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> c(m_);
        for (std::size_t s = 0; s < m_; ++s) c[s] = loss(s, j);
        return c;
    }

    /// Per-scenario total loss across positions.
    std::vector<double> row_sums() const {
        std::vector<double> c(m_, 0.0);
        for (std::size_t s = 0; s < m_; ++s)
            for (std::size_t j = 0; j < k_; ++j) c[s] += loss(s, j);
        return c;
    }

    /// Per-scenario loss of the portfolio a^T x_s.
    std::vector<double> combine(const std::vector<double>& a) const {
        if (a.size() != k_) throw InputError("portfolio weight vector has wrong length");
        std::vector<double> c(m_, 0.0);
        for (std::size_t s = 0; s < m_; ++s)
            for (std::size_t j = 0; j < k_; ++j) c[s] += a[j] * loss(s, j);
        return c;
    }

    DiscreteDistribution marginal(std::size_t j) const { return law(column(j)); }
    DiscreteDistribution total() const { return law(row_sums()); }

    /// Law of an arbitrary per-scenario outcome under this set's weights.
    DiscreteDistribution law(const std::vector<double>& outcome) const {
        return DiscreteDistribution::weighted(outcome, weights_);
    }

    bool equal_weights() const {
        const double w = 1.0 / static_cast<double>(m_);
        for (double x : weights_)
            if (std::abs(x - w) > 1e-12) return false;
        return true;
    }

private:
    std::size_t m_;
    std::size_t k_;
    std::vector<double> losses_;
    std::vector<double> weights_;
    std::vector<std::string> labels_;
};

}  // namespace concentra
