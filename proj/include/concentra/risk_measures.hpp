#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>

#include "concentra/distribution.hpp"

namespace concentra {

/// VaR_p: the left p-quantile.
inline double value_at_risk(const DiscreteDistribution& d, double p) { return quantile(d, p); }

/// ES_p: average of the quantile function over (p, 1). An atom straddling
/// level p contributes only its share above p.
inline double expected_shortfall(const DiscreteDistribution& d, double p) {
    require_level(p);
    return quantile_integral(d, p, 1.0) / (1.0 - p);
}

/// Lower ES: average of the quantile function over (0, p).
inline double lower_expected_shortfall(const DiscreteDistribution& d, double p) {
    require_level(p);
    return quantile_integral(d, 0.0, p) / p;
}

struct ShortfallMinimum {
    double value = 0.0;
    double minimizer = 0.0;
};

/// min over t of t + E[(X - t)_+] / (1 - p). The objective is piecewise linear
/// in t with kinks at the atoms and is minimized at the left p-quantile.
inline ShortfallMinimum es_minimization(const DiscreteDistribution& d, double p) {
    const double t = value_at_risk(d, p);
    double excess = 0.0;
    for (const auto& a : d.atoms()) {
        if (a.value > t) excess += a.prob * (a.value - t);
    }
    return {t + excess / (1.0 - p), t};
}

/// Points on which a deviation transform g is certified: `points` evenly
/// spaced nodes on [0, 2 * range].
struct ProbeGrid {
    double range = 1.0;
    std::size_t points = 512;
};

/// A law-invariant risk functional from the ES/mean family.
class RiskFunctional {
public:
    enum class Kind {
        ValueAtRisk,
        ExpectedShortfall,
        LowerExpectedShortfall,
        DeviationTransform,  // g(ES_p - E) + E
        EsMeanTransform,     // f(ES_p, E)
        Mean,
        CoherentMix,         // alpha ES_p + (1 - alpha) E
    };

    using Transform = std::function<double(double)>;
    using Bivariate = std::function<double(double es, double mean)>;

    static RiskFunctional value_at_risk(double p) { return RiskFunctional(Kind::ValueAtRisk, p); }
    static RiskFunctional expected_shortfall(double p) { return RiskFunctional(Kind::ExpectedShortfall, p); }
    static RiskFunctional lower_expected_shortfall(double p) {
        return RiskFunctional(Kind::LowerExpectedShortfall, p);
    }
    static RiskFunctional mean() { return RiskFunctional(Kind::Mean, 0.5); }

    static RiskFunctional coherent_mix(double p, double alpha) {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("mix weight must lie in [0,1]");
        RiskFunctional rf(Kind::CoherentMix, p);
        rf.alpha_ = alpha;
        return rf;
    }

    /// g must satisfy g(0) = 0, be nondecreasing and 1-Lipschitz; these are
    /// certified on the probe grid unless `certify` is false (used to plant
    /// deliberately invalid transforms for harness testing).
    static RiskFunctional deviation_transform(double p, Transform g, ProbeGrid grid = {}, bool certify = true) {
        if (!g) throw InputError("deviation transform needs a function");
        if (certify) certify_transform(g, grid);
        RiskFunctional rf(Kind::DeviationTransform, p);
        rf.g_ = std::move(g);
        return rf;
    }

    /// f is evaluated on the half-plane es >= mean only.
    static RiskFunctional es_mean_transform(double p, Bivariate f) {
        if (!f) throw InputError("es/mean transform needs a function");
        RiskFunctional rf(Kind::EsMeanTransform, p);
        rf.f_ = std::move(f);
        return rf;
    }

    Kind kind() const { return kind_; }
    double level() const { return p_; }
    double alpha() const { return alpha_; }

    double operator()(const DiscreteDistribution& d) const {
        switch (kind_) {
            case Kind::ValueAtRisk: return concentra::value_at_risk(d, p_);
            case Kind::ExpectedShortfall: return concentra::expected_shortfall(d, p_);
            case Kind::LowerExpectedShortfall: return concentra::lower_expected_shortfall(d, p_);
            case Kind::Mean: return d.mean();
            case Kind::CoherentMix:
                return alpha_ * concentra::expected_shortfall(d, p_) + (1.0 - alpha_) * d.mean();
            case Kind::DeviationTransform: {
                const double mu = d.mean();
                const double dev = std::max(0.0, concentra::expected_shortfall(d, p_) - mu);
                return g_(dev) + mu;
            }
            case Kind::EsMeanTransform: {
                const double mu = d.mean();
                return f_(std::max(concentra::expected_shortfall(d, p_), mu), mu);
            }
        }
        return 0.0;
    }

    std::string name() const {
        std::ostringstream os;
        switch (kind_) {
            case Kind::ValueAtRisk: os << "VaR(" << p_ << ")"; break;
            case Kind::ExpectedShortfall: os << "ES(" << p_ << ")"; break;
            case Kind::LowerExpectedShortfall: os << "LowerES(" << p_ << ")"; break;
            case Kind::Mean: os << "Mean"; break;
            case Kind::CoherentMix: os << "Mix(" << p_ << "," << alpha_ << ")"; break;
            case Kind::DeviationTransform: os << "DeviationTransform(" << p_ << ")"; break;
            case Kind::EsMeanTransform: os << "EsMeanTransform(" << p_ << ")"; break;
        }
        return os.str();
    }

    /// Throws DomainError naming the first probe-grid violation.
    static void certify_transform(const Transform& g, const ProbeGrid& grid) {
        if (grid.points < 2 || !(grid.range > 0.0)) throw InputError("probe grid needs >= 2 points and range > 0");
        constexpr double kRel = 1e-9;
        const double g0 = g(0.0);
        if (std::abs(g0) > kRel) throw DomainError("deviation transform needs g(0) = 0");
        const double hi = 2.0 * grid.range;
        double x_prev = 0.0;
        double g_prev = g0;
        for (std::size_t k = 1; k < grid.points; ++k) {
            const double x = hi * static_cast<double>(k) / static_cast<double>(grid.points - 1);
            const double gx = g(x);
            const double slack = kRel * (1.0 + std::abs(gx) + std::abs(g_prev));
            const double dx = x - x_prev;
            if (gx < g_prev - slack) {
                throw DomainError("deviation transform decreases on [" + std::to_string(x_prev) + ", " +
                                  std::to_string(x) + "]");
            }
            if (gx - g_prev > dx * (1.0 + kRel) + slack) {
                throw DomainError("deviation transform violates the 1-Lipschitz bound on [" +
                                  std::to_string(x_prev) + ", " + std::to_string(x) + "]");
            }
            x_prev = x;
            g_prev = gx;
        }
    }

private:
    RiskFunctional(Kind kind, double p) : kind_(kind), p_(p) { require_level(p); }

    Kind kind_;
    double p_;
    double alpha_ = 1.0;
    Transform g_;
    Bivariate f_;
};

inline double evaluate(const RiskFunctional& rf, const DiscreteDistribution& d) { return rf(d); }

}  // namespace concentra
