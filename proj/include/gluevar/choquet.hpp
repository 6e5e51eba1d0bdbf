#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "distortion.hpp"

namespace gluevar {

struct QuantileAtom {
    double level;  // cumulative probability at the right end of the atom's interval
    double value;
};

// Right-continuous quantile F^{-1+} of a finitely supported distribution:
// value x_i on [q_{i-1}, q_i), q_0 = 0, last level = 1.
class StepQuantile {
public:
    explicit StepQuantile(std::vector<QuantileAtom> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw parameter_error("quantile needs at least one atom");
        double prev = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (!std::isfinite(atoms_[i].value) || !std::isfinite(atoms_[i].level))
                throw parameter_error("quantile entries must be finite");
            if (!(atoms_[i].level > prev)) throw parameter_error("quantile levels must be strictly increasing");
            if (i > 0 && atoms_[i].value < atoms_[i - 1].value)
                throw parameter_error("quantile values must be nondecreasing");
            prev = atoms_[i].level;
        }
        if (atoms_.back().level != 1.0) throw parameter_error("last quantile level must be 1");
    }

    static StepQuantile degenerate(double x) { return StepQuantile({{1.0, x}}); }

    // values must be nondecreasing, masses positive; masses are renormalized
    // through their cumulative sum so that the last level is exactly 1.
    static StepQuantile from_masses(const std::vector<double>& values, const std::vector<double>& masses) {
        if (values.size() != masses.size()) throw parameter_error("values and masses differ in length");
        double total = 0.0;
        for (double m : masses) {
            if (!(m > 0.0)) throw parameter_error("masses must be positive");
            total += m;
        }
        std::vector<QuantileAtom> atoms;
        double cum = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            cum += masses[i];
            atoms.push_back({i + 1 == values.size() ? 1.0 : cum / total, values[i]});
        }
        return StepQuantile(std::move(atoms));
    }

    const std::vector<QuantileAtom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double lower_level(std::size_t i) const { return i == 0 ? 0.0 : atoms_[i - 1].level; }
    double mass(std::size_t i) const { return atoms_[i].level - lower_level(i); }

    // F^{-1+}(p)
    double quantile(double p) const {
        for (const auto& a : atoms_)
            if (p < a.level) return a.value;
        return atoms_.back().value;
    }

private:
    std::vector<QuantileAtom> atoms_;
};

struct MomentSpec {
    double mu = 0.0;
    double sigma = 1.0;
    DistClass cls = DistClass::general;

    void validate() const {
        if (!std::isfinite(mu) || !std::isfinite(sigma)) throw parameter_error("moments must be finite");
        if (sigma < 0.0) throw parameter_error("sigma must be nonnegative");
    }
};

inline double choquet_eval(const PiecewiseLinearDistortion& d, const StepQuantile& q) {
    double total = 0.0;
    double upper = 1.0;  // d(1 - q_0)
    for (const auto& a : q.atoms()) {
        double lower = d(1.0 - a.level);
        total += a.value * (upper - lower);
        upper = lower;
    }
    return total;
}

struct Moments {
    double mean;
    double variance;
};

inline Moments moments(const StepQuantile& q) {
    double mean = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) mean += q.mass(i) * q.atoms()[i].value;
    double var = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        double dx = q.atoms()[i].value - mean;
        var += q.mass(i) * dx * dx;
    }
    return {mean, var};
}

inline bool is_symmetric(const StepQuantile& q, double tol) {
    double center = 2.0 * moments(q).mean;
    std::vector<double> cuts{0.0, 1.0};
    for (const auto& a : q.atoms()) {
        cuts.push_back(a.level);
        cuts.push_back(1.0 - a.level);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] <= tol) continue;
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        if (std::abs(q.quantile(mid) + q.quantile(1.0 - mid) - center) > tol) return false;
    }
    return true;
}

inline std::array<double, 3> gluevar_mixture_weights(const GlueVaRParams& g) {
    g.validate();
    if (!(g.alpha < g.beta)) throw degenerate_weights_error("mixture weights need alpha < beta");
    double k1 = (g.h2 - g.h1) / (g.beta - g.alpha);
    return {g.h1 - k1 * (1.0 - g.beta), k1 * (1.0 - g.alpha), 1.0 - g.h2};
}

inline double gluevar_mixture_eval(const GlueVaRParams& g, const StepQuantile& q) {
    auto w = gluevar_mixture_weights(g);
    return w[0] * choquet_eval(make_special(SpecialKind::tvar, g.beta), q) +
           w[1] * choquet_eval(make_special(SpecialKind::tvar, g.alpha), q) +
           w[2] * choquet_eval(make_special(SpecialKind::var, g.alpha), q);
}

}  // namespace gluevar
