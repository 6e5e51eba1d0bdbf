#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gluevar/gluevar.hpp>

namespace gluevar::test {

inline GlueVaRParams random_params(std::mt19937_64& rng, double equal_prob = 0.05) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        double a = u(rng), b = u(rng), h1 = u(rng), h2 = u(rng);
        if (a > b) std::swap(a, b);
        if (h1 > h2) std::swap(h1, h2);
        if (u(rng) < equal_prob) {
            b = a;
            h2 = h1;
        }
        GlueVaRParams g{a, b, h1, h2};
        if (a > 1e-3 && b < 1.0 - 1e-3 && (a == b || b - a > 1e-3)) return g;
    }
}

// Choquet integral from the survival function:
// ∫_0^∞ h(S(x)) dx - ∫_{-∞}^0 (1 - h(S(x))) dx for a finitely supported law.
inline double survival_choquet(const PiecewiseLinearDistortion& h, const std::vector<double>& x,
                               const std::vector<double>& mass) {
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs, surv;  // surv[k] = P(X > xs[k])
    double above = 1.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        above -= mass[idx[k]];
        xs.push_back(x[idx[k]]);
        surv.push_back(std::max(0.0, above));
    }
    surv.back() = 0.0;
    auto hs = [&](double s) { return h(std::clamp(s, 0.0, 1.0)); };
    double total = 0.0;
    // S(x) = 1 for x < xs[0], surv[k] on [xs[k], xs[k+1]), 0 beyond.
    auto integrate = [&](double lo, double hi, double s) {
        if (hi <= lo) return;
        double top = std::min(hi, std::max(lo, 0.0));
        if (top > lo) total -= (top - lo) * (1.0 - hs(s));  // negative half-line
        double bot = std::max(lo, std::min(hi, 0.0));
        if (hi > bot) total += (hi - bot) * hs(s);          // positive half-line
    };
    double left = std::min(0.0, xs.front());
    integrate(left, xs.front(), 1.0);
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) integrate(xs[k], xs[k + 1], surv[k]);
    double right = std::max(0.0, xs.back());
    integrate(xs.back(), right, 0.0);
    return total;
}

inline double survival_choquet(const PiecewiseLinearDistortion& h, const StepQuantile& q) {
    std::vector<double> x, m;
    for (std::size_t i = 0; i < q.size(); ++i) {
        x.push_back(q.atoms()[i].value);
        m.push_back(q.mass(i));
    }
    return survival_choquet(h, x, m);
}

// Random piecewise-linear distortion with a few kinks and jumps.
inline PiecewiseLinearDistortion random_distortion(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t k = 1 + rng() % 6;
    std::vector<double> ps, vs;
    for (std::size_t i = 0; i < k; ++i) {
        ps.push_back(u(rng));
        vs.push_back(u(rng));
    }
    std::sort(ps.begin(), ps.end());
    std::sort(vs.begin(), vs.end());
    std::vector<Point> pts{{Prob::of(0.0), Prob::of(0.0)}};
    for (std::size_t i = 0; i < k; ++i) {
        if (ps[i] <= pts.back().p.value) continue;
        pts.push_back({Prob::of(ps[i]), Prob::of(vs[i])});
        if (u(rng) < 0.3) {
            double up = vs[i] + (1.0 - vs[i]) * u(rng) * 0.5;
            if (i + 1 < k) up = std::min(up, vs[i + 1]);
            pts.push_back({Prob::of(ps[i]), Prob::of(up)});
        }
    }
    pts.push_back({Prob::of(1.0), Prob::of(1.0)});
    return PiecewiseLinearDistortion(pts, u(rng) < 0.5 ? Side::right : Side::left);
}

// Random finitely supported law (values unsorted draws, positive masses).
inline StepQuantile random_quantile(std::mt19937_64& rng, std::size_t max_atoms = 8) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 2.0);
    std::size_t k = 1 + rng() % max_atoms;
    std::vector<double> x(k), m(k);
    for (auto& v : x) v = n(rng);
    for (auto& v : m) v = 0.05 + u(rng);
    std::sort(x.begin(), x.end());
    return StepQuantile::from_masses(x, m);
}

// Alternative closed-form three-point law for W-G-ii, transcribed as published.
inline StepQuantile transcribed_three_point_witness(const GlueVaRParams& g, const MomentSpec& s) {
    const double a = g.alpha, b = g.beta, h1 = g.h1;
    const double eta = a + std::pow(1 - h1 - b + a, 2) / (b - a) + std::pow(h1 - 1 + b, 2) / (1 - b);
    const double den = (1 - h1) * eta + b * (b - a);
    double x1 = s.mu - s.sigma * std::sqrt((b - a) * (1 - b) / den);
    double x2 = s.mu + s.sigma * (1 - h1 - b + a) / std::sqrt(b - a) * std::sqrt((1 - b) / den);
    double x3 = s.mu + s.sigma * (h1 - 1 + b) / std::sqrt(1 - b) * std::sqrt((b - a) / den);
    return StepQuantile({{a, x1}, {b, x2}, {1.0, x3}});
}

// Exhaustive isotonic projection: the projection is a partition into
// contiguous blocks at their means; try every partition.
inline std::vector<double> brute_isotonic(const std::vector<double>& w) {
    const std::size_t n = w.size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> arg;
    for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
        std::vector<double> fit(n);
        std::size_t start = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool cut = i + 1 == n || (mask >> i) & 1;
            if (!cut) continue;
            double s = 0;
            for (std::size_t j = start; j <= i; ++j) s += w[j];
            for (std::size_t j = start; j <= i; ++j) fit[j] = s / static_cast<double>(i + 1 - start);
            start = i + 1;
        }
        if (!std::is_sorted(fit.begin(), fit.end())) continue;
        double sse = 0;
        for (std::size_t i = 0; i < n; ++i) sse += (fit[i] - w[i]) * (fit[i] - w[i]);
        if (sse < best) {
            best = sse;
            arg = fit;
        }
    }
    return arg;
}

inline bool all_cases_seen(const std::vector<CaseLabel>& seen, std::initializer_list<CaseLabel> want) {
    for (CaseLabel c : want)
        if (std::find(seen.begin(), seen.end(), c) == seen.end()) return false;
    return true;
}

}  // namespace gluevar::test
