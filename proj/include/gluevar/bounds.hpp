#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "choquet.hpp"
#include "distortion.hpp"

namespace gluevar {

enum class CaseLabel {
    generic,
    w_g_i, w_g_ii,
    w_s_i, w_s_ii, w_s_sub_half,
    b_g_i, b_g_ii, b_g_iii, b_g_iv,
    b_s_i, b_s_ii, b_s_iii, b_s_iv,
};

enum class Regime { none, alpha_at_least_half, beta_below_half, straddles_half };

inline const char* to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::generic: return "generic";
        case CaseLabel::w_g_i: return "W-G-i";
        case CaseLabel::w_g_ii: return "W-G-ii";
        case CaseLabel::w_s_i: return "W-S-i";
        case CaseLabel::w_s_ii: return "W-S-ii";
        case CaseLabel::w_s_sub_half: return "W-S-sub-half";
        case CaseLabel::b_g_i: return "B-G-i";
        case CaseLabel::b_g_ii: return "B-G-ii";
        case CaseLabel::b_g_iii: return "B-G-iii";
        case CaseLabel::b_g_iv: return "B-G-iv";
        case CaseLabel::b_s_i: return "B-S-i";
        case CaseLabel::b_s_ii: return "B-S-ii";
        case CaseLabel::b_s_iii: return "B-S-iii";
        case CaseLabel::b_s_iv: return "B-S-iv";
    }
    return "?";
}

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::none: return "none";
        case Regime::alpha_at_least_half: return "alpha>=1/2";
        case Regime::beta_below_half: return "beta<1/2";
        case Regime::straddles_half: return "alpha<1/2<=beta";
    }
    return "?";
}

struct CaseId {
    Direction direction = Direction::worst;
    DistClass cls = DistClass::general;
    CaseLabel label = CaseLabel::generic;
    Regime regime = Regime::none;

    friend bool operator==(const CaseId&, const CaseId&) = default;
};

inline Regime symmetric_regime(double alpha, double beta) {
    if (alpha >= 0.5) return Regime::alpha_at_least_half;
    if (beta < 0.5) return Regime::beta_below_half;
    return Regime::straddles_half;
}

struct ClosedFormIntermediates {
    SlopeTriple slopes;
    std::optional<std::array<double, 3>> weights;
    std::optional<double> eta, zeta, xi, omega, nu;
    std::optional<double> omega_as_printed, nu_as_printed;
    double lemma_integral = 0.0;  // squared L2 norm of the extremal quantile direction
};

enum class Attainment {
    witness,       // an attaining member of the class is reported
    any_member,    // every member of the class attains the bound
    not_attained,  // bound is sharp but only approached
    not_sharp,     // symmetric lemma bound exceeds the sharp symmetric bound
};

inline const char* to_string(Attainment a) {
    switch (a) {
        case Attainment::witness: return "witness";
        case Attainment::any_member: return "any_member";
        case Attainment::not_attained: return "not_attained";
        case Attainment::not_sharp: return "not_sharp";
    }
    return "?";
}

struct BoundResult {
    double value = 0.0;
    CaseId case_id;
    std::optional<StepQuantile> witness;
    bool attained_by_any = false;
    Attainment attainment = Attainment::not_attained;
    std::optional<StepQuantile> limit_witness;  // candidate that fails attainment
    double moment_residual = 0.0;
    double attainment_residual = 0.0;
    std::optional<double> sharp_value;  // symmetric class only
    ClosedFormIntermediates intermediates;

    bool bound_not_attained() const {
        return attainment == Attainment::not_attained || attainment == Attainment::not_sharp;
    }
};

inline constexpr double witness_tolerance = 1e-10;

namespace detail {

// Quantile direction a(q): the extremal quantile is mu + sigma * a(q) / sqrt(∫a²).
inline double norm_squared(const StepFunction& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.steps().size(); ++i) s += a.width(i) * a.steps()[i].value * a.steps()[i].value;
    return s;
}

inline StepFunction merged(std::vector<Step> steps) {
    std::vector<Step> out;
    for (const Step& s : steps) {
        if (!out.empty() && out.back().value == s.value) continue;
        out.push_back(s);
    }
    return StepFunction(std::move(out));
}

inline StepQuantile witness_from_direction(const StepFunction& a, double integral, const MomentSpec& spec) {
    double n = std::sqrt(integral);
    std::vector<QuantileAtom> atoms;
    for (std::size_t i = 0; i < a.steps().size(); ++i) {
        double x = spec.mu + spec.sigma * a.steps()[i].value / n;
        double level = a.end_of(i).value;
        if (!atoms.empty() && atoms.back().value == x) atoms.back().level = level;
        else atoms.push_back({level, x});
    }
    return StepQuantile(std::move(atoms));
}

inline StepFunction general_direction(const StepFunction& g, Direction dir) {
    std::vector<Step> steps;
    if (dir == Direction::worst) {
        for (const Step& s : g.steps()) steps.push_back({s.start, s.value - 1.0});
    } else {
        for (std::size_t j = g.steps().size(); j-- > 0;)
            steps.push_back({g.end_of(j).flipped(), 1.0 - g.steps()[j].value});
    }
    return merged(std::move(steps));
}

// delta(q) = g(q) - g(1-q) on the common refinement of g's breakpoints and
// their mirror images.
inline StepFunction antisymmetric_direction(const StepFunction& g) {
    std::vector<Prob> cuts{Prob::of(0.0), Prob::of(1.0)};
    for (const Step& s : g.steps()) {
        cuts.push_back(s.start);
        cuts.push_back(s.start.flipped());
    }
    std::sort(cuts.begin(), cuts.end(), [](const Prob& a, const Prob& b) { return a.value < b.value; });
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](const Prob& a, const Prob& b) { return a.value == b.value; }),
               cuts.end());
    std::vector<Step> steps;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double mid = 0.5 * (cuts[k].value + cuts[k + 1].value);
        steps.push_back({cuts[k], g.eval(mid) - g.eval(1.0 - mid)});
    }
    return merged(std::move(steps));
}

// S(u) = (f(u) + f(1-u) - 1) / 2 at the breakpoints of f and their mirrors,
// taking the smallest of the one-sided and actual values.
inline std::vector<Point> symmetrized_points(const PiecewiseLinearDistortion& f) {
    std::vector<Prob> us;
    for (const Point& q : f.points()) {
        us.push_back(q.p);
        us.push_back(q.p.flipped());
    }
    std::sort(us.begin(), us.end(), [](const Prob& a, const Prob& b) { return a.value < b.value; });
    us.erase(std::unique(us.begin(), us.end(), [](const Prob& a, const Prob& b) { return a.value == b.value; }),
             us.end());
    std::vector<Point> pts;
    for (const Prob& u : us) {
        double l = f.eval(u.value, Side::left) + f.eval(u.complement, Side::right);
        double a = f(u.value) + f(u.complement);
        double r = f.eval(u.value, Side::right) + f.eval(u.complement, Side::left);
        double s = 0.5 * (std::min({l, a, r}) - 1.0);
        pts.push_back({u, Prob::of(s)});
    }
    return pts;
}

inline StepFunction sharp_symmetric_direction(const PiecewiseLinearDistortion& d, Direction dir) {
    PiecewiseLinearDistortion f = dir == Direction::worst ? dual(d) : d;
    std::vector<Point> h = hull(symmetrized_points(f), true);
    return StepFunction(slopes(h));
}

inline bool attained_by_every_member(const PiecewiseLinearDistortion& d, DistClass cls) {
    return cls == DistClass::general ? is_identity(d) : same_function(d, dual(d));
}

inline double scale(const MomentSpec& spec) { return std::max({1.0, std::abs(spec.mu), spec.sigma}); }

// Fills attainment fields from a candidate extremal quantile.
inline void settle(BoundResult& r, const PiecewiseLinearDistortion& d, const MomentSpec& spec,
                   std::optional<StepQuantile> candidate) {
    if (spec.sigma == 0.0) {
        r.value = spec.mu;
        r.witness = StepQuantile::degenerate(spec.mu);
        r.attainment = Attainment::witness;
        return;
    }
    if (!candidate) {
        if (attained_by_every_member(d, spec.cls)) {
            r.attained_by_any = true;
            r.attainment = Attainment::any_member;
        } else {
            r.attainment = Attainment::not_attained;
        }
        return;
    }
    Moments m = moments(*candidate);
    r.moment_residual =
        std::max(std::abs(m.mean - spec.mu), std::abs(std::sqrt(m.variance) - spec.sigma));
    r.attainment_residual = std::abs(choquet_eval(d, *candidate) - r.value);
    double tol = witness_tolerance * scale(spec);
    bool ok = r.moment_residual <= tol && r.attainment_residual <= tol;
    if (ok && spec.cls == DistClass::symmetric) ok = is_symmetric(*candidate, 1e-9 * scale(spec));
    if (ok) {
        r.witness = std::move(candidate);
        r.attainment = Attainment::witness;
        return;
    }
    r.limit_witness = std::move(candidate);
    bool sharp = !r.sharp_value || std::abs(*r.sharp_value - r.value) <= tol;
    r.attainment = sharp ? Attainment::not_attained : Attainment::not_sharp;
}

inline double signed_bound(const MomentSpec& spec, Direction dir, double magnitude) {
    return dir == Direction::worst ? spec.mu + spec.sigma * magnitude : spec.mu - spec.sigma * magnitude;
}

}  // namespace detail

// Exact symmetric-class bound: the symmetrized distortion's convex envelope
// gives the extremal antisymmetric quantile direction directly.
inline BoundResult extreme_symmetric_sharp(const PiecewiseLinearDistortion& d, const MomentSpec& spec,
                                           Direction dir) {
    spec.validate();
    BoundResult r;
    r.case_id = {dir, DistClass::symmetric, CaseLabel::generic, Regime::none};
    StepFunction b = detail::sharp_symmetric_direction(d, dir);
    double integral = detail::norm_squared(b);
    r.intermediates.lemma_integral = integral;
    r.value = detail::signed_bound(spec, dir, std::sqrt(integral));
    r.sharp_value = r.value;
    MomentSpec sym = spec;
    sym.cls = DistClass::symmetric;
    std::optional<StepQuantile> cand;
    if (integral > 0.0) cand = detail::witness_from_direction(b, integral, sym);
    detail::settle(r, d, sym, std::move(cand));
    return r;
}

inline BoundResult extreme_generic(const PiecewiseLinearDistortion& d, const MomentSpec& spec, Direction dir) {
    spec.validate();
    BoundResult r;
    r.case_id = {dir, spec.cls, CaseLabel::generic, Regime::none};
    StepFunction g = right_derivative(convex_envelope(dir == Direction::worst ? dual(d) : d));
    StepFunction a = spec.cls == DistClass::general ? detail::general_direction(g, dir)
                                                    : detail::antisymmetric_direction(g);
    double integral = detail::norm_squared(a);
    r.intermediates.lemma_integral = integral;
    double magnitude = std::sqrt(integral);
    if (spec.cls == DistClass::symmetric) {
        magnitude *= 0.5;
        r.sharp_value = extreme_symmetric_sharp(d, spec, dir).value;
    }
    r.value = detail::signed_bound(spec, dir, magnitude);
    std::optional<StepQuantile> cand;
    if (integral > 0.0) cand = detail::witness_from_direction(a, integral, spec);
    detail::settle(r, d, spec, std::move(cand));
    return r;
}

inline CaseId classify_gluevar_case(const GlueVaRParams& g, Direction dir, DistClass cls) {
    g.validate();
    const double tol = slope_tie_tolerance;
    SlopeTriple s = g.slopes();
    CaseId c{dir, cls, CaseLabel::generic, Regime::none};
    if (cls == DistClass::symmetric) c.regime = symmetric_regime(g.alpha, g.beta);
    if (dir == Direction::worst) {
        bool first = !s.k1 || *s.k1 >= s.k2 - tol ||
                     (1.0 - g.h1) >= (g.beta - g.alpha) / (1.0 - g.alpha) - tol;
        if (cls == DistClass::general) c.label = first ? CaseLabel::w_g_i : CaseLabel::w_g_ii;
        else if (c.regime == Regime::beta_below_half) c.label = CaseLabel::w_s_sub_half;
        else c.label = first ? CaseLabel::w_s_i : CaseLabel::w_s_ii;
        return c;
    }
    int which;
    if (!s.k1 || s.k2 >= *s.k1 - tol) which = g.h2 >= 1.0 - g.alpha - tol ? 1 : 2;
    else if (s.k3 > *s.k1 + tol) which = 3;
    else if (std::abs(s.k3 - *s.k1) <= tol) which = 4;
    else which = s.k2 >= 1.0 - tol ? 1 : 4;
    static constexpr CaseLabel general[] = {CaseLabel::b_g_i, CaseLabel::b_g_ii, CaseLabel::b_g_iii,
                                            CaseLabel::b_g_iv};
    static constexpr CaseLabel symmetric[] = {CaseLabel::b_s_i, CaseLabel::b_s_ii, CaseLabel::b_s_iii,
                                              CaseLabel::b_s_iv};
    c.label = (cls == DistClass::general ? general : symmetric)[which - 1];
    return c;
}

inline ClosedFormIntermediates gluevar_intermediates(const GlueVaRParams& g) {
    ClosedFormIntermediates m;
    const double a = g.alpha, b = g.beta, h1 = g.h1, h2 = g.h2;
    m.slopes = g.slopes();
    m.zeta = h1 * h1 * (1.0 - a) + (1.0 - 2.0 * h1) * (1.0 - b);
    if (a < b) {
        m.weights = gluevar_mixture_weights(g);
        double k1 = *m.slopes.k1, k2 = m.slopes.k2, k3 = m.slopes.k3;
        auto sq = [](double x) { return x * x; };
        m.eta = a + sq(1.0 - h1 - b + a) / (b - a) + sq(h1 - 1.0 + b) / (1.0 - b);
        m.xi = sq(1.0 - h2 - a) / a + sq(h2 - h1 - b + a) / (b - a) + sq(h1 - 1.0 + b) / (1.0 - b);
        m.omega = a * a * ((1.0 - b) * sq(k3 - k2) + (b - a) * sq(k3 - k1));
        m.nu = sq(1.0 - b) * (a * sq(k3 - k2) + (b - a) * sq(k1 - k2));
        double pa = a * b + (h1 - 1.0) * a + (h2 - 1.0) * (1.0 - b);
        double pb = (1.0 - h1) * a * (1.0 + a - b) - (1.0 - h2) * b;
        m.omega_as_printed = sq(pa) / (1.0 - b) + sq(pb) / (b - a);
        m.nu_as_printed = sq(pa) / a + sq(pb) / (b - a);
    }
    return m;
}

namespace detail {

// Piecewise-constant direction given as consecutive (start, value) pairs;
// zero-width pieces are dropped.
inline StepFunction direction(std::initializer_list<std::pair<Prob, double>> pieces) {
    std::vector<std::pair<Prob, double>> v(pieces);
    std::vector<Step> steps;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double end = i + 1 < v.size() ? v[i + 1].first.value : 1.0;
        if (!(end > v[i].first.value)) continue;
        steps.push_back({v[i].first, v[i].second});
    }
    return merged(std::move(steps));
}

inline BoundResult closed_form_result(const PiecewiseLinearDistortion& d, const MomentSpec& spec, CaseId c,
                                      ClosedFormIntermediates m, double value,
                                      std::optional<StepFunction> dir) {
    BoundResult r;
    r.case_id = c;
    r.value = spec.sigma == 0.0 ? spec.mu : value;
    if (dir) m.lemma_integral = norm_squared(*dir);
    r.intermediates = std::move(m);
    if (spec.cls == DistClass::symmetric) r.sharp_value = extreme_symmetric_sharp(d, spec, c.direction).value;
    std::optional<StepQuantile> cand;
    if (dir && r.intermediates.lemma_integral > 0.0)
        cand = witness_from_direction(*dir, r.intermediates.lemma_integral, spec);
    settle(r, d, spec, std::move(cand));
    return r;
}

inline void require_class(const MomentSpec& spec, DistClass cls) {
    spec.validate();
    if (spec.cls != cls) throw parameter_error(std::string("closed form requires the ") + to_string(cls) + " class");
}

}  // namespace detail

inline BoundResult gluevar_worst_general(const GlueVaRParams& g, const MomentSpec& spec) {
    detail::require_class(spec, DistClass::general);
    CaseId c = classify_gluevar_case(g, Direction::worst, DistClass::general);
    ClosedFormIntermediates m = gluevar_intermediates(g);
    const double a = g.alpha, b = g.beta, h1 = g.h1;
    const Prob A = Prob::of(a), B = Prob::of(b), zero = Prob::of(0.0);
    if (c.label == CaseLabel::w_g_i) {
        double value = spec.mu + spec.sigma * std::sqrt(a / (1.0 - a));
        auto dir = detail::direction({{zero, -1.0}, {A, a / (1.0 - a)}});
        return detail::closed_form_result(make_gluevar(g), spec, c, m, value, dir);
    }
    double value = spec.mu + spec.sigma * std::sqrt(*m.eta);
    auto dir = detail::direction({{zero, -1.0}, {A, (1.0 - h1) / (b - a) - 1.0}, {B, h1 / (1.0 - b) - 1.0}});
    return detail::closed_form_result(make_gluevar(g), spec, c, m, value, dir);
}

inline BoundResult gluevar_worst_symmetric(const GlueVaRParams& g, const MomentSpec& spec) {
    detail::require_class(spec, DistClass::symmetric);
    CaseId c = classify_gluevar_case(g, Direction::worst, DistClass::symmetric);
    if (c.regime == Regime::straddles_half)
        throw unsupported_regime_error("no closed form for alpha < 1/2 <= beta; use extreme_generic");
    ClosedFormIntermediates m = gluevar_intermediates(g);
    const double a = g.alpha, b = g.beta, h1 = g.h1;
    const Prob zero = Prob::of(0.0), A = Prob::of(a), B = Prob::of(b);
    const Prob Ac = Prob::complement_of(a), Bc = Prob::complement_of(b);
    const double k2 = g.slopes().k2;
    const double k1p = b > a ? (1.0 - h1) / (b - a) : 0.0;  // envelope slope on [alpha, beta)
    auto d = make_gluevar(g);
    if (c.label == CaseLabel::w_s_sub_half) {
        bool two_piece = classify_gluevar_case(g, Direction::worst, DistClass::general).label == CaseLabel::w_g_i;
        if (two_piece) {
            double t = 1.0 / (1.0 - a);
            double value = spec.mu + spec.sigma * std::sqrt(a / 2.0) / (1.0 - a);
            auto dir = detail::direction({{zero, -t}, {A, 0.0}, {Ac, t}});
            return detail::closed_form_result(d, spec, c, m, value, dir);
        }
        double value = spec.mu + spec.sigma * std::sqrt((a * k2 * k2 + (b - a) * (k2 - k1p) * (k2 - k1p)) / 2.0);
        auto dir = detail::direction({{zero, -k2}, {A, k1p - k2}, {B, 0.0}, {Bc, k2 - k1p}, {Ac, k2}});
        return detail::closed_form_result(d, spec, c, m, value, dir);
    }
    if (c.label == CaseLabel::w_s_i) {
        double t = 1.0 / (1.0 - a);
        double value = spec.mu + spec.sigma * std::sqrt(1.0 / (2.0 * (1.0 - a)));
        auto dir = detail::direction({{zero, -t}, {Ac, 0.0}, {A, t}});
        return detail::closed_form_result(d, spec, c, m, value, dir);
    }
    double value = spec.mu + spec.sigma * std::sqrt(*m.zeta / (2.0 * (1.0 - b) * (b - a)));
    auto dir = detail::direction({{zero, -k2}, {Bc, -k1p}, {Ac, 0.0}, {A, k1p}, {B, k2}});
    return detail::closed_form_result(d, spec, c, m, value, dir);
}

inline BoundResult gluevar_best_general(const GlueVaRParams& g, const MomentSpec& spec) {
    detail::require_class(spec, DistClass::general);
    CaseId c = classify_gluevar_case(g, Direction::best, DistClass::general);
    ClosedFormIntermediates m = gluevar_intermediates(g);
    const double a = g.alpha, b = g.beta, h1 = g.h1, h2 = g.h2;
    const Prob zero = Prob::of(0.0), A = Prob::of(a), B = Prob::of(b);
    const SlopeTriple s = g.slopes();
    auto d = make_gluevar(g);
    switch (c.label) {
        case CaseLabel::b_g_i:
            return detail::closed_form_result(d, spec, c, m, spec.mu, std::nullopt);
        case CaseLabel::b_g_ii: {
            double value = spec.mu + spec.sigma * (h2 - 1.0 + a) / std::sqrt(a * (1.0 - a));
            auto dir = detail::direction({{zero, 1.0 - s.k3}, {A, 1.0 - h2 / (1.0 - a)}});
            return detail::closed_form_result(d, spec, c, m, value, dir);
        }
        case CaseLabel::b_g_iii: {
            double value = spec.mu - spec.sigma * std::sqrt(*m.xi);
            auto dir = detail::direction({{zero, 1.0 - s.k3}, {A, 1.0 - *s.k1}, {B, 1.0 - s.k2}});
            return detail::closed_form_result(d, spec, c, m, value, dir);
        }
        default: {
            double value = spec.mu + spec.sigma * (h1 - 1.0 + b) / std::sqrt(b * (1.0 - b));
            auto dir = detail::direction({{zero, 1.0 - (1.0 - h1) / b}, {B, 1.0 - s.k2}});
            return detail::closed_form_result(d, spec, c, m, value, dir);
        }
    }
}

inline BoundResult gluevar_best_symmetric(const GlueVaRParams& g, const MomentSpec& spec) {
    detail::require_class(spec, DistClass::symmetric);
    CaseId c = classify_gluevar_case(g, Direction::best, DistClass::symmetric);
    if (c.regime == Regime::straddles_half)
        throw unsupported_regime_error("no closed form for alpha < 1/2 <= beta; use extreme_generic");
    ClosedFormIntermediates m = gluevar_intermediates(g);
    const double a = g.alpha, b = g.beta, h1 = g.h1, h2 = g.h2;
    const bool hi = c.regime == Regime::alpha_at_least_half;
    const Prob zero = Prob::of(0.0), A = Prob::of(a), B = Prob::of(b);
    const Prob Ac = Prob::complement_of(a), Bc = Prob::complement_of(b);
    const SlopeTriple s = g.slopes();
    auto d = make_gluevar(g);
    switch (c.label) {
        case CaseLabel::b_s_i:
            return detail::closed_form_result(d, spec, c, m, spec.mu, std::nullopt);
        case CaseLabel::b_s_ii: {
            double t = s.k3 - h2 / (1.0 - a);
            if (hi) {
                double value = spec.mu + spec.sigma * (h2 - 1.0 + a) / (a * std::sqrt(2.0 * (1.0 - a)));
                auto dir = detail::direction({{zero, -t}, {Ac, 0.0}, {A, t}});
                return detail::closed_form_result(d, spec, c, m, value, dir);
            }
            double value = spec.mu + spec.sigma * (h2 + a - 1.0) / ((1.0 - a) * std::sqrt(2.0 * a));
            auto dir = detail::direction({{zero, -t}, {A, 0.0}, {Ac, t}});
            return detail::closed_form_result(d, spec, c, m, value, dir);
        }
        case CaseLabel::b_s_iii: {
            const double k1 = *s.k1, k2 = s.k2, k3 = s.k3;
            if (hi) {
                double value = spec.mu - spec.sigma * std::sqrt(*m.omega / (2.0 * a * a));
                auto dir = detail::direction(
                    {{zero, k2 - k3}, {Bc, k1 - k3}, {Ac, 0.0}, {A, k3 - k1}, {B, k3 - k2}});
                return detail::closed_form_result(d, spec, c, m, value, dir);
            }
            double value = spec.mu - spec.sigma * std::sqrt(*m.nu / (2.0 * (1.0 - b) * (1.0 - b)));
            auto dir =
                detail::direction({{zero, k2 - k3}, {A, k2 - k1}, {B, 0.0}, {Bc, k1 - k2}, {Ac, k3 - k2}});
            return detail::closed_form_result(d, spec, c, m, value, dir);
        }
        default: {
            double t = (1.0 - h1) / b - s.k2;
            if (hi) {
                double value = spec.mu + spec.sigma * (h1 - 1.0 + b) / (b * std::sqrt(2.0 * (1.0 - b)));
                auto dir = detail::direction({{zero, -t}, {Bc, 0.0}, {B, t}});
                return detail::closed_form_result(d, spec, c, m, value, dir);
            }
            double value = spec.mu + spec.sigma * (h1 - 1.0 + b) / ((1.0 - b) * std::sqrt(2.0 * b));
            auto dir = detail::direction({{zero, -t}, {B, 0.0}, {Bc, t}});
            return detail::closed_form_result(d, spec, c, m, value, dir);
        }
    }
}

inline BoundResult gluevar_closed_form(const GlueVaRParams& g, const MomentSpec& spec, Direction dir) {
    if (dir == Direction::worst)
        return spec.cls == DistClass::general ? gluevar_worst_general(g, spec) : gluevar_worst_symmetric(g, spec);
    return spec.cls == DistClass::general ? gluevar_best_general(g, spec) : gluevar_best_symmetric(g, spec);
}

// A member of the class whose risk value lies within roughly eps of an
// unattained bound: the limit candidate with every cut level nudged by eps,
// or a vanishing-tail distribution when no candidate exists.
inline std::optional<StepQuantile> approach_witness(const PiecewiseLinearDistortion& d, const MomentSpec& spec,
                                                    const BoundResult& r, double eps) {
    if (r.witness) return r.witness;
    if (spec.sigma == 0.0 || r.attainment == Attainment::not_sharp) return std::nullopt;
    auto standardize = [&](std::vector<double> x, const std::vector<double>& mass) -> std::optional<StepQuantile> {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) mean += mass[i] * x[i];
        for (std::size_t i = 0; i < x.size(); ++i) var += mass[i] * (x[i] - mean) * (x[i] - mean);
        if (!(var > 0.0)) return std::nullopt;
        double sd = std::sqrt(var);
        for (double& v : x) v = spec.mu + spec.sigma * (v - mean) / sd;
        return StepQuantile::from_masses(x, mass);
    };
    std::vector<StepQuantile> candidates;
    if (r.limit_witness) {
        const auto& at = r.limit_witness->atoms();
        std::size_t n = at.size();
        for (int sign : {-1, 1}) {
            std::vector<double> levels;
            for (std::size_t i = 0; i < n; ++i) levels.push_back(at[i].level);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                double q = levels[i];
                if (spec.cls == DistClass::symmetric) q = 0.5 + (q - 0.5) * (1.0 + sign * eps);
                else q += sign * eps;
                levels[i] = q;
            }
            std::vector<double> x, mass;
            double prev = 0.0;
            bool ok = true;
            for (std::size_t i = 0; i < n; ++i) {
                if (!(levels[i] > prev)) ok = false;
                x.push_back(at[i].value);
                mass.push_back(levels[i] - prev);
                prev = levels[i];
            }
            if (!ok) continue;
            if (auto q = standardize(x, mass)) candidates.push_back(*q);
        }
    }
    if (spec.cls == DistClass::symmetric) {
        if (auto q = standardize({-1.0, 0.0, 1.0}, {eps, 1.0 - 2.0 * eps, eps})) candidates.push_back(*q);
    } else {
        if (auto q = standardize({0.0, 1.0}, {1.0 - eps, eps})) candidates.push_back(*q);
        if (auto q = standardize({0.0, 1.0}, {eps, 1.0 - eps})) candidates.push_back(*q);
    }
    std::optional<StepQuantile> best;
    double gap = 0.0;
    for (auto& q : candidates) {
        double g = std::abs(choquet_eval(d, q) - r.value);
        if (!best || g < gap) {
            best = q;
            gap = g;
        }
    }
    return best;
}

struct RemarkLimitsReport {
    double alpha, beta;
    double rvar_best;            // RVaR best case at beta
    double rvar_best_formula;    // mu - sigma sqrt((1-beta)/beta)
    double rvar_best_near_alpha; // RVaR best case at alpha + 1e-6
    double var_best;             // VaR best case, mu - sigma sqrt((1-alpha)/alpha)
    double rvar_best_near_one;   // RVaR best case at 1 - 1e-9
    double tvar_best;            // mu
    bool var_limit_ok, tvar_limit_ok, formula_ok;
};

inline RemarkLimitsReport remark_limits_check(double alpha, double beta, const MomentSpec& spec = {0.0, 1.0}) {
    if (!(alpha > 0.0 && alpha < beta && beta < 1.0)) throw parameter_error("require 0 < alpha < beta < 1");
    MomentSpec gen{spec.mu, spec.sigma, DistClass::general};
    auto rvar = [&](double b) { return gluevar_best_general({alpha, b, 0.0, 1.0}, gen).value; };
    RemarkLimitsReport r{};
    r.alpha = alpha;
    r.beta = beta;
    r.rvar_best = rvar(beta);
    r.rvar_best_formula = spec.mu - spec.sigma * std::sqrt((1.0 - beta) / beta);
    r.rvar_best_near_alpha = rvar(alpha + 1e-6);
    r.var_best = gluevar_best_general({alpha, alpha, 0.0, 0.0}, gen).value;
    r.rvar_best_near_one = rvar(1.0 - 1e-9);
    r.tvar_best = gluevar_best_general({alpha, alpha, 1.0, 1.0}, gen).value;
    r.formula_ok = std::abs(r.rvar_best - r.rvar_best_formula) <= 1e-12 * detail::scale(spec);
    r.var_limit_ok = std::abs(r.rvar_best_near_alpha - r.var_best) <= 1e-5 * detail::scale(spec);
    r.tvar_limit_ok = std::abs(r.rvar_best_near_one - r.tvar_best) <= 1e-4 * detail::scale(spec);
    return r;
}

}  // namespace gluevar
