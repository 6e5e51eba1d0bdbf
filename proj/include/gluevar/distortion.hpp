#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace gluevar {

struct SlopeTriple {
    std::optional<double> k1;  // empty when the middle segment has zero width
    double k2 = 0.0;
    double k3 = 0.0;
};

struct GlueVaRParams {
    double alpha = 0.0;
    double beta = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;

    void validate() const {
        auto fail = [](const std::string& what) { throw parameter_error("gluevar parameters: " + what); };
        if (!(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(h1) && std::isfinite(h2)))
            fail("non-finite value");
        if (!(alpha > 0.0 && alpha <= beta && beta < 1.0)) fail("require 0 < alpha <= beta < 1");
        if (!(h1 >= 0.0 && h1 <= h2 && h2 <= 1.0)) fail("require 0 <= h1 <= h2 <= 1");
        if (alpha == beta && h1 != h2) fail("alpha == beta requires h1 == h2");
    }

    SlopeTriple slopes() const {
        SlopeTriple s;
        if (beta > alpha) s.k1 = (h2 - h1) / (beta - alpha);
        s.k2 = h1 / (1.0 - beta);
        s.k3 = (1.0 - h2) / alpha;
        return s;
    }

    friend bool operator==(const GlueVaRParams&, const GlueVaRParams&) = default;
};

struct Point {
    Prob p;
    Prob v;  // v.complement == 1 - v.value, kept so that dual is exact
};

inline constexpr double breakpoint_snap = 4.0 * std::numeric_limits<double>::epsilon();

class PiecewiseLinearDistortion {
public:
    // jump_value says which one-sided limit the function takes at a jump.
    explicit PiecewiseLinearDistortion(std::vector<Point> pts, Side jump_value = Side::right)
        : points_(std::move(pts)), jump_value_(jump_value) {
        dedupe();
        validate();
    }

    const std::vector<Point>& points() const { return points_; }
    Side jump_value() const { return jump_value_; }

    bool is_continuous() const {
        for (std::size_t i = 0; i + 1 < points_.size(); ++i)
            if (points_[i].p.value == points_[i + 1].p.value) return false;
        return true;
    }

    double eval(double p, Side side) const {
        if (!(p >= 0.0 && p <= 1.0)) throw parameter_error("evaluation point outside [0,1]");
        auto it = std::lower_bound(points_.begin(), points_.end(), p,
                                   [](const Point& a, double x) { return a.p.value < x; });
        std::size_t i = static_cast<std::size_t>(it - points_.begin());
        // a few ulps off a breakpoint counts as on it (1 - 0.95 != 0.05)
        if (i > 0 && p - points_[i - 1].p.value <= breakpoint_snap) {
            --i;
            while (i > 0 && points_[i - 1].p.value == points_[i].p.value) --i;
            p = points_[i].p.value;
        } else if (points_[i].p.value - p <= breakpoint_snap) {
            p = points_[i].p.value;
        }
        if (points_[i].p.value == p) {
            if (i + 1 < points_.size() && points_[i + 1].p.value == p)
                return side == Side::left ? points_[i].v.value : points_[i + 1].v.value;
            return points_[i].v.value;
        }
        const Point& a = points_[i - 1];
        const Point& b = points_[i];
        double t = (p - a.p.value) / (b.p.value - a.p.value);
        return a.v.value + t * (b.v.value - a.v.value);
    }

    double operator()(double p) const { return eval(p, jump_value_); }

    friend bool operator==(const PiecewiseLinearDistortion& a, const PiecewiseLinearDistortion& b) {
        if (a.points_.size() != b.points_.size()) return false;
        for (std::size_t i = 0; i < a.points_.size(); ++i)
            if (!(a.points_[i].p == b.points_[i].p && a.points_[i].v == b.points_[i].v)) return false;
        return a.is_continuous() || a.jump_value_ == b.jump_value_;
    }

private:
    void dedupe() {
        auto same = [](const Point& a, const Point& b) {
            return a.p.value == b.p.value && a.v.value == b.v.value;
        };
        points_.erase(std::unique(points_.begin(), points_.end(), same), points_.end());
    }

    void validate() const {
        if (points_.size() < 2) throw parameter_error("distortion needs at least two breakpoints");
        if (points_.front().p.value != 0.0 || points_.front().v.value != 0.0)
            throw parameter_error("distortion must start at (0,0)");
        if (points_.back().p.value != 1.0 || points_.back().v.value != 1.0)
            throw parameter_error("distortion must end at (1,1)");
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            if (points_[i + 1].p.value < points_[i].p.value) throw parameter_error("breakpoints out of order");
            if (points_[i + 1].v.value < points_[i].v.value) throw parameter_error("distortion must be nondecreasing");
            if (i + 2 < points_.size() && points_[i].p.value == points_[i + 2].p.value)
                throw parameter_error("more than two breakpoints share an abscissa");
        }
    }

    std::vector<Point> points_;
    Side jump_value_;
};

struct Step {
    Prob start;
    double value;
};

// Right-continuous step function on [0,1]; the last step ends at 1.
class StepFunction {
public:
    explicit StepFunction(std::vector<Step> steps) : steps_(std::move(steps)) {
        if (steps_.empty() || steps_.front().start.value != 0.0)
            throw parameter_error("step function must start at 0");
        for (std::size_t i = 0; i + 1 < steps_.size(); ++i)
            if (!(steps_[i].start.value < steps_[i + 1].start.value))
                throw parameter_error("step starts must be strictly increasing");
    }

    const std::vector<Step>& steps() const { return steps_; }

    Prob end_of(std::size_t i) const { return i + 1 < steps_.size() ? steps_[i + 1].start : Prob::of(1.0); }
    double width(std::size_t i) const { return gap(steps_[i].start, end_of(i)); }

    double eval(double p) const {
        auto it = std::upper_bound(steps_.begin(), steps_.end(), p,
                                   [](double x, const Step& s) { return x < s.start.value; });
        return std::prev(it)->value;
    }

    double eval_left(double p) const {
        auto it = std::lower_bound(steps_.begin(), steps_.end(), p,
                                   [](const Step& s, double x) { return s.start.value < x; });
        return it == steps_.begin() ? steps_.front().value : std::prev(it)->value;
    }

    double integral() const {
        double total = 0.0;
        for (std::size_t i = 0; i < steps_.size(); ++i) total += steps_[i].value * width(i);
        return total;
    }

private:
    std::vector<Step> steps_;
};

inline PiecewiseLinearDistortion make_gluevar(const GlueVaRParams& g) {
    g.validate();
    std::vector<Point> pts{
        {Prob::of(0.0), Prob::of(0.0)},
        {Prob::complement_of(g.beta), Prob::of(g.h1)},
        {Prob::complement_of(g.alpha), Prob::of(g.h2)},
    };
    if (g.h2 < 1.0) pts.push_back({Prob::complement_of(g.alpha), Prob::of(1.0)});
    pts.push_back({Prob::of(1.0), Prob::of(1.0)});
    return PiecewiseLinearDistortion(std::move(pts), Side::right);
}

enum class SpecialKind { var, tvar, rvar };

inline PiecewiseLinearDistortion make_special(SpecialKind kind, double alpha, std::optional<double> beta = {}) {
    switch (kind) {
        case SpecialKind::var: return make_gluevar({alpha, alpha, 0.0, 0.0});
        case SpecialKind::tvar: return make_gluevar({alpha, alpha, 1.0, 1.0});
        case SpecialKind::rvar:
            if (!beta) throw parameter_error("rvar requires beta");
            if (!(alpha < *beta)) throw parameter_error("rvar requires alpha < beta");
            return make_gluevar({alpha, *beta, 0.0, 1.0});
    }
    throw parameter_error("unknown special kind");
}

inline PiecewiseLinearDistortion identity_distortion() {
    return PiecewiseLinearDistortion({{Prob::of(0.0), Prob::of(0.0)}, {Prob::of(1.0), Prob::of(1.0)}});
}

inline PiecewiseLinearDistortion dual(const PiecewiseLinearDistortion& d) {
    std::vector<Point> out;
    out.reserve(d.points().size());
    for (auto it = d.points().rbegin(); it != d.points().rend(); ++it)
        out.push_back({it->p.flipped(), it->v.flipped()});
    Side side = d.jump_value() == Side::right ? Side::left : Side::right;
    return PiecewiseLinearDistortion(std::move(out), side);
}

namespace detail {

inline double cross(const Point& a, const Point& b, const Point& c) {
    return (b.p.value - a.p.value) * (c.v.value - a.v.value) - (b.v.value - a.v.value) * (c.p.value - a.p.value);
}

// Lower (convex) or upper (concave) hull of points sorted by abscissa. Points
// sharing an abscissa collapse to their minimum (lower) or maximum (upper).
inline std::vector<Point> hull(const std::vector<Point>& sorted, bool lower) {
    std::vector<Point> col;
    for (const Point& q : sorted) {
        if (!col.empty() && col.back().p.value == q.p.value) {
            if (lower ? q.v.value < col.back().v.value : q.v.value > col.back().v.value) col.back() = q;
            continue;
        }
        col.push_back(q);
    }
    std::vector<Point> h;
    for (const Point& q : col) {
        while (h.size() >= 2) {
            double c = cross(h[h.size() - 2], h.back(), q);
            if (lower ? c <= 0.0 : c >= 0.0) h.pop_back();
            else break;
        }
        h.push_back(q);
    }
    return h;
}

inline std::vector<Step> slopes(const std::vector<Point>& pts) {
    std::vector<Step> steps;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double w = gap(pts[i].p, pts[i + 1].p);
        if (w == 0.0) throw not_differentiable_error("function has a jump");
        double s = (pts[i + 1].v.value - pts[i].v.value) / w;
        if (!steps.empty() && steps.back().value == s) continue;
        steps.push_back({pts[i].p, s});
    }
    return steps;
}

}  // namespace detail

inline PiecewiseLinearDistortion convex_envelope(const PiecewiseLinearDistortion& d) {
    return PiecewiseLinearDistortion(detail::hull(d.points(), true));
}

inline PiecewiseLinearDistortion concave_envelope(const PiecewiseLinearDistortion& d) {
    return PiecewiseLinearDistortion(detail::hull(d.points(), false));
}

inline StepFunction right_derivative(const PiecewiseLinearDistortion& f) {
    if (!f.is_continuous()) throw not_differentiable_error("right_derivative of a discontinuous function");
    return StepFunction(detail::slopes(f.points()));
}

inline double eval_at(const PiecewiseLinearDistortion& d, double p, Side side) { return d.eval(p, side); }

// Compares two distortions as functions (both one-sided limits at every
// breakpoint of either) within an absolute tolerance.
inline bool same_function(const PiecewiseLinearDistortion& a, const PiecewiseLinearDistortion& b,
                          double tol = 1e-14) {
    auto check = [&](const PiecewiseLinearDistortion& src) {
        for (const Point& q : src.points()) {
            double p = q.p.value;
            for (Side s : {Side::left, Side::right})
                if (std::abs(a.eval(p, s) - b.eval(p, s)) > tol) return false;
            if (std::abs(a(p) - b(p)) > tol) return false;
        }
        return true;
    };
    return check(a) && check(b);
}

inline bool is_identity(const PiecewiseLinearDistortion& d, double tol = 1e-14) {
    return same_function(d, identity_distortion(), tol);
}

}  // namespace gluevar
