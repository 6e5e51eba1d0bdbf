#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "bounds.hpp"

namespace gluevar {

// Least-squares projection onto nondecreasing sequences (pool adjacent violators).
inline std::vector<double> pava(const std::vector<double>& w) {
    if (w.empty()) throw parameter_error("pava needs a nonempty input");
    struct Block {
        double sum;
        std::size_t count;
        double mean() const { return sum / static_cast<double>(count); }
    };
    std::vector<Block> blocks;
    for (double x : w) {
        blocks.push_back({x, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            Block top = blocks.back();
            blocks.pop_back();
            blocks.back().sum += top.sum;
            blocks.back().count += top.count;
        }
    }
    std::vector<double> out;
    out.reserve(w.size());
    for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean());
    return out;
}

struct DiscretizedProblem {
    std::size_t n = 0;
    std::vector<double> weights;  // n * (h~(i/n) - h~((i-1)/n))
    DistClass cls = DistClass::general;
    Direction direction = Direction::worst;
    MomentSpec spec;
};

inline std::vector<double> increments(const PiecewiseLinearDistortion& f, std::size_t n, Side side) {
    std::vector<double> w(n);
    double nn = static_cast<double>(n);
    double prev = f.eval(0.0, side);
    for (std::size_t i = 1; i <= n; ++i) {
        double cur = f.eval(static_cast<double>(i) / nn, side);
        w[i - 1] = nn * (cur - prev);
        prev = cur;
    }
    return w;
}

inline std::vector<double> increments(const PiecewiseLinearDistortion& f, std::size_t n) {
    return increments(f, n, f.jump_value());
}

inline DiscretizedProblem discretize(const PiecewiseLinearDistortion& d, const MomentSpec& spec, Direction dir,
                                     std::size_t n, Side side) {
    return {n, increments(dual(d), n, side), spec.cls, dir, spec};
}

inline DiscretizedProblem discretize(const PiecewiseLinearDistortion& d, const MomentSpec& spec, Direction dir,
                                     std::size_t n) {
    PiecewiseLinearDistortion t = dual(d);
    return {n, increments(t, n, t.jump_value()), spec.cls, dir, spec};
}

struct OracleResult {
    double value = 0.0;
    std::vector<double> atoms;     // equally likely, nondecreasing
    bool attained_by_any = false;  // projected direction vanished
    bool unresolved = false;       // n below the distortion's finest segment resolution
    Side side = Side::right;       // one-sided value of the dual distortion used at grid points
};

inline double min_segment_width(const PiecewiseLinearDistortion& d) {
    double w = 1.0;
    const auto& p = d.points();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double gap = p[i + 1].p.value - p[i].p.value;
        if (gap > 0.0) w = std::min(w, gap);
    }
    return w;
}

namespace detail {

inline OracleResult solve_discrete(const DiscretizedProblem& prob) {
    const std::size_t n = prob.n;
    const double nn = static_cast<double>(n);
    const MomentSpec& spec = prob.spec;
    const Direction dir = prob.direction;
    // best: minimizing sum w x is maximizing sum w_rev y with y_i = -x_{n-1-i}
    std::vector<double> base(prob.weights);
    if (dir == Direction::best) std::reverse(base.begin(), base.end());
    std::vector<double> dirv(n);
    if (spec.cls == DistClass::general) {
        std::vector<double> proj = pava(base);
        for (std::size_t i = 0; i < n; ++i)
            dirv[i] = dir == Direction::worst ? proj[i] - 1.0 : 1.0 - proj[n - 1 - i];
    } else {
        std::vector<double> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = 0.5 * (base[i] - base[n - 1 - i]);
        dirv = pava(a);
    }
    double ss = 0.0;
    for (double v : dirv) ss += v * v;
    double norm = std::sqrt(ss / nn);
    OracleResult r;
    r.atoms.assign(n, spec.mu);
    if (spec.sigma > 0.0 && norm > 1e-9) {
        for (std::size_t i = 0; i < n; ++i) r.atoms[i] = spec.mu + spec.sigma * dirv[i] / norm;
    } else if (norm <= 1e-9) {
        r.attained_by_any = true;
    }
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += prob.weights[i] * r.atoms[i];
    r.value = obj / nn;
    return r;
}

}  // namespace detail

// Solves the n-atom problem once with each one-sided value of the dual
// distortion at the grid points and keeps the better. Either value is a limit
// of feasible values (shift the atom levels off the jump and restandardize).
inline OracleResult oracle_extreme(const PiecewiseLinearDistortion& d, const MomentSpec& spec, Direction dir,
                                   std::size_t n) {
    spec.validate();
    if (n < 2) throw parameter_error("oracle needs at least two atoms");
    OracleResult best;
    bool first = true;
    for (Side side : {Side::right, Side::left}) {
        OracleResult r = detail::solve_discrete(discretize(d, spec, dir, n, side));
        r.side = side;
        bool better = dir == Direction::worst ? r.value > best.value : r.value < best.value;
        if (first || better) best = std::move(r);
        first = false;
        if (d.is_continuous()) break;
    }
    best.unresolved = static_cast<double>(n) < 1.0 / min_segment_width(d);
    return best;
}

// Random member of V(mu, sigma) or V_S(mu, sigma) with the given number of atoms.
inline StepQuantile sample_feasible(const MomentSpec& spec, std::size_t atoms, std::uint64_t seed) {
    spec.validate();
    if (atoms < 2) throw parameter_error("sample needs at least two atoms");
    if (spec.sigma == 0.0) return StepQuantile::degenerate(spec.mu);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw_value = [&](int family) {
        switch (family) {
            case 0: return normal(rng);
            case 1: return -std::log(1.0 - unif(rng));
            case 2: return std::pow(1.0 - unif(rng), -0.7);
            default: return unif(rng);
        }
    };
    auto draw_masses = [&](std::size_t k) {
        std::gamma_distribution<double> gamma(unif(rng) < 0.5 ? 0.3 : 1.0, 1.0);
        std::vector<double> m(k);
        for (double& x : m) x = gamma(rng) + 1e-6;
        return m;
    };
    for (int attempt = 0; attempt < 32; ++attempt) {
        int family = static_cast<int>(rng() % 4);
        std::vector<double> x, m;
        if (spec.cls == DistClass::general) {
            for (std::size_t i = 0; i < atoms; ++i) x.push_back(draw_value(family));
            std::sort(x.begin(), x.end());
            m = draw_masses(atoms);
        } else {
            std::size_t half = atoms / 2;
            std::vector<double> v;
            for (std::size_t i = 0; i < half; ++i) v.push_back(std::abs(draw_value(family)) + 1e-9);
            std::sort(v.begin(), v.end());
            std::vector<double> hm = draw_masses(half + 1);
            for (std::size_t i = half; i-- > 0;) {
                x.push_back(-v[i]);
                m.push_back(hm[i]);
            }
            if (atoms % 2 == 1) {
                x.push_back(0.0);
                m.push_back(2.0 * hm[half]);
            }
            for (std::size_t i = 0; i < half; ++i) {
                x.push_back(v[i]);
                m.push_back(hm[i]);
            }
        }
        // standardize against the masses as the quantile stores them (level differences)
        StepQuantile raw = StepQuantile::from_masses(x, m);
        Moments mo = moments(raw);
        if (!(mo.variance > 1e-300) || !std::isfinite(mo.variance)) continue;
        double sd = std::sqrt(mo.variance);
        std::vector<QuantileAtom> atoms;
        for (const QuantileAtom& a : raw.atoms()) atoms.push_back({a.level, spec.mu + spec.sigma * (a.value - mo.mean) / sd});
        bool sorted = true;
        for (std::size_t i = 1; i < atoms.size(); ++i) sorted = sorted && atoms[i - 1].value <= atoms[i].value;
        if (!sorted) continue;
        return StepQuantile(std::move(atoms));
    }
    throw parameter_error("could not draw a nondegenerate sample");
}

struct VerifyOptions {
    std::size_t oracle_n = 2000;
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
    double closed_form_offset = 0.0;  // test hook: corrupts the closed form
};

struct VerifyReport {
    GlueVaRParams params;
    MomentSpec spec;
    Direction direction = Direction::worst;
    std::optional<CaseId> case_id;
    std::optional<double> closed_form;  // absent in the symmetric regime without a closed form
    double generic = 0.0;
    std::optional<double> sharp;        // symmetric class
    double oracle = 0.0;
    bool oracle_unresolved = false;
    double sample_extreme = 0.0;
    double moment_residual = 0.0;
    double attainment_residual = 0.0;
    bool has_witness = false;
    bool closed_vs_generic_ok = true;
    bool oracle_ok = true;
    bool samples_ok = true;
    bool witness_ok = true;
    bool passed() const { return closed_vs_generic_ok && oracle_ok && samples_ok && witness_ok; }
};

inline VerifyReport verify_bound(const GlueVaRParams& g, const MomentSpec& spec, Direction dir,
                                 const VerifyOptions& opt = {}) {
    VerifyReport rep;
    rep.params = g;
    rep.spec = spec;
    rep.direction = dir;
    auto d = make_gluevar(g);
    const double scale = detail::scale(spec);
    BoundResult gen = extreme_generic(d, spec, dir);
    rep.generic = gen.value;
    rep.sharp = gen.sharp_value;
    double reference = gen.value;
    bool closed_available =
        spec.cls == DistClass::general || symmetric_regime(g.alpha, g.beta) != Regime::straddles_half;
    if (closed_available) {
        BoundResult cf = gluevar_closed_form(g, spec, dir);
        rep.case_id = cf.case_id;
        rep.closed_form = cf.value + opt.closed_form_offset;
        reference = *rep.closed_form;
        rep.closed_vs_generic_ok = std::abs(*rep.closed_form - gen.value) <= 1e-10 * scale;
        if (cf.witness) {
            rep.has_witness = true;
            rep.moment_residual = cf.moment_residual;
            rep.attainment_residual = cf.attainment_residual;
            rep.witness_ok = cf.moment_residual <= witness_tolerance * scale &&
                             cf.attainment_residual <= witness_tolerance * scale;
        }
    }
    OracleResult orc = oracle_extreme(d, spec, dir, opt.oracle_n);
    rep.oracle = orc.value;
    rep.oracle_unresolved = orc.unresolved;
    rep.oracle_ok = std::abs(orc.value - reference) <= 10.0 / static_cast<double>(opt.oracle_n) * scale;
    rep.sample_extreme = spec.mu;
    std::mt19937_64 seeds(opt.seed);
    for (std::size_t s = 0; s < opt.samples; ++s) {
        std::size_t atoms = 2 + seeds() % 11;
        StepQuantile q = sample_feasible(spec, atoms, seeds());
        double v = choquet_eval(d, q);
        if (s == 0) rep.sample_extreme = v;
        rep.sample_extreme = dir == Direction::worst ? std::max(rep.sample_extreme, v)
                                                     : std::min(rep.sample_extreme, v);
    }
    if (opt.samples > 0) {
        rep.samples_ok = dir == Direction::worst ? rep.sample_extreme <= reference + 1e-10 * scale
                                                 : rep.sample_extreme >= reference - 1e-10 * scale;
    }
    return rep;
}

}  // namespace gluevar
