#include <gtest/gtest.h>

#include "support.hpp"

using namespace gluevar;

TEST(Pava, AlreadyMonotone) { EXPECT_EQ(pava({1, 2, 3}), (std::vector<double>{1, 2, 3})); }

TEST(Pava, PoolsEverything) {
    EXPECT_EQ(pava({3, 1, 2}), (std::vector<double>{2, 2, 2}));
    EXPECT_EQ(test::brute_isotonic({3, 1, 2}), (std::vector<double>{2, 2, 2}));
}

TEST(Pava, TwoPointAverage) { EXPECT_EQ(pava({2, 1}), (std::vector<double>{1.5, 1.5})); }

TEST(Pava, EmptyRejected) { EXPECT_THROW(pava({}), parameter_error); }

TEST(Pava, MatchesExhaustiveSearch) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> w(1 + rng() % 9);
        for (auto& x : w) x = n(rng);
        auto p = pava(w);
        auto b = test::brute_isotonic(w);
        ASSERT_EQ(p.size(), b.size());
        for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], b[i], 1e-12);
    }
}

TEST(Pava, StructuralProperties) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> w(1 + rng() % 200);
        for (auto& x : w) x = n(rng);
        auto p = pava(w);
        EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
        double sw = 0, sp = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            sw += w[i];
            sp += p[i];
        }
        EXPECT_NEAR(sw, sp, 1e-10);
        EXPECT_EQ(pava(p), p);
        // every maximal constant run equals the mean of the inputs it covers
        for (std::size_t i = 0; i < p.size();) {
            std::size_t j = i;
            double s = 0;
            while (j < p.size() && p[j] == p[i]) s += w[j++];
            EXPECT_NEAR(s / static_cast<double>(j - i), p[i], 1e-12);
            i = j;
        }
    }
}

TEST(Pava, PreservesAntisymmetry) {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::size_t k = 2 + rng() % 50;
        std::vector<double> w(k), a(k);
        for (std::size_t i = 0; i < k; ++i) w[i] = n(rng);
        for (std::size_t i = 0; i < k; ++i) a[i] = 0.5 * (w[i] - w[k - 1 - i]);
        auto p = pava(a);
        for (std::size_t i = 0; i < k; ++i) EXPECT_NEAR(p[i], -p[k - 1 - i], 1e-12);
    }
}

TEST(Discretize, WeightsAverageToOne) {
    std::mt19937_64 rng(44);
    for (int t = 0; t < 200; ++t) {
        auto d = test::random_distortion(rng);
        auto prob = discretize(d, {0, 1, DistClass::general}, Direction::worst, 1 + rng() % 500);
        double s = 0;
        for (double w : prob.weights) s += w;
        EXPECT_NEAR(s / static_cast<double>(prob.n), 1.0, 1e-12);
    }
}

TEST(Oracle, VarWorst) {
    MomentSpec s{0, 1, DistClass::general};
    EXPECT_NEAR(oracle_extreme(make_special(SpecialKind::var, 0.9), s, Direction::worst, 10000).value, 3.0, 5e-3);
}

TEST(Oracle, GluevarWorst) {
    MomentSpec s{0, 1, DistClass::general};
    auto r = oracle_extreme(make_gluevar({0.95, 0.99, 0.3, 0.8}), s, Direction::worst, 100000);
    EXPECT_NEAR(r.value, 4.5, 1e-3);
    EXPECT_FALSE(r.unresolved);
}

TEST(Oracle, IdentityGivesMean) {
    for (DistClass cls : {DistClass::general, DistClass::symmetric})
        for (Direction dir : {Direction::worst, Direction::best}) {
            auto r = oracle_extreme(identity_distortion(), {1.25, 2.0, cls}, dir, 1000);
            EXPECT_NEAR(r.value, 1.25, 1e-12);
            EXPECT_TRUE(r.attained_by_any);
        }
}

TEST(Oracle, FlagsCoarseGrid) {
    auto r = oracle_extreme(make_gluevar({0.95, 0.99, 0.3, 0.8}), {0, 1, DistClass::general}, Direction::worst, 50);
    EXPECT_TRUE(r.unresolved);
}

TEST(Oracle, AtomsAreFeasible) {
    std::mt19937_64 rng(45);
    for (int t = 0; t < 100; ++t) {
        auto d = test::random_distortion(rng);
        for (DistClass cls : {DistClass::general, DistClass::symmetric})
            for (Direction dir : {Direction::worst, Direction::best}) {
                auto r = oracle_extreme(d, {0.5, 2.0, cls}, dir, 400);
                if (r.attained_by_any) continue;
                EXPECT_TRUE(std::is_sorted(r.atoms.begin(), r.atoms.end()));
                std::vector<double> m(r.atoms.size(), 1.0);
                auto q = StepQuantile::from_masses(r.atoms, m);
                auto mo = moments(q);
                EXPECT_NEAR(mo.mean, 0.5, 1e-10);
                EXPECT_NEAR(mo.variance, 4.0, 1e-9);
                // the value is reached in the limit; the atoms themselves sit on the other side of a jump at worst
                double v = choquet_eval(d, q);
                if (r.side == dual(d).jump_value() || d.is_continuous()) EXPECT_NEAR(v, r.value, 1e-9);
                if (dir == Direction::worst) EXPECT_LE(v, r.value + 1e-9);
                else EXPECT_GE(v, r.value - 1e-9);
                if (cls == DistClass::symmetric) EXPECT_TRUE(is_symmetric(q, 1e-9));
            }
    }
}

// Exhaustive search over antisymmetric block structures for tiny n.
TEST(Oracle, SymmetricMatchesExhaustiveSearch) {
    std::mt19937_64 rng(46);
    for (int t = 0; t < 200; ++t) {
        auto d = test::random_distortion(rng);
        std::size_t n = 2 + rng() % 7;
        MomentSpec s{0, 1, DistClass::symmetric};
        for (Direction dir : {Direction::worst, Direction::best}) {
            double expect = dir == Direction::worst ? -1e300 : 1e300;
            for (Side side : {Side::left, Side::right}) {
            auto w = discretize(d, s, dir, n, side).weights;
            // best: minimizing sum w x is maximizing its negative
            double sign = dir == Direction::worst ? 1.0 : -1.0;
            std::vector<double> a(n);
            for (std::size_t i = 0; i < n; ++i) a[i] = sign * 0.5 * (w[i] - w[n - 1 - i]);
            auto proj = test::brute_isotonic(a);
            double ss = 0, obj = 0;
            for (double v : proj) ss += v * v;
            double norm = std::sqrt(ss / static_cast<double>(n));
            if (norm > 1e-9)
                for (std::size_t i = 0; i < n; ++i) obj += w[i] * proj[i] / norm;
            double v = obj / static_cast<double>(n);
            expect = dir == Direction::worst ? std::max(expect, v) : std::min(expect, v);
            }
            EXPECT_NEAR(oracle_extreme(d, s, dir, n).value, expect, 1e-10) << "n=" << n;
        }
    }
}

TEST(Oracle, ConvergesToSharpSymmetricEngine) {
    std::mt19937_64 rng(47);
    for (int t = 0; t < 30; ++t) {
        auto g = test::random_params(rng);
        auto d = make_gluevar(g);
        for (Direction dir : {Direction::worst, Direction::best}) {
            MomentSpec s{0, 1, DistClass::symmetric};
            double sharp = extreme_symmetric_sharp(d, s, dir).value;
            double orc = oracle_extreme(d, s, dir, 40000).value;
            double slack = 40.0 / 40000.0 * (1.0 + std::abs(sharp)) / std::min(g.alpha, 1 - g.beta);
            EXPECT_NEAR(orc, sharp, slack);
        }
    }
}

TEST(Oracle, ExactOnCommensurateGrid) {
    MomentSpec s{0, 1, DistClass::general};
    for (GlueVaRParams g : {GlueVaRParams{0.95, 0.99, 0.3, 0.8}, GlueVaRParams{0.1, 0.5, 0.4, 0.6},
                            GlueVaRParams{0.6, 0.9, 0.05, 0.85}, GlueVaRParams{0.05, 0.5, 0.2, 0.9}}) {
        auto d = make_gluevar(g);
        for (Direction dir : {Direction::worst, Direction::best}) {
            auto cf = gluevar_closed_form(g, s, dir);
            double orc = oracle_extreme(d, s, dir, 2000).value;
            EXPECT_NEAR(orc, cf.value, 1e-9) << to_string(cf.case_id.label);
        }
    }
}

TEST(SampleFeasible, GeneralTwoPoint) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto q = sample_feasible({0, 1, DistClass::general}, 2, seed);
        EXPECT_LE(q.size(), 2u);
        auto m = moments(q);
        EXPECT_NEAR(m.mean, 0.0, 1e-12);
        EXPECT_NEAR(m.variance, 1.0, 1e-12);
    }
}

TEST(SampleFeasible, SymmetricAndDeterministic) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        MomentSpec s{-1.0, 0.5, DistClass::symmetric};
        auto q = sample_feasible(s, 2 + seed % 9, seed);
        EXPECT_TRUE(is_symmetric(q, 1e-12));
        auto m = moments(q);
        EXPECT_NEAR(m.mean, -1.0, 1e-12);
        EXPECT_NEAR(m.variance, 0.25, 1e-12);
        auto again = sample_feasible(s, 2 + seed % 9, seed);
        ASSERT_EQ(q.size(), again.size());
        for (std::size_t i = 0; i < q.size(); ++i) EXPECT_EQ(q.atoms()[i].value, again.atoms()[i].value);
    }
}

TEST(SampleFeasible, StaysInsideClosedFormInterval) {
    GlueVaRParams g{0.95, 0.99, 0.3, 0.8};
    auto d = make_gluevar(g);
    MomentSpec s{0, 1, DistClass::general};
    double hi = gluevar_worst_general(g, s).value, lo = gluevar_best_general(g, s).value;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        double v = choquet_eval(d, sample_feasible(s, 2 + seed % 11, seed));
        EXPECT_LE(v, hi + 1e-10);
        EXPECT_GE(v, lo - 1e-10);
    }
}

TEST(VerifyBound, ChordCasePasses) {
    auto rep = verify_bound({0.9, 0.95, 0.02, 0.6}, {0, 1, DistClass::general}, Direction::worst,
                            {10000, 1000, 3, 0.0});
    EXPECT_TRUE(rep.passed());
    EXPECT_NEAR(*rep.closed_form, 3.0, 1e-12);
    EXPECT_TRUE(rep.has_witness);
}

TEST(VerifyBound, SubHalfSymmetricSamplesStayBelowBound) {
    auto rep = verify_bound({0.2, 0.4, 0.3, 0.5}, {0, 1, DistClass::symmetric}, Direction::worst,
                            {2000, 1000, 4, 0.0});
    EXPECT_TRUE(rep.samples_ok);
    EXPECT_TRUE(rep.closed_vs_generic_ok);
    ASSERT_TRUE(rep.sharp);
    EXPECT_NEAR(rep.oracle, *rep.sharp, 1e-3);
}

TEST(VerifyBound, ZeroSigma) {
    for (Direction dir : {Direction::worst, Direction::best}) {
        auto rep = verify_bound({0.3, 0.6, 0.2, 0.7}, {2.0, 0.0, DistClass::general}, dir, {500, 10, 5, 0.0});
        EXPECT_EQ(*rep.closed_form, 2.0);
        EXPECT_EQ(rep.generic, 2.0);
        EXPECT_NEAR(rep.oracle, 2.0, 1e-12);
        EXPECT_TRUE(rep.passed());
    }
}

TEST(VerifyBound, CorruptedClosedFormFails) {
    auto rep = verify_bound({0.9, 0.95, 0.02, 0.6}, {0, 1, DistClass::general}, Direction::worst,
                            {2000, 10, 3, 1e-6});
    EXPECT_FALSE(rep.closed_vs_generic_ok);
    EXPECT_FALSE(rep.passed());
}

TEST(Oracle, FirstOrderConvergenceOffGrid) {
    std::mt19937_64 rng(48);
    MomentSpec s{0, 1, DistClass::general};
    int checked = 0;
    while (checked < 50) {
        auto g = test::random_params(rng, 0.0);
        if (g.alpha < 0.05 || g.beta > 0.95 || (g.alpha != g.beta && g.beta - g.alpha < 0.05)) continue;
        ++checked;
        auto d = make_gluevar(g);
        auto cf = gluevar_worst_general(g, s);
        for (std::size_t n : {1000u, 4000u, 16000u}) {
            double gap = std::abs(oracle_extreme(d, s, Direction::worst, n).value - cf.value);
            EXPECT_LE(gap * static_cast<double>(n), 10.0 * cf.value) << n;
        }
    }
}
