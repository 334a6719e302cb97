#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hjfd/discrete_calculus.hpp"

namespace {

using hjfd::GridFunction;
using hjfd::IdentityReport;
using hjfd::PeriodicGrid;
using hjfd::ShiftParam;

GridFunction make(PeriodicGrid g, std::initializer_list<double> vals) {
    return GridFunction(g, std::vector<double>(vals));
}

GridFunction random_function(PeriodicGrid g, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridFunction f(g);
    for (int i = 0; i < g.n; ++i) f[i] = dist(rng);
    return f;
}

TEST(Delta, ConstantVanishes) {
    PeriodicGrid g(8);
    const GridFunction d = hjfd::delta(GridFunction::constant(g, 5.0), ShiftParam{1});
    for (int i = 0; i < 8; ++i) EXPECT_EQ(d[i], 0.0);
}

TEST(Delta, DirectEvaluation) {
    PeriodicGrid g(4);
    const GridFunction d = hjfd::delta(make(g, {0, 1, 0, 0}), ShiftParam{1});
    EXPECT_DOUBLE_EQ(d[0], 4.0);
    EXPECT_DOUBLE_EQ(d[1], -4.0);
    EXPECT_DOUBLE_EQ(d[2], 0.0);
    EXPECT_DOUBLE_EQ(d[3], 0.0);
}

// delta_h w(x - h) = delta_{-h} w(x): both sides are the same quotient, so
// the equality is bitwise.
TEST(Delta, ShiftReflectionIsExact) {
    PeriodicGrid g(4);
    const GridFunction f = make(g, {0, 1, 0, 0});
    const GridFunction back = hjfd::delta(f, ShiftParam{-1});
    const GridFunction fwd = hjfd::delta(f, ShiftParam{1});
    for (int i = 0; i < 4; ++i) EXPECT_EQ(back[i], fwd.at(static_cast<long long>(i) - 1));
}

TEST(Delta, Linearity) {
    PeriodicGrid g(32);
    std::mt19937 rng(11);
    const GridFunction f = random_function(g, rng);
    const GridFunction h = random_function(g, rng);
    const double a = 0.7, b = -1.3;
    GridFunction combo(g);
    for (int i = 0; i < g.n; ++i) combo[i] = a * f[i] + b * h[i];
    const GridFunction lhs = hjfd::delta(combo, ShiftParam{3});
    const GridFunction df = hjfd::delta(f, ShiftParam{3});
    const GridFunction dh = hjfd::delta(h, ShiftParam{3});
    for (int i = 0; i < g.n; ++i) EXPECT_NEAR(lhs[i], a * df[i] + b * dh[i], 1e-13);
}

TEST(Delta, ArgumentValidation) {
    PeriodicGrid g4(4), g8(8);
    const GridFunction f(g4);
    EXPECT_THROW(hjfd::delta(f, ShiftParam{0}), std::invalid_argument);
    EXPECT_THROW(hjfd::delta(f, ShiftParam{4}), std::invalid_argument);
    EXPECT_THROW(hjfd::delta(f, ShiftParam{-5}), std::invalid_argument);
    EXPECT_THROW(hjfd::inner(f, GridFunction(g8)), std::invalid_argument);
}

TEST(SecondDelta, DirectEvaluation) {
    PeriodicGrid g(4);
    const GridFunction d = hjfd::second_delta(make(g, {0, 1, 0, 0}), ShiftParam{1});
    EXPECT_DOUBLE_EQ(d[0], 16.0);
    EXPECT_DOUBLE_EQ(d[1], -32.0);
    EXPECT_DOUBLE_EQ(d[2], 16.0);
    EXPECT_DOUBLE_EQ(d[3], 0.0);
}

TEST(SecondDelta, ConstantVanishes) {
    PeriodicGrid g(16);
    const GridFunction d = hjfd::second_delta(GridFunction::constant(g, -2.5), ShiftParam{2});
    for (int i = 0; i < g.n; ++i) EXPECT_EQ(d[i], 0.0);
}

TEST(SecondDelta, RequiresPositiveShift) {
    PeriodicGrid g(8);
    EXPECT_THROW(hjfd::second_delta(GridFunction(g), ShiftParam{-1}), std::invalid_argument);
}

// delta_{-h}[delta_h f] = Delta_h f: the two evaluation routes agree up to
// the rounding of two O(1/h^2) computations.
TEST(SecondDelta, MatchesComposedDeltas) {
    PeriodicGrid g(64);
    std::mt19937 rng(7);
    const GridFunction f = random_function(g, rng);
    for (int m : {1, 3, 7}) {
        const GridFunction direct = hjfd::second_delta(f, ShiftParam{m});
        const GridFunction composed = hjfd::delta(hjfd::delta(f, ShiftParam{-m}), ShiftParam{m});
        const double h = ShiftParam{m}.h(g);
        const double tol = 64.0 * std::numeric_limits<double>::epsilon() / (h * h);
        for (int i = 0; i < g.n; ++i) EXPECT_NEAR(direct[i], composed[i], tol);
    }
}

TEST(Integrate, BasicValues) {
    PeriodicGrid g(4);
    EXPECT_DOUBLE_EQ(hjfd::integrate(make(g, {0, 1, 0, 0})), 0.25);
    EXPECT_DOUBLE_EQ(hjfd::integrate(GridFunction::constant(g, 1.0)), 1.0);
}

// Summation by parts in the public double-precision operators.
TEST(Integrate, ByPartsProperty) {
    PeriodicGrid g(64);
    std::mt19937 rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        const GridFunction f = random_function(g, rng);
        const GridFunction w = random_function(g, rng);
        for (int m : {1, -1, 5, -5}) {
            const double lhs = hjfd::inner(w, hjfd::delta(f, ShiftParam{m}));
            const double rhs = -hjfd::inner(f, hjfd::delta(w, ShiftParam{-m}));
            EXPECT_NEAR(lhs, rhs, 1e-12);
        }
    }
}

// Telescoping on the torus: the integral of any difference quotient vanishes.
TEST(Integrate, DeltaTelescopes) {
    PeriodicGrid g(64);
    std::mt19937 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const GridFunction f = random_function(g, rng);
        for (int m : {1, 2, -3, 9}) {
            EXPECT_NEAR(hjfd::integrate(hjfd::delta(f, ShiftParam{m})), 0.0, 1e-13);
        }
    }
}

TEST(Identities, ConstantsGiveZero) {
    PeriodicGrid g(8);
    const IdentityReport rep = hjfd::verify_identities(GridFunction::constant(g, 3.0),
                                                       GridFunction::constant(g, -1.0), ShiftParam{1});
    EXPECT_EQ(rep.max_residual(), 0.0);
}

// Independent re-evaluation: every identity side recomputed with raw index
// loops in plain double, then compared against the library report.
TEST(Identities, IndicatorPairAgainstIndependentLoops) {
    PeriodicGrid g(4);
    const GridFunction f = make(g, {0, 1, 0, 0});
    const GridFunction w = make(g, {1, 0, 1, 0});
    const int m = 1;
    const double h = 0.25;
    const auto wrap = [](long long i) { return static_cast<std::size_t>(((i % 4) + 4) % 4); };
    const auto dpl = [&](const GridFunction& a, long long i) {
        return (a.values[wrap(i + m)] - a.values[wrap(i)]) / h;
    };
    const auto dmi = [&](const GridFunction& a, long long i) {
        return (a.values[wrap(i - m)] - a.values[wrap(i)]) / -h;
    };
    const auto lap = [&](const GridFunction& a, long long i) {
        return (a.values[wrap(i + m)] - 2.0 * a.values[wrap(i)] + a.values[wrap(i - m)]) / (h * h);
    };

    double worst = 0.0;
    for (long long i = 0; i < 4; ++i) {
        for (const GridFunction* ap : {&f, &w}) {
            const GridFunction& a = *ap;
            worst = std::max(worst, std::abs(dpl(a, i - m) - dmi(a, i)));
            worst = std::max(worst, std::abs((dpl(a, i - m) - dpl(a, i)) / -h - lap(a, i)));
            worst = std::max(worst, std::abs((dpl(a, i + m) - dpl(a, i)) / h - lap(a, i + m)));
            const double w0 = a.values[wrap(i)], wp = a.values[wrap(i + m)], wm = a.values[wrap(i - m)];
            worst = std::max(worst, std::abs((wp * wp - w0 * w0) / h -
                                             (2.0 * w0 * dpl(a, i) + h * dpl(a, i) * dpl(a, i))));
            worst = std::max(worst,
                             std::abs((wp * wp - 2.0 * w0 * w0 + wm * wm) / (h * h) -
                                      (2.0 * w0 * lap(a, i) + dpl(a, i) * dpl(a, i) + dmi(a, i) * dmi(a, i))));
        }
        const double prod = (f.values[wrap(i + m)] * w.values[wrap(i + m)] -
                             f.values[wrap(i)] * w.values[wrap(i)]) / h;
        worst = std::max(worst, std::abs(prod - (f.values[wrap(i + m)] * dpl(w, i) +
                                                 w.values[wrap(i)] * dpl(f, i))));
    }
    double parts1 = 0.0, parts2 = 0.0;
    for (long long i = 0; i < 4; ++i) {
        parts1 += w.values[wrap(i)] * dpl(f, i) + f.values[wrap(i)] * dmi(w, i);
        parts2 += dpl(f, i) * dpl(w, i) + w.values[wrap(i)] * lap(f, i);
    }
    worst = std::max({worst, std::abs(parts1 * 0.25), std::abs(parts2 * 0.25)});
    EXPECT_LE(worst, 1e-14);

    const IdentityReport rep = hjfd::verify_identities(f, w, ShiftParam{m});
    EXPECT_LE(rep.max_residual(), 1e-14);
}

// Randomized acceptance-level property: 100 pairs on n = 64.
TEST(Identities, RandomPairs) {
    PeriodicGrid g(64);
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> mdist(1, 8);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const GridFunction f = random_function(g, rng);
        const GridFunction w = random_function(g, rng);
        const int m = (rep % 2 == 0 ? 1 : -1) * mdist(rng);
        worst = std::max(worst, hjfd::verify_identities(f, w, ShiftParam{m}).max_residual());
    }
    EXPECT_LE(worst, 1e-12);
}

} // namespace
