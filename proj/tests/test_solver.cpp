#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hjfd/initial_data.hpp"
#include "hjfd/oracle.hpp"
#include "hjfd/solver.hpp"

namespace {

using hjfd::GridFunction;
using hjfd::Hamiltonian;
using hjfd::InitialData;
using hjfd::Integrator;
using hjfd::NumericalFlux;
using hjfd::PeriodicGrid;
using hjfd::ShiftParam;
using hjfd::Trajectory;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

InitialData constant_data(PeriodicGrid g, double c) {
    return hjfd::initial_from_samples(GridFunction::constant(g, c));
}

TEST(SchemeRhs, ConstantState) {
    PeriodicGrid g(8);
    const GridFunction u = GridFunction::constant(g, 4.0);
    const GridFunction r = hjfd::scheme_rhs(u, NumericalFlux::upwind_quadratic(), ShiftParam{1});
    for (int i = 0; i < 8; ++i) EXPECT_EQ(r[i], 0.0);

    // crandall_lions pays -H(0) = -F(0,0) on constants
    const Hamiltonian lifted = Hamiltonian::tabulated(
        [](double p) { return 0.5 * p * p + 0.3; }, [](double p) { return p; });
    const GridFunction rc = hjfd::scheme_rhs(u, NumericalFlux::crandall_lions(lifted, 1.0), ShiftParam{1});
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(rc[i], -0.3, 1e-15);
}

TEST(SchemeRhs, TwoNodeDirectEvaluation) {
    PeriodicGrid g(2);
    const GridFunction u(g, {0.0, 1.0});
    const GridFunction r = hjfd::scheme_rhs(u, NumericalFlux::upwind_quadratic(), ShiftParam{1});
    EXPECT_DOUBLE_EQ(r[0], 0.0);  // -F(-2, -2)
    EXPECT_DOUBLE_EQ(r[1], -4.0); // -F(2, 2)
}

TEST(Advance, ConstantUnchanged) {
    PeriodicGrid g(16);
    const GridFunction u = GridFunction::constant(g, -2.0);
    const GridFunction next = hjfd::advance(u, NumericalFlux::upwind_quadratic(), ShiftParam{1}, 0.01);
    for (int i = 0; i < 16; ++i) EXPECT_EQ(next[i], -2.0);
}

TEST(Advance, CflViolationThrows) {
    PeriodicGrid g(32);
    const GridFunction u = GridFunction::sample(g, [](double x) { return std::cos(kTwoPi * x); });
    EXPECT_THROW(hjfd::advance(u, NumericalFlux::upwind_quadratic(), ShiftParam{1}, 1.0),
                 hjfd::CflViolation);
}

// Nodewise ordering survives an Euler step under CFL, with no tolerance.
TEST(Advance, MonotoneComparisonPrinciple) {
    PeriodicGrid g(32);
    const NumericalFlux flux = NumericalFlux::upwind_quadratic();
    const ShiftParam s{1};
    std::mt19937 rng(404);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::uniform_real_distribution<double> bumpd(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        GridFunction lo(g), hi(g);
        for (int i = 0; i < g.n; ++i) {
            lo[i] = dist(rng);
            hi[i] = lo[i] + (i % 3 == 0 ? 0.0 : bumpd(rng));
        }
        const double radius = std::max(hjfd::max_chord_norm(lo, s), hjfd::max_chord_norm(hi, s)) + 1.0;
        const double dt = 0.5 * s.h(g) / hjfd::max_gradient_sum(flux, radius);
        const GridFunction lo1 = hjfd::advance(lo, flux, s, dt);
        const GridFunction hi1 = hjfd::advance(hi, flux, s, dt);
        for (int i = 0; i < g.n; ++i) EXPECT_LE(lo1[i], hi1[i]);
    }
}

// One-step Euler-vs-RK4 difference is the Euler local error, O(dt^2):
// halving dt shrinks it by about 4.
TEST(Advance, EulerVersusRk4LocalOrder) {
    PeriodicGrid g(64);
    const GridFunction u = GridFunction::sample(g, [](double x) { return 0.1 * std::cos(kTwoPi * x); });
    const NumericalFlux flux = NumericalFlux::upwind_quadratic();
    const ShiftParam s{1};
    const auto gap = [&](double dt) {
        const GridFunction a = hjfd::advance(u, flux, s, dt, Integrator::euler);
        const GridFunction b = hjfd::advance(u, flux, s, dt, Integrator::rk4);
        return hjfd::sup_distance(a, b);
    };
    const double dt0 = 2e-4;
    const double ratio = gap(dt0) / gap(0.5 * dt0);
    EXPECT_NEAR(ratio, 4.0, 0.8);
}

TEST(Solve, ConstantsArePreserved) {
    PeriodicGrid g(16);
    const Trajectory upwind =
        hjfd::solve(constant_data(g, 3.0), NumericalFlux::upwind_quadratic(), ShiftParam{1}, 1.0);
    for (int i = 0; i < g.n; ++i) EXPECT_EQ(upwind.states.back()[i], 3.0);

    const Trajectory central = hjfd::solve(
        constant_data(g, 3.0), NumericalFlux::crandall_lions(Hamiltonian::quadratic(), 1.0),
        ShiftParam{1}, 1.0);
    for (int i = 0; i < g.n; ++i) EXPECT_NEAR(central.states.back()[i], 3.0, 1e-12);
}

TEST(Solve, ConstantDriftMatchesFluxOrigin) {
    PeriodicGrid g(16);
    const Hamiltonian lifted = Hamiltonian::tabulated(
        [](double p) { return 0.5 * p * p + 0.3; }, [](double p) { return p; });
    const Trajectory traj = hjfd::solve(constant_data(g, 1.0),
                                        NumericalFlux::crandall_lions(lifted, 1.0), ShiftParam{1}, 2.0);
    for (int i = 0; i < g.n; ++i) EXPECT_NEAR(traj.states.back()[i], 1.0 - 0.3 * 2.0, 1e-12);
}

TEST(Solve, StepDividesFinalTimeUnderCfl) {
    PeriodicGrid g(64);
    const InitialData data = hjfd::initial_cos(g);
    const NumericalFlux flux = NumericalFlux::upwind_quadratic();
    const Trajectory traj = hjfd::solve(data, flux, ShiftParam{1}, 1.0, 0.5);
    EXPECT_DOUBLE_EQ(traj.config.steps * traj.config.dt, 1.0);
    const double bound = 0.5 * ShiftParam{1}.h(g) / hjfd::max_gradient_sum(flux, data.lip_norm + 1.0);
    EXPECT_LE(traj.config.dt, bound * (1.0 + 1e-12));
    EXPECT_GT(traj.config.dt, bound * 0.5); // minimal step count
    EXPECT_DOUBLE_EQ(traj.times.back(), 1.0);
    EXPECT_EQ(static_cast<int>(traj.states.size()), traj.config.steps + 1);
}

TEST(Solve, RecordStride) {
    PeriodicGrid g(32);
    const Trajectory traj =
        hjfd::solve(hjfd::initial_cos(g), NumericalFlux::upwind_quadratic(), ShiftParam{1}, 0.1, 0.5,
                    Integrator::euler, 7);
    EXPECT_DOUBLE_EQ(traj.times.back(), 0.1);
    EXPECT_LT(traj.states.size(), static_cast<std::size_t>(traj.config.steps) + 1);
    Trajectory copy = traj;
    EXPECT_THROW(hjfd::evolve_gradient(copy), hjfd::InsufficientTrajectory);
}

// Shifting the initial datum by one node shifts every recorded state by one
// node, bitwise: the scheme sees identical arithmetic at relabeled nodes.
TEST(Solve, TranslationEquivariance) {
    PeriodicGrid g(32);
    const InitialData base = hjfd::initial_cos(g);
    InitialData shifted = base;
    for (int i = 0; i < g.n; ++i) {
        shifted.values[i] = base.values.at(static_cast<long long>(i) - 1);
        shifted.gradient[i] = base.gradient.at(static_cast<long long>(i) - 1);
        shifted.second[i] = base.second.at(static_cast<long long>(i) - 1);
    }
    const NumericalFlux flux = NumericalFlux::upwind_quadratic();
    const Trajectory t0 = hjfd::solve(base, flux, ShiftParam{1}, 0.25);
    const Trajectory t1 = hjfd::solve(shifted, flux, ShiftParam{1}, 0.25);
    ASSERT_EQ(t0.states.size(), t1.states.size());
    for (std::size_t k = 0; k < t0.states.size(); ++k)
        for (int i = 0; i < g.n; ++i)
            EXPECT_EQ(t1.states[k][i], t0.states[k].at(static_cast<long long>(i) - 1));
}

TEST(EvolveGradient, ConstantDatumStaysZero) {
    PeriodicGrid g(16);
    Trajectory traj =
        hjfd::solve(constant_data(g, 2.0), NumericalFlux::upwind_quadratic(), ShiftParam{1}, 0.5);
    hjfd::evolve_gradient(traj);
    for (const GridFunction& v : traj.gradient_states)
        for (int i = 0; i < g.n; ++i) EXPECT_EQ(v[i], 0.0);
}

// A-priori gradient bound: |v(t)|_inf never exceeds |u0'|_inf.
TEST(EvolveGradient, SupBoundHolds) {
    PeriodicGrid g(64);
    const InitialData data = hjfd::initial_cos(g);
    Trajectory traj = hjfd::solve(data, NumericalFlux::upwind_quadratic(), ShiftParam{1}, 0.5);
    hjfd::evolve_gradient(traj);
    for (const GridFunction& v : traj.gradient_states)
        EXPECT_LE(v.sup_norm(), data.lip_norm + 1e-8);
}

// Internal cross-check on a smooth run (before the gradient blows up):
// v stays within O(dx^2) + O(dt) of the centered difference of the states.
TEST(EvolveGradient, MatchesCenteredDifferencesWhileSmooth) {
    PeriodicGrid g(128);
    const InitialData data = hjfd::initial_cos(g);
    Trajectory traj = hjfd::solve(data, NumericalFlux::upwind_quadratic(), ShiftParam{1}, 0.01);
    hjfd::evolve_gradient(traj);
    const GridFunction& u = traj.states.back();
    const GridFunction& v = traj.gradient_states.back();
    const double dx = g.dx();
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double centered = (u.at(static_cast<long long>(i) + 1) -
                                 u.at(static_cast<long long>(i) - 1)) / (2.0 * dx);
        worst = std::max(worst, std::abs(v[i] - centered));
    }
    const double scale = std::pow(kTwoPi, 3) * dx * dx + 20.0 * traj.config.dt;
    EXPECT_LE(worst, scale);
}

// Commutation with the chord field at first order: |v - delta_h u|_inf stays
// O(dt + h) on smooth runs.
TEST(EvolveGradient, CommutesWithChordsAtFirstOrder) {
    PeriodicGrid g(128);
    const InitialData data = hjfd::initial_cos(g);
    Trajectory traj = hjfd::solve(data, NumericalFlux::upwind_quadratic(), ShiftParam{1}, 0.01);
    hjfd::evolve_gradient(traj);
    const GridFunction chords = hjfd::delta(traj.states.back(), traj.shift);
    const double gap = hjfd::sup_distance(traj.gradient_states.back(), chords);
    EXPECT_LE(gap, 2.0 * data.second_norm * (traj.config.dt + ShiftParam{1}.h(g)));
}

TEST(EvolveSecond, ConstantDatumStaysZero) {
    PeriodicGrid g(16);
    Trajectory traj = hjfd::solve(constant_data(g, 2.0),
                                  NumericalFlux::crandall_lions(Hamiltonian::quadratic(), 1.0),
                                  ShiftParam{1}, 0.5);
    hjfd::evolve_gradient(traj);
    hjfd::evolve_second(traj);
    for (const GridFunction& w : traj.second_states)
        for (int i = 0; i < g.n; ++i) EXPECT_EQ(w[i], 0.0);
}

TEST(EvolveSecond, RequiresHessianFlux) {
    PeriodicGrid g(16);
    Trajectory traj =
        hjfd::solve(hjfd::initial_cos(g), NumericalFlux::upwind_quadratic(), ShiftParam{1}, 0.1);
    hjfd::evolve_gradient(traj);
    EXPECT_THROW(hjfd::evolve_second(traj), hjfd::UnsupportedOperation);
}

// One-sided curvature bound: max_i s(t) <= |u0''|_inf for convex fluxes.
TEST(EvolveSecond, OneSidedMaximumPrinciple) {
    PeriodicGrid g(64);
    const InitialData data = hjfd::initial_cos(g);
    const Hamiltonian ham = Hamiltonian::quadratic();
    Trajectory traj = hjfd::solve(data, NumericalFlux::crandall_lions(ham, hjfd::gamma_bound(ham, data.lip_norm + 1.0)),
                                  ShiftParam{1}, 0.5);
    hjfd::evolve_gradient(traj);
    hjfd::evolve_second(traj);
    for (const GridFunction& w : traj.second_states)
        EXPECT_LE(w.max_value(), data.second_norm + 1e-8);
}

// First-order agreement between the curvature field and the centered
// difference of the gradient field on a smooth run.
TEST(EvolveSecond, MatchesGradientDifferencesWhileSmooth) {
    PeriodicGrid g(128);
    const InitialData data = hjfd::initial_cos(g);
    const Hamiltonian ham = Hamiltonian::quadratic();
    Trajectory traj = hjfd::solve(data, NumericalFlux::crandall_lions(ham, hjfd::gamma_bound(ham, data.lip_norm + 1.0)),
                                  ShiftParam{1}, 0.01);
    hjfd::evolve_gradient(traj);
    hjfd::evolve_second(traj);
    const GridFunction& v = traj.gradient_states.back();
    const GridFunction& w = traj.second_states.back();
    const double dx = g.dx();
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double centered = (v.at(static_cast<long long>(i) + 1) -
                                 v.at(static_cast<long long>(i) - 1)) / (2.0 * dx);
        worst = std::max(worst, std::abs(w[i] - centered));
    }
    EXPECT_LE(worst, 4.0 * data.second_norm * (dx + traj.config.dt) * kTwoPi);
}

TEST(Monitors, ConstantDatumNeverExceeds) {
    PeriodicGrid g(32);
    Trajectory traj =
        hjfd::solve(constant_data(g, -1.5), NumericalFlux::upwind_quadratic(), ShiftParam{1}, 1.0);
    hjfd::evolve_gradient(traj);
    const hjfd::MonitorReport rep = hjfd::monitor_bounds(traj);
    EXPECT_LE(rep.sup_excess_max, 1e-12);
    EXPECT_LE(rep.gradient_excess_max, 1e-12);
    EXPECT_LE(rep.chord_gap_excess_max, 1e-12);
}

// The headline bounds hold at every recorded time on a monotone run.
TEST(Monitors, CosineRunSatisfiesAllBounds) {
    PeriodicGrid g(64);
    Trajectory traj =
        hjfd::solve(hjfd::initial_cos(g), NumericalFlux::upwind_quadratic(), ShiftParam{1}, 1.0);
    hjfd::evolve_gradient(traj);
    const hjfd::MonitorReport rep = hjfd::monitor_bounds(traj);
    EXPECT_LE(rep.sup_excess_max, 1e-8);
    EXPECT_LE(rep.gradient_excess_max, 1e-8);
    EXPECT_LE(rep.chord_gap_excess_max, 1e-8);
}

// Deliberate CFL violation: the monitors are the canary.
TEST(Monitors, CflCanaryReportsPositiveExcess) {
    PeriodicGrid g(64);
    Trajectory traj =
        hjfd::solve(hjfd::initial_cos(g), NumericalFlux::upwind_quadratic(), ShiftParam{1}, 0.05, 4.0);
    hjfd::evolve_gradient(traj);
    const hjfd::MonitorReport rep = hjfd::monitor_bounds(traj);
    EXPECT_GT(rep.gradient_excess_max, 1e-3);
}

} // namespace
