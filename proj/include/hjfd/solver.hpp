#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hjfd/discrete_calculus.hpp"
#include "hjfd/errors.hpp"
#include "hjfd/grid.hpp"
#include "hjfd/initial_data.hpp"
#include "hjfd/numerical_flux.hpp"

namespace hjfd {

enum class Integrator { euler, rk4 };

inline const char* integrator_name(Integrator it) { return it == Integrator::euler ? "euler" : "rk4"; }

struct SolverConfig {
    int n = 0;
    int m = 1;
    double T = 0.0;
    double cfl = 0.5;
    Integrator integrator = Integrator::euler;
    int record_stride = 1;
    // derived at solve time
    double dt = 0.0;
    int steps = 0;
    double box_radius = 0.0;
};

/// Time-stamped states of one forward run, plus the evolved derivative
/// fields once filled in. The flux and initial datum ride along so the
/// adjoint and the bound monitors are self-contained.
struct Trajectory {
    SolverConfig config;
    PeriodicGrid grid;
    ShiftParam shift;
    NumericalFlux flux;
    InitialData initial;
    std::vector<double> times;
    std::vector<GridFunction> states;
    std::vector<GridFunction> gradient_states; // empty until evolve_gradient
    std::vector<GridFunction> second_states;   // empty until evolve_second

    bool has_gradients() const { return !gradient_states.empty(); }
    bool has_second() const { return !second_states.empty(); }
    bool per_step_records() const { return config.record_stride == 1; }
};

/// Semi-discrete right-hand side: (rhs u)_i = -F(-(delta_h u)_i, (delta_{-h} u)_i).
inline GridFunction scheme_rhs(const GridFunction& u, const NumericalFlux& flux, ShiftParam s) {
    validate_shift(u.grid, s);
    if (s.m <= 0) throw std::invalid_argument("scheme_rhs: m must be positive");
    const int n = u.grid.n;
    const int m = s.m;
    const double h = s.h(u.grid);
    GridFunction out(u.grid);
    for (int i = 0; i < n; ++i) {
        const int ip = i + m < n ? i + m : i + m - n;
        const int im = i - m >= 0 ? i - m : i - m + n;
        const double dh = (u[ip] - u[i]) / h;
        const double dmh = (u[i] - u[im]) / h;
        out[i] = -flux.value(-dh, dmh);
    }
    return out;
}

/// Largest chord slope |delta_h u| over the lattice (identical for both
/// shift signs: the same chords, reindexed).
inline double max_chord_norm(const GridFunction& u, ShiftParam s) {
    const double h = s.h(u.grid);
    double m = 0.0;
    for (int i = 0; i < u.grid.n; ++i)
        m = std::max(m, std::abs((u.at(static_cast<long long>(i) + s.m) - u[i]) / h));
    return m;
}

namespace detail {

inline GridFunction euler_step(const GridFunction& u, const NumericalFlux& flux, ShiftParam s, double dt) {
    GridFunction r = scheme_rhs(u, flux, s);
    GridFunction out(u.grid);
    for (int i = 0; i < u.grid.n; ++i) out[i] = u[i] + dt * r[i];
    return out;
}

inline GridFunction rk4_step(const GridFunction& u, const NumericalFlux& flux, ShiftParam s, double dt) {
    const int n = u.grid.n;
    GridFunction k1 = scheme_rhs(u, flux, s);
    GridFunction tmp(u.grid);
    for (int i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
    GridFunction k2 = scheme_rhs(tmp, flux, s);
    for (int i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k2[i];
    GridFunction k3 = scheme_rhs(tmp, flux, s);
    for (int i = 0; i < n; ++i) tmp[i] = u[i] + dt * k3[i];
    GridFunction k4 = scheme_rhs(tmp, flux, s);
    GridFunction out(u.grid);
    for (int i = 0; i < n; ++i)
        out[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

struct StepPlan {
    double dt;
    int steps;
    double box_radius;
};

inline StepPlan plan_steps(double T, double cfl, double h, const NumericalFlux& flux, double lip_norm,
                           long long max_steps = 50'000'000) {
    if (!(T > 0.0)) throw std::invalid_argument("solve: T must be positive");
    if (!(cfl > 0.0)) throw std::invalid_argument("solve: cfl must be positive");
    const double radius = lip_norm + 1.0;
    const double grad_sum = max_gradient_sum(flux, radius);
    double dt_max = grad_sum > 1e-14 ? cfl * h / grad_sum : T;
    const long long steps = std::max<long long>(1, static_cast<long long>(std::ceil(T / dt_max - 1e-9)));
    if (steps > max_steps) throw std::invalid_argument("solve: CFL step count overflow");
    return {T / static_cast<double>(steps), static_cast<int>(steps), radius};
}

} // namespace detail

/// One explicit time step. The step is validated against the monotone limit
/// dt <= h / sup(D_p F + D_q F) on the box |p|,|q| <= |delta u|_inf + 1;
/// under that limit the Euler update is a nodewise convex combination and
/// preserves ordering of states.
inline GridFunction advance(const GridFunction& u, const NumericalFlux& flux, ShiftParam s, double dt,
                            Integrator integrator = Integrator::euler) {
    validate_shift(u.grid, s);
    if (s.m <= 0) throw std::invalid_argument("advance: m must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("advance: dt must be positive");
    const double radius = max_chord_norm(u, s) + 1.0;
    const double grad_sum = max_gradient_sum(flux, radius);
    const double h = s.h(u.grid);
    if (grad_sum > 1e-14 && dt > (h / grad_sum) * (1.0 + 1e-12))
        throw CflViolation("advance: dt exceeds the monotone step bound");
    return integrator == Integrator::euler ? detail::euler_step(u, flux, s, dt)
                                           : detail::rk4_step(u, flux, s, dt);
}

/// Integrate the scheme to time T with the uniform step dt = T/K, K minimal
/// with dt <= cfl h / sup(D_p F + D_q F) on the a-priori gradient box
/// (|u0'|_inf + 1). States are recorded every `record_stride` steps and at T.
/// cfl values above 1 are accepted, but the monotone-step guarantees are then
/// void (the bound monitors are the intended canary).
inline Trajectory solve(const InitialData& initial, const NumericalFlux& flux, ShiftParam s, double T,
                        double cfl = 0.5, Integrator integrator = Integrator::euler,
                        int record_stride = 1) {
    const PeriodicGrid g = initial.values.grid;
    validate_shift(g, s);
    if (s.m <= 0) throw std::invalid_argument("solve: m must be positive");
    if (record_stride < 1) throw std::invalid_argument("solve: record_stride must be >= 1");
    if (!initial.values.all_finite()) throw std::invalid_argument("solve: initial data must be finite");

    const detail::StepPlan plan = detail::plan_steps(T, cfl, s.h(g), flux, initial.lip_norm);

    Trajectory traj{SolverConfig{g.n, s.m, T, cfl, integrator, record_stride, plan.dt, plan.steps,
                                 plan.box_radius},
                    g,
                    s,
                    flux,
                    initial,
                    {},
                    {},
                    {},
                    {}};
    const std::size_t recorded = static_cast<std::size_t>(plan.steps / record_stride + 2);
    traj.times.reserve(recorded);
    traj.states.reserve(recorded);

    GridFunction u = initial.values;
    traj.times.push_back(0.0);
    traj.states.push_back(u);
    for (int k = 0; k < plan.steps; ++k) {
        u = integrator == Integrator::euler ? detail::euler_step(u, flux, s, plan.dt)
                                            : detail::rk4_step(u, flux, s, plan.dt);
        if ((k + 1) % record_stride == 0 || k + 1 == plan.steps) {
            if (!u.all_finite()) throw std::runtime_error("solve: state became non-finite");
            traj.times.push_back((k + 1) * plan.dt);
            traj.states.push_back(u);
        }
    }
    return traj;
}

/// Final state only, nothing recorded along the way. Used for fine reference
/// runs where a full trajectory would not fit in memory.
inline GridFunction solve_final_state(const InitialData& initial, const NumericalFlux& flux,
                                      ShiftParam s, double T, double cfl = 0.5,
                                      Integrator integrator = Integrator::euler) {
    const PeriodicGrid g = initial.values.grid;
    validate_shift(g, s);
    if (s.m <= 0) throw std::invalid_argument("solve_final_state: m must be positive");
    const detail::StepPlan plan = detail::plan_steps(T, cfl, s.h(g), flux, initial.lip_norm);
    GridFunction u = initial.values;
    for (int k = 0; k < plan.steps; ++k)
        u = integrator == Integrator::euler ? detail::euler_step(u, flux, s, plan.dt)
                                            : detail::rk4_step(u, flux, s, plan.dt);
    if (!u.all_finite()) throw std::runtime_error("solve_final_state: state became non-finite");
    return u;
}

namespace detail {

/// Frozen-coefficient linearized step: coefficients a = D_p F, b = D_q F are
/// evaluated at the carrier state once per step; the step then applies
/// w -> w + dt [a (w_{+m} - w) + b (w_{-m} - w)]/h (+ dt * source).
struct FrozenCoefficients {
    std::vector<double> a, b;

    FrozenCoefficients(const GridFunction& state, const NumericalFlux& flux, ShiftParam s)
        : a(static_cast<std::size_t>(state.grid.n)), b(a.size()) {
        const int n = state.grid.n;
        const int m = s.m;
        const double h = s.h(state.grid);
        for (int i = 0; i < n; ++i) {
            const int ip = i + m < n ? i + m : i + m - n;
            const int im = i - m >= 0 ? i - m : i - m + n;
            const double dh = (state[ip] - state[i]) / h;
            const double dmh = (state[i] - state[im]) / h;
            const FluxGradient gr = flux.grad(-dh, dmh);
            a[static_cast<std::size_t>(i)] = gr.dp;
            b[static_cast<std::size_t>(i)] = gr.dq;
        }
    }
};

inline void linearized_rhs_into(const FrozenCoefficients& c, const GridFunction& w, ShiftParam s,
                                const std::vector<double>* source, GridFunction& out) {
    const int n = w.grid.n;
    const int m = s.m;
    const double h = s.h(w.grid);
    for (int i = 0; i < n; ++i) {
        const int ip = i + m < n ? i + m : i + m - n;
        const int im = i - m >= 0 ? i - m : i - m + n;
        const std::size_t ui = static_cast<std::size_t>(i);
        double r = (c.a[ui] * (w[ip] - w[i]) + c.b[ui] * (w[im] - w[i])) / h;
        if (source) r += (*source)[ui];
        out[i] = r;
    }
}

inline GridFunction linear_step(const FrozenCoefficients& c, const GridFunction& w, ShiftParam s,
                                double dt, Integrator integrator, const std::vector<double>* source) {
    const int n = w.grid.n;
    GridFunction out(w.grid);
    if (integrator == Integrator::euler) {
        linearized_rhs_into(c, w, s, source, out);
        for (int i = 0; i < n; ++i) out[i] = w[i] + dt * out[i];
        return out;
    }
    GridFunction k1(w.grid), k2(w.grid), k3(w.grid), k4(w.grid), tmp(w.grid);
    linearized_rhs_into(c, w, s, source, k1);
    for (int i = 0; i < n; ++i) tmp[i] = w[i] + 0.5 * dt * k1[i];
    linearized_rhs_into(c, tmp, s, source, k2);
    for (int i = 0; i < n; ++i) tmp[i] = w[i] + 0.5 * dt * k2[i];
    linearized_rhs_into(c, tmp, s, source, k3);
    for (int i = 0; i < n; ++i) tmp[i] = w[i] + dt * k3[i];
    linearized_rhs_into(c, tmp, s, source, k4);
    for (int i = 0; i < n; ++i) out[i] = w[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

} // namespace detail

/// Evolve the nodal gradient field by the linearized equation with
/// coefficients frozen at each step's recorded state, starting from the
/// sampled u0'. Requires a per-step trajectory.
inline Trajectory& evolve_gradient(Trajectory& traj) {
    if (!traj.per_step_records())
        throw InsufficientTrajectory("evolve_gradient: trajectory must record every step");
    traj.gradient_states.clear();
    traj.gradient_states.reserve(traj.states.size());
    GridFunction v = traj.initial.gradient;
    traj.gradient_states.push_back(v);
    for (int k = 0; k < traj.config.steps; ++k) {
        const detail::FrozenCoefficients coeff(traj.states[static_cast<std::size_t>(k)], traj.flux,
                                               traj.shift);
        v = detail::linear_step(coeff, v, traj.shift, traj.config.dt, traj.config.integrator, nullptr);
        traj.gradient_states.push_back(v);
    }
    return traj;
}

/// Evolve the nodal curvature field: the same linearized operator driven by
/// the Hessian quadratic form of the flux at the frozen state, i.e.
///   s_t = (linearized) s - [F_pp (delta_h v)^2 + F_qq (delta_{-h} v)^2
///                           + 2 F_pq (-delta_h v)(delta_{-h} v)].
/// Needs a flux with second derivatives and the evolved gradient field.
inline Trajectory& evolve_second(Trajectory& traj) {
    if (!traj.flux.has_hessian())
        throw UnsupportedOperation("evolve_second: flux kind provides no second derivatives");
    if (!traj.has_gradients())
        throw std::invalid_argument("evolve_second: gradient states required (run evolve_gradient)");
    if (!traj.per_step_records())
        throw InsufficientTrajectory("evolve_second: trajectory must record every step");
    const int n = traj.grid.n;
    const int m = traj.shift.m;
    const double h = traj.shift.h(traj.grid);
    traj.second_states.clear();
    traj.second_states.reserve(traj.states.size());
    GridFunction w = traj.initial.second;
    traj.second_states.push_back(w);
    std::vector<double> source(static_cast<std::size_t>(n));
    for (int k = 0; k < traj.config.steps; ++k) {
        const GridFunction& u = traj.states[static_cast<std::size_t>(k)];
        const GridFunction& v = traj.gradient_states[static_cast<std::size_t>(k)];
        const detail::FrozenCoefficients coeff(u, traj.flux, traj.shift);
        for (int i = 0; i < n; ++i) {
            const int ip = i + m < n ? i + m : i + m - n;
            const int im = i - m >= 0 ? i - m : i - m + n;
            const double du_h = (u[ip] - u[i]) / h;
            const double du_mh = (u[i] - u[im]) / h;
            const double a = (v[ip] - v[i]) / h;
            const double b = (v[i] - v[im]) / h;
            const FluxHessian hs = traj.flux.hessian(-du_h, du_mh);
            source[static_cast<std::size_t>(i)] =
                -(hs.dpp * a * a + hs.dqq * b * b + 2.0 * hs.dpq * (-a) * b);
        }
        w = detail::linear_step(coeff, w, traj.shift, traj.config.dt, traj.config.integrator, &source);
        traj.second_states.push_back(w);
    }
    return traj;
}

/// Per-time excesses over the a-priori bounds; every entry is <= 0 up to
/// rounding when the run is monotone (Euler under CFL).
struct MonitorReport {
    std::vector<double> times;
    std::vector<double> sup_excess;       // |u(t)|_inf - (|u0|_inf + |F(0,0)| t)
    std::vector<double> gradient_excess;  // max(|v|_inf, |delta_{+-h} u|_inf) - |u0'|_inf
    std::vector<double> chord_gap_excess; // one-sided v-vs-chord gaps minus h |u0''|_inf
    std::vector<double> curvature_excess; // max_i s - |u0''|_inf (flux with Hessian only)

    double sup_excess_max = 0.0;
    double gradient_excess_max = 0.0;
    double chord_gap_excess_max = 0.0;
    double curvature_excess_max = std::numeric_limits<double>::quiet_NaN();

    bool has_curvature() const { return !curvature_excess.empty(); }
};

inline MonitorReport monitor_bounds(const Trajectory& traj) {
    if (!traj.has_gradients())
        throw std::invalid_argument("monitor_bounds: gradient states required (run evolve_gradient)");
    const int n = traj.grid.n;
    const int m = traj.shift.m;
    const double h = traj.shift.h(traj.grid);
    const double f00 = std::abs(traj.flux.value(0.0, 0.0));
    const double sup0 = traj.initial.sup_norm;
    const double lip0 = traj.initial.lip_norm;
    const double m2 = traj.initial.second_norm;

    MonitorReport rep;
    rep.times = traj.times;
    const std::size_t count = traj.states.size();
    rep.sup_excess.resize(count);
    rep.gradient_excess.resize(count);
    rep.chord_gap_excess.resize(count);
    if (traj.has_second()) rep.curvature_excess.resize(count);

    double s1 = -std::numeric_limits<double>::infinity();
    double s2 = s1, s3 = s1, s4 = s1;
    for (std::size_t k = 0; k < count; ++k) {
        const GridFunction& u = traj.states[k];
        const GridFunction& v = traj.gradient_states[k];
        const double t = rep.times[k];

        double chord = 0.0, gap1 = -std::numeric_limits<double>::infinity();
        double gap2 = gap1, gap3 = gap1;
        for (int i = 0; i < n; ++i) {
            const int ip = i + m < n ? i + m : i + m - n;
            const int im = i - m >= 0 ? i - m : i - m + n;
            const double dh = (u[ip] - u[i]) / h;
            const double dmh = (u[i] - u[im]) / h;
            chord = std::max(chord, std::max(std::abs(dh), std::abs(dmh)));
            gap1 = std::max(gap1, v[ip] - dh);
            gap2 = std::max(gap2, -(v[im] - dmh));
            gap3 = std::max(gap3, dh - v[i]);
        }
        rep.sup_excess[k] = u.sup_norm() - (sup0 + f00 * t);
        rep.gradient_excess[k] = std::max(v.sup_norm(), chord) - lip0;
        rep.chord_gap_excess[k] = std::max({gap1, gap2, gap3}) - h * m2;
        s1 = std::max(s1, rep.sup_excess[k]);
        s2 = std::max(s2, rep.gradient_excess[k]);
        s3 = std::max(s3, rep.chord_gap_excess[k]);
        if (traj.has_second()) {
            rep.curvature_excess[k] = traj.second_states[k].max_value() - m2;
            s4 = std::max(s4, rep.curvature_excess[k]);
        }
    }
    rep.sup_excess_max = s1;
    rep.gradient_excess_max = s2;
    rep.chord_gap_excess_max = s3;
    if (traj.has_second()) rep.curvature_excess_max = s4;
    return rep;
}

} // namespace hjfd
