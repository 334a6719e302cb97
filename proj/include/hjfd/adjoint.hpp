#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hjfd/discrete_calculus.hpp"
#include "hjfd/errors.hpp"
#include "hjfd/grid.hpp"
#include "hjfd/solver.hpp"

namespace hjfd {

/// Nonnegative unit-mass node weights. Weights are masses, not densities:
/// they sum to 1 and every pairing against a grid function omits dx.
struct DiscreteMeasure {
    PeriodicGrid grid;
    std::vector<double> weights;

    static DiscreteMeasure dirac(PeriodicGrid g, int node) {
        DiscreteMeasure m{g, std::vector<double>(static_cast<std::size_t>(g.n), 0.0)};
        m.weights[static_cast<std::size_t>(g.wrap(node))] = 1.0;
        return m;
    }

    /// Dirac at the node nearest to x0, ties broken toward the lower index.
    static DiscreteMeasure dirac_at(PeriodicGrid g, double x0) {
        const long long node = static_cast<long long>(std::ceil(x0 * g.n - 0.5));
        return dirac(g, g.wrap(node));
    }

    static DiscreteMeasure uniform(PeriodicGrid g) {
        return DiscreteMeasure{g, std::vector<double>(static_cast<std::size_t>(g.n), 1.0 / g.n)};
    }

    double mass() const {
        double acc = 0.0;
        for (double w : weights) acc += w;
        return acc;
    }

    double min_weight() const {
        double m = std::numeric_limits<double>::infinity();
        for (double w : weights) m = std::min(m, w);
        return m;
    }

    void validate(double mass_tol = 1e-12, double negative_tol = 1e-14) const {
        if (static_cast<int>(weights.size()) != grid.n)
            throw std::invalid_argument("DiscreteMeasure: weight count must equal node count");
        if (std::abs(mass() - 1.0) > mass_tol)
            throw std::invalid_argument("DiscreteMeasure: total mass must be 1");
        if (min_weight() < -negative_tol)
            throw std::invalid_argument("DiscreteMeasure: weights must be nonnegative");
    }
};

/// Action of the linearized operator at a frozen carrier state:
///   (A v)_i = D_p F (delta_h v)_i - D_q F (delta_{-h} v)_i,
/// coefficients evaluated at (-delta_h state, delta_{-h} state). This is the
/// time derivative the linearized equation assigns to v.
inline GridFunction linearized_apply(const GridFunction& state, const NumericalFlux& flux,
                                     ShiftParam s, const GridFunction& v) {
    require_same_grid(state, v, "linearized_apply");
    validate_shift(state.grid, s);
    if (s.m <= 0) throw std::invalid_argument("linearized_apply: m must be positive");
    const detail::FrozenCoefficients coeff(state, flux, s);
    GridFunction out(state.grid);
    detail::linearized_rhs_into(coeff, v, s, nullptr, out);
    return out;
}

/// Explicit stencil of linearized_apply: at node i the weight of v_{i+m} is
/// up_i = D_p F_i / h >= 0, of v_{i-m} is down_i = D_q F_i / h >= 0, and of
/// v_i is -(up_i + down_i), so every row sums to zero.
struct LinearizedStencil {
    std::vector<double> up, down, diag;
};

inline LinearizedStencil linearized_stencil(const GridFunction& state, const NumericalFlux& flux,
                                            ShiftParam s) {
    validate_shift(state.grid, s);
    const detail::FrozenCoefficients coeff(state, flux, s);
    const double h = s.h(state.grid);
    const std::size_t n = coeff.a.size();
    LinearizedStencil st{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        st.up[i] = coeff.a[i] / h;
        st.down[i] = coeff.b[i] / h;
        st.diag[i] = -(coeff.a[i] + coeff.b[i]) / h;
    }
    return st;
}

/// Transpose action A^T sigma in the mass-weight pairing: <A v, sigma> =
/// <v, A^T sigma> exactly (same coefficient arrays, reindexed).
inline std::vector<double> linearized_transpose_apply(const GridFunction& state,
                                                      const NumericalFlux& flux, ShiftParam s,
                                                      const std::vector<double>& sigma) {
    validate_shift(state.grid, s);
    const int n = state.grid.n;
    if (static_cast<int>(sigma.size()) != n)
        throw std::invalid_argument("linearized_transpose_apply: size mismatch");
    const detail::FrozenCoefficients coeff(state, flux, s);
    const int m = s.m;
    const double h = s.h(state.grid);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const int jp = j + m < n ? j + m : j + m - n;
        const int jm = j - m >= 0 ? j - m : j - m + n;
        const std::size_t uj = static_cast<std::size_t>(j);
        out[uj] = (coeff.a[static_cast<std::size_t>(jm)] * sigma[static_cast<std::size_t>(jm)] +
                   coeff.b[static_cast<std::size_t>(jp)] * sigma[static_cast<std::size_t>(jp)] -
                   (coeff.a[uj] + coeff.b[uj]) * sigma[uj]) /
                  h;
    }
    return out;
}

/// Backward-propagated measures, index k matching the forward step times:
/// measures[K] is the terminal datum, measures[0] sits at t = 0.
struct AdjointTrajectory {
    PeriodicGrid grid;
    double dt;
    std::vector<DiscreteMeasure> measures;

    const DiscreteMeasure& at_step(int k) const { return measures[static_cast<std::size_t>(k)]; }
    int steps() const { return static_cast<int>(measures.size()) - 1; }
};

/// Exact transpose of the discrete forward Euler linearized step
/// (discretize-then-adjoint): sigma^k = (I + dt A^k)^T sigma^{k+1}. Row sums
/// of A^k vanish, so total mass is conserved to rounding; under the CFL
/// limit every entry of I + dt A^k is nonnegative, so nonnegativity is
/// preserved exactly.
inline AdjointTrajectory propagate_adjoint(const Trajectory& traj, const DiscreteMeasure& terminal) {
    if (!traj.per_step_records())
        throw InsufficientTrajectory("propagate_adjoint: trajectory must record every step");
    if (traj.config.integrator != Integrator::euler)
        throw InsufficientTrajectory("propagate_adjoint: forward states must come from Euler steps");
    if (terminal.grid != traj.grid)
        throw std::invalid_argument("propagate_adjoint: terminal measure grid mismatch");
    terminal.validate();

    const int n = traj.grid.n;
    const int m = traj.shift.m;
    const double h = traj.shift.h(traj.grid);
    const double dt = traj.config.dt;
    const int steps = traj.config.steps;

    AdjointTrajectory adj{traj.grid, dt, {}};
    adj.measures.resize(static_cast<std::size_t>(steps) + 1,
                        DiscreteMeasure{traj.grid, std::vector<double>(static_cast<std::size_t>(n), 0.0)});
    adj.measures[static_cast<std::size_t>(steps)] = terminal;

    for (int k = steps - 1; k >= 0; --k) {
        const detail::FrozenCoefficients coeff(traj.states[static_cast<std::size_t>(k)], traj.flux,
                                               traj.shift);
        const std::vector<double>& next = adj.measures[static_cast<std::size_t>(k) + 1].weights;
        std::vector<double>& cur = adj.measures[static_cast<std::size_t>(k)].weights;
        const double r = dt / h;
        for (int j = 0; j < n; ++j) {
            const int jp = j + m < n ? j + m : j + m - n;
            const int jm = j - m >= 0 ? j - m : j - m + n;
            const std::size_t uj = static_cast<std::size_t>(j);
            cur[uj] = next[uj] + r * (coeff.a[static_cast<std::size_t>(jm)] * next[static_cast<std::size_t>(jm)] +
                                      coeff.b[static_cast<std::size_t>(jp)] * next[static_cast<std::size_t>(jp)] -
                                      (coeff.a[uj] + coeff.b[uj]) * next[uj]);
        }
    }
    return adj;
}

/// Residual of the summation-by-parts representation identity
///   sum_k dt <sigma^{k+1}, (theta^{k+1}-theta^k)/dt - A^k theta^k>
///     = <sigma^K, theta^K> - <sigma^0, theta^0>,
/// computed with the same pairing the propagation uses. Telescopes exactly,
/// so the residual is pure rounding for any theta sequence.
inline double representation_residual(const Trajectory& traj, const AdjointTrajectory& adj,
                                      const std::vector<GridFunction>& theta) {
    const int steps = traj.config.steps;
    if (static_cast<int>(theta.size()) != steps + 1)
        throw std::invalid_argument("representation_residual: need one theta per forward time");
    if (adj.steps() != steps)
        throw std::invalid_argument("representation_residual: adjoint/forward step mismatch");
    const int n = traj.grid.n;
    const double dt = traj.config.dt;

    double lhs = 0.0;
    for (int k = 0; k < steps; ++k) {
        const GridFunction a_theta =
            linearized_apply(traj.states[static_cast<std::size_t>(k)], traj.flux, traj.shift,
                             theta[static_cast<std::size_t>(k)]);
        const std::vector<double>& sig = adj.measures[static_cast<std::size_t>(k) + 1].weights;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            const double dtheta = (theta[static_cast<std::size_t>(k) + 1][i] -
                                   theta[static_cast<std::size_t>(k)][i]) / dt;
            acc += sig[ui] * (dtheta - a_theta[i]);
        }
        lhs += dt * acc;
    }

    double rhs = 0.0;
    const std::vector<double>& sig_end = adj.measures[static_cast<std::size_t>(steps)].weights;
    const std::vector<double>& sig_0 = adj.measures[0].weights;
    for (int i = 0; i < n; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        rhs += sig_end[ui] * theta[static_cast<std::size_t>(steps)][i] - sig_0[ui] * theta[0][i];
    }
    return std::abs(lhs - rhs);
}

/// h-weighted space-time energy
///   h sum_k dt sum_i [D_p F (delta_h v)^2 + D_q F (delta_{-h} v)^2]_i sigma_i
/// (probability-weight pairing, no dx). Nonnegative for monotone fluxes and
/// uniformly bounded in h.
inline double energy_flux_integral(const Trajectory& traj, const AdjointTrajectory& adj) {
    if (!traj.has_gradients())
        throw std::invalid_argument("energy_flux_integral: gradient states required");
    if (adj.steps() != traj.config.steps)
        throw std::invalid_argument("energy_flux_integral: adjoint/forward step mismatch");
    const int n = traj.grid.n;
    const int m = traj.shift.m;
    const double h = traj.shift.h(traj.grid);
    double total = 0.0;
    for (int k = 0; k < traj.config.steps; ++k) {
        const detail::FrozenCoefficients coeff(traj.states[static_cast<std::size_t>(k)], traj.flux,
                                               traj.shift);
        const GridFunction& v = traj.gradient_states[static_cast<std::size_t>(k)];
        const std::vector<double>& sig = adj.measures[static_cast<std::size_t>(k)].weights;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const int ip = i + m < n ? i + m : i + m - n;
            const int im = i - m >= 0 ? i - m : i - m + n;
            const std::size_t ui = static_cast<std::size_t>(i);
            const double a = (v[ip] - v[i]) / h;
            const double b = (v[i] - v[im]) / h;
            acc += (coeff.a[ui] * a * a + coeff.b[ui] * b * b) * sig[ui];
        }
        total += acc;
    }
    return h * traj.config.dt * total;
}

/// Variant of energy_flux_integral with the curvature field in place of the
/// gradient differences (both slots), i.e. h * int int (D_p F + D_q F) s^2
/// sigma. Reported as an experiment only; no bound is asserted for it.
inline double second_derivative_energy(const Trajectory& traj, const AdjointTrajectory& adj) {
    if (!traj.has_second())
        throw std::invalid_argument("second_derivative_energy: curvature states required");
    if (adj.steps() != traj.config.steps)
        throw std::invalid_argument("second_derivative_energy: adjoint/forward step mismatch");
    const int n = traj.grid.n;
    double total = 0.0;
    for (int k = 0; k < traj.config.steps; ++k) {
        const detail::FrozenCoefficients coeff(traj.states[static_cast<std::size_t>(k)], traj.flux,
                                               traj.shift);
        const GridFunction& sfield = traj.second_states[static_cast<std::size_t>(k)];
        const std::vector<double>& sig = adj.measures[static_cast<std::size_t>(k)].weights;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            acc += (coeff.a[ui] + coeff.b[ui]) * sfield[i] * sfield[i] * sig[ui];
        }
        total += acc;
    }
    return traj.shift.h(traj.grid) * traj.config.dt * total;
}

/// Compensated space-time energy of the central-plus-viscosity form,
///   h sum_k dt sum_i dx [Delta_h u (delta_h v + delta_{-h} v)]_i,
/// a plain torus integral (dx pairing). Only meaningful for the
/// crandall_lions flux, whose scheme carries the gamma h Delta_h u term.
inline double compensated_energy(const Trajectory& traj) {
    if (traj.flux.kind() != NumericalFlux::Kind::crandall_lions)
        throw UnsupportedOperation("compensated_energy: requires the crandall_lions flux");
    if (!traj.has_gradients())
        throw std::invalid_argument("compensated_energy: gradient states required");
    const int n = traj.grid.n;
    const int m = traj.shift.m;
    const double h = traj.shift.h(traj.grid);
    const double dx = traj.grid.dx();
    double total = 0.0;
    for (int k = 0; k < traj.config.steps; ++k) {
        const GridFunction& u = traj.states[static_cast<std::size_t>(k)];
        const GridFunction& v = traj.gradient_states[static_cast<std::size_t>(k)];
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const int ip = i + m < n ? i + m : i + m - n;
            const int im = i - m >= 0 ? i - m : i - m + n;
            const double lap = (u[ip] - 2.0 * u[i] + u[im]) / (h * h);
            const double dv_h = (v[ip] - v[i]) / h;
            const double dv_mh = (v[i] - v[im]) / h;
            acc += lap * (dv_h + dv_mh);
        }
        total += acc;
    }
    return h * traj.config.dt * total * dx;
}

/// Per-time extrema of the cross-grid finite difference in the shift size,
///   (u^{h + dx} - u^h) / dx  on a shared lattice and time grid,
/// together with the a-priori upper-rate constant
///   c_up = (sup D_p F + sup D_q F) |u0''|_inf.
struct HDerivativeReport {
    double h1 = 0.0, h2 = 0.0, dx = 0.0, dt = 0.0;
    double c_up = 0.0;
    std::vector<double> times;
    std::vector<double> max_values;
    std::vector<double> min_values;
};

namespace detail {

inline std::pair<double, double> max_partial_gradients(const NumericalFlux& flux, double radius,
                                                       int samples = 257) {
    double dp = 0.0, dq = 0.0;
    for (int i = 0; i < samples; ++i)
        for (int j = 0; j < samples; ++j) {
            const double p = -radius + 2.0 * radius * i / (samples - 1);
            const double q = -radius + 2.0 * radius * j / (samples - 1);
            const FluxGradient g = flux.grad(p, q);
            dp = std::max(dp, g.dp);
            dq = std::max(dq, g.dq);
        }
    return {dp, dq};
}

} // namespace detail

/// Solve at h1 = m dx and h2 = (m+1) dx on the same lattice with the same
/// Euler time grid, streaming the two runs in lockstep; no trajectory is
/// stored. Requires m >= 8 so that dx << h and the finite difference in the
/// shift size is meaningful.
inline HDerivativeReport h_derivative_estimate(const InitialDataSpec& u0, const NumericalFlux& flux,
                                               int n, int m, double T, double cfl = 0.5) {
    if (m < 8) throw std::invalid_argument("h_derivative_estimate: m must be >= 8");
    PeriodicGrid g(n);
    ShiftParam s1{m}, s2{m + 1};
    validate_shift(g, s2);
    const InitialData data = u0.materialize(g);
    const detail::StepPlan plan = detail::plan_steps(T, cfl, s1.h(g), flux, data.lip_norm);

    HDerivativeReport rep;
    rep.h1 = s1.h(g);
    rep.h2 = s2.h(g);
    rep.dx = g.dx();
    rep.dt = plan.dt;
    const auto [dp_max, dq_max] = detail::max_partial_gradients(flux, plan.box_radius);
    rep.c_up = (dp_max + dq_max) * data.second_norm;

    rep.times.reserve(static_cast<std::size_t>(plan.steps) + 1);
    rep.max_values.reserve(rep.times.capacity());
    rep.min_values.reserve(rep.times.capacity());

    GridFunction u1 = data.values;
    GridFunction u2 = data.values;
    const auto record = [&](double t) {
        double mx = -std::numeric_limits<double>::infinity();
        double mn = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double d = (u2[i] - u1[i]) / rep.dx;
            mx = std::max(mx, d);
            mn = std::min(mn, d);
        }
        rep.times.push_back(t);
        rep.max_values.push_back(mx);
        rep.min_values.push_back(mn);
    };
    record(0.0);
    for (int k = 0; k < plan.steps; ++k) {
        u1 = detail::euler_step(u1, flux, s1, plan.dt);
        u2 = detail::euler_step(u2, flux, s2, plan.dt);
        record((k + 1) * plan.dt);
    }
    return rep;
}

} // namespace hjfd
