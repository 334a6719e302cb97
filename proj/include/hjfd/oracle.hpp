#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hjfd/errors.hpp"
#include "hjfd/grid.hpp"
#include "hjfd/hamiltonian.hpp"
#include "hjfd/initial_data.hpp"
#include "hjfd/numerical_flux.hpp"
#include "hjfd/solver.hpp"

namespace hjfd {

/// Exact viscosity solution via the variational (Hopf-Lax) formula
///   u(x,t) = min_y [ u0(y) + t L((x - y)/t) ],   L = Legendre dual of H.
/// Minimization: coarse scan over the finite-speed window, then
/// golden-section refinement around the scan minimizer.
struct ExactSolution {
    std::function<double(double)> u0; // periodic evaluator
    Hamiltonian hamiltonian = Hamiltonian::quadratic();
    double gradient_radius = 1.0; // window speed Q = max |H'| on +-gradient_radius
    double refine_tol = 1e-10;
    int window_points = 10000; // minimum scan points per window
};

namespace detail {

/// L(q) = max_p (pq - H(p)); closed forms for the shipped kinds, bracket
/// expansion for tabulated ones (coercivity keeps the maximizer finite).
inline double legendre_value(const Hamiltonian& h, double q) {
    switch (h.kind()) {
    case Hamiltonian::Kind::quadratic: return 0.5 * q * q;
    case Hamiltonian::Kind::power_even: {
        const int a = h.exponent();
        const double conj = static_cast<double>(a) / (a - 1);
        return (1.0 - 1.0 / a) * std::pow(std::abs(q), conj);
    }
    case Hamiltonian::Kind::tabulated: {
        double radius = std::max(1.0, std::abs(q));
        for (int grow = 0; grow < 40; ++grow) {
            try {
                return legendre(h, q, -radius, radius);
            } catch (const RangeTooSmall&) {
                radius *= 2.0;
            }
        }
        throw RangeTooSmall("legendre_value: maximizer escapes every bracket");
    }
    }
    return 0.0;
}

template <class Psi>
double golden_min(Psi&& psi, double lo, double hi, double xtol) {
    const auto neg = [&](double y) { return -psi(y); };
    return -golden_max(neg, lo, hi, xtol);
}

} // namespace detail

/// One-point Hopf-Lax evaluation. t = 0 returns u0(x).
inline double hopf_lax(const ExactSolution& sol, double x, double t) {
    if (t < 0.0) throw std::invalid_argument("hopf_lax: t must be nonnegative");
    if (t == 0.0) return sol.u0(x);
    const double speed = max_abs_derivative(sol.hamiltonian, sol.gradient_radius);
    const double w = t * speed + 1.0;
    const int points = std::max(sol.window_points, 2);
    const double y_lo = x - w;
    const double step = 2.0 * w / (points - 1);
    const double inv_t = 1.0 / t;
    const auto psi = [&](double y) {
        return sol.u0(y) + t * detail::legendre_value(sol.hamiltonian, (x - y) * inv_t);
    };
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int j = 0; j < points; ++j) {
        const double v = psi(y_lo + step * j);
        if (v < best_val) {
            best_val = v;
            best = j;
        }
    }
    const double a = y_lo + step * std::max(0, best - 1);
    const double b = y_lo + step * std::min(points - 1, best + 1);
    return detail::golden_min(psi, a, b, sol.refine_tol);
}

/// Bulk Hopf-Lax evaluator: per time level it lays one shared scan grid over
/// the union of all node windows (never fewer than window_points per window),
/// samples u0 on it once, and reuses the samples for every node before the
/// per-node golden refinement.
class HopfLaxOracle {
public:
    explicit HopfLaxOracle(ExactSolution sol)
        : sol_(std::move(sol)),
          speed_(max_abs_derivative(sol_.hamiltonian, sol_.gradient_radius)) {}

    double value(double x, double t) const { return hopf_lax(sol_, x, t); }
    double window_speed() const { return speed_; }

    GridFunction profile(const PeriodicGrid& grid, double t) const {
        if (t < 0.0) throw std::invalid_argument("HopfLaxOracle: t must be nonnegative");
        if (t == 0.0) return GridFunction::sample(grid, sol_.u0);
        const double w = t * speed_ + 1.0;
        const double step = 2.0 * w / (std::max(sol_.window_points, 2) - 1);
        const double y_lo = 0.0 - w;
        const double y_hi = 1.0 + w;
        const int points = static_cast<int>(std::ceil((y_hi - y_lo) / step)) + 1;
        std::vector<double> u0v(static_cast<std::size_t>(points));
        for (int j = 0; j < points; ++j) u0v[static_cast<std::size_t>(j)] = sol_.u0(y_lo + step * j);

        const double inv_t = 1.0 / t;
        const auto psi = [&](double x, double y) {
            return sol_.u0(y) + t * detail::legendre_value(sol_.hamiltonian, (x - y) * inv_t);
        };

        GridFunction out(grid);
        for (int i = 0; i < grid.n; ++i) {
            const double x = grid.node(i);
            const int j_lo = std::max(0, static_cast<int>(std::ceil((x - w - y_lo) / step - 1e-9)));
            const int j_hi = std::min(points - 1, static_cast<int>(std::floor((x + w - y_lo) / step + 1e-9)));
            int best = j_lo;
            double best_val = std::numeric_limits<double>::infinity();
            for (int j = j_lo; j <= j_hi; ++j) {
                const double q = (x - (y_lo + step * j)) * inv_t;
                const double v = u0v[static_cast<std::size_t>(j)] +
                                 t * detail::legendre_value(sol_.hamiltonian, q);
                if (v < best_val) {
                    best_val = v;
                    best = j;
                }
            }
            const double a = y_lo + step * std::max(j_lo, best - 1);
            const double b = y_lo + step * std::min(j_hi, best + 1);
            out[i] = detail::golden_min([&](double y) { return psi(x, y); }, a, b, sol_.refine_tol);
        }
        return out;
    }

private:
    ExactSolution sol_;
    double speed_;
};

/// Numerical reference: the same scheme at a much finer lattice, restricted
/// to the study grid by exact nodal subsampling (shared nodes are copied
/// bitwise). Pre: n_ref a multiple of the study node count and >= 8x finer.
inline GridFunction fine_reference(const InitialDataSpec& u0, const NumericalFlux& flux, double T,
                                   int n_ref, const PeriodicGrid& study_grid, double cfl = 0.5) {
    if (!u0.resamplable())
        throw std::invalid_argument("fine_reference: initial data must be resamplable");
    if (n_ref % study_grid.n != 0)
        throw std::invalid_argument("fine_reference: n_ref must be a multiple of the study grid size");
    if (n_ref < 8 * study_grid.n)
        throw std::invalid_argument("fine_reference: reference lattice must be at least 8x finer");
    const PeriodicGrid fine(n_ref);
    const GridFunction full = solve_final_state(u0.materialize(fine), flux, ShiftParam{1}, T, cfl);
    const int stride = n_ref / study_grid.n;
    GridFunction out(study_grid);
    for (int i = 0; i < study_grid.n; ++i) out[i] = full[i * stride];
    return out;
}

inline double sup_distance(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b, "sup_distance");
    double m = 0.0;
    for (int i = 0; i < a.grid.n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace hjfd
