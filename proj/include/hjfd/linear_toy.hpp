#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hjfd/adjoint.hpp"
#include "hjfd/discrete_calculus.hpp"
#include "hjfd/grid.hpp"

namespace hjfd {

namespace detail {

/// Dense LU with partial pivoting, in place; returns false on a vanishing
/// pivot. Only used for the small cyclic systems of the stationary model.
inline bool lu_solve(std::vector<double>& a, std::vector<double>& b, int n) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    const auto at = [&](int r, int c) -> double& {
        return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)];
    };
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(at(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(at(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-300) return false;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(at(col, c), at(pivot, c));
            std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double factor = at(r, col) / at(col, col);
            at(r, col) = 0.0;
            if (factor == 0.0) continue;
            for (int c = col + 1; c < n; ++c) at(r, c) -= factor * at(col, c);
            b[static_cast<std::size_t>(r)] -= factor * b[static_cast<std::size_t>(col)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c) acc -= at(r, c) * b[static_cast<std::size_t>(c)];
        b[static_cast<std::size_t>(r)] = acc / at(r, r);
    }
    return true;
}

template <class F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) throw std::runtime_error("adaptive quadrature did not converge");
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

} // namespace detail

/// The stationary model u + u_x = f on the torus, with the declared bound on
/// |f''| that drives the O(h) rate.
struct ToyProblem {
    PeriodicGrid grid;
    std::function<double(double)> f; // null for raw-sample problems
    double fxx_norm = 0.0;
    GridFunction samples;

    static ToyProblem from_function(PeriodicGrid g, std::function<double(double)> fn,
                                    double fxx_norm) {
        if (!fn) throw std::invalid_argument("ToyProblem: source evaluator required");
        GridFunction s = GridFunction::sample(g, fn);
        return ToyProblem{g, std::move(fn), fxx_norm, std::move(s)};
    }

    static ToyProblem from_samples(GridFunction s, double fxx_norm) {
        PeriodicGrid g = s.grid;
        return ToyProblem{g, nullptr, fxx_norm, std::move(s)};
    }
};

/// Exact solution of u + u_x = f via the integrating-factor formula
///   u(x) = e^{-x} [u(0) + int_0^x f(s) e^s ds],
///   u(0) = int_0^1 f(s) e^s ds / (e - 1),
/// with adaptive quadrature.
inline double toy_exact_solution(const ToyProblem& prob, double x, double tol = 1e-12) {
    if (!prob.f) throw std::invalid_argument("toy_exact_solution: needs a closed-form source");
    const auto integrand = [&](double s) { return prob.f(s) * std::exp(s); };
    const double denom = detail::adaptive_simpson(integrand, 0.0, 1.0, tol);
    const double u0 = denom / (std::exp(1.0) - 1.0);
    const double xr = x - std::floor(x);
    const double part = detail::adaptive_simpson(integrand, 0.0, xr, tol);
    return std::exp(-xr) * (u0 + part);
}

inline GridFunction toy_exact_on_grid(const ToyProblem& prob, double tol = 1e-13) {
    if (!prob.f) throw std::invalid_argument("toy_exact_on_grid: needs a closed-form source");
    const int n = prob.grid.n;
    const auto integrand = [&](double s) { return prob.f(s) * std::exp(s); };
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i)
        prefix[static_cast<std::size_t>(i) + 1] =
            prefix[static_cast<std::size_t>(i)] +
            detail::adaptive_simpson(integrand, prob.grid.node(i),
                                     static_cast<double>(i + 1) / n, tol / n);
    const double u0 = prefix[static_cast<std::size_t>(n)] / (std::exp(1.0) - 1.0);
    GridFunction out(prob.grid);
    for (int i = 0; i < n; ++i)
        out[i] = std::exp(-prob.grid.node(i)) * (u0 + prefix[static_cast<std::size_t>(i)]);
    return out;
}

enum class ToyOrientation { upwind, downwind };

struct ToySolveReport {
    std::optional<GridFunction> solution;
    bool upwinded = false;
    bool diagonally_dominant = false;
    double diagonal_margin = 0.0; // min over rows of |diag| - sum|off-diag|
    bool singular = false;
    std::string note;
};

namespace detail {

// Cyclic matrix of u + (difference) u = f. forward: the delta_h operator
// couples node i to i+m; backward: the delta_{-h} operator couples i to i-m.
inline std::vector<double> toy_matrix(const PeriodicGrid& g, ShiftParam s, bool forward) {
    const int n = g.n;
    const double h = s.h(g);
    std::vector<double> a(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
        if (forward) {
            a[row + static_cast<std::size_t>(i)] += 1.0 - 1.0 / h;
            a[row + static_cast<std::size_t>(g.wrap(static_cast<long long>(i) + s.m))] += 1.0 / h;
        } else {
            a[row + static_cast<std::size_t>(i)] += 1.0 + 1.0 / h;
            a[row + static_cast<std::size_t>(g.wrap(static_cast<long long>(i) - s.m))] += -1.0 / h;
        }
    }
    return a;
}

inline double diagonal_margin(const std::vector<double>& a, int n) {
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double diag = 0.0, off = 0.0;
        for (int j = 0; j < n; ++j) {
            const double v = a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                               static_cast<std::size_t>(j)];
            if (j == i) diag = std::abs(v);
            else off += std::abs(v);
        }
        margin = std::min(margin, diag - off);
    }
    return margin;
}

} // namespace detail

/// Solve the upwinded discretization chosen by the sign of h: the delta_h
/// equation for h < 0, the delta_{-h} equation for h > 0. Either way the
/// cyclic matrix is strictly diagonally dominant with nonpositive
/// off-diagonal entries, hence inverse-positive.
inline GridFunction direct_solve(const ToyProblem& prob, ShiftParam s) {
    validate_shift(prob.grid, s);
    const bool forward = s.m < 0;
    std::vector<double> a = detail::toy_matrix(prob.grid, s, forward);
    std::vector<double> b = prob.samples.values;
    if (!detail::lu_solve(a, b, prob.grid.n))
        throw std::runtime_error("direct_solve: singular system");
    return GridFunction(prob.grid, std::move(b));
}

/// Same solve with the orientation forced, reporting diagnostics instead of
/// silently failing: the wrong orientation loses diagonal dominance and with
/// it the maximum principle behind the adjoint measure.
inline ToySolveReport direct_solve_report(const ToyProblem& prob, ShiftParam s,
                                          ToyOrientation orientation) {
    validate_shift(prob.grid, s);
    const bool upwind_forward = s.m < 0;
    const bool forward = orientation == ToyOrientation::upwind ? upwind_forward : !upwind_forward;
    std::vector<double> a = detail::toy_matrix(prob.grid, s, forward);

    ToySolveReport rep;
    rep.upwinded = orientation == ToyOrientation::upwind;
    rep.diagonal_margin = detail::diagonal_margin(a, prob.grid.n);
    rep.diagonally_dominant = rep.diagonal_margin > 0.0;
    std::vector<double> b = prob.samples.values;
    if (detail::lu_solve(a, b, prob.grid.n)) {
        rep.solution = GridFunction(prob.grid, std::move(b));
    } else {
        rep.singular = true;
    }
    if (!rep.diagonally_dominant)
        rep.note = "difference direction opposes the characteristic flow: the cyclic matrix "
                   "is not diagonally dominant, so inverse-positivity (and the probability "
                   "property of the adjoint) is lost";
    return rep;
}

struct SeriesResult {
    GridFunction u;
    int terms = 0;
    double tail_bound = 0.0;
};

/// Geometric-series solution for h < 0:
///   u(x) = (-h/(1-h)) sum_{j>=0} (1-h)^{-j} f(x + j h),
/// truncated once the tail bound |f|_inf (1-h)^{-N} drops below tol.
inline SeriesResult series_solution(const ToyProblem& prob, ShiftParam s, double tol) {
    validate_shift(prob.grid, s);
    if (s.m >= 0) throw std::invalid_argument("series_solution: requires h < 0");
    if (!(tol > 0.0)) throw std::invalid_argument("series_solution: tol must be positive");
    const double h = s.h(prob.grid);
    const double fnorm = prob.samples.sup_norm();
    int terms = 1;
    if (fnorm > tol)
        terms = static_cast<int>(std::ceil(std::log(fnorm / tol) / std::log1p(-h)));
    const double pref = -h / (1.0 - h);
    const double ratio = 1.0 / (1.0 - h);

    GridFunction out(prob.grid);
    const int n = prob.grid.n;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        double weight = 1.0;
        long long idx = i;
        for (int j = 0; j < terms; ++j) {
            acc += weight * prob.samples.at(idx);
            weight *= ratio;
            idx += s.m;
        }
        out[i] = pref * acc;
    }
    return {std::move(out), terms, fnorm * std::pow(ratio, terms)};
}

/// Finite closed form for rational h = p/q in (0,1) (the delta_h equation):
///   u(x) = [-h (1-h)^{q-1} / ((1-h)^q - 1)] sum_{j=0}^{q-1} (1-h)^{-j} f(x + j h).
/// Lattice compatibility requires q to divide n.
inline GridFunction rational_closed_form(const ToyProblem& prob, int p, int q) {
    if (p < 1 || q < 2 || p >= q) throw std::invalid_argument("rational_closed_form: need 0 < p/q < 1");
    if (prob.grid.n % q != 0)
        throw std::invalid_argument("rational_closed_form: q must divide the node count");
    const double h = static_cast<double>(p) / q;
    const double base = 1.0 - h;
    double base_pow_q = 1.0;
    for (int j = 0; j < q; ++j) base_pow_q *= base;
    const double denom = base_pow_q - 1.0;
    if (std::abs(denom) < 1e-300) throw std::invalid_argument("rational_closed_form: singular prefactor");
    const double pref = -h * (base_pow_q / base) / denom;
    const int node_step = p * (prob.grid.n / q);

    GridFunction out(prob.grid);
    for (int i = 0; i < prob.grid.n; ++i) {
        double acc = 0.0;
        double weight = 1.0;
        long long idx = i;
        for (int j = 0; j < q; ++j) {
            acc += weight * prob.samples.at(idx);
            weight /= base;
            idx += node_step;
        }
        out[i] = pref * acc;
    }
    return out;
}

/// Stationary adjoint measure: the transpose of the upwinded h < 0 system
/// with a unit mass at x0. Mass is exactly 1 (the matrix has unit row sums)
/// and the weights are nonnegative (inverse-positive transpose).
inline DiscreteMeasure stationary_adjoint(PeriodicGrid g, ShiftParam s, int x0_node) {
    validate_shift(g, s);
    if (s.m >= 0) throw std::invalid_argument("stationary_adjoint: requires h < 0");
    const int n = g.n;
    const double h = s.h(g);
    std::vector<double> a(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * static_cast<std::size_t>(n);
        a[row + static_cast<std::size_t>(j)] += 1.0 - 1.0 / h;
        a[row + static_cast<std::size_t>(g.wrap(static_cast<long long>(j) - s.m))] += 1.0 / h;
    }
    std::vector<double> b(static_cast<std::size_t>(n), 0.0);
    b[static_cast<std::size_t>(g.wrap(x0_node))] = 1.0;
    if (!detail::lu_solve(a, b, n)) throw std::runtime_error("stationary_adjoint: singular system");
    return DiscreteMeasure{g, std::move(b)};
}

struct ToyRateRow {
    double h = 0.0;
    double sup_error = 0.0;
    double local_rate = std::numeric_limits<double>::quiet_NaN();
};

struct ToyRateTable {
    std::vector<ToyRateRow> rows;
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool exact = false;    // every error at rounding level
    bool monotone = false; // errors strictly decreasing along the list
};

/// Sup errors of the upwinded solve against the quadrature solution over a
/// list of lattice shifts (n, m) with m < 0, plus the fitted log-log slope.
inline ToyRateTable toy_rate_check(const std::function<double(double)>& f, double fxx_norm,
                                   const std::vector<std::pair<int, int>>& lattice_shifts) {
    if (lattice_shifts.size() < 3)
        throw std::invalid_argument("toy_rate_check: need at least 3 shift sizes");
    ToyRateTable table;
    for (const auto& [n, m] : lattice_shifts) {
        if (m >= 0) throw std::invalid_argument("toy_rate_check: shifts must have m < 0");
        const ToyProblem prob = ToyProblem::from_function(PeriodicGrid(n), f, fxx_norm);
        const GridFunction numeric = direct_solve(prob, ShiftParam{m});
        const GridFunction exact = toy_exact_on_grid(prob);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(numeric[i] - exact[i]));
        table.rows.push_back({ShiftParam{m}.h(prob.grid), err, std::numeric_limits<double>::quiet_NaN()});
    }
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
        const double e0 = table.rows[k - 1].sup_error, e1 = table.rows[k].sup_error;
        const double h0 = std::abs(table.rows[k - 1].h), h1 = std::abs(table.rows[k].h);
        if (e0 > 0.0 && e1 > 0.0) table.rows[k].local_rate = std::log(e0 / e1) / std::log(h0 / h1);
    }
    table.exact = true;
    table.monotone = true;
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        if (table.rows[k].sup_error > 1e-13) table.exact = false;
        if (k > 0 && !(table.rows[k].sup_error < table.rows[k - 1].sup_error)) table.monotone = false;
    }
    if (!table.exact) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int count = 0;
        for (const ToyRateRow& row : table.rows) {
            if (row.sup_error <= 1e-14) continue;
            const double lx = std::log(std::abs(row.h)), ly = std::log(row.sup_error);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++count;
        }
        if (count >= 2) table.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    }
    return table;
}

} // namespace hjfd
