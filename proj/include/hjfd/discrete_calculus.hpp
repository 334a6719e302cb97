#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hjfd/grid.hpp"

namespace hjfd {

/// Forward/backward difference quotient on the lattice:
///   (delta f)_i = (f_{i+m} - f_i) / (m dx),  indices mod n.
/// A negative m gives the reversed quotient, so delta with -m is exactly the
/// operator usually written with -h.
inline GridFunction delta(const GridFunction& f, ShiftParam s) {
    validate_shift(f.grid, s);
    const int n = f.grid.n;
    const double h = s.h(f.grid);
    GridFunction out(f.grid);
    for (int i = 0; i < n; ++i)
        out[i] = (f.at(static_cast<long long>(i) + s.m) - f[i]) / h;
    return out;
}

/// Symmetric second difference:
///   (second_delta f)_i = (f_{i+m} - 2 f_i + f_{i-m}) / (m dx)^2,  m > 0.
inline GridFunction second_delta(const GridFunction& f, ShiftParam s) {
    validate_shift(f.grid, s);
    if (s.m <= 0) throw std::invalid_argument("second_delta: m must be positive");
    const int n = f.grid.n;
    const double h = s.h(f.grid);
    const double h2 = h * h;
    GridFunction out(f.grid);
    for (int i = 0; i < n; ++i) {
        const long long k = i;
        out[i] = (f.at(k + s.m) - 2.0 * f[i] + f.at(k - s.m)) / h2;
    }
    return out;
}

/// Torus integral, trapezoid = rectangle rule on a periodic lattice.
inline double integrate(const GridFunction& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v;
    return acc * f.grid.dx();
}

inline double inner(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g, "inner");
    double acc = 0.0;
    for (int i = 0; i < f.grid.n; ++i) acc += f[i] * g[i];
    return acc * f.grid.dx();
}

/// Max absolute residuals of the exact difference-calculus identities, one
/// field per identity. Every identity holds exactly in real arithmetic; the
/// residuals only measure rounding.
struct IdentityReport {
    double shift_reflect = 0.0;    // delta_h w(x-h) = delta_{-h} w(x)
    double mixed_commute = 0.0;    // delta_{-h}[delta_h w] = delta_h[delta_{-h} w] = Delta_h w
    double double_shift = 0.0;     // delta_h[delta_h w](x) = Delta_h w(x+h)
    double product_rule = 0.0;     // delta_h(vw) = v(x+h) delta_h w + w delta_h v
    double square_rule = 0.0;      // delta_h[w^2] = 2 w delta_h w + h (delta_h w)^2
    double laplacian_square = 0.0; // Delta_h[w^2] = 2 w Delta_h w + (delta_h w)^2 + (delta_{-h} w)^2
    double parts_first = 0.0;      // int w delta_h v = -int v delta_{-h} w
    double parts_second = 0.0;     // int delta_h v delta_h w = -int w Delta_h v

    double max_residual() const {
        return std::max({shift_reflect, mixed_commute, double_shift, product_rule, square_rule,
                         laplacian_square, parts_first, parts_second});
    }
};

/// Evaluates both sides of each identity pointwise over all nodes and reports
/// the max absolute residual. The internal arithmetic runs in long double:
/// the second-difference identities live at O(1/h^2) magnitudes where two
/// independently rounded double evaluations would dominate the residual.
inline IdentityReport verify_identities(const GridFunction& f, const GridFunction& g,
                                        ShiftParam s) {
    require_same_grid(f, g, "verify_identities");
    validate_shift(f.grid, s);
    using ld = long double;
    const int n = f.grid.n;
    const int m = s.m;
    const ld h = static_cast<ld>(m) / n;
    const ld dx = static_cast<ld>(1) / n;

    const auto at = [n](const GridFunction& w, long long i) -> ld {
        long long r = i % n;
        return w.values[static_cast<std::size_t>(r < 0 ? r + n : r)];
    };
    const auto dpl = [&](const GridFunction& w, long long i) { return (at(w, i + m) - at(w, i)) / h; };
    const auto dmi = [&](const GridFunction& w, long long i) { return (at(w, i - m) - at(w, i)) / -h; };
    const auto lap = [&](const GridFunction& w, long long i) {
        return (at(w, i + m) - 2 * at(w, i) + at(w, i - m)) / (h * h);
    };
    const auto sq = [&](const GridFunction& w, long long i) { ld v = at(w, i); return v * v; };
    const auto dpl_sq = [&](const GridFunction& w, long long i) { return (sq(w, i + m) - sq(w, i)) / h; };
    const auto lap_sq = [&](const GridFunction& w, long long i) {
        return (sq(w, i + m) - 2 * sq(w, i) + sq(w, i - m)) / (h * h);
    };

    IdentityReport rep;
    const auto bump = [](double& slot, ld r) {
        slot = std::max(slot, static_cast<double>(std::fabs(static_cast<double>(r))));
    };

    for (const GridFunction* wp : {&f, &g}) {
        const GridFunction& w = *wp;
        for (int i = 0; i < n; ++i) {
            bump(rep.shift_reflect, dpl(w, static_cast<long long>(i) - m) - dmi(w, i));
            const ld forward_then_back = (dpl(w, static_cast<long long>(i) - m) - dpl(w, i)) / -h;
            const ld back_then_forward = (dmi(w, static_cast<long long>(i) + m) - dmi(w, i)) / h;
            bump(rep.mixed_commute, forward_then_back - lap(w, i));
            bump(rep.mixed_commute, back_then_forward - lap(w, i));
            const ld twice_forward = (dpl(w, static_cast<long long>(i) + m) - dpl(w, i)) / h;
            bump(rep.double_shift, twice_forward - lap(w, static_cast<long long>(i) + m));
            bump(rep.square_rule, dpl_sq(w, i) - (2 * at(w, i) * dpl(w, i) + h * dpl(w, i) * dpl(w, i)));
            bump(rep.laplacian_square,
                 lap_sq(w, i) - (2 * at(w, i) * lap(w, i) + dpl(w, i) * dpl(w, i) + dmi(w, i) * dmi(w, i)));
        }
    }

    for (int i = 0; i < n; ++i) {
        const ld prod_p = at(f, static_cast<long long>(i) + m) * at(g, static_cast<long long>(i) + m);
        const ld prod_0 = at(f, i) * at(g, i);
        const ld lhs = (prod_p - prod_0) / h;
        const ld rhs = at(f, static_cast<long long>(i) + m) * dpl(g, i) + at(g, i) * dpl(f, i);
        bump(rep.product_rule, lhs - rhs);
    }

    ld parts1 = 0, parts2 = 0;
    for (int i = 0; i < n; ++i) {
        parts1 += at(g, i) * dpl(f, i) + at(f, i) * dmi(g, i);
        parts2 += dpl(f, i) * dpl(g, i) + at(g, i) * lap(f, i);
    }
    bump(rep.parts_first, parts1 * dx);
    bump(rep.parts_second, parts2 * dx);
    return rep;
}

} // namespace hjfd
