#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hjfd {

/// Uniform lattice on the unit torus. Periodicity is a property of index
/// arithmetic: node i sits at i/n and indices wrap modulo n, so no
/// floating-point coordinate ever decides adjacency.
struct PeriodicGrid {
    int n;

    explicit PeriodicGrid(int node_count) : n(node_count) {
        if (n < 2) throw std::invalid_argument("PeriodicGrid: need at least 2 nodes");
    }

    double dx() const { return 1.0 / n; }

    int wrap(long long i) const {
        long long r = i % n;
        return static_cast<int>(r < 0 ? r + n : r);
    }

    double node(long long i) const { return wrap(i) * dx(); }

    friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) { return a.n == b.n; }
    friend bool operator!=(const PeriodicGrid& a, const PeriodicGrid& b) { return a.n != b.n; }
};

/// Real values on the nodes of a PeriodicGrid.
struct GridFunction {
    PeriodicGrid grid;
    std::vector<double> values;

    explicit GridFunction(PeriodicGrid g) : grid(g), values(static_cast<std::size_t>(g.n), 0.0) {}

    GridFunction(PeriodicGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid.n)
            throw std::invalid_argument("GridFunction: value count must equal node count");
    }

    /// Point samples of a function of the torus coordinate.
    template <class F>
    static GridFunction sample(PeriodicGrid g, F&& f) {
        GridFunction out(g);
        for (int i = 0; i < g.n; ++i) out.values[static_cast<std::size_t>(i)] = f(g.node(i));
        return out;
    }

    static GridFunction constant(PeriodicGrid g, double c) {
        GridFunction out(g);
        std::fill(out.values.begin(), out.values.end(), c);
        return out;
    }

    int size() const { return grid.n; }

    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }

    /// Wrapped access: any signed index.
    double at(long long i) const { return values[static_cast<std::size_t>(grid.wrap(i))]; }

    double sup_norm() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    double max_value() const { return *std::max_element(values.begin(), values.end()); }
    double min_value() const { return *std::min_element(values.begin(), values.end()); }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what) {
    if (a.grid != b.grid) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// Signed lattice shift of m nodes; the induced torus shift is h = m/n.
struct ShiftParam {
    int m = 1;

    double h(const PeriodicGrid& g) const { return m * g.dx(); }
};

inline void validate_shift(const PeriodicGrid& g, ShiftParam s) {
    if (s.m == 0) throw std::invalid_argument("ShiftParam: m must be nonzero");
    if (std::abs(s.m) >= g.n) throw std::invalid_argument("ShiftParam: |m| must be smaller than n");
}

} // namespace hjfd
