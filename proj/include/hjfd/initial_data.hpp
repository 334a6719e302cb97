#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "hjfd/discrete_calculus.hpp"
#include "hjfd/grid.hpp"

namespace hjfd {

/// Initial datum together with its first two derivative fields and their sup
/// norms over the whole torus (not just the lattice); the a-priori bound
/// monitors compare against these norms.
struct InitialData {
    GridFunction values;
    GridFunction gradient;
    GridFunction second;
    double sup_norm = 0.0;
    double lip_norm = 0.0;    // sup |u0'|
    double second_norm = 0.0; // sup |u0''|
};

namespace detail {

template <class F>
double dense_abs_max(F&& f, int samples = 100001) {
    double m = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = static_cast<double>(i) / samples;
        m = std::max(m, std::abs(f(x)));
    }
    return m;
}

} // namespace detail

inline InitialData initial_cos(PeriodicGrid g, int harmonic = 1, double amplitude = 1.0) {
    if (harmonic < 1) throw std::invalid_argument("initial_cos: harmonic must be >= 1");
    const double w = 2.0 * std::numbers::pi * harmonic;
    InitialData d{GridFunction::sample(g, [&](double x) { return amplitude * std::cos(w * x); }),
                  GridFunction::sample(g, [&](double x) { return -amplitude * w * std::sin(w * x); }),
                  GridFunction::sample(g, [&](double x) { return -amplitude * w * w * std::cos(w * x); }),
                  std::abs(amplitude), std::abs(amplitude) * w, std::abs(amplitude) * w * w};
    return d;
}

inline InitialData initial_sin(PeriodicGrid g, int harmonic = 1, double amplitude = 1.0) {
    if (harmonic < 1) throw std::invalid_argument("initial_sin: harmonic must be >= 1");
    const double w = 2.0 * std::numbers::pi * harmonic;
    InitialData d{GridFunction::sample(g, [&](double x) { return amplitude * std::sin(w * x); }),
                  GridFunction::sample(g, [&](double x) { return amplitude * w * std::cos(w * x); }),
                  GridFunction::sample(g, [&](double x) { return -amplitude * w * w * std::sin(w * x); }),
                  std::abs(amplitude), std::abs(amplitude) * w, std::abs(amplitude) * w * w};
    return d;
}

namespace detail {

// C-infinity bump supported on (0,1), normalized to peak value 1 at x = 1/2.
inline double bump_value(double x) {
    const double s = 2.0 * x - 1.0;
    if (std::abs(s) >= 1.0 - 1e-12) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}
inline double bump_gradient(double x) {
    const double s = 2.0 * x - 1.0;
    if (std::abs(s) >= 1.0 - 1e-12) return 0.0;
    const double d = 1.0 - s * s;
    return bump_value(x) * (-2.0 * s / (d * d)) * 2.0;
}
inline double bump_second(double x) {
    const double s = 2.0 * x - 1.0;
    if (std::abs(s) >= 1.0 - 1e-12) return 0.0;
    const double d = 1.0 - s * s;
    const double phi1 = -2.0 * s / (d * d);
    const double phi2 = (-2.0 - 6.0 * s * s) / (d * d * d);
    return bump_value(x) * (phi1 * phi1 + phi2) * 4.0;
}

} // namespace detail

inline InitialData initial_bump(PeriodicGrid g, double amplitude = 1.0) {
    InitialData d{GridFunction::sample(g, [&](double x) { return amplitude * detail::bump_value(x); }),
                  GridFunction::sample(g, [&](double x) { return amplitude * detail::bump_gradient(x); }),
                  GridFunction::sample(g, [&](double x) { return amplitude * detail::bump_second(x); }),
                  std::abs(amplitude),
                  std::abs(amplitude) * detail::dense_abs_max(detail::bump_gradient),
                  std::abs(amplitude) * detail::dense_abs_max(detail::bump_second)};
    return d;
}

/// Raw nodal samples; derivatives fall back to centered differences and the
/// norms to lattice maxima, so the bound monitors carry an O(dx^2)
/// consistency slack for this kind.
inline InitialData initial_from_samples(GridFunction samples) {
    const PeriodicGrid g = samples.grid;
    GridFunction grad(g), second(g);
    const double dx = g.dx();
    for (int i = 0; i < g.n; ++i) {
        const long long k = i;
        grad[i] = (samples.at(k + 1) - samples.at(k - 1)) / (2.0 * dx);
        second[i] = (samples.at(k + 1) - 2.0 * samples[i] + samples.at(k - 1)) / (dx * dx);
    }
    InitialData d{std::move(samples), std::move(grad), std::move(second), 0.0, 0.0, 0.0};
    d.sup_norm = d.values.sup_norm();
    d.lip_norm = d.gradient.sup_norm();
    d.second_norm = d.second.sup_norm();
    return d;
}

/// Grid-independent description of an initial datum, materializable on any
/// lattice (raw samples excepted).
struct InitialDataSpec {
    enum class Kind { cos_wave, sin_wave, bump, samples };

    Kind kind = Kind::cos_wave;
    int harmonic = 1;
    double amplitude = 1.0;
    std::optional<GridFunction> raw;

    static InitialDataSpec named(const std::string& name, int harmonic = 1, double amplitude = 1.0) {
        InitialDataSpec s;
        s.harmonic = harmonic;
        s.amplitude = amplitude;
        if (name == "cos") s.kind = Kind::cos_wave;
        else if (name == "sin") s.kind = Kind::sin_wave;
        else if (name == "bump") s.kind = Kind::bump;
        else throw std::invalid_argument("unknown initial datum: " + name);
        return s;
    }

    static InitialDataSpec from_samples(GridFunction samples) {
        InitialDataSpec s;
        s.kind = Kind::samples;
        s.raw = std::move(samples);
        return s;
    }

    std::string name() const {
        switch (kind) {
        case Kind::cos_wave: return "cos";
        case Kind::sin_wave: return "sin";
        case Kind::bump: return "bump";
        case Kind::samples: return "samples";
        }
        return "";
    }

    bool resamplable() const { return kind != Kind::samples; }

    /// Pointwise evaluator (closed-form kinds only).
    double evaluate(double x) const {
        const double w = 2.0 * std::numbers::pi * harmonic;
        switch (kind) {
        case Kind::cos_wave: return amplitude * std::cos(w * x);
        case Kind::sin_wave: return amplitude * std::sin(w * x);
        case Kind::bump: return amplitude * detail::bump_value(x - std::floor(x));
        case Kind::samples:
            throw std::invalid_argument("raw-sample initial data has no off-lattice evaluator");
        }
        return 0.0;
    }

    InitialData materialize(PeriodicGrid g) const {
        switch (kind) {
        case Kind::cos_wave: return initial_cos(g, harmonic, amplitude);
        case Kind::sin_wave: return initial_sin(g, harmonic, amplitude);
        case Kind::bump: return initial_bump(g, amplitude);
        case Kind::samples:
            if (!raw) throw std::invalid_argument("sample initial data missing values");
            if (raw->grid != g)
                throw std::invalid_argument("raw-sample initial data cannot be resampled");
            return initial_from_samples(*raw);
        }
        throw std::invalid_argument("invalid initial data spec");
    }
};

} // namespace hjfd
