#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

#include "hjfd/errors.hpp"

namespace hjfd {

namespace detail {

inline double int_pow(double x, int a) {
    double acc = 1.0;
    for (int i = 0; i < a; ++i) acc *= x;
    return acc;
}

/// Golden-section refinement of a maximum of phi on [lo, hi].
/// Assumes phi is unimodal on the bracket (concave in every use here).
template <class F>
double golden_max(F&& phi, double lo, double hi, double xtol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = phi(x1), f2 = phi(x2);
    for (int it = 0; it < 200 && (b - a) > xtol; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = phi(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = phi(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    return phi(xm);
}

} // namespace detail

/// Scalar Hamiltonian H with derivative (and, when available, second
/// derivative). Shipped kinds: p^2/2, even powers p^a/a, and arbitrary
/// tabulated evaluator pairs.
class Hamiltonian {
public:
    enum class Kind { quadratic, power_even, tabulated };

    static Hamiltonian quadratic() { return Hamiltonian(Kind::quadratic, 2, nullptr, nullptr, nullptr); }

    /// H(p) = p^a / a for an even exponent a >= 2.
    static Hamiltonian power_even(int exponent) {
        if (exponent < 2 || exponent % 2 != 0)
            throw std::invalid_argument("Hamiltonian::power_even: exponent must be even and >= 2");
        return Hamiltonian(Kind::power_even, exponent, nullptr, nullptr, nullptr);
    }

    static Hamiltonian tabulated(std::function<double(double)> value,
                                 std::function<double(double)> derivative,
                                 std::function<double(double)> second = nullptr) {
        if (!value || !derivative)
            throw std::invalid_argument("Hamiltonian::tabulated: value and derivative evaluators required");
        return Hamiltonian(Kind::tabulated, 0, std::move(value), std::move(derivative), std::move(second));
    }

    double operator()(double p) const {
        switch (kind_) {
        case Kind::quadratic: return 0.5 * p * p;
        case Kind::power_even: return detail::int_pow(p, exponent_) / exponent_;
        case Kind::tabulated: return f_(p);
        }
        return 0.0;
    }

    double derivative(double p) const {
        switch (kind_) {
        case Kind::quadratic: return p;
        case Kind::power_even: return detail::int_pow(p, exponent_ - 1);
        case Kind::tabulated: return df_(p);
        }
        return 0.0;
    }

    bool has_second_derivative() const { return kind_ != Kind::tabulated || static_cast<bool>(d2f_); }

    double second_derivative(double p) const {
        switch (kind_) {
        case Kind::quadratic: return 1.0;
        case Kind::power_even: return (exponent_ - 1) * detail::int_pow(p, exponent_ - 2);
        case Kind::tabulated:
            if (!d2f_) throw UnsupportedOperation("Hamiltonian: no second derivative evaluator");
            return d2f_(p);
        }
        return 0.0;
    }

    Kind kind() const { return kind_; }
    int exponent() const { return exponent_; }

private:
    Hamiltonian(Kind k, int a, std::function<double(double)> f, std::function<double(double)> df,
                std::function<double(double)> d2f)
        : kind_(k), exponent_(a), f_(std::move(f)), df_(std::move(df)), d2f_(std::move(d2f)) {}

    Kind kind_;
    int exponent_;
    std::function<double(double)> f_, df_, d2f_;
};

/// Max of |H'| over a dense symmetric sample grid.
inline double max_abs_derivative(const Hamiltonian& h, double radius, int samples = 200001) {
    if (radius <= 0.0) throw std::invalid_argument("max_abs_derivative: radius must be positive");
    double m = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double p = -radius + 2.0 * radius * i / (samples - 1);
        m = std::max(m, std::abs(h.derivative(p)));
    }
    return m;
}

/// Smallest viscosity constant with |H'(p)| <= 2*gamma on |p| <= radius,
/// rounded up by 1%.
inline double gamma_bound(const Hamiltonian& h, double radius) {
    return 0.5 * max_abs_derivative(h, radius) * 1.01;
}

/// Legendre transform L(q) = max_p (p q - H(p)), coarse scan on the given
/// bracket followed by golden-section refinement. Rejects brackets whose scan
/// maximum sits on an endpoint: the true maximizer may then lie outside.
inline double legendre(const Hamiltonian& h, double q, double p_lo, double p_hi) {
    if (!(p_lo < p_hi)) throw std::invalid_argument("legendre: need p_lo < p_hi");
    if (h.kind() == Hamiltonian::Kind::quadratic) {
        if (q <= p_lo || q >= p_hi) throw RangeTooSmall("legendre: maximizer at bracket endpoint");
        return 0.5 * q * q;
    }
    const auto phi = [&](double p) { return p * q - h(p); };
    constexpr int scan = 4097;
    const double step = (p_hi - p_lo) / (scan - 1);
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan; ++i) {
        const double v = phi(p_lo + step * i);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best == 0 || best == scan - 1) throw RangeTooSmall("legendre: maximizer at bracket endpoint");
    const double a = p_lo + step * (best - 1);
    const double b = p_lo + step * (best + 1);
    return detail::golden_max(phi, a, b, 1e-13 * std::max(1.0, std::abs(p_lo) + std::abs(p_hi)));
}

/// Max violation of midpoint convexity of H over sampled pairs in [lo, hi];
/// <= 0 up to rounding for a convex H.
inline double hamiltonian_convexity_violation(const Hamiltonian& h, double lo, double hi,
                                              int samples = 257) {
    if (!(lo < hi) || samples < 2) throw std::invalid_argument("hamiltonian_convexity_violation");
    const double step = (hi - lo) / (samples - 1);
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i)
        for (int j = i; j < samples; ++j) {
            const double p1 = lo + step * i, p2 = lo + step * j;
            worst = std::max(worst, h(0.5 * (p1 + p2)) - 0.5 * (h(p1) + h(p2)));
        }
    return worst;
}

/// Coercivity margin min(H(-R), H(R)) - H(0); positive once R leaves the
/// bounded sublevel set of a coercive H.
inline double coercivity_margin(const Hamiltonian& h, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("coercivity_margin: radius must be positive");
    return std::min(h(-radius), h(radius)) - h(0.0);
}

/// Lower bound a*b >= -a/(2 sqrt(h)) - (sqrt(h)/2) a b^2 for a >= 0; the
/// gap is a*(sqrt(h)/2)*(b + 1/sqrt(h))^2, so the bound is exact algebra.
inline double young_product_lower_bound(double a, double b, double h) {
    const double r = std::sqrt(h);
    return -a / (2.0 * r) - 0.5 * r * a * b * b;
}

} // namespace hjfd
