#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "hjfd/errors.hpp"
#include "hjfd/hamiltonian.hpp"

namespace hjfd {

struct FluxGradient {
    double dp;
    double dq;
};

struct FluxHessian {
    double dpp;
    double dqq;
    double dpq;
};

/// Rectangle of (p, q) arguments over which a flux property is sampled.
struct Box {
    double p_lo, p_hi, q_lo, q_hi;

    static Box symmetric(double radius) {
        if (radius <= 0.0) throw std::invalid_argument("Box::symmetric: radius must be positive");
        return Box{-radius, radius, -radius, radius};
    }
};

/// Two-argument numerical Hamiltonian F(p, q), consistent with a scalar H via
/// F(-p, p) = H(p), nondecreasing in each argument on its validity box, and
/// convex. Four constructions:
///
///  - crandall_lions:   F(p,q) = H((q-p)/2) + gamma (p+q),
///                      monotone on |p|,|q| <= R once |H'| <= 2 gamma there;
///  - split:            F(p,q) = F1(p) + F2(q) with F1(p) = H(-p)^ for p > 0,
///                      F2(q) = H(q)^ for q > 0 (zero otherwise), which needs
///                      H(0) = 0 = min H; other convex H are normalized by
///                      H~(p) = H(p + p*) - H(p*), p* = argmin H, and the
///                      applied shift is recorded on the flux;
///  - upwind_quadratic: F(p,q) = (p^+)^2/2 + (q^+)^2/2 for H(p) = p^2/2;
///  - smoothed_upwind:  upwind_quadratic with x^+ replaced by the C^{1,1}
///                      ramp r(x) = 0 (x<=0), x^2/(2 eps) (0<=x<=eps),
///                      x - eps/2 (x>=eps), so second derivatives exist a.e.
///                      and are bounded by 1/eps; consistency then holds up
///                      to O(eps) instead of exactly.
class NumericalFlux {
public:
    enum class Kind { crandall_lions, split, upwind_quadratic, smoothed_upwind };

    static NumericalFlux crandall_lions(Hamiltonian h, double gamma) {
        if (!(gamma > 0.0)) throw std::invalid_argument("crandall_lions: gamma must be positive");
        NumericalFlux f(Kind::crandall_lions, std::move(h));
        f.gamma_ = gamma;
        return f;
    }

    static NumericalFlux split(Hamiltonian h) {
        double p_star = 0.0;
        if (h.kind() == Hamiltonian::Kind::tabulated) p_star = find_argmin(h);
        const double offset = h(p_star);
        NumericalFlux f(Kind::split, normalize(h, p_star, offset));
        f.split_shift_ = p_star;
        f.split_offset_ = offset;
        return f;
    }

    static NumericalFlux upwind_quadratic() {
        return NumericalFlux(Kind::upwind_quadratic, Hamiltonian::quadratic());
    }

    static NumericalFlux smoothed_upwind(double eps) {
        if (!(eps > 0.0)) throw std::invalid_argument("smoothed_upwind: eps must be positive");
        NumericalFlux f(Kind::smoothed_upwind, Hamiltonian::quadratic());
        f.eps_ = eps;
        return f;
    }

    double value(double p, double q) const {
        switch (kind_) {
        case Kind::crandall_lions: return ham_(0.5 * (q - p)) + gamma_ * (p + q);
        case Kind::split: return split_half(p, true) + split_half(q, false);
        case Kind::upwind_quadratic: return 0.5 * pos(p) * pos(p) + 0.5 * pos(q) * pos(q);
        case Kind::smoothed_upwind: return 0.5 * ramp(p) * ramp(p) + 0.5 * ramp(q) * ramp(q);
        }
        return 0.0;
    }

    /// (D_p F, D_q F). Both components are >= 0 on the validity box; at the
    /// upwind kinks the one-sided value 0 is used.
    FluxGradient grad(double p, double q) const {
        switch (kind_) {
        case Kind::crandall_lions: {
            const double hp = ham_.derivative(0.5 * (q - p));
            return {-0.5 * hp + gamma_, 0.5 * hp + gamma_};
        }
        case Kind::split: return {split_half_grad(p, true), split_half_grad(q, false)};
        case Kind::upwind_quadratic: return {pos(p), pos(q)};
        case Kind::smoothed_upwind: return {ramp(p) * ramp_d(p), ramp(q) * ramp_d(q)};
        }
        return {0.0, 0.0};
    }

    bool has_hessian() const {
        switch (kind_) {
        case Kind::crandall_lions: return ham_.has_second_derivative();
        case Kind::smoothed_upwind: return true;
        default: return false;
        }
    }

    FluxHessian hessian(double p, double q) const {
        switch (kind_) {
        case Kind::crandall_lions: {
            if (!ham_.has_second_derivative())
                throw UnsupportedOperation("crandall_lions flux: Hamiltonian lacks second derivative");
            const double hpp = ham_.second_derivative(0.5 * (q - p));
            return {0.25 * hpp, 0.25 * hpp, -0.25 * hpp};
        }
        case Kind::smoothed_upwind: {
            const auto g2 = [this](double x) { return ramp_d(x) * ramp_d(x) + ramp(x) * ramp_dd(x); };
            return {g2(p), g2(q), 0.0};
        }
        default: throw UnsupportedOperation("flux kind has no second derivatives");
        }
    }

    /// The Hamiltonian this flux is consistent with: F(-p, p) = H(p)
    /// (exactly for crandall_lions/split/upwind, up to O(eps) for the
    /// smoothed ramp). For split this is the normalized H~.
    const Hamiltonian& consistency_target() const { return ham_; }

    Kind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    double smoothing_radius() const { return eps_; }
    double split_argmin_shift() const { return split_shift_; }
    double split_value_offset() const { return split_offset_; }

private:
    NumericalFlux(Kind k, Hamiltonian h) : kind_(k), ham_(std::move(h)) {}

    static double pos(double x) { return x > 0.0 ? x : 0.0; }

    double ramp(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= eps_) return x - 0.5 * eps_;
        return x * x / (2.0 * eps_);
    }
    double ramp_d(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= eps_) return 1.0;
        return x / eps_;
    }
    double ramp_dd(double x) const { return (x > 0.0 && x < eps_) ? 1.0 / eps_ : 0.0; }

    double split_half(double x, bool first) const {
        if (x <= 0.0) return 0.0;
        return first ? ham_(-x) : ham_(x);
    }
    double split_half_grad(double x, bool first) const {
        if (x <= 0.0) return 0.0;
        return first ? -ham_.derivative(-x) : ham_.derivative(x);
    }

    static double find_argmin(const Hamiltonian& h) {
        double radius = 1.0;
        for (int grow = 0; grow < 60; ++grow) {
            constexpr int scan = 8193;
            const double step = 2.0 * radius / (scan - 1);
            int best = 0;
            double best_val = std::numeric_limits<double>::infinity();
            for (int i = 0; i < scan; ++i) {
                const double v = h(-radius + step * i);
                if (v < best_val) {
                    best_val = v;
                    best = i;
                }
            }
            if (best > 0 && best < scan - 1) {
                double lo = -radius + step * (best - 1);
                double hi = -radius + step * (best + 1);
                for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, radius); ++it) {
                    const double x1 = hi - 0.6180339887498949 * (hi - lo);
                    const double x2 = lo + 0.6180339887498949 * (hi - lo);
                    if (h(x1) > h(x2)) lo = x1; else hi = x2;
                }
                return 0.5 * (lo + hi);
            }
            radius *= 2.0;
        }
        throw RangeTooSmall("split: could not bracket argmin of H");
    }

    static Hamiltonian normalize(const Hamiltonian& h, double p_star, double offset) {
        if (p_star == 0.0 && offset == 0.0) return h;
        auto value = [h, p_star, offset](double p) { return h(p + p_star) - offset; };
        auto deriv = [h, p_star](double p) { return h.derivative(p + p_star); };
        if (h.has_second_derivative()) {
            auto second = [h, p_star](double p) { return h.second_derivative(p + p_star); };
            return Hamiltonian::tabulated(value, deriv, second);
        }
        return Hamiltonian::tabulated(value, deriv);
    }

    Kind kind_;
    Hamiltonian ham_;
    double gamma_ = 0.0;
    double eps_ = 0.0;
    double split_shift_ = 0.0;
    double split_offset_ = 0.0;
};

/// Max over a uniform p-sample of |F(-p, p) - H(p)|.
inline double consistency_check(const NumericalFlux& f, double p_lo, double p_hi, int samples) {
    if (!(p_lo < p_hi) || samples < 2) throw std::invalid_argument("consistency_check");
    const Hamiltonian& h = f.consistency_target();
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double p = p_lo + (p_hi - p_lo) * i / (samples - 1);
        worst = std::max(worst, std::abs(f.value(-p, p) - h(p)));
    }
    return worst;
}

/// Min of the sampled partial derivatives over the box; monotone iff >= 0
/// up to rounding.
inline double monotonicity_check(const NumericalFlux& f, const Box& box, int samples) {
    if (samples < 2) throw std::invalid_argument("monotonicity_check: need samples >= 2");
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i)
        for (int j = 0; j < samples; ++j) {
            const double p = box.p_lo + (box.p_hi - box.p_lo) * i / (samples - 1);
            const double q = box.q_lo + (box.q_hi - box.q_lo) * j / (samples - 1);
            const FluxGradient g = f.grad(p, q);
            worst = std::min({worst, g.dp, g.dq});
        }
    return worst;
}

/// Max midpoint-convexity violation F((z1+z2)/2) - (F(z1)+F(z2))/2 over all
/// pairs of the samples x samples box grid; <= 0 up to rounding when convex.
inline double convexity_check(const NumericalFlux& f, const Box& box, int samples) {
    if (samples < 2) throw std::invalid_argument("convexity_check: need samples >= 2");
    const int total = samples * samples;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < samples; ++i)
        for (int j = 0; j < samples; ++j)
            pts.emplace_back(box.p_lo + (box.p_hi - box.p_lo) * i / (samples - 1),
                             box.q_lo + (box.q_hi - box.q_lo) * j / (samples - 1));
    double worst = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < total; ++a)
        for (int b = a; b < total; ++b) {
            const double pm = 0.5 * (pts[a].first + pts[b].first);
            const double qm = 0.5 * (pts[a].second + pts[b].second);
            worst = std::max(worst, f.value(pm, qm) -
                                        0.5 * (f.value(pts[a].first, pts[a].second) +
                                               f.value(pts[b].first, pts[b].second)));
        }
    return worst;
}

/// Exact sup of D_p F + D_q F over the symmetric box |p|,|q| <= radius.
/// The crandall_lions sum is the constant 2 gamma; the other kinds are
/// separable with convex halves, so the sup sits at the (R, R) corner.
inline double max_gradient_sum(const NumericalFlux& f, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("max_gradient_sum: radius must be positive");
    if (f.kind() == NumericalFlux::Kind::crandall_lions) return 2.0 * f.gamma();
    const FluxGradient corner = f.grad(radius, radius);
    return corner.dp + corner.dq;
}

} // namespace hjfd
