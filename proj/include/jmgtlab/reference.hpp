#pragma once

// Closed-form reference solutions for a single eigenmode of the linear
// (k = 0) problem.  The mode amplitude y(t) obeys a constant-coefficient
// ODE whose characteristic polynomial is
//   relaxed:  τ s³ + s² + b λ s + c² λ = 0        (b = δ + τc²)
//   limit:        s² + δ λ s + c² λ = 0
// and y(t) = Re Σ_i c_i e^{s_i t} with c_i fixed by the initial data.
// Roots are found by Cardano / the quadratic formula and polished by a
// few complex Newton steps; this path is independent of the matrix
// exponentials used by the time steppers.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "model.hpp"

namespace jmgtlab {

using cplx = std::complex<double>;

namespace detail {

inline cplx newton_polish(const Eigen::VectorXd& coeff /* descending powers */, cplx s) {
    for (int it = 0; it < 8; ++it) {
        cplx p = 0.0, dp = 0.0;
        for (int i = 0; i < coeff.size(); ++i) {
            dp = dp * s + p;
            p = p * s + coeff[i];
        }
        if (std::abs(dp) == 0.0) break;
        const cplx step = p / dp;
        s -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(s))) break;
    }
    return s;
}

} // namespace detail

/// Roots of a s² + b s + c with the cancellation-safe quadratic formula.
inline std::array<cplx, 2> quadratic_roots(double a, double b, double c) {
    if (a == 0.0) throw std::invalid_argument("quadratic_roots: leading coefficient is zero");
    const cplx disc = std::sqrt(cplx(b * b - 4.0 * a * c, 0.0));
    const cplx q = -0.5 * (b + (b >= 0.0 ? disc : -disc));
    cplx r1 = q / a;
    cplx r2 = (std::abs(q) > 0.0) ? cplx(c, 0.0) / q : -r1 - cplx(b / a, 0.0);
    return {r1, r2};
}

/// Roots of a s³ + b s² + c s + d (Cardano, Newton-polished).
inline std::array<cplx, 3> cubic_roots(double a, double b, double c, double d) {
    if (a == 0.0) throw std::invalid_argument("cubic_roots: leading coefficient is zero");
    const double a2 = b / a, a1 = c / a, a0 = d / a;
    // depressed form t^3 + p t + q, s = t - a2/3
    const double p = a1 - a2 * a2 / 3.0;
    const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    const double shift = -a2 / 3.0;
    std::array<cplx, 3> roots;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + sq);
        const double v = std::cbrt(-q / 2.0 - sq);
        roots[0] = shift + u + v;
        roots[1] = cplx(shift - (u + v) / 2.0, (u - v) * std::sqrt(3.0) / 2.0);
        roots[2] = std::conj(roots[1]);
    } else {
        // three real roots, trigonometric form
        const double r = std::sqrt(-p * p * p / 27.0);
        const double phi = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
        const double m = 2.0 * std::sqrt(-p / 3.0);
        for (int i = 0; i < 3; ++i)
            roots[i] = shift + m * std::cos((phi + 2.0 * M_PI * i) / 3.0);
    }
    Eigen::VectorXd coeff(4);
    coeff << a, b, c, d;
    for (auto& s : roots) s = detail::newton_polish(coeff, s);
    return roots;
}

/// Characteristic roots of one eigenmode of the relaxed (τ > 0) problem.
inline std::array<cplx, 3> jmgt_mode_roots(const ModelParams& params, double lambda) {
    if (!(params.tau > 0.0))
        throw ConfigError("jmgt_mode_roots: tau must be > 0");
    return cubic_roots(params.tau, 1.0, params.b() * lambda, params.c * params.c * lambda);
}

/// Characteristic roots of one eigenmode of the limit (τ = 0) problem.
inline std::array<cplx, 2> westervelt_mode_roots(const ModelParams& params, double lambda) {
    return quadratic_roots(1.0, params.delta * lambda, params.c * params.c * lambda);
}

/// y(t) = Re Σ c_i e^{s_i t}; derivatives pick up s_i^order factors.
template <int Order>
struct ModeSolution {
    std::array<cplx, Order> roots{};
    std::array<cplx, Order> amplitudes{};

    double eval(double t, int deriv = 0) const {
        cplx acc = 0.0;
        for (int i = 0; i < Order; ++i) {
            cplx f = amplitudes[i] * std::exp(roots[i] * t);
            for (int d = 0; d < deriv; ++d) f *= roots[i];
            acc += f;
        }
        return acc.real();
    }
    double max_real_part() const {
        double m = roots[0].real();
        for (const auto& s : roots) m = std::max(m, s.real());
        return m;
    }
};

/// Solve the (complex Vandermonde) system Σ c_i s_i^d = y_d for the mode
/// amplitudes from initial data (y0, y1[, y2]).
inline ModeSolution<3> jmgt_mode_solution(const ModelParams& params, double lambda, double y0,
                                          double y1, double y2) {
    ModeSolution<3> sol;
    auto roots = jmgt_mode_roots(params, lambda);
    Eigen::Matrix3cd V;
    Eigen::Vector3cd rhs(y0, y1, y2);
    for (int i = 0; i < 3; ++i) {
        V(0, i) = 1.0;
        V(1, i) = roots[i];
        V(2, i) = roots[i] * roots[i];
    }
    Eigen::Vector3cd c = V.fullPivLu().solve(rhs);
    for (int i = 0; i < 3; ++i) {
        sol.roots[i] = roots[i];
        sol.amplitudes[i] = c[i];
    }
    return sol;
}

inline ModeSolution<2> westervelt_mode_solution(const ModelParams& params, double lambda,
                                                double y0, double y1) {
    ModeSolution<2> sol;
    auto roots = westervelt_mode_roots(params, lambda);
    Eigen::Matrix2cd V;
    Eigen::Vector2cd rhs(y0, y1);
    for (int i = 0; i < 2; ++i) {
        V(0, i) = 1.0;
        V(1, i) = roots[i];
    }
    Eigen::Vector2cd c = V.fullPivLu().solve(rhs);
    for (int i = 0; i < 2; ++i) {
        sol.roots[i] = roots[i];
        sol.amplitudes[i] = c[i];
    }
    return sol;
}

} // namespace jmgtlab
