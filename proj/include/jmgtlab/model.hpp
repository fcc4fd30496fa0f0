#pragma once

// Physical parameters, the quadratic nonlinearity, and the energy
// functionals of the JMGT / Westervelt model
//
//   τ u_ttt + (1-2ku) u_tt + c² A u + b A u_t = 2k (u_t)²,   b = δ + τc²,
//
// rewritten with the quasilinear term folded into the right-hand side,
//   τ u_ttt + u_tt + c² A u + b A u_t = G(u),  G(u) = 2k (u u_tt + u_t²),
// which keeps the linear operator τ-uniform.  τ = 0 is the Westervelt
// limit (b = δ).  Everything here is a pure function of immutable state.

#include <cmath>
#include <optional>
#include <stdexcept>

#include "spectral.hpp"

namespace jmgtlab {

/// Physical constants.  b and γ are derived quantities:
///   b = δ + τc²,  γ = 1 - τc²/b = δ/b ∈ (0,1] whenever δ > 0,
/// and γ > 0 is what drives every decay estimate downstream.
struct ModelParams {
    double tau = 0.1;    // thermal relaxation time, >= 0 (0 only on the Westervelt path)
    double c = 1.0;      // sound speed, > 0
    double delta = 1.0;  // sound diffusivity, > 0
    double k = 1.0;      // nonlinearity parameter

    double b() const { return delta + tau * c * c; }
    double gamma() const { return 1.0 - tau * c * c / b(); }

    void validate() const {
        if (!(c > 0.0)) throw ConfigError("ModelParams: c must be > 0");
        if (!(delta > 0.0)) throw ConfigError("ModelParams: delta must be > 0");
        if (tau < 0.0) throw ConfigError("ModelParams: tau must be >= 0");
    }
    ModelParams with_tau(double t) const {
        ModelParams p = *this;
        p.tau = t;
        return p;
    }
};

/// Snapshot (u, u_t, u_tt) of the relaxed equation at time t.
struct JmgtState {
    double t = 0.0;
    SpectralField u, v, w; // u, u_t, u_tt

    JmgtState() = default;
    JmgtState(double time, SpectralField u_, SpectralField v_, SpectralField w_)
        : t(time), u(std::move(u_)), v(std::move(v_)), w(std::move(w_)) {
        require_same_basis(u, v, "JmgtState");
        require_same_basis(u, w, "JmgtState");
    }
    const BasisPtr& basis() const { return u.basis; }
    bool finite() const { return is_finite(u) && is_finite(v) && is_finite(w); }
};

/// Snapshot (u, u_t) of the Westervelt limit at time t.
struct WestState {
    double t = 0.0;
    SpectralField u, v;

    WestState() = default;
    WestState(double time, SpectralField u_, SpectralField v_)
        : t(time), u(std::move(u_)), v(std::move(v_)) {
        require_same_basis(u, v, "WestState");
    }
    const BasisPtr& basis() const { return u.basis; }
    bool finite() const { return is_finite(u) && is_finite(v); }
};

/// G(u) = 2k (u u_tt + u_t²), projected back onto the retained modes.
/// The products are evaluated nodally on the padded collocation grid;
/// u_tt is taken from the current state (explicit).
inline SpectralField compute_G(const JmgtState& s, const ModelParams& params,
                               const TransformPlan& plan) {
    if (params.k == 0.0) return zero_field(s.basis());
    PhysicalField up = to_physical(s.u, plan);
    PhysicalField vp = to_physical(s.v, plan);
    PhysicalField wp = to_physical(s.w, plan);
    PhysicalField prod = up;
    prod.samples = 2.0 * params.k *
                   (up.samples.cwiseProduct(wp.samples) + vp.samples.cwiseProduct(vp.samples));
    return to_spectral(prod, plan);
}

inline SpectralField compute_G(const JmgtState& s, const ModelParams& params, double padding) {
    return compute_G(s, params, make_plan(s.basis(), padding));
}

// ---------------------------------------------------------------------------
// Energy functionals.
//
//   E0 = 1/2 ||u_t||² + c²/2 ||A^{1/2} u||²
//   E1 = b/2 ||A^{1/2} z||² + τ/2 ||z_t||² + c²γ/(2b) ||u_t||²,
//        z = u_t + (c²/b) u,  z_t = u_tt + (c²/b) u_t
//   E  = E0 + E1
//   calE  = E + ||A u||²                       (H1-level energy)
//   frakE = calE + ||A u_t||² + τ ||A^{1/2} u_tt||²   (H2-level energy)
// ---------------------------------------------------------------------------

inline double energy_E0(const JmgtState& s, const ModelParams& params) {
    return 0.5 * l2_norm_sq(s.v) + 0.5 * params.c * params.c * sobolev_norm_sq(s.u, 0.5);
}

inline double energy_E1(const JmgtState& s, const ModelParams& params) {
    const double b = params.b();
    const double r = params.c * params.c / b;
    SpectralField z = s.v;
    z.coeffs += r * s.u.coeffs;
    SpectralField zt = s.w;
    zt.coeffs += r * s.v.coeffs;
    return 0.5 * b * sobolev_norm_sq(z, 0.5) + 0.5 * params.tau * l2_norm_sq(zt) +
           0.5 * r * params.gamma() * l2_norm_sq(s.v);
}

inline double energy_E(const JmgtState& s, const ModelParams& params) {
    return energy_E0(s, params) + energy_E1(s, params);
}

inline double energy_calE(const JmgtState& s, const ModelParams& params) {
    return energy_E(s, params) + sobolev_norm_sq(s.u, 1.0);
}

inline double energy_frakE(const JmgtState& s, const ModelParams& params) {
    return energy_calE(s, params) + sobolev_norm_sq(s.v, 1.0) +
           params.tau * sobolev_norm_sq(s.w, 0.5);
}

/// Squared τ-weighted phase-space norm ||U||²_{H_i^τ} = ||M_τ^{1/2} U||²_{H_i},
/// M_τ = diag(1,1,τ), with graph norms ||f||²_{D(A^p)} = ||A^p f||² + ||f||².
///   level 0:  D(A^{1/2}) x D(A^{1/2}) x L²
///   level 1:  D(A)       x D(A^{1/2}) x L²
///   level 2:  D(A)       x D(A)       x D(A^{1/2})
inline double weighted_norm_sq(const JmgtState& s, int level, const ModelParams& params) {
    auto graph = [](const SpectralField& f, double p) {
        return sobolev_norm_sq(f, p) + l2_norm_sq(f);
    };
    switch (level) {
        case 0: return graph(s.u, 0.5) + graph(s.v, 0.5) + params.tau * l2_norm_sq(s.w);
        case 1: return graph(s.u, 1.0) + graph(s.v, 0.5) + params.tau * l2_norm_sq(s.w);
        case 2: return graph(s.u, 1.0) + graph(s.v, 1.0) + params.tau * graph(s.w, 0.5);
        default: throw std::invalid_argument("weighted_norm_sq: level must be 0, 1 or 2");
    }
}

/// All energies and weighted norms of one snapshot.
struct EnergySample {
    double t = 0.0;
    double E0 = 0.0, E1 = 0.0, E = 0.0, calE = 0.0, frakE = 0.0;
    double h0tau = 0.0, h1tau = 0.0, h2tau = 0.0;
};

inline EnergySample sample_energies(const JmgtState& s, const ModelParams& params) {
    EnergySample e;
    e.t = s.t;
    e.E0 = energy_E0(s, params);
    e.E1 = energy_E1(s, params);
    e.E = e.E0 + e.E1;
    e.calE = e.E + sobolev_norm_sq(s.u, 1.0);
    e.frakE = e.calE + sobolev_norm_sq(s.v, 1.0) + params.tau * sobolev_norm_sq(s.w, 0.5);
    e.h0tau = weighted_norm_sq(s, 0, params);
    e.h1tau = weighted_norm_sq(s, 1, params);
    e.h2tau = weighted_norm_sq(s, 2, params);
    return e;
}

// ---------------------------------------------------------------------------
// Westervelt helpers.  The limit state carries only (u, u_t); the
// acceleration is reconstructed from the equation itself,
//   u_tt = 2k P[u u_tt + u_t²] - c² A u - δ A u_t + f,
// solved by fixed-point iteration (contractive for 2k||u||_inf < 1).
// ---------------------------------------------------------------------------

inline SpectralField westervelt_accel(const WestState& s, const ModelParams& params,
                                      const TransformPlan& plan,
                                      const SpectralField* forcing = nullptr) {
    SpectralField base = apply_power_A(s.u, 1.0);
    base.coeffs *= -params.c * params.c;
    base.coeffs -= params.delta * (s.basis()->eigenvalues.array() * s.v.coeffs.array()).matrix();
    if (forcing) base.coeffs += forcing->coeffs;

    if (params.k == 0.0) return base;

    PhysicalField up = to_physical(s.u, plan);
    PhysicalField vp = to_physical(s.v, plan);
    Eigen::VectorXd vsq = vp.samples.cwiseProduct(vp.samples);

    SpectralField w = base;
    PhysicalField scratch = up;
    for (int pass = 0; pass < 50; ++pass) {
        PhysicalField wp = to_physical(w, plan);
        scratch.samples = 2.0 * params.k * (up.samples.cwiseProduct(wp.samples) + vsq);
        SpectralField next = to_spectral(scratch, plan);
        next.coeffs += base.coeffs;
        const double change = (next.coeffs - w.coeffs).lpNorm<Eigen::Infinity>();
        w = std::move(next);
        if (change <= 1e-14 * std::max(1.0, w.coeffs.lpNorm<Eigen::Infinity>())) break;
    }
    return w;
}

/// G(u) + f for the Westervelt step, i.e. u_tt + c² A u + δ A u_t.
inline SpectralField westervelt_rhs(const WestState& s, const ModelParams& params,
                                    const TransformPlan& plan,
                                    const SpectralField* forcing = nullptr) {
    SpectralField w = westervelt_accel(s, params, plan, forcing);
    w.coeffs += params.c * params.c * (s.basis()->eigenvalues.array() * s.u.coeffs.array()).matrix();
    w.coeffs += params.delta * (s.basis()->eigenvalues.array() * s.v.coeffs.array()).matrix();
    return w;
}

inline EnergySample sample_energies(const WestState& s, const ModelParams& params,
                                    const TransformPlan& plan,
                                    const SpectralField* forcing = nullptr) {
    JmgtState full(s.t, s.u, s.v, westervelt_accel(s, params, plan, forcing));
    return sample_energies(full, params.with_tau(0.0));
}

/// Compatible initial acceleration ("well-prepared" data): u_tt(0) is set
/// from the Westervelt equation at t = 0,
///   u2 = 2k P[u1² + u0 u2] - c² A u0 - δ A u1,
/// with the k-correction applied via one fixed-point pass.  This removes
/// the O(1) initial layer that generic u2 would excite as τ -> 0.
inline SpectralField well_prepared_u2(const SpectralField& u0, const SpectralField& u1,
                                      const ModelParams& params, const TransformPlan& plan) {
    require_same_basis(u0, u1, "well_prepared_u2");
    const auto& lam = u0.basis->eigenvalues.array();
    SpectralField base(u0.basis);
    base.coeffs = -params.c * params.c * (lam * u0.coeffs.array()).matrix() -
                  params.delta * (lam * u1.coeffs.array()).matrix();
    if (params.k == 0.0) return base;

    PhysicalField u0p = to_physical(u0, plan);
    PhysicalField u1p = to_physical(u1, plan);
    PhysicalField prod = u0p;
    prod.samples = u1p.samples.cwiseProduct(u1p.samples);
    SpectralField u1sq = to_spectral(prod, plan);
    base.coeffs += 2.0 * params.k * u1sq.coeffs;

    PhysicalField basep = to_physical(base, plan);
    prod.samples = u0p.samples.cwiseProduct(basep.samples);
    SpectralField correction = to_spectral(prod, plan);
    SpectralField u2 = base;
    u2.coeffs += 2.0 * params.k * correction.coeffs;
    return u2;
}

} // namespace jmgtlab
