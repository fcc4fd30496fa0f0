#pragma once

// Time integration.
//
// Per eigenmode the linear dynamics are a small companion system
//   relaxed (3x3):  y' = M y,  M = [0 1 0; 0 0 1; -c²λ/τ  -bλ/τ  -1/τ]
//   limit   (2x2):  y' = M y,  M = [0 1; -c²λ  -δλ]
// whose exponential is computed once per (basis, params, dt) by
// scaling-and-squaring Padé.  The nonlinearity is handled by ETD2
// (exponential time differencing, 2nd-order predictor-corrector):
//
//   y*      = e^{M h} y_n + Φ1 f_n,             Φ1 = ∫_0^h e^{Mσ} dσ
//   y_{n+1} = y*        + (Ψ/h)(f* - f_n),      Ψ  = ∫_0^h e^{Mσ}(h-σ) dσ
//
// with f the nonlinear slot, f = (0,0,G/τ) resp. (0,G).  Φ1 and Ψ come
// from one augmented-matrix exponential, which avoids the cancellation
// in (e^z - 1)/z for weakly damped modes.  The exponential absorbs the
// full linear stiffness, so the step size is set by the nonlinearity
// and not by τ; with k = 0 the scheme reproduces the semigroup exactly.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "model.hpp"

namespace jmgtlab {

/// Optional extra forcing appended to G (supports manufactured solutions).
using Forcing = std::function<SpectralField(double)>;

namespace detail {

/// exp(B h) of the block matrix B = [M I 0; 0 0 I; 0 0 0] packs e^{Mh},
/// Φ1 and Ψ into the top block row.
template <int N>
struct PhiMats {
    Eigen::Matrix<double, N, N> E, Phi1, Psi;
};

template <int N>
PhiMats<N> phi_matrices(const Eigen::Matrix<double, N, N>& M, double dt) {
    Eigen::Matrix<double, 3 * N, 3 * N> B = Eigen::Matrix<double, 3 * N, 3 * N>::Zero();
    B.template block<N, N>(0, 0) = M;
    B.template block<N, N>(0, N).setIdentity();
    B.template block<N, N>(N, 2 * N).setIdentity();
    Eigen::Matrix<double, 3 * N, 3 * N> X = (B * dt).exp();
    PhiMats<N> out;
    out.E = X.template block<N, N>(0, 0);
    out.Phi1 = X.template block<N, N>(0, N);
    out.Psi = X.template block<N, N>(0, 2 * N);
    return out;
}

} // namespace detail

/// Per-mode matrix exponentials and φ-weights for the relaxed problem.
struct JmgtPropagator {
    BasisPtr basis;
    ModelParams params;
    double dt = 0.0;
    std::vector<Eigen::Matrix3d> E, Phi1, PsiOverDt;
};

inline JmgtPropagator build_jmgt_propagator(BasisPtr basis, const ModelParams& params, double dt) {
    params.validate();
    if (!(params.tau > 0.0))
        throw ConfigError("build_jmgt_propagator: tau = 0 makes the companion singular; "
                          "use the westervelt path");
    if (!(dt > 0.0)) throw ConfigError("build_jmgt_propagator: dt must be > 0");
    if (!(params.gamma() > 0.0))
        throw ConfigError("build_jmgt_propagator: gamma <= 0, linear dynamics not damped");
    JmgtPropagator prop;
    prop.basis = basis;
    prop.params = params;
    prop.dt = dt;
    const int n = basis->num_modes();
    prop.E.reserve(n);
    prop.Phi1.reserve(n);
    prop.PsiOverDt.reserve(n);
    for (int m = 0; m < n; ++m) {
        const double lam = basis->eigenvalues[m];
        Eigen::Matrix3d M;
        M << 0, 1, 0,
             0, 0, 1,
             -params.c * params.c * lam / params.tau, -params.b() * lam / params.tau,
             -1.0 / params.tau;
        auto phis = detail::phi_matrices<3>(M, dt);
        prop.E.push_back(phis.E);
        prop.Phi1.push_back(phis.Phi1);
        prop.PsiOverDt.push_back(phis.Psi / dt);
    }
    return prop;
}

/// Per-mode matrix exponentials and φ-weights for the limit problem.
struct WestPropagator {
    BasisPtr basis;
    ModelParams params;
    double dt = 0.0;
    std::vector<Eigen::Matrix2d> E, Phi1, PsiOverDt;
};

inline WestPropagator build_west_propagator(BasisPtr basis, const ModelParams& params, double dt) {
    params.validate();
    if (!(dt > 0.0)) throw ConfigError("build_west_propagator: dt must be > 0");
    WestPropagator prop;
    prop.basis = basis;
    prop.params = params.with_tau(0.0);
    prop.dt = dt;
    const int n = basis->num_modes();
    for (int m = 0; m < n; ++m) {
        const double lam = basis->eigenvalues[m];
        Eigen::Matrix2d M;
        M << 0, 1, -params.c * params.c * lam, -params.delta * lam;
        auto phis = detail::phi_matrices<2>(M, dt);
        prop.E.push_back(phis.E);
        prop.Phi1.push_back(phis.Phi1);
        prop.PsiOverDt.push_back(phis.Psi / dt);
    }
    return prop;
}

inline JmgtState step_jmgt(const JmgtState& s, const JmgtPropagator& prop,
                           const TransformPlan& plan, const Forcing* forcing = nullptr) {
    const ModelParams& p = prop.params;
    const int n = s.basis()->num_modes();

    SpectralField g = compute_G(s, p, plan);
    if (forcing) g.coeffs += (*forcing)(s.t).coeffs;

    JmgtState pred(s.t + prop.dt, SpectralField(s.basis()), SpectralField(s.basis()),
                   SpectralField(s.basis()));
    for (int m = 0; m < n; ++m) {
        Eigen::Vector3d y(s.u.coeffs[m], s.v.coeffs[m], s.w.coeffs[m]);
        Eigen::Vector3d f(0.0, 0.0, g.coeffs[m] / p.tau);
        Eigen::Vector3d yp = prop.E[m] * y + prop.Phi1[m] * f;
        pred.u.coeffs[m] = yp[0];
        pred.v.coeffs[m] = yp[1];
        pred.w.coeffs[m] = yp[2];
    }

    SpectralField g2 = compute_G(pred, p, plan);
    if (forcing) g2.coeffs += (*forcing)(s.t + prop.dt).coeffs;

    JmgtState out = pred;
    for (int m = 0; m < n; ++m) {
        Eigen::Vector3d df(0.0, 0.0, (g2.coeffs[m] - g.coeffs[m]) / p.tau);
        Eigen::Vector3d y = prop.PsiOverDt[m] * df;
        out.u.coeffs[m] += y[0];
        out.v.coeffs[m] += y[1];
        out.w.coeffs[m] += y[2];
    }
    return out;
}

inline JmgtState step_jmgt(const JmgtState& s, const ModelParams& params, double dt,
                           double padding) {
    return step_jmgt(s, build_jmgt_propagator(s.basis(), params, dt),
                     make_plan(s.basis(), padding));
}

inline WestState step_westervelt(const WestState& s, const WestPropagator& prop,
                                 const TransformPlan& plan, const Forcing* forcing = nullptr) {
    const ModelParams& p = prop.params;
    const int n = s.basis()->num_modes();

    std::optional<SpectralField> f0, f1;
    if (forcing) {
        f0 = (*forcing)(s.t);
        f1 = (*forcing)(s.t + prop.dt);
    }
    SpectralField g = westervelt_rhs(s, p, plan, f0 ? &*f0 : nullptr);

    WestState pred(s.t + prop.dt, SpectralField(s.basis()), SpectralField(s.basis()));
    for (int m = 0; m < n; ++m) {
        Eigen::Vector2d y(s.u.coeffs[m], s.v.coeffs[m]);
        Eigen::Vector2d f(0.0, g.coeffs[m]);
        Eigen::Vector2d yp = prop.E[m] * y + prop.Phi1[m] * f;
        pred.u.coeffs[m] = yp[0];
        pred.v.coeffs[m] = yp[1];
    }

    SpectralField g2 = westervelt_rhs(pred, p, plan, f1 ? &*f1 : nullptr);

    WestState out = pred;
    for (int m = 0; m < n; ++m) {
        Eigen::Vector2d df(0.0, g2.coeffs[m] - g.coeffs[m]);
        Eigen::Vector2d y = prop.PsiOverDt[m] * df;
        out.u.coeffs[m] += y[0];
        out.v.coeffs[m] += y[1];
    }
    return out;
}

inline WestState step_westervelt(const WestState& s, const ModelParams& params, double dt,
                                 double padding) {
    return step_westervelt(s, build_west_propagator(s.basis(), params, dt),
                           make_plan(s.basis(), padding));
}

// ---------------------------------------------------------------------------
// Simulation driver.
// ---------------------------------------------------------------------------

enum class RunStatus { ok, blowup, non_finite };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::blowup: return "blowup";
        case RunStatus::non_finite: return "non_finite";
    }
    return "?";
}

struct SimOptions {
    double T = 10.0;
    double dt = 1e-3;
    int stride = 10;          // snapshot every `stride` steps
    double padding = 1.5;
    double blowup_ceiling = 1e6;  // on the H1^tau norm (squared ceiling applied internally)
    Forcing forcing;              // optional
};

template <typename StateT>
struct TrajectoryT {
    std::vector<StateT> states;          // time-ordered, uniform stride
    std::vector<EnergySample> energies;  // one per snapshot
    ModelParams params;
    double dt = 0.0;
    int stride = 1;
    double padding = 1.5;
    RunStatus status = RunStatus::ok;
    std::string message;

    double snapshot_dt() const { return dt * stride; }
    bool ok() const { return status == RunStatus::ok; }
};

using Trajectory = TrajectoryT<JmgtState>;
using WestTrajectory = TrajectoryT<WestState>;

inline long steps_for(double T, double dt) { return std::llround(T / dt); }

inline Trajectory simulate_jmgt(const JmgtState& initial, const ModelParams& params,
                                const SimOptions& opt) {
    Trajectory traj;
    traj.params = params;
    traj.dt = opt.dt;
    traj.stride = std::max(1, opt.stride);
    traj.padding = opt.padding;
    traj.states.push_back(initial);
    traj.energies.push_back(sample_energies(initial, params));
    if (opt.T <= 0.0) return traj;

    const JmgtPropagator prop = build_jmgt_propagator(initial.basis(), params, opt.dt);
    const TransformPlan plan = make_plan(initial.basis(), opt.padding);
    const double ceiling_sq = opt.blowup_ceiling * opt.blowup_ceiling;

    JmgtState s = initial;
    const long n_steps = steps_for(opt.T, opt.dt);
    for (long i = 1; i <= n_steps; ++i) {
        s = step_jmgt(s, prop, plan, opt.forcing ? &opt.forcing : nullptr);
        if (!s.finite()) {
            traj.status = RunStatus::non_finite;
            traj.message = "non-finite state at step " + std::to_string(i) +
                           " (t = " + std::to_string(s.t) + ")";
            return traj;
        }
        if (weighted_norm_sq(s, 1, params) > ceiling_sq) {
            traj.status = RunStatus::blowup;
            traj.message = "H1^tau norm above ceiling at step " + std::to_string(i) +
                           " (t = " + std::to_string(s.t) + ")";
            return traj;
        }
        if (i % traj.stride == 0) {
            traj.states.push_back(s);
            traj.energies.push_back(sample_energies(s, params));
        }
    }
    return traj;
}

inline WestTrajectory simulate_westervelt(const WestState& initial, const ModelParams& params,
                                          const SimOptions& opt) {
    WestTrajectory traj;
    traj.params = params.with_tau(0.0);
    traj.dt = opt.dt;
    traj.stride = std::max(1, opt.stride);
    traj.padding = opt.padding;

    const TransformPlan plan = make_plan(initial.basis(), opt.padding);
    auto forcing_at = [&](double t) -> std::optional<SpectralField> {
        if (!opt.forcing) return std::nullopt;
        return opt.forcing(t);
    };
    auto sample = [&](const WestState& s) {
        auto f = forcing_at(s.t);
        return sample_energies(s, traj.params, plan, f ? &*f : nullptr);
    };
    auto west_norm1_sq = [&](const WestState& s) {
        return sobolev_norm_sq(s.u, 1.0) + l2_norm_sq(s.u) + sobolev_norm_sq(s.v, 0.5) +
               l2_norm_sq(s.v);
    };

    traj.states.push_back(initial);
    traj.energies.push_back(sample(initial));
    if (opt.T <= 0.0) return traj;

    const WestPropagator prop = build_west_propagator(initial.basis(), params, opt.dt);
    const double ceiling_sq = opt.blowup_ceiling * opt.blowup_ceiling;

    WestState s = initial;
    const long n_steps = steps_for(opt.T, opt.dt);
    for (long i = 1; i <= n_steps; ++i) {
        s = step_westervelt(s, prop, plan, opt.forcing ? &opt.forcing : nullptr);
        if (!s.finite()) {
            traj.status = RunStatus::non_finite;
            traj.message = "non-finite state at step " + std::to_string(i);
            return traj;
        }
        if (west_norm1_sq(s) > ceiling_sq) {
            traj.status = RunStatus::blowup;
            traj.message = "H1 norm above ceiling at step " + std::to_string(i);
            return traj;
        }
        if (i % traj.stride == 0) {
            traj.states.push_back(s);
            traj.energies.push_back(sample(s));
        }
    }
    return traj;
}

/// u_ttt recovered algebraically from the equation,
///   u_ttt = (G(u) - u_tt - c² A u - b A u_t) / τ.
inline SpectralField estimate_uttt(const JmgtState& s, const ModelParams& params,
                                   const TransformPlan& plan) {
    if (!(params.tau > 0.0)) throw ConfigError("estimate_uttt: tau must be > 0");
    SpectralField g = compute_G(s, params, plan);
    const auto& lam = s.basis()->eigenvalues.array();
    g.coeffs -= s.w.coeffs;
    g.coeffs -= params.c * params.c * (lam * s.u.coeffs.array()).matrix();
    g.coeffs -= params.b() * (lam * s.v.coeffs.array()).matrix();
    g.coeffs /= params.tau;
    return g;
}

inline SpectralField estimate_uttt(const JmgtState& s, const ModelParams& params, double padding) {
    return estimate_uttt(s, params, make_plan(s.basis(), padding));
}

// ---------------------------------------------------------------------------
// Picard solver: successive substitution on the mild-solution map
//   Υ(W)(t) = S(t) U0 + ∫_0^t S(t-σ) F_τ(W)(σ) dσ,   F_τ = (0,0,G/τ),
// with the Duhamel integral quadratured by composite trapezoid on the
// step grid (matching the O(dt²) of the stepper).  The iteration is a
// contraction only for small data; the per-iteration ratios
//   r_n = sup_t ||W^{n+1}-W^n|| / sup_t ||W^n-W^{n-1}||   (H2^tau norm)
// are returned as an empirical contraction diagnostic.
// ---------------------------------------------------------------------------

struct PicardResult {
    Trajectory trajectory;          // converged (or last) iterate, stride 1
    std::vector<double> deltas;     // sup-H2^tau increment per iteration
    std::vector<double> ratios;     // deltas[n]/deltas[n-1]
    bool converged = false;
    int iterations = 0;
};

inline PicardResult picard_solve(const JmgtState& initial, const ModelParams& params, double T,
                                 double dt, int max_iter, double tol, double padding = 1.5) {
    params.validate();
    if (!(params.tau > 0.0)) throw ConfigError("picard_solve: tau must be > 0");
    const JmgtPropagator prop = build_jmgt_propagator(initial.basis(), params, dt);
    const TransformPlan plan = make_plan(initial.basis(), padding);
    const int n = initial.basis()->num_modes();
    const long n_steps = std::max<long>(1, steps_for(T, dt));

    auto apply_E = [&](const JmgtState& s) {
        JmgtState out(s.t + dt, SpectralField(s.basis()), SpectralField(s.basis()),
                      SpectralField(s.basis()));
        for (int m = 0; m < n; ++m) {
            Eigen::Vector3d y(s.u.coeffs[m], s.v.coeffs[m], s.w.coeffs[m]);
            Eigen::Vector3d z = prop.E[m] * y;
            out.u.coeffs[m] = z[0];
            out.v.coeffs[m] = z[1];
            out.w.coeffs[m] = z[2];
        }
        return out;
    };

    // W^0 = S(t) U0 on the grid
    std::vector<JmgtState> W;
    W.reserve(n_steps + 1);
    W.push_back(initial);
    for (long i = 1; i <= n_steps; ++i) W.push_back(apply_E(W.back()));

    PicardResult result;
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<SpectralField> F;
        F.reserve(W.size());
        for (const auto& s : W) {
            SpectralField g = compute_G(s, params, plan);
            g.coeffs /= params.tau;
            F.push_back(std::move(g));
        }

        // I_i = E (I_{i-1} + dt/2 F_{i-1}) + dt/2 F_i  realizes the
        // trapezoid Duhamel sum with S(t_i - t_j) = E^{i-j}.
        std::vector<JmgtState> Wn;
        Wn.reserve(W.size());
        Wn.push_back(initial);
        JmgtState free_part = initial;
        Eigen::MatrixXd I = Eigen::MatrixXd::Zero(3, n);
        double delta = 0.0;
        for (long i = 1; i <= n_steps; ++i) {
            free_part = apply_E(free_part);
            for (int m = 0; m < n; ++m) {
                Eigen::Vector3d acc(I(0, m), I(1, m) , I(2, m));
                acc[2] += 0.5 * dt * F[i - 1].coeffs[m];
                acc = prop.E[m] * acc;
                acc[2] += 0.5 * dt * F[i].coeffs[m];
                I.col(m) = acc;
            }
            JmgtState next(free_part.t, free_part.u, free_part.v, free_part.w);
            next.u.coeffs += I.row(0).transpose();
            next.v.coeffs += I.row(1).transpose();
            next.w.coeffs += I.row(2).transpose();
            JmgtState diff(next.t, next.u, next.v, next.w);
            diff.u.coeffs -= W[i].u.coeffs;
            diff.v.coeffs -= W[i].v.coeffs;
            diff.w.coeffs -= W[i].w.coeffs;
            delta = std::max(delta, std::sqrt(weighted_norm_sq(diff, 2, params)));
            Wn.push_back(std::move(next));
        }

        W = std::move(Wn);
        result.iterations = it;
        if (!result.deltas.empty() && result.deltas.back() > 0.0)
            result.ratios.push_back(delta / result.deltas.back());
        result.deltas.push_back(delta);
        if (delta < tol) {
            result.converged = true;
            break;
        }
    }

    Trajectory traj;
    traj.params = params;
    traj.dt = dt;
    traj.stride = 1;
    traj.padding = padding;
    traj.status = RunStatus::ok;
    for (auto& s : W) {
        traj.energies.push_back(sample_energies(s, params));
        traj.states.push_back(std::move(s));
    }
    result.trajectory = std::move(traj);
    return result;
}

} // namespace jmgtlab
