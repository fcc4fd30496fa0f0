#pragma once

// Post-processing: energy-identity residuals, decay-rate fits, limit
// errors, u_ttt dissipation integrals, log-log slopes.  All integrals
// are composite trapezoid on the snapshot grid, consistent with the
// O(dt²) accuracy of the stepper.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "propagator.hpp"

namespace jmgtlab {

// ---------------------------------------------------------------------------
// Energy identity.  Along solutions,
//   d/dt E1 + γ ||u_tt||² = (G(u), z_t),   z_t = u_tt + (c²/b) u_t,
// so the interval-averaged discrete residual
//   R_j = [E1(t_{j+1}) - E1(t_j)]/Δ + avg(γ||u_tt||²) - avg((G, z_t))
// vanishes to second order in the snapshot spacing Δ.
// ---------------------------------------------------------------------------

struct ResidualReport {
    std::vector<double> residuals; // one per snapshot interval
    double max_abs = 0.0;
};

inline ResidualReport energy_identity_residual(const Trajectory& traj,
                                               const ModelParams& params) {
    ResidualReport report;
    const size_t n = traj.states.size();
    if (n < 2) return report;
    const TransformPlan plan = make_plan(traj.states[0].basis(), traj.padding);
    const double r = params.c * params.c / params.b();
    const double gamma = params.gamma();

    std::vector<double> e1(n), diss(n), work(n);
    for (size_t j = 0; j < n; ++j) {
        const JmgtState& s = traj.states[j];
        e1[j] = energy_E1(s, params);
        diss[j] = gamma * l2_norm_sq(s.w); // γ ||u_tt||²
        SpectralField g = compute_G(s, params, plan);
        SpectralField zt = s.w;
        zt.coeffs += r * s.v.coeffs;
        work[j] = l2_inner(g, zt);
    }
    report.residuals.reserve(n - 1);
    for (size_t j = 0; j + 1 < n; ++j) {
        const double dt = traj.states[j + 1].t - traj.states[j].t;
        const double R = (e1[j + 1] - e1[j]) / dt + 0.5 * (diss[j] + diss[j + 1]) -
                         0.5 * (work[j] + work[j + 1]);
        report.residuals.push_back(R);
        report.max_abs = std::max(report.max_abs, std::abs(R));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Decay-rate estimation: least-squares line on (t, ln energy).
// ---------------------------------------------------------------------------

enum class EnergyField { E, calE, frakE };

inline double energy_field_value(const EnergySample& s, EnergyField f) {
    switch (f) {
        case EnergyField::E: return s.E;
        case EnergyField::calE: return s.calE;
        case EnergyField::frakE: return s.frakE;
    }
    return s.E;
}

struct DecayFit {
    double omega = 0.0;          // fitted rate: energy ~ exp(-omega t)
    double log_amplitude = 0.0;  // intercept
    double r_squared = 0.0;
    double t_start = 0.0, t_end = 0.0;
    double floor_used = 0.0;
    int samples_used = 0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int points = 0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit fit;
    const size_t n = x.size();
    fit.points = static_cast<int>(n);
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < n; ++i) {
        const double pred = fit.intercept + fit.slope * x[i];
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

/// Fit ln(energy) = ln(N) - omega t over samples above `floor`, after
/// dropping the leading `trim_fraction` of the window (initial transient).
/// Returns nullopt when fewer than 5 samples survive.
inline std::optional<DecayFit> fit_decay_rate(const std::vector<EnergySample>& samples,
                                              EnergyField field, double floor,
                                              double trim_fraction = 0.1) {
    const size_t skip = static_cast<size_t>(samples.size() * trim_fraction);
    std::vector<double> t, lny;
    for (size_t i = skip; i < samples.size(); ++i) {
        const double y = energy_field_value(samples[i], field);
        if (y > floor) {
            t.push_back(samples[i].t);
            lny.push_back(std::log(y));
        }
    }
    if (t.size() < 5) return std::nullopt;
    LineFit line = least_squares_line(t, lny);
    DecayFit fit;
    fit.omega = -line.slope;
    fit.log_amplitude = line.intercept;
    fit.r_squared = line.r_squared;
    fit.t_start = t.front();
    fit.t_end = t.back();
    fit.floor_used = floor;
    fit.samples_used = static_cast<int>(t.size());
    return fit;
}

// ---------------------------------------------------------------------------
// Limit error: e(t) = ||A x||² + ||A^{1/2} x_t||² with x = u^τ - u⁰,
// the squared D(A) x D(A^{1/2}) distance after projecting out u_tt.
// ---------------------------------------------------------------------------

struct LimitError {
    std::vector<double> times;
    std::vector<double> values;
    double sup = 0.0;
};

inline LimitError error_vs_limit(const Trajectory& jmgt, const WestTrajectory& west) {
    if (jmgt.states.size() != west.states.size())
        throw std::invalid_argument("error_vs_limit: snapshot count mismatch");
    LimitError err;
    for (size_t j = 0; j < jmgt.states.size(); ++j) {
        const JmgtState& a = jmgt.states[j];
        const WestState& b = west.states[j];
        if (std::abs(a.t - b.t) > 1e-12 * std::max(1.0, std::abs(a.t)))
            throw std::invalid_argument("error_vs_limit: time grids differ");
        require_same_basis(a.u, b.u, "error_vs_limit");
        const auto& lam = a.basis()->eigenvalues.array();
        const auto du = (a.u.coeffs - b.u.coeffs).array();
        const auto dv = (a.v.coeffs - b.v.coeffs).array();
        const double e = (lam.square() * du.square()).sum() + (lam * dv.square()).sum();
        err.times.push_back(a.t);
        err.values.push_back(e);
        err.sup = std::max(err.sup, e);
    }
    return err;
}

/// Trapezoid integral of ||u_ttt||² over the trajectory.
inline double uttt_integral(const Trajectory& traj, const ModelParams& params) {
    const size_t n = traj.states.size();
    if (n < 2) return 0.0;
    const TransformPlan plan = make_plan(traj.states[0].basis(), traj.padding);
    std::vector<double> y(n);
    for (size_t j = 0; j < n; ++j)
        y[j] = l2_norm_sq(estimate_uttt(traj.states[j], params, plan));
    double acc = 0.0;
    for (size_t j = 0; j + 1 < n; ++j)
        acc += 0.5 * (y[j] + y[j + 1]) * (traj.states[j + 1].t - traj.states[j].t);
    return acc;
}

/// Least squares on (ln x, ln y).  Rejects nonpositive data and fewer
/// than 3 points (nullopt).
inline std::optional<LineFit> loglog_slope(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) return std::nullopt;
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return least_squares_line(lx, ly);
}

// ---------------------------------------------------------------------------
// Stabilizability probe.  For candidate constants C1, the smallest C2 with
//   calE(t) + C1 ∫_0^t calE dσ <= C2 calE(0)   for all snapshot times
// is C2*(C1) = sup_t [calE(t) + C1 ∫_0^t calE]/calE(0).  Monitored, never
// asserted: the trajectory decays iff some C1 > 0 yields a finite, T-stable
// C2*.
// ---------------------------------------------------------------------------

struct StabilizabilityReport {
    std::vector<std::pair<double, double>> c1_c2; // frontier (C1, C2*(C1))
    double energy_integral = 0.0;                 // ∫_0^T calE
    bool growing = false;                         // calE(T) > calE(0)
};

inline StabilizabilityReport stabilizability_report(const Trajectory& traj,
                                                    const ModelParams& /*params*/,
                                                    const std::vector<double>& c1_grid = {}) {
    StabilizabilityReport report;
    const size_t n = traj.energies.size();
    if (n < 2) return report;
    std::vector<double> calE(n), cum(n, 0.0);
    for (size_t j = 0; j < n; ++j) calE[j] = traj.energies[j].calE;
    for (size_t j = 1; j < n; ++j)
        cum[j] = cum[j - 1] +
                 0.5 * (calE[j] + calE[j - 1]) * (traj.energies[j].t - traj.energies[j - 1].t);
    report.energy_integral = cum.back();
    report.growing = calE.back() > calE.front();
    const double e0 = calE.front();
    if (!(e0 > 0.0)) throw std::invalid_argument("stabilizability_report: calE(0) must be > 0");

    std::vector<double> grid = c1_grid;
    if (grid.empty())
        for (int i = 0; i <= 16; ++i) grid.push_back(0.25 * i);
    for (double c1 : grid) {
        double c2 = 0.0;
        for (size_t j = 0; j < n; ++j) c2 = std::max(c2, (calE[j] + c1 * cum[j]) / e0);
        report.c1_c2.emplace_back(c1, c2);
    }
    return report;
}

} // namespace jmgtlab
