#pragma once

// Acceptance suite: ten self-contained checks covering spectral
// correctness, linear exactness against closed forms, the discrete
// energy identity, uniform-in-τ decay, the O(τ) limit rate, the u_ttt
// dissipation bound, Picard/ETD agreement, manufactured-solution order,
// Westervelt decay and output determinism.  Each check prints one
// PASS/FAIL line; any FAIL maps to exit code 3 in the CLI.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "reference.hpp"

namespace jmgtlab::selftest {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::string detail;
};

namespace detail {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            append("FAILED: " + what);
        }
    }
    void note(const std::string& what) { append(what); }

private:
    void append(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

inline ExperimentConfig sweep_config() {
    ExperimentConfig cfg;
    cfg.dim = 1;
    cfg.modes = 16;
    cfg.length_x = M_PI;
    cfg.c = 1.0;
    cfg.delta = 1.0;
    cfg.k = 1.0;
    cfg.tau_max = 0.1;
    cfg.tau_factor = 0.5;
    cfg.tau_count = 8;
    cfg.profile = "smooth";
    cfg.amplitude = 1e-2;
    cfg.dt = 1e-3;
    cfg.stride = 10;
    cfg.padding = 1.5;
    return cfg;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

} // namespace detail

// -- 1: spectral transforms -------------------------------------------------

inline detail::Check check_spectral() {
    detail::Check c;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (const auto& [dim, N] : std::vector<std::pair<int, int>>{{1, 64}, {2, 12}}) {
        BasisPtr basis = build_basis(dim, N, {M_PI, 1.7});
        SpectralField f(basis);
        for (int i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] = dist(rng);

        for (double padding : {1.0, 1.5}) {
            TransformPlan plan = make_plan(basis, padding);
            SpectralField back = to_spectral(to_physical(f, plan), plan);
            const double rt = (back.coeffs - f.coeffs).lpNorm<Eigen::Infinity>();
            c.require(rt <= 1e-12, "round-trip error " + format_double(rt) + " > 1e-12 (dim " +
                                       std::to_string(dim) + ", padding " +
                                       format_double(padding) + ")");
        }

        // Parseval vs padded-grid quadrature of the synthesized square
        TransformPlan plan = make_plan(basis, 1.5);
        PhysicalField phys = to_physical(f, plan);
        double quad = phys.samples.squaredNorm() * plan.weight[0];
        if (dim == 2) quad *= plan.weight[1];
        const double spectral = l2_norm_sq(f);
        c.require(std::abs(quad - spectral) <= 1e-10 * spectral,
                  "Parseval mismatch " + format_double(std::abs(quad - spectral) / spectral));

        // A^{1/2} twice equals A
        SpectralField half = apply_power_A(apply_power_A(f, 0.5), 0.5);
        SpectralField full = apply_power_A(f, 1.0);
        const double rel = (half.coeffs - full.coeffs).lpNorm<Eigen::Infinity>() /
                           full.coeffs.lpNorm<Eigen::Infinity>();
        c.require(rel <= 1e-15, "A^{1/2} composition error " + format_double(rel));
    }
    return c;
}

// -- 2: linear single-mode exactness -----------------------------------------

inline detail::Check check_linear_exactness() {
    detail::Check c;
    BasisPtr basis = build_basis(1, M_PI); // lambda_1 = 1
    ModelParams p;
    p.tau = 0.1;
    p.c = 1.0;
    p.delta = 1.0;
    p.k = 0.0;

    const double y0 = 1.0, y1 = 0.5, y2 = -0.25;
    SpectralField u(basis), v(basis), w(basis);
    u.coeffs[0] = y0;
    v.coeffs[0] = y1;
    w.coeffs[0] = y2;

    SimOptions opt;
    opt.T = 10.0;
    opt.dt = 1e-2;
    opt.stride = 10;
    Trajectory traj = simulate_jmgt(JmgtState(0.0, u, v, w), p, opt);
    auto sol = jmgt_mode_solution(p, basis->eigenvalues[0], y0, y1, y2);
    double sup = 0.0;
    for (const auto& s : traj.states) {
        sup = std::max(sup, std::abs(s.u.coeffs[0] - sol.eval(s.t, 0)));
        sup = std::max(sup, std::abs(s.v.coeffs[0] - sol.eval(s.t, 1)));
        sup = std::max(sup, std::abs(s.w.coeffs[0] - sol.eval(s.t, 2)));
    }
    c.require(sup <= 1e-8, "relaxed-solver deviation from cubic-root solution " +
                               format_double(sup) + " > 1e-8");
    c.note("jmgt sup dev " + format_double(sup));

    WestTrajectory wtraj = simulate_westervelt(WestState(0.0, u, v), p, opt);
    auto wsol = westervelt_mode_solution(p, basis->eigenvalues[0], y0, y1);
    double wsup = 0.0;
    for (const auto& s : wtraj.states) {
        wsup = std::max(wsup, std::abs(s.u.coeffs[0] - wsol.eval(s.t, 0)));
        wsup = std::max(wsup, std::abs(s.v.coeffs[0] - wsol.eval(s.t, 1)));
    }
    c.require(wsup <= 1e-8, "limit-solver deviation from quadratic-root solution " +
                                format_double(wsup) + " > 1e-8");
    c.note("westervelt sup dev " + format_double(wsup));
    return c;
}

// -- 3: discrete energy identity ---------------------------------------------

inline detail::Check check_energy_identity() {
    detail::Check c;
    ExperimentConfig cfg = detail::sweep_config();
    cfg.k = 0.0;
    const BasisPtr basis = cfg.make_basis();
    const ModelParams p = cfg.make_params(0.1);

    auto residual_at = [&](double dt) {
        SimOptions opt;
        opt.T = 2.0;
        opt.dt = dt;
        opt.stride = 1;
        JmgtState init = make_jmgt_initial(cfg, basis, p, cfg.amplitude);
        Trajectory traj = simulate_jmgt(init, p, opt);
        return energy_identity_residual(traj, p).max_abs;
    };
    const double r1 = residual_at(1e-2);
    const double r2 = residual_at(5e-3);
    const double factor = r1 / r2;
    c.require(factor >= 3.5 && factor <= 4.5,
              "refinement factor " + format_double(factor) + " outside [3.5, 4.5]");
    c.note("residuals " + format_double(r1) + " -> " + format_double(r2) + ", factor " +
           format_double(factor));
    return c;
}

// -- 4: uniform-in-tau decay --------------------------------------------------

inline detail::Check check_uniform_decay() {
    detail::Check c;
    ExperimentConfig cfg = detail::sweep_config();
    cfg.T = 10.0;
    cfg.r2_min = 0.95;
    cfg.uniformity_fraction = 0.5;
    DecaySweepResult sweep = run_decay_sweep(cfg);
    for (const auto& r : sweep.records) {
        c.require(r.status == RunStatus::ok,
                  "tau " + format_double(r.tau) + " flagged: " + r.message);
        if (r.status != RunStatus::ok) continue;
        c.require(static_cast<bool>(r.fit), "tau " + format_double(r.tau) + ": no fit");
        if (!r.fit) continue;
        c.require(r.fit->omega > 0.0,
                  "tau " + format_double(r.tau) + ": omega " + format_double(r.fit->omega));
        c.require(r.fit->r_squared >= 0.95, "tau " + format_double(r.tau) + ": R^2 " +
                                                format_double(r.fit->r_squared) + " < 0.95");
    }
    c.require(sweep.uniform, "uniformity verdict false: " + sweep.evidence);
    c.note("omega(tau_max) " + format_double(sweep.omega_at_tau_max) + ", min omega " +
           format_double(sweep.omega_min));
    return c;
}

// -- 5 and 6: vanishing-relaxation rate and u_ttt scaling ---------------------

inline std::pair<detail::Check, detail::Check> check_tau_rate_and_uttt() {
    detail::Check c5, c6;
    ExperimentConfig cfg = detail::sweep_config();
    cfg.T = 5.0;
    TauSweepResult sweep = run_tau_sweep(cfg);
    for (const auto& r : sweep.records)
        c5.require(r.status == RunStatus::ok,
                   "tau " + format_double(r.tau) + " flagged: " + r.message);
    c5.require(static_cast<bool>(sweep.err_slope), "limit-error slope could not be fit");
    if (sweep.err_slope) {
        c5.require(sweep.err_slope->slope >= 0.9,
                   "slope " + format_double(sweep.err_slope->slope) + " < 0.9");
        c5.require(sweep.err_slope->r_squared >= 0.98,
                   "R^2 " + format_double(sweep.err_slope->r_squared) + " < 0.98");
        c5.note("slope " + format_double(sweep.err_slope->slope) + ", R^2 " +
                format_double(sweep.err_slope->r_squared));
    }
    c6.require(static_cast<bool>(sweep.uttt_slope), "u_ttt slope could not be fit");
    if (sweep.uttt_slope) {
        c6.require(sweep.uttt_slope->slope >= -1.1,
                   "slope " + format_double(sweep.uttt_slope->slope) + " < -1.1");
        c6.note("slope " + format_double(sweep.uttt_slope->slope));
    }
    return {c5, c6};
}

// -- 7: Picard vs ETD ----------------------------------------------------------

inline detail::Check check_picard() {
    detail::Check c;
    ExperimentConfig cfg = detail::sweep_config();
    cfg.amplitude = 1e-3;
    cfg.tau = 0.1;
    cfg.T = 2.0;
    cfg.dt = 1e-2;
    cfg.picard_tol = 1e-10;
    PicardComparison cmp = run_picard_vs_etd(cfg);
    c.require(cmp.picard.converged, "picard iteration did not converge");
    c.require(cmp.sup_discrepancy <= cmp.bound,
              "discrepancy " + format_double(cmp.sup_discrepancy) + " > bound " +
                  format_double(cmp.bound));
    c.note("nonlinear discrepancy " + format_double(cmp.sup_discrepancy) + " (bound " +
           format_double(cmp.bound) + ")");

    cfg.k = 0.0;
    PicardComparison lin = run_picard_vs_etd(cfg);
    c.require(lin.sup_discrepancy <= 1e-10,
              "linear discrepancy " + format_double(lin.sup_discrepancy) + " > 1e-10");
    c.note("linear discrepancy " + format_double(lin.sup_discrepancy));
    return c;
}

// -- 8: manufactured-solution order --------------------------------------------

inline detail::Check check_mms() {
    detail::Check c;
    ExperimentConfig cfg = detail::sweep_config();
    cfg.tau = 0.1;
    MmsResult mms = run_mms_order(cfg);
    c.require(static_cast<bool>(mms.jmgt_slope) && static_cast<bool>(mms.west_slope),
              "order slopes could not be fit");
    if (mms.jmgt_slope) {
        c.require(mms.jmgt_slope->slope >= 1.9 && mms.jmgt_slope->slope <= 2.3,
                  "relaxed-solver slope " + format_double(mms.jmgt_slope->slope) +
                      " outside [1.9, 2.3]");
        c.note("jmgt slope " + format_double(mms.jmgt_slope->slope));
    }
    if (mms.west_slope) {
        c.require(mms.west_slope->slope >= 1.9 && mms.west_slope->slope <= 2.3,
                  "limit-solver slope " + format_double(mms.west_slope->slope) +
                      " outside [1.9, 2.3]");
        c.note("westervelt slope " + format_double(mms.west_slope->slope));
    }
    return c;
}

// -- 9: Westervelt decay and dissipation integral -------------------------------

inline detail::Check check_westervelt_decay() {
    detail::Check c;
    ExperimentConfig cfg = detail::sweep_config();
    const BasisPtr basis = cfg.make_basis();
    const ModelParams p = cfg.make_params(0.0);
    const TransformPlan plan = make_plan(basis, cfg.padding);

    auto dissipation = [&](const WestTrajectory& traj) {
        // ∫ [ ||u_tt||² + ||A u||² + ||A^{1/2} u_t||² ] dt, trapezoid
        std::vector<double> y;
        for (const auto& s : traj.states) {
            SpectralField acc = westervelt_accel(s, p, plan);
            y.push_back(l2_norm_sq(acc) + sobolev_norm_sq(s.u, 1.0) +
                        sobolev_norm_sq(s.v, 0.5));
        }
        double total = 0.0;
        for (size_t j = 0; j + 1 < y.size(); ++j)
            total += 0.5 * (y[j] + y[j + 1]) * traj.snapshot_dt();
        return total;
    };
    auto run = [&](double T) {
        SimOptions opt = cfg.sim_options();
        opt.T = T;
        auto [u0, u1] = make_initial_data(cfg, basis, cfg.amplitude);
        return simulate_westervelt(WestState(0.0, std::move(u0), std::move(u1)), p, opt);
    };

    WestTrajectory t1 = run(10.0);
    WestTrajectory t2 = run(20.0);
    c.require(t1.ok() && t2.ok(), "limit run flagged");
    const double floor = 1e-12 * t1.energies.front().calE;
    auto fit = fit_decay_rate(t1.energies, EnergyField::calE, floor);
    c.require(static_cast<bool>(fit), "no decay fit");
    if (fit) {
        c.require(fit->omega > 0.0, "omega " + format_double(fit->omega) + " <= 0");
        c.require(fit->r_squared >= 0.95, "R^2 " + format_double(fit->r_squared) + " < 0.95");
        c.note("omega " + format_double(fit->omega) + ", R^2 " + format_double(fit->r_squared));
    }
    const double d1 = dissipation(t1), d2 = dissipation(t2);
    const double rel = std::abs(d2 - d1) / d1;
    c.require(rel <= 0.10, "dissipation integral drifts " + format_double(rel) + " > 10%");
    c.note("dissipation integral " + format_double(d1) + ", T-doubling change " +
           format_double(rel));
    return c;
}

// -- 10: determinism -------------------------------------------------------------

inline detail::Check check_determinism() {
    detail::Check c;
    ExperimentConfig cfg = detail::sweep_config();
    cfg.tau_count = 3;
    cfg.T = 1.0;
    const auto base = std::filesystem::temp_directory_path() / "jmgtlab_selftest";
    std::filesystem::remove_all(base);
    cmd_sweep_tau(cfg, base / "run1");
    cmd_sweep_tau(cfg, base / "run2");
    const std::string a = detail::read_file(base / "run1" / "sweep.csv");
    const std::string b = detail::read_file(base / "run2" / "sweep.csv");
    c.require(!a.empty() && a == b, "repeated sweep produced different bytes");
    c.note("sweep.csv identical across runs (" + std::to_string(a.size()) + " bytes)");
    std::filesystem::remove_all(base);
    return c;
}

// ---------------------------------------------------------------------------

inline std::vector<CriterionResult> run_acceptance(std::ostream& os) {
    std::vector<CriterionResult> results;
    auto record = [&](int id, const std::string& name, double budget_s, detail::Check check,
                      double seconds) {
        CriterionResult r;
        r.id = id;
        r.name = name;
        r.seconds = seconds;
        if (seconds > budget_s) check.require(false, "runtime budget exceeded");
        r.pass = check.ok;
        r.detail = check.detail;
        os << "[" << (r.pass ? "PASS" : "FAIL") << "] criterion " << id << " (" << name << ", "
           << format_double(seconds) << " s): " << (r.detail.empty() ? "ok" : r.detail) << "\n";
        results.push_back(std::move(r));
    };
    auto timed = [](auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        auto check = fn();
        const double s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return std::make_pair(check, s);
    };

    {
        auto [c, s] = timed(check_spectral);
        record(1, "spectral correctness", 1.0, c, s);
    }
    {
        auto [c, s] = timed(check_linear_exactness);
        record(2, "linear exactness", 1.0, c, s);
    }
    {
        auto [c, s] = timed(check_energy_identity);
        record(3, "energy identity", 5.0, c, s);
    }
    {
        auto [c, s] = timed(check_uniform_decay);
        record(4, "uniform decay", 120.0, c, s);
    }
    {
        const auto t0 = std::chrono::steady_clock::now();
        auto [c5, c6] = check_tau_rate_and_uttt();
        const double s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        record(5, "vanishing-relaxation rate", 120.0, c5, s);
        record(6, "u_ttt scaling", 120.0, c6, 0.0);
    }
    {
        auto [c, s] = timed(check_picard);
        record(7, "picard cross-validation", 30.0, c, s);
    }
    {
        auto [c, s] = timed(check_mms);
        record(8, "manufactured solutions", 30.0, c, s);
    }
    {
        auto [c, s] = timed(check_westervelt_decay);
        record(9, "westervelt decay", 30.0, c, s);
    }
    {
        auto [c, s] = timed(check_determinism);
        record(10, "determinism", 60.0, c, s);
    }
    return results;
}

inline bool all_passed(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return !results.empty();
}

} // namespace jmgtlab::selftest
