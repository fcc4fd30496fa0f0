#pragma once

// Command implementations shared by the CLI tool and the acceptance
// suite.  Each command writes its CSV outputs, a gnuplot script and a
// manifest under `out_dir` and returns a process exit code:
//   0 success, 1 configuration error (raised as ConfigError before we
//   get here), 2 numerical failure, 3 acceptance failure.

#include <chrono>
#include <filesystem>
#include <limits>
#include <sstream>

#include "config.hpp"
#include "diagnostics.hpp"
#include "experiments.hpp"
#include "io.hpp"
#include "version.hpp"

namespace jmgtlab {

struct CommandResult {
    int exit_code = 0;
    std::vector<std::string> outputs; // file names relative to out_dir
    std::string summary;              // one-paragraph result description
};

namespace detail {

inline void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                           const ExperimentConfig& cfg, const CommandResult& result,
                           double seconds) {
    std::ostringstream os;
    os << "# " << command << " manifest (jmgt-lab " << JMGTLAB_VERSION << ")\n";
    os << "# wall_clock_seconds = " << format_double(seconds) << "\n";
    os << "# exit_status = " << result.exit_code << "\n";
    for (const auto& f : result.outputs) os << "# output = " << f << "\n";
    std::istringstream summary(result.summary);
    std::string line;
    while (std::getline(summary, line)) os << "# " << line << "\n";
    os << "#\n# resolved configuration (this file parses as a config):\n";
    os << config_echo(cfg);
    write_text_file(out_dir / "manifest.txt", os.str());
}

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
    CsvWriter w("tau,sup_err_sq,uttt_integral,omega,r_squared,flag");
    for (const auto& r : records) {
        w.field(r.tau).field(r.sup_err_sq).field(r.uttt_integral);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        w.field(r.fit ? r.fit->omega : nan).field(r.fit ? r.fit->r_squared : nan);
        w.field(static_cast<int>(r.status));
        w.end_row();
    }
    return w.str();
}

inline std::string threshold_csv(const std::vector<ThresholdProbe>& history) {
    CsvWriter w("iter,amplitude,h0tau_norm,decayed");
    for (const auto& p : history) {
        w.field(p.iter).field(p.amplitude).field(p.h0tau_norm).field(p.decayed ? 1 : 0);
        w.end_row();
    }
    return w.str();
}

template <typename Fn>
CommandResult timed_command(const std::string& command, const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir, Fn&& body) {
    std::filesystem::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    CommandResult result = body();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.outputs.push_back("manifest.txt");
    write_manifest(out_dir, command, cfg, result, seconds);
    return result;
}

} // namespace detail

inline CommandResult cmd_simulate(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out_dir) {
    return detail::timed_command("simulate", cfg, out_dir, [&] {
        CommandResult res;
        const BasisPtr basis = cfg.make_basis();
        std::vector<EnergySample> energies;
        RunStatus status = RunStatus::ok;
        std::string message, stab;
        if (cfg.solver == "jmgt") {
            const ModelParams p = cfg.make_params(cfg.tau);
            Trajectory traj =
                simulate_jmgt(make_jmgt_initial(cfg, basis, p, cfg.amplitude), p,
                              cfg.sim_options());
            energies = traj.energies;
            status = traj.status;
            message = traj.message;
            if (traj.ok() && traj.energies.size() > 1 && traj.energies.front().calE > 0.0) {
                // monitored stabilizability frontier: smallest C2 with
                // calE(t) + C1 int calE <= C2 calE(0) for a few C1 candidates
                StabilizabilityReport rep = stabilizability_report(traj, p);
                std::ostringstream os;
                os << "stabilizability (C1 -> C2):";
                for (size_t i = 0; i < rep.c1_c2.size(); i += 4)
                    os << " " << format_double(rep.c1_c2[i].first) << " -> "
                       << format_double(rep.c1_c2[i].second) << ",";
                os << " energy integral " << format_double(rep.energy_integral)
                   << (rep.growing ? " (energy grew over the window)" : "");
                stab = os.str();
            }
        } else {
            const ModelParams p = cfg.make_params(0.0);
            auto [u0, u1] = make_initial_data(cfg, basis, cfg.amplitude);
            WestTrajectory traj = simulate_westervelt(WestState(0.0, std::move(u0), std::move(u1)),
                                                      p, cfg.sim_options());
            energies = traj.energies;
            status = traj.status;
            message = traj.message;
        }
        write_text_file(out_dir / "energy.csv", energy_csv(energies));
        res.outputs.push_back("energy.csv");
        write_text_file(out_dir / "plot.gp",
                        "set logscale y\nset xlabel 't'\nset ylabel 'energy'\n"
                        "plot for [col=2:6] 'energy.csv' using 1:col with lines title columnhead\n");
        res.outputs.push_back("plot.gp");
        std::ostringstream os;
        os << "solver = " << cfg.solver << ", snapshots = " << energies.size()
           << ", status = " << to_string(status);
        if (!message.empty()) os << " (" << message << ")";
        if (!stab.empty()) os << "\n" << stab;
        res.summary = os.str();
        res.exit_code = status == RunStatus::ok ? 0 : 2;
        return res;
    });
}

inline CommandResult cmd_sweep_tau(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir) {
    return detail::timed_command("sweep_tau", cfg, out_dir, [&] {
        CommandResult res;
        TauSweepResult sweep = run_tau_sweep(cfg);
        write_text_file(out_dir / "sweep.csv", detail::sweep_csv(sweep.records));
        res.outputs.push_back("sweep.csv");
        write_text_file(out_dir / "plot.gp",
                        "set logscale xy\nset xlabel 'tau'\n"
                        "plot 'sweep.csv' using 1:2 with linespoints title 'sup error^2', \\\n"
                        "     'sweep.csv' using 1:3 with linespoints title 'u_ttt integral'\n");
        res.outputs.push_back("plot.gp");
        std::ostringstream os;
        if (sweep.err_slope)
            os << "limit-error slope = " << format_double(sweep.err_slope->slope)
               << " (R^2 = " << format_double(sweep.err_slope->r_squared) << ")\n";
        else
            os << "limit-error slope: not fit (flagged runs or nonpositive data)\n";
        if (sweep.uttt_slope)
            os << "u_ttt integral slope = " << format_double(sweep.uttt_slope->slope) << "\n";
        int flagged = 0;
        for (const auto& r : sweep.records)
            if (r.status != RunStatus::ok) ++flagged;
        os << "records = " << sweep.records.size() << ", flagged = " << flagged;
        res.summary = os.str();
        return res;
    });
}

inline CommandResult cmd_sweep_decay(const ExperimentConfig& cfg,
                                     const std::filesystem::path& out_dir) {
    return detail::timed_command("sweep_decay", cfg, out_dir, [&] {
        CommandResult res;
        DecaySweepResult sweep = run_decay_sweep(cfg);
        write_text_file(out_dir / "sweep.csv", detail::sweep_csv(sweep.records));
        res.outputs.push_back("sweep.csv");
        CsvWriter frak("tau,omega_frak,r_squared_frak");
        for (const auto& r : sweep.records) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            frak.field(r.tau)
                .field(r.fit_frak ? r.fit_frak->omega : nan)
                .field(r.fit_frak ? r.fit_frak->r_squared : nan);
            frak.end_row();
        }
        write_text_file(out_dir / "decay_frak.csv", frak.str());
        res.outputs.push_back("decay_frak.csv");
        write_text_file(out_dir / "plot.gp",
                        "set logscale x\nset xlabel 'tau'\nset ylabel 'fitted omega'\n"
                        "plot 'sweep.csv' using 1:4 with linespoints title 'omega(calE)', \\\n"
                        "     'decay_frak.csv' using 1:2 with linespoints title 'omega(frakE)'\n");
        res.outputs.push_back("plot.gp");
        std::ostringstream os;
        os << "uniform = " << (sweep.uniform ? "yes" : "no")
           << ", omega(tau_max) = " << format_double(sweep.omega_at_tau_max)
           << ", min omega = " << format_double(sweep.omega_min);
        if (!sweep.evidence.empty()) os << "\nevidence: " << sweep.evidence;
        res.summary = os.str();
        return res;
    });
}

inline CommandResult cmd_threshold(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir) {
    return detail::timed_command("threshold", cfg, out_dir, [&] {
        CommandResult res;
        ThresholdResult th = run_threshold_search(cfg);
        write_text_file(out_dir / "threshold.csv", detail::threshold_csv(th.history));
        res.outputs.push_back("threshold.csv");
        write_text_file(out_dir / "plot.gp",
                        "set xlabel 'iteration'\nset logscale y\n"
                        "plot 'threshold.csv' using 1:3:($4+1) with points palette title 'H0^tau norm'\n");
        res.outputs.push_back("plot.gp");
        std::ostringstream os;
        if (th.open_ended)
            os << "open-ended: no decay failure up to the amplitude ceiling; rho_lo = "
               << format_double(th.rho_lo);
        else
            os << "bracket on ||U0||_{H0^tau}: [" << format_double(th.rho_lo) << ", "
               << format_double(th.rho_hi) << "], bound level " << th.bound_level;
        res.summary = os.str();
        return res;
    });
}

inline CommandResult cmd_mms(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    return detail::timed_command("mms", cfg, out_dir, [&] {
        CommandResult res;
        MmsResult mms = run_mms_order(cfg);
        CsvWriter w("solver,dt,error");
        for (size_t i = 0; i < mms.dts.size(); ++i) {
            w.field(std::string("jmgt")).field(mms.dts[i]).field(mms.jmgt_errors[i]);
            w.end_row();
        }
        for (size_t i = 0; i < mms.dts.size(); ++i) {
            w.field(std::string("westervelt")).field(mms.dts[i]).field(mms.west_errors[i]);
            w.end_row();
        }
        write_text_file(out_dir / "mms.csv", w.str());
        res.outputs.push_back("mms.csv");
        write_text_file(out_dir / "plot.gp",
                        "set logscale xy\nset xlabel 'dt'\nset ylabel 'error at T'\n"
                        "plot '< grep jmgt mms.csv' using 2:3 with linespoints title 'jmgt', \\\n"
                        "     '< grep westervelt mms.csv' using 2:3 with linespoints title 'westervelt'\n");
        res.outputs.push_back("plot.gp");
        std::ostringstream os;
        const double js = mms.jmgt_slope ? mms.jmgt_slope->slope : 0.0;
        const double ws = mms.west_slope ? mms.west_slope->slope : 0.0;
        os << "temporal order: jmgt = " << format_double(js)
           << ", westervelt = " << format_double(ws);
        if (mms.roundoff_floor)
            os << " (errors at the round-off floor; slope unreliable)";
        res.summary = os.str();
        res.exit_code = (mms.roundoff_floor || (js >= 1.5 && ws >= 1.5)) ? 0 : 3;
        return res;
    });
}

inline CommandResult cmd_picard(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    return detail::timed_command("picard", cfg, out_dir, [&] {
        CommandResult res;
        PicardComparison cmp = run_picard_vs_etd(cfg);
        CsvWriter w("iter,delta,ratio");
        for (size_t i = 0; i < cmp.picard.deltas.size(); ++i) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            w.field(static_cast<int>(i + 1)).field(cmp.picard.deltas[i]);
            w.field(i > 0 ? cmp.picard.ratios[i - 1] : nan);
            w.end_row();
        }
        write_text_file(out_dir / "picard.csv", w.str());
        res.outputs.push_back("picard.csv");
        write_text_file(out_dir / "plot.gp",
                        "set logscale y\nset xlabel 'iteration'\n"
                        "plot 'picard.csv' using 1:2 with linespoints title 'sup increment'\n");
        res.outputs.push_back("plot.gp");
        PicardRampResult ramp = run_picard_ramp(cfg);
        CsvWriter rw("amplitude,first_ratio,contractive");
        for (const auto& e : ramp.entries) {
            rw.field(e.amplitude).field(e.first_ratio).field(e.contractive ? 1 : 0);
            rw.end_row();
        }
        write_text_file(out_dir / "picard_ramp.csv", rw.str());
        res.outputs.push_back("picard_ramp.csv");

        std::ostringstream os;
        os << "converged = " << (cmp.picard.converged ? "yes" : "no")
           << ", iterations = " << cmp.picard.iterations
           << ", sup-H2^tau discrepancy vs stepper = " << format_double(cmp.sup_discrepancy)
           << " (bound " << format_double(cmp.bound) << ")\n";
        if (ramp.first_non_contractive > 0.0)
            os << "amplitude ramp: first non-contractive amplitude = "
               << format_double(ramp.first_non_contractive);
        else
            os << "amplitude ramp: contractive up to the ceiling "
               << format_double(cfg.threshold_ceiling);
        res.summary = os.str();
        return res;
    });
}

} // namespace jmgtlab
