// jmgt-lab command-line driver.
//
// Subcommands: simulate, sweep_tau, sweep_decay, threshold, mms, picard,
// selftest.  Every experiment reads a flat key=value config (--config)
// whose keys are also exposed as flags; flags override file keys.  All
// outputs land under --out-dir (default ./out).
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 selftest/acceptance failure.

#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>

#include "jmgtlab/commands.hpp"
#include "jmgtlab/selftest.hpp"
#include "jmgtlab/version.hpp"

namespace {

struct SubcommandState {
    std::string config_path;
    std::string out_dir = "./out";
    std::vector<std::pair<std::string, std::string>> overrides;
    std::function<jmgtlab::CommandResult(const jmgtlab::ExperimentConfig&,
                                         const std::filesystem::path&)>
        run;
};

void add_experiment_command(CLI::App& app, const std::string& name, const std::string& desc,
                            std::vector<std::unique_ptr<SubcommandState>>& states,
                            decltype(SubcommandState::run) runner) {
    auto state = std::make_unique<SubcommandState>();
    state->run = std::move(runner);
    SubcommandState* s = state.get();
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--config", s->config_path, "key=value config file");
    cmd->add_option("--out-dir", s->out_dir, "output directory (default ./out)");
    for (const auto& key : jmgtlab::config_key_names()) {
        cmd->add_option_function<std::string>(
            "--" + key,
            [s, key](const std::string& v) { s->overrides.emplace_back(key, v); },
            "override config key '" + key + "'");
    }
    cmd->callback([s] {
        jmgtlab::ExperimentConfig cfg = jmgtlab::parse_config(s->config_path, s->overrides);
        if (auto warning = cfg.dt_resolution_warning())
            std::cerr << "warning: " << *warning << "\n";
        jmgtlab::CommandResult result = s->run(cfg, s->out_dir);
        std::cout << result.summary << "\n";
        for (const auto& f : result.outputs)
            std::cout << "wrote " << (std::filesystem::path(s->out_dir) / f).string() << "\n";
        if (result.exit_code != 0) std::exit(result.exit_code);
    });
    states.push_back(std::move(state));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"jmgt-lab: spectral simulation lab for the JMGT equation and its "
                 "vanishing-relaxation Westervelt limit"};
    app.set_version_flag("--version", JMGTLAB_VERSION);
    app.require_subcommand(1);

    std::vector<std::unique_ptr<SubcommandState>> states;
    add_experiment_command(app, "simulate", "run one trajectory and dump its energies", states,
                           [](const auto& cfg, const auto& out) {
                               return jmgtlab::cmd_simulate(cfg, out);
                           });
    add_experiment_command(app, "sweep_tau",
                           "sweep tau against the Westervelt limit (convergence rate)", states,
                           [](const auto& cfg, const auto& out) {
                               return jmgtlab::cmd_sweep_tau(cfg, out);
                           });
    add_experiment_command(app, "sweep_decay", "fit decay rates across the tau grid", states,
                           [](const auto& cfg, const auto& out) {
                               return jmgtlab::cmd_sweep_decay(cfg, out);
                           });
    add_experiment_command(app, "threshold", "bisect the small-data decay threshold", states,
                           [](const auto& cfg, const auto& out) {
                               return jmgtlab::cmd_threshold(cfg, out);
                           });
    add_experiment_command(app, "mms", "manufactured-solution temporal order check", states,
                           [](const auto& cfg, const auto& out) {
                               return jmgtlab::cmd_mms(cfg, out);
                           });
    add_experiment_command(app, "picard", "cross-validate the Picard solver against ETD", states,
                           [](const auto& cfg, const auto& out) {
                               return jmgtlab::cmd_picard(cfg, out);
                           });

    CLI::App* selftest = app.add_subcommand("selftest", "run the acceptance suite");
    selftest->callback([] {
        auto results = jmgtlab::selftest::run_acceptance(std::cout);
        if (!jmgtlab::selftest::all_passed(results)) std::exit(3);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const jmgtlab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
