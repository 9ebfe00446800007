#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optomech/scenarios.hpp"

namespace {

struct CliOptions {
    std::string config;
    std::string out = "out";
    std::string format = "csv";
    int cavity_dim = -1;
    int mech_dim = -1;
    int threads = -1;
    bool verbose = false;
};

int resolve_threads(const CliOptions& cli) {
    if (cli.threads >= 0) return cli.threads;
    if (const char* env = std::getenv("OPTOMECH_SIM_THREADS")) {
        try {
            return std::max(0, std::stoi(env));
        } catch (const std::exception&) {
            throw optomech::ConfigParse(
                std::string("OPTOMECH_SIM_THREADS is not an integer: '") + env + "'");
        }
    }
    return 0;
}

void write_tables(const optomech::ScenarioOutput& result, const CliOptions& cli) {
    const std::string ext = cli.format == "json" ? ".json" : ".csv";
    std::string stem = cli.out;
    if (stem.size() > ext.size() &&
        stem.compare(stem.size() - ext.size(), ext.size(), ext) == 0) {
        stem.resize(stem.size() - ext.size());
    }
    for (const auto& table : result.tables) {
        std::string path = stem;
        if (result.tables.size() > 1) path += "_" + table.name;
        path += ext;
        if (cli.format == "json") {
            optomech::write_json(table, path);
        } else {
            optomech::write_csv(table, path);
        }
        std::cerr << "wrote " << path << " (" << table.rows.size() << " rows)\n";
    }
}

void print_rwa(const optomech::RwaReport& r) {
    std::cerr << "RWA check: omega_d/omega_m_tilde = " << r.ratio_omega_m
              << ", omega_d/(g0 cosh r_d) = " << r.ratio_g_cosh
              << ", omega_d/(g0 sinh r_d) = " << r.ratio_g_sinh
              << " (threshold " << r.threshold << ") -> "
              << (r.satisfied ? "satisfied" : "NOT satisfied") << "\n";
    if (!r.satisfied) {
        std::cerr << "warning: rotating-wave conditions marginal; results may "
                     "carry modulation artifacts\n";
    }
}

int run(const std::string& scenario, const CliOptions& cli) {
    using namespace optomech;
    try {
        ConfigMap cfg = cli.config.empty() ? ConfigMap::empty(scenario)
                                           : ConfigMap::from_file(cli.config, scenario);
        if (cli.cavity_dim > 0) cfg.set("cavity_dim", std::to_string(cli.cavity_dim));
        if (cli.mech_dim > 0) cfg.set("mech_dim", std::to_string(cli.mech_dim));
        cfg.set("threads", std::to_string(resolve_threads(cli)));

        const ScenarioOutput result = run_scenario(scenario, cfg);

        if (cli.verbose) {
            std::cerr << "resolved configuration:\n";
            for (const auto& [k, v] : cfg.resolved()) {
                std::cerr << "  " << k << " = " << v << "\n";
            }
        }
        if (result.has_rwa) print_rwa(result.rwa);
        write_tables(result, cli);
        return 0;
    } catch (const SimError& e) {
        // Messages are prefixed "TypeName: detail" by the error classes.
        const std::string what = e.what();
        const size_t colon = what.find(": ");
        nlohmann::ordered_json err;
        err["error"] = colon == std::string::npos ? "SimError" : what.substr(0, colon);
        err["message"] = colon == std::string::npos ? what : what.substr(colon + 2);
        err["scenario"] = scenario;
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = "Internal";
        err["message"] = e.what();
        err["scenario"] = scenario;
        std::cerr << err.dump() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for a modulated optomechanical system with "
                 "squeezed-frame dynamics"};
    app.require_subcommand(1);
    app.fallthrough();  // accept global flags after the subcommand name

    CliOptions cli;
    app.add_option("--config", cli.config, "INI config file (key = value, [scenario] sections)");
    app.add_option("--out", cli.out, "Output path stem (tables append _<name>.<ext>)")
        ->capture_default_str();
    app.add_option("--format", cli.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--cavity-dim", cli.cavity_dim, "Cavity Fock cutoff override");
    app.add_option("--mech-dim", cli.mech_dim, "Mechanical Fock cutoff override");
    app.add_option("--threads", cli.threads,
                   "Worker threads (0 = hardware; default from OPTOMECH_SIM_THREADS)");
    app.add_flag("--verbose", cli.verbose, "Print the resolved configuration");

    static const std::vector<std::pair<std::string, std::string>> kScenarios = {
        {"param-map", "Effective coupling and squeezing parameter maps"},
        {"blockade", "Steady-state photon blockade sweep over the bare coupling"},
        {"rwa-check", "Compare full modulated dynamics against the static model"},
        {"phase-sweep", "Steady-state statistics versus bath reference phase"},
        {"cat-wigner", "Cavity cat-state Wigner function at one mechanical period"},
        {"custom", "Derived parameters (and optional steady state) for one point"},
    };
    for (const auto& [name, desc] : kScenarios) {
        app.add_subcommand(name, desc);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string scenario = app.get_subcommands().front()->get_name();
    return run(scenario, cli);
}
