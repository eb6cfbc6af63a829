// Command-line front end: `run` executes one configuration at a single SNR
// point, `sweep` covers the whole SNR list, `pa-bench` batch-solves power
// allocation instances from CSV, and `oracle` runs the brute-force grid
// minimizer on the same input format.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semcom/config.hpp"
#include "semcom/errors.hpp"
#include "semcom/metrics.hpp"
#include "semcom/pipeline.hpp"
#include "semcom/power_alloc.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> policy;
    std::optional<std::string> importance;
    bool no_impute = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file")->required();
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.seed, "Override the base seed");
    cmd->add_option("--trials", opts.trials, "Override the trial count");
    cmd->add_option("--policy", opts.policy,
                    "Override the PA policy (semantic|equal|waterfill)");
    cmd->add_option("--importance", opts.importance,
                    "Override the importance source (uniform|blob)");
    cmd->add_flag("--no-impute", opts.no_impute, "Disable diffusion imputation");
}

semcom::SimConfig load_with_overrides(const CommonOpts& opts) {
    semcom::SimConfig cfg = semcom::load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.trials) cfg.trials = *opts.trials;
    if (opts.policy) cfg.policies = {semcom::policy_from_string(*opts.policy)};
    if (opts.importance) {
        if (*opts.importance == "uniform")
            cfg.importance.mode = semcom::ImportanceConfig::Mode::uniform;
        else if (*opts.importance == "blob")
            cfg.importance.mode = semcom::ImportanceConfig::Mode::blob;
        else
            throw semcom::config_error(
                "--importance must be uniform or blob (use the config file "
                "for file-backed maps)");
    }
    if (opts.no_impute) cfg.impute = false;
    cfg.validate();
    return cfg;
}

std::vector<semcom::AllocationProblem> read_pa_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw semcom::data_error("pa-bench: cannot open " + path);
    std::vector<semcom::AllocationProblem> instances;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                cells.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw semcom::data_error("pa-bench: bad number on line " +
                                         std::to_string(line_no));
            }
        }
        if (cells.size() < 4)
            throw semcom::data_error("pa-bench: short row on line " +
                                     std::to_string(line_no));
        const int b = static_cast<int>(cells[0]);
        if (b < 1 || cells.size() != static_cast<std::size_t>(4 + 2 * b))
            throw semcom::data_error(
                "pa-bench: row length does not match B on line " +
                std::to_string(line_no));
        semcom::AllocationProblem prob;
        prob.avg_power = cells[1];
        prob.blocklength = static_cast<int>(cells[2]);
        prob.channel_rate = cells[3];
        prob.gains.assign(cells.begin() + 4, cells.begin() + 4 + b);
        prob.weights.assign(cells.begin() + 4 + b, cells.end());
        prob.validate();
        instances.push_back(std::move(prob));
    }
    return instances;
}

void write_pa_results(const std::string& path,
                      const std::vector<semcom::AllocationResult>& results) {
    std::ostringstream out;
    for (const auto& r : results) {
        out << r.powers.size() << ',' << semcom::format_metric(r.objective_surrogate)
            << ',' << semcom::format_metric(r.objective_rho_hat);
        for (double p : r.powers) out << ',' << semcom::format_metric(p);
        out << '\n';
    }
    if (path.empty() || path == "-") {
        std::cout << out.str();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw semcom::data_error("pa-bench: cannot open output " + path);
    f << out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Error-resilient semantic communication link simulator"};
    app.require_subcommand(1);

    CommonOpts run_opts, sweep_opts;
    CLI::App* cmd_run = app.add_subcommand("run", "Per-trial results at one SNR point");
    add_common(cmd_run, run_opts);
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "Aggregated SNR sweep");
    add_common(cmd_sweep, sweep_opts);

    std::string pa_input, pa_output = "-";
    CLI::App* cmd_pa = app.add_subcommand("pa-bench", "Batch power allocation");
    cmd_pa->add_option("--input", pa_input, "Instance CSV (B,P_ave,D,R_c,g...,w...)")
        ->required();
    cmd_pa->add_option("--output", pa_output, "Result CSV path or - for stdout");

    std::string or_input, or_output = "-";
    double grid_step = 1e-3;
    CLI::App* cmd_oracle = app.add_subcommand("oracle", "Brute-force PA grid search");
    cmd_oracle->add_option("--input", or_input, "Instance CSV (B,P_ave,D,R_c,g...,w...)")
        ->required();
    cmd_oracle->add_option("--output", or_output, "Result CSV path or - for stdout");
    cmd_oracle->add_option("--grid-step", grid_step, "Grid resolution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (cmd_run->parsed()) {
            const semcom::SimConfig cfg = load_with_overrides(run_opts);
            if (cfg.snr_db.size() != 1)
                throw semcom::config_error(
                    "run: config must list exactly one snr_db point (use sweep)");
            const auto rows = semcom::run_point(cfg, cfg.snr_db.front());
            semcom::write_run_outputs(cfg, rows, run_opts.out_dir);
            std::cout << "wrote " << run_opts.out_dir << "/results.csv ("
                      << rows.size() << " trials)\n";
        } else if (cmd_sweep->parsed()) {
            const semcom::SimConfig cfg = load_with_overrides(sweep_opts);
            const auto rows = semcom::run_sweep(cfg);
            semcom::write_sweep_outputs(cfg, rows, sweep_opts.out_dir);
            std::cout << "wrote " << sweep_opts.out_dir << "/sweep.csv ("
                      << rows.size() << " rows)\n";
        } else if (cmd_pa->parsed()) {
            std::vector<semcom::AllocationResult> results;
            for (const auto& prob : read_pa_instances(pa_input))
                results.push_back(semcom::solve_semantic_pa(prob));
            write_pa_results(pa_output, results);
        } else if (cmd_oracle->parsed()) {
            std::vector<semcom::AllocationResult> results;
            for (const auto& prob : read_pa_instances(or_input))
                results.push_back(semcom::brute_force_oracle(prob, grid_step));
            write_pa_results(or_output, results);
        }
    } catch (const semcom::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
