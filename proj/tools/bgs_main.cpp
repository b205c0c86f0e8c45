// Command-line front end: builds a scenario, runs the verification battery,
// sweeps truncation dimensions, and emits machine-readable reports.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bgs/bgs.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<int> parse_dims(const std::string& s) {
    std::vector<int> dims;
    for (const std::string& d : split_csv(s)) dims.push_back(std::stoi(d));
    return dims;
}

struct CliOptions {
    std::string config_path;
    std::string scenario;
    int dim = 0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    int u_index = -1;
    double epsilon = 0.0;
    std::string c_rule;
    std::string checks;
    double tol_kms = 0.0, tol_biorth = 0.0, tol_group = 0.0, tol_inv = 0.0;
    std::string out_path;
    std::string format;
    std::string dims;
};

void add_common_options(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON config file; flags override its values");
    cmd->add_option("--scenario", o.scenario,
                    "identity | projector | diagonal | random-riesz");
    cmd->add_option("--dim", o.dim, "truncation dimension N (>= 2)");
    cmd->add_option("--beta", o.beta, "inverse temperature (> 0; default ln 2)");
    cmd->add_option("--seed", o.seed, "64-bit seed for all sampled checks");
    cmd->add_option("--u-index", o.u_index, "projector scenario: u = e_k");
    cmd->add_option("--epsilon", o.epsilon, "random-riesz scenario: T = 1 + eps R");
    cmd->add_option("--c-rule", o.c_rule, "diagonal scenario: weight rule (linear)");
    cmd->add_option("--checks", o.checks, "comma-separated check names, or 'all'");
    cmd->add_option("--tol-kms", o.tol_kms, "tolerance for KMS-type identities");
    cmd->add_option("--tol-biorth", o.tol_biorth, "tolerance for biorthogonality");
    cmd->add_option("--tol-group", o.tol_group, "tolerance for the group law");
    cmd->add_option("--tol-inv", o.tol_inv, "inverse certification tolerance");
    cmd->add_option("--out", o.out_path, "output file (stdout when omitted)");
    cmd->add_option("--format", o.format, "json | csv");
}

bgs::RunConfig assemble_config(const CLI::App* cmd, const CliOptions& o) {
    bgs::RunConfig cfg;
    if (!o.config_path.empty()) cfg = bgs::config_from_file(o.config_path);
    if (cmd->count("--scenario")) cfg.recipe.kind = bgs::scenario_from_string(o.scenario);
    if (cmd->count("--dim")) cfg.recipe.dim = o.dim;
    if (cmd->count("--beta")) cfg.recipe.beta = o.beta;
    if (cmd->count("--seed")) cfg.recipe.seed = o.seed;
    if (cmd->count("--u-index")) cfg.recipe.u_index = o.u_index;
    if (cmd->count("--epsilon")) cfg.recipe.epsilon = o.epsilon;
    if (cmd->count("--c-rule")) cfg.recipe.c_rule = o.c_rule;
    if (cmd->count("--checks")) cfg.checks = split_csv(o.checks);
    if (cmd->count("--tol-kms")) cfg.tol.tol_kms = o.tol_kms;
    if (cmd->count("--tol-biorth")) cfg.tol.tol_biorth = o.tol_biorth;
    if (cmd->count("--tol-group")) cfg.tol.tol_group = o.tol_group;
    if (cmd->count("--tol-inv")) cfg.tol.tol_inv = o.tol_inv;
    if (cmd->count("--out")) cfg.output_path = o.out_path;
    if (cmd->count("--format")) cfg.format = o.format;
    return cfg;
}

void print_summary(const bgs::ScenarioReport& report) {
    int failed = 0;
    for (const auto& c : report.checks)
        if (!c.pass) ++failed;
    std::fprintf(stderr, "[%s N=%d beta=%.6g] %zu checks, %d failed\n",
                 bgs::to_string(report.config.recipe.kind).c_str(), report.config.recipe.dim,
                 report.config.recipe.beta, report.checks.size(), failed);
    for (const auto& c : report.checks)
        if (!c.pass)
            std::fprintf(stderr, "  FAIL %-28s residual=%.3e tolerance=%.3e %s\n",
                         c.name.c_str(), c.residual, c.tolerance, c.notes.c_str());
}

int run_command(const CLI::App* cmd, const CliOptions& o) {
    bgs::RunConfig cfg = assemble_config(cmd, o);
    bgs::ScenarioReport report = bgs::run(cfg);
    std::string payload = cfg.format == "csv" ? bgs::report_to_csv(report)
                                              : bgs::report_to_json_string(report);
    if (cfg.output_path.empty())
        std::cout << payload;
    else
        bgs::write_file(cfg.output_path, payload);
    print_summary(report);
    return report.exit_code;
}

int sweep_command(const CLI::App* cmd, const CliOptions& o) {
    bgs::RunConfig cfg = assemble_config(cmd, o);
    if (o.dims.empty()) throw bgs::ConfigError("dims: --dims is required for sweep");
    std::vector<int> dims = parse_dims(o.dims);
    bgs::SweepReport sw = bgs::sweep(cfg, dims);
    std::string payload = cfg.format == "csv" ? bgs::sweep_to_csv(sw)
                                              : bgs::sweep_to_json(sw).dump(2) + "\n";
    if (cfg.output_path.empty())
        std::cout << payload;
    else
        bgs::write_file(cfg.output_path, payload);
    int exit = 0;
    for (const auto& r : sw.reports) {
        print_summary(r);
        exit = std::max(exit, r.exit_code);
    }
    std::fprintf(stderr, "growth: ratio_T=%.6g ratio_Tinv=%.6g exponent_T=%.3f flag=%s\n",
                 sw.growth.ratio_T, sw.growth.ratio_T_inv, sw.growth.exponent_T,
                 sw.growth.growth_flag ? "yes" : "no");
    return exit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized Gibbs states over biorthogonal bases: verification battery"};
    app.require_subcommand(1);

    CliOptions run_opts, sweep_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "run the battery for one scenario");
    add_common_options(run_cmd, run_opts);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run across truncation dimensions");
    add_common_options(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--dims", sweep_opts.dims, "comma-separated increasing dimensions");

    try {
        app.parse(argc, argv);
        if (run_cmd->parsed()) return run_command(run_cmd, run_opts);
        if (sweep_cmd->parsed()) return sweep_command(sweep_cmd, sweep_opts);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const bgs::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const bgs::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
