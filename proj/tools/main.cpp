#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "grassmin/run.hpp"

namespace {

void print_bundle(const grassmin::cli::ReportBundle& b) {
    std::cout << "convergence: " << b.convergence_csv.string() << "\n";
    for (const auto& p : b.extra_csv) std::cout << "convergence: " << p.string() << "\n";
    std::cout << "verdicts:    " << b.verdicts_csv.string() << "\n";
    std::cout << "report:      " << b.report_txt.string() << "\n";
    if (b.svg) std::cout << "svg:         " << b.svg->string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"invariant-subspace solvers by preconditioned gradient descent "
                 "on the Grassmann manifold"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    app.add_option("--seed", seed, "override solver.seed");
    app.add_option("--out", out_dir, "override run.out_dir");

    auto* solve_cmd = app.add_subcommand("solve", "run the configured solver");
    auto* verify_cmd = app.add_subcommand("verify", "run the solver plus the theory-verdict suite");
    auto* compare_cmd =
        app.add_subcommand("compare", "run algorithms 1-3 on one fixture and compare");
    for (auto* cmd : {solve_cmd, verify_cmd, compare_cmd})
        cmd->add_option("config", config_path, "path to a key=value config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 4;
    }

    try {
        grassmin::cli::RunConfig cfg = grassmin::cli::parse_config(config_path);
        grassmin::cli::apply_overrides(
            cfg, seed, out_dir ? std::optional<std::filesystem::path>(*out_dir) : std::nullopt);
        grassmin::cli::ReportBundle bundle;
        if (solve_cmd->parsed()) bundle = grassmin::cli::run(cfg);
        else if (verify_cmd->parsed()) bundle = grassmin::cli::run_verify(cfg);
        else bundle = grassmin::cli::run_compare(cfg);
        print_bundle(bundle);
        std::cout << "exit: " << bundle.exit_code << "\n";
        return bundle.exit_code;
    } catch (const grassmin::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
