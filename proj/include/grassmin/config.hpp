#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grassmin/operators.hpp"
#include "grassmin/problems.hpp"
#include "grassmin/solvers.hpp"

namespace grassmin::cli {

enum class PotentialKind { zero, harmonic, well, diagonal };
enum class InitKind { warm, random, oracle_perturbed };

/// Typed, validated run configuration. Parsed from flat `key = value` files
/// (one pair per line, `#` comments); unknown keys are an error.
struct RunConfig {
    // run.*
    std::string name;
    std::filesystem::path out_dir = "out";
    bool svg = false;
    bool oracle_enabled = true;

    // grid.*
    int grid_n = 400;
    double grid_a = -10.0;
    double grid_b = 10.0;

    // operator.*
    PotentialKind potential = PotentialKind::harmonic;
    std::vector<double> diagonal_values;  // potential = diagonal:<comma-list>
    double well_depth = 10.0;
    double well_width = 0.0;  // 0 = (b-a)/4

    // precond.*
    PrecondVariant precond_variant = PrecondVariant::shifted;
    double precond_shift = 1.0;
    double precond_alpha = 1.0;

    // problem.*
    ProblemKind problem_kind = ProblemKind::simplified;
    int subspace_dim = 4;
    double kappa = 0.5;

    // solver.* and scf.inner.*
    SolverConfig solver;

    // init.*
    InitKind init = InitKind::warm;
    double init_error = 0.25;

    /// Directory the config file lives in; relative paths resolve against it.
    std::filesystem::path base_dir = ".";

    std::filesystem::path resolved_out_dir() const {
        return out_dir.is_absolute() ? out_dir : base_dir / out_dir;
    }
};

RunConfig parse_config(const std::filesystem::path& path);

/// CLI overrides (--seed, --out).
void apply_overrides(RunConfig& cfg, std::optional<std::uint64_t> seed,
                     const std::optional<std::filesystem::path>& out_dir);

std::string algorithm_name(Algorithm a);
std::string ortho_name(manifold::OrthoMethod m);
std::string potential_name(const RunConfig& cfg);
std::string precond_name(PrecondVariant v);

}  // namespace grassmin::cli
