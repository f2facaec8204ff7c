#include "grassmin/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace grassmin::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Context {
    std::filesystem::path file;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(file.string() + ":" + std::to_string(line) + ": " + msg);
    }
};

double parse_double(const Context& c, const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        c.fail("type-error: " + key + " expects a number, got '" + v + "'");
    }
}

long parse_int(const Context& c, const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        c.fail("type-error: " + key + " expects an integer, got '" + v + "'");
    }
}

bool parse_bool(const Context& c, const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    c.fail("type-error: " + key + " expects true or false, got '" + v + "'");
}

std::vector<double> parse_list(const Context& c, const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(c, key, trim(item)));
    if (out.empty()) c.fail("type-error: " + key + " expects a comma-separated list");
    return out;
}

}  // namespace

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());

    RunConfig cfg;
    cfg.name = path.stem().string();
    cfg.base_dir = path.has_parent_path() ? path.parent_path() : ".";
    cfg.solver.scf_inner = std::make_shared<SolverConfig>();
    cfg.solver.scf_inner->max_iters = 100;
    cfg.solver.scf_inner->tol = 0.0;  // sentinel: inherit solver.tol
    ArmijoParams armijo;              // staged; applied if linesearch = armijo
    bool linesearch_on = false;

    Context ctx{path, 0};
    std::string raw;
    while (std::getline(in, raw)) {
        ++ctx.line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) ctx.fail("parse-error: expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) ctx.fail("parse-error: empty key");
        if (val.empty()) ctx.fail("parse-error: empty value for '" + key + "'");

        if (key == "run.name") cfg.name = val;
        else if (key == "run.out_dir") cfg.out_dir = val;
        else if (key == "report.svg") cfg.svg = parse_bool(ctx, key, val);
        else if (key == "oracle.enabled") cfg.oracle_enabled = parse_bool(ctx, key, val);
        else if (key == "grid.n") {
            cfg.grid_n = static_cast<int>(parse_int(ctx, key, val));
            if (cfg.grid_n < 2) ctx.fail("type-error: grid.n must be >= 2");
        } else if (key == "grid.a") cfg.grid_a = parse_double(ctx, key, val);
        else if (key == "grid.b") cfg.grid_b = parse_double(ctx, key, val);
        else if (key == "operator.potential") {
            if (val == "zero") cfg.potential = PotentialKind::zero;
            else if (val == "harmonic") cfg.potential = PotentialKind::harmonic;
            else if (val == "well") cfg.potential = PotentialKind::well;
            else if (val.rfind("diagonal:", 0) == 0) {
                cfg.potential = PotentialKind::diagonal;
                cfg.diagonal_values = parse_list(ctx, key, val.substr(9));
            } else ctx.fail("type-error: unknown potential '" + val + "'");
        } else if (key == "operator.well_depth") cfg.well_depth = parse_double(ctx, key, val);
        else if (key == "operator.well_width") {
            cfg.well_width = parse_double(ctx, key, val);
            if (cfg.well_width < 0) ctx.fail("type-error: operator.well_width must be >= 0");
        } else if (key == "precond.variant") {
            if (val == "identity") cfg.precond_variant = PrecondVariant::identity;
            else if (val == "shifted") cfg.precond_variant = PrecondVariant::shifted;
            else if (val == "inverse_a") cfg.precond_variant = PrecondVariant::inverse_a;
            else ctx.fail("type-error: unknown preconditioner variant '" + val + "'");
        } else if (key == "precond.shift") cfg.precond_shift = parse_double(ctx, key, val);
        else if (key == "precond.alpha") {
            cfg.precond_alpha = parse_double(ctx, key, val);
            if (!(cfg.precond_alpha > 0)) ctx.fail("type-error: precond.alpha must be positive");
        } else if (key == "problem.kind") {
            if (val == "simplified") cfg.problem_kind = ProblemKind::simplified;
            else if (val == "toy_lda") cfg.problem_kind = ProblemKind::toy_lda;
            else ctx.fail("type-error: unknown problem kind '" + val + "'");
        } else if (key == "problem.N") {
            cfg.subspace_dim = static_cast<int>(parse_int(ctx, key, val));
            if (cfg.subspace_dim < 1) ctx.fail("type-error: problem.N must be >= 1");
        } else if (key == "problem.kappa") {
            cfg.kappa = parse_double(ctx, key, val);
            if (cfg.kappa < 0) ctx.fail("type-error: problem.kappa must be >= 0");
        } else if (key == "solver.algorithm") {
            if (val == "alg1") cfg.solver.algorithm = Algorithm::alg1;
            else if (val == "alg2") cfg.solver.algorithm = Algorithm::alg2;
            else if (val == "alg3") cfg.solver.algorithm = Algorithm::alg3;
            else if (val == "scf") cfg.solver.algorithm = Algorithm::scf;
            else ctx.fail("type-error: unknown algorithm '" + val + "'");
        } else if (key == "solver.max_iters") {
            cfg.solver.max_iters = static_cast<int>(parse_int(ctx, key, val));
            if (cfg.solver.max_iters < 1) ctx.fail("type-error: solver.max_iters must be >= 1");
        } else if (key == "solver.tol") {
            cfg.solver.tol = parse_double(ctx, key, val);
            if (!(cfg.solver.tol > 0)) ctx.fail("type-error: solver.tol must be positive");
        } else if (key == "solver.ortho" || key == "scf.inner.ortho") {
            manifold::OrthoMethod m;
            if (val == "gram_schmidt") m = manifold::OrthoMethod::gram_schmidt;
            else if (val == "cholesky") m = manifold::OrthoMethod::cholesky;
            else if (val == "rayleigh_ritz") m = manifold::OrthoMethod::rayleigh_ritz;
            else ctx.fail("type-error: unknown orthonormalization '" + val + "'");
            if (key == "solver.ortho") cfg.solver.ortho = m;
            else cfg.solver.scf_inner->ortho = m;
        } else if (key == "solver.linesearch") {
            if (val == "off") linesearch_on = false;
            else if (val == "armijo") linesearch_on = true;
            else ctx.fail("type-error: solver.linesearch expects off or armijo");
        } else if (key == "solver.armijo.c1") {
            armijo.c1 = parse_double(ctx, key, val);
            if (!(armijo.c1 > 0 && armijo.c1 < 1))
                ctx.fail("type-error: solver.armijo.c1 must lie in (0,1)");
        } else if (key == "solver.armijo.shrink") {
            armijo.shrink = parse_double(ctx, key, val);
            if (!(armijo.shrink > 0 && armijo.shrink < 1))
                ctx.fail("type-error: solver.armijo.shrink must lie in (0,1)");
        } else if (key == "solver.armijo.max_backtracks") {
            armijo.max_backtracks = static_cast<int>(parse_int(ctx, key, val));
            if (armijo.max_backtracks < 1)
                ctx.fail("type-error: solver.armijo.max_backtracks must be >= 1");
        } else if (key == "solver.step_t") {
            cfg.solver.step_t = parse_double(ctx, key, val);
            if (cfg.solver.step_t == 0) ctx.fail("type-error: solver.step_t must be nonzero");
        } else if (key == "solver.seed") {
            cfg.solver.seed = static_cast<std::uint64_t>(parse_int(ctx, key, val));
        } else if (key == "scf.inner.max_iters") {
            cfg.solver.scf_inner->max_iters = static_cast<int>(parse_int(ctx, key, val));
            if (cfg.solver.scf_inner->max_iters < 1)
                ctx.fail("type-error: scf.inner.max_iters must be >= 1");
        } else if (key == "scf.inner.tol") {
            cfg.solver.scf_inner->tol = parse_double(ctx, key, val);
            if (!(cfg.solver.scf_inner->tol > 0))
                ctx.fail("type-error: scf.inner.tol must be positive");
        } else if (key == "scf.inner.algorithm") {
            if (val == "alg1") cfg.solver.scf_inner->algorithm = Algorithm::alg1;
            else if (val == "alg2") cfg.solver.scf_inner->algorithm = Algorithm::alg2;
            else if (val == "alg3") cfg.solver.scf_inner->algorithm = Algorithm::alg3;
            else ctx.fail("type-error: scf.inner.algorithm must be alg1|alg2|alg3");
        } else if (key == "init.kind") {
            if (val == "warm") cfg.init = InitKind::warm;
            else if (val == "random") cfg.init = InitKind::random;
            else if (val == "oracle_perturbed") cfg.init = InitKind::oracle_perturbed;
            else ctx.fail("type-error: init.kind must be warm|random|oracle_perturbed");
        } else if (key == "init.error") {
            cfg.init_error = parse_double(ctx, key, val);
            if (!(cfg.init_error > 0)) ctx.fail("type-error: init.error must be positive");
        } else {
            ctx.fail("unknown-key: '" + key + "'");
        }
    }

    if (linesearch_on) cfg.solver.linesearch = armijo;
    if (cfg.potential != PotentialKind::diagonal && !(cfg.grid_a < cfg.grid_b))
        throw ConfigError(path.string() + ": grid.a must be less than grid.b");
    if (cfg.solver.scf_inner->tol <= 0) cfg.solver.scf_inner->tol = cfg.solver.tol;
    cfg.solver.scf_inner->seed = cfg.solver.seed;
    if (cfg.init == InitKind::oracle_perturbed && !cfg.oracle_enabled)
        throw ConfigError(path.string() + ": init.kind = oracle_perturbed requires oracle.enabled");
    return cfg;
}

void apply_overrides(RunConfig& cfg, std::optional<std::uint64_t> seed,
                     const std::optional<std::filesystem::path>& out_dir) {
    if (seed) {
        cfg.solver.seed = *seed;
        if (cfg.solver.scf_inner) cfg.solver.scf_inner->seed = *seed;
    }
    if (out_dir) {
        cfg.out_dir = *out_dir;
        cfg.base_dir = ".";  // explicit --out resolves against the cwd
    }
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::alg1: return "alg1";
        case Algorithm::alg2: return "alg2";
        case Algorithm::alg3: return "alg3";
        case Algorithm::scf: return "scf";
    }
    return "?";
}

std::string ortho_name(manifold::OrthoMethod m) {
    switch (m) {
        case manifold::OrthoMethod::gram_schmidt: return "gram_schmidt";
        case manifold::OrthoMethod::cholesky: return "cholesky";
        case manifold::OrthoMethod::rayleigh_ritz: return "rayleigh_ritz";
    }
    return "?";
}

std::string potential_name(const RunConfig& cfg) {
    switch (cfg.potential) {
        case PotentialKind::zero: return "zero";
        case PotentialKind::harmonic: return "harmonic";
        case PotentialKind::well: return "well";
        case PotentialKind::diagonal: {
            std::string s = "diagonal:";
            for (std::size_t i = 0; i < cfg.diagonal_values.size(); ++i) {
                if (i) s += ",";
                char buf[32];
                std::snprintf(buf, sizeof buf, "%g", cfg.diagonal_values[i]);
                s += buf;
            }
            return s;
        }
    }
    return "?";
}

std::string precond_name(PrecondVariant v) {
    switch (v) {
        case PrecondVariant::identity: return "identity";
        case PrecondVariant::shifted: return "shifted";
        case PrecondVariant::inverse_a: return "inverse_a";
    }
    return "?";
}

}  // namespace grassmin::cli
