#include "grassmin/run.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "grassmin/diagnostics.hpp"
#include "grassmin/rng.hpp"

namespace grassmin::cli {

namespace diag = grassmin::diagnostics;

namespace {

SymmetricOperator build_operator(const RunConfig& cfg) {
    if (cfg.potential == PotentialKind::diagonal) {
        return build_diagonal_operator(cfg.diagonal_values);
    }
    const Grid1D grid = build_grid(cfg.grid_n, cfg.grid_a, cfg.grid_b);
    switch (cfg.potential) {
        case PotentialKind::zero:
            return build_schrodinger_1d(grid, [](double) { return 0.0; });
        case PotentialKind::harmonic:
            return build_schrodinger_1d(grid, [](double x) { return 0.5 * x * x; });
        case PotentialKind::well: {
            const double center = 0.5 * (cfg.grid_a + cfg.grid_b);
            const double width =
                cfg.well_width > 0 ? cfg.well_width : 0.25 * (cfg.grid_b - cfg.grid_a);
            const double depth = cfg.well_depth;
            return build_schrodinger_1d(grid, [=](double x) {
                return std::abs(x - center) <= 0.5 * width ? 0.0 : depth;
            });
        }
        default:
            throw ConfigError("unreachable potential kind");
    }
}

OrthoFrame warm_start(const SymmetricOperator& op, int nsub) {
    const int n = op.dim();
    const double h = op.weight();
    Eigen::MatrixXd cols(n, nsub);
    if (op.grid()) {
        // sine modes of the Dirichlet stencil (analytic principal-part modes)
        const double scale = 1.0 / std::sqrt(0.5 * h * (n + 1));
        for (int k = 1; k <= nsub; ++k)
            for (int j = 0; j < n; ++j)
                cols(j, k - 1) = scale * std::sin(k * M_PI * (j + 1) / double(n + 1));
    } else {
        // diagonal fixture: coordinate directions of the smallest entries
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        const Eigen::VectorXd d = op.bands().diag;
        std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return d[i] < d[j]; });
        cols.setZero();
        for (int k = 0; k < nsub; ++k) cols(idx[k], k) = 1.0 / std::sqrt(h);
    }
    return manifold::orthonormalize(BlockVector(cols, h), manifold::OrthoMethod::cholesky);
}

OrthoFrame make_start(const RunConfig& cfg, const SymmetricOperator& op,
                      const diag::OracleReference* oracle) {
    const int n = op.dim();
    const int nsub = cfg.subspace_dim;
    const double h = op.weight();
    switch (cfg.init) {
        case InitKind::warm:
            return warm_start(op, nsub);
        case InitKind::random: {
            Rng rng(cfg.solver.seed);
            return manifold::orthonormalize(BlockVector(rng.gaussian_matrix(n, nsub), h),
                                            manifold::OrthoMethod::cholesky);
        }
        case InitKind::oracle_perturbed: {
            if (oracle == nullptr)
                throw ConfigError("init.kind = oracle_perturbed: oracle unavailable at this size");
            Rng rng(cfg.solver.seed);
            BlockVector t(rng.gaussian_matrix(n, nsub), h);
            t = manifold::project_tangent(oracle->frame, t);
            const double nrm = block_norm(t);
            if (nrm == 0) throw Error("degenerate perturbation draw");
            const Eigen::MatrixXd start =
                oracle->frame.data() + (cfg.init_error / nrm) * t.data();
            return manifold::orthonormalize(BlockVector(start, h),
                                            manifold::OrthoMethod::cholesky);
        }
    }
    throw ConfigError("unreachable init kind");
}

struct PreparedRun {
    SymmetricOperator op;
    Problem problem;
    Preconditioner precond;
    std::unique_ptr<diag::OracleReference> oracle;
    std::unique_ptr<diag::BhatNorm> bhat;
    std::unique_ptr<OrthoFrame> start;
};

Problem make_problem(const RunConfig& cfg, const SymmetricOperator& op) {
    if (cfg.subspace_dim > op.dim())
        throw ConfigError("problem.N exceeds the operator dimension");
    return cfg.problem_kind == ProblemKind::simplified
               ? Problem::simplified(op, cfg.subspace_dim)
               : Problem::toy_lda(op, cfg.subspace_dim, cfg.kappa);
}

SolveResult dispatch_solve(const Problem& p, const Preconditioner& b, const OrthoFrame& start,
                           const SolverConfig& scfg, const ErrorProbe& probe) {
    if (scfg.algorithm == Algorithm::scf) return scf_solve(p, b, start, scfg, probe);
    return solve(p, b, start, scfg, probe);
}

PreparedRun prepare(const RunConfig& cfg) {
    SymmetricOperator op = build_operator(cfg);
    Problem problem = make_problem(cfg, op);
    Preconditioner precond =
        build_preconditioner(cfg.precond_variant, op, cfg.precond_shift, cfg.precond_alpha);

    std::unique_ptr<diag::OracleReference> oracle;
    std::unique_ptr<diag::BhatNorm> bhat;
    std::unique_ptr<OrthoFrame> start;

    if (cfg.oracle_enabled && op.dim() <= kDenseBudget) {
        if (cfg.problem_kind == ProblemKind::simplified) {
            oracle = std::make_unique<diag::OracleReference>(
                diag::dense_eigensolve(op, cfg.subspace_dim));
            start = std::make_unique<OrthoFrame>(make_start(cfg, op, oracle.get()));
        } else {
            // toy_lda: bootstrap with the linear part, then re-reference the
            // converged self-consistent operator
            auto lin = std::make_unique<diag::OracleReference>(
                diag::dense_eigensolve(op, cfg.subspace_dim));
            start = std::make_unique<OrthoFrame>(make_start(cfg, op, lin.get()));
            const SolveResult boot = dispatch_solve(problem, precond, *start, cfg.solver, {});
            if (boot.record.status == SolveStatus::converged) {
                oracle = std::make_unique<diag::OracleReference>(diag::dense_eigensolve(
                    problem.gradient_operator(boot.frame), cfg.subspace_dim));
            } else {
                oracle = std::move(lin);
            }
        }
        bhat = std::make_unique<diag::BhatNorm>(*oracle, precond);
    } else {
        start = std::make_unique<OrthoFrame>(make_start(cfg, op, nullptr));
    }
    return PreparedRun{std::move(op), std::move(problem), std::move(precond),
                       std::move(oracle), std::move(bhat), std::move(start)};
}

std::string status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::no_convergence: return "no-convergence";
        case SolveStatus::diverged: return "diverged";
    }
    return "?";
}

int status_exit(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return 0;
        case SolveStatus::no_convergence: return 2;
        case SolveStatus::diverged: return 3;
    }
    return 2;
}

void add_general_verdicts(std::vector<Verdict>& out, const PreparedRun& pr,
                          const ConvergenceRecord& rec, std::uint64_t seed) {
    if (!pr.oracle) return;
    const auto& ref = *pr.oracle;
    {
        // columnwise eigen-residual of the oracle frame
        const Eigen::MatrixXd aps = pr.op.apply_block(ref.frame.data());
        const Eigen::MatrixXd lam =
            ref.eigenvalues.head(ref.subspace_dim).asDiagonal();
        const double r = std::sqrt(ref.frame.weight()) *
                         (aps - ref.frame.data() * lam).norm();
        out.push_back({"oracle_residual", r <= 1e-10 ? "pass" : "fail", r, 1e-10, seed, ""});
    }
    if (ref.subspace_dim < ref.eigenvalues.size()) {
        const auto gc = diag::gap_check(ref);
        out.push_back({"gap_condition", gc.satisfied ? "pass" : "fail", gc.gap, 1e-8, seed,
                       "lambda_{N+1} - lambda_N"});
    }
    try {
        const auto est = diag::contraction_estimate(rec, 10);
        std::ostringstream d;
        d << "stddev=" << format_double(est.stddev) << "; trailing=" << est.ratios_used;
        out.push_back(
            {"contraction_chi", est.chi_hat < 1.0 ? "pass" : "fail", est.chi_hat, 1.0, seed,
             d.str()});
    } catch (const InsufficientData&) {
        out.push_back({"contraction_chi", "skip", 0.0, 1.0, seed, "insufficient qualifying rows"});
    }
    try {
        const auto [c, bigc] = diag::residual_equivalence(rec);
        const double ratio = bigc / c;
        std::ostringstream d;
        d << "c=" << format_double(c) << "; C=" << format_double(bigc);
        out.push_back({"residual_equivalence", ratio <= 100.0 ? "pass" : "fail", ratio, 100.0,
                       seed, d.str()});
    } catch (const InsufficientData&) {
        out.push_back(
            {"residual_equivalence", "skip", 0.0, 100.0, seed, "insufficient qualifying rows"});
    }
    try {
        const auto [qmin, qmax] = diag::energy_quadraticity(rec, ref.minimum_energy());
        std::ostringstream d;
        d << "qmax=" << format_double(qmax) << "; ratio=" << format_double(qmax / qmin);
        out.push_back(
            {"energy_quadraticity", qmin > 0 ? "pass" : "fail", qmin, 0.0, seed, d.str()});
    } catch (const InsufficientData&) {
        out.push_back(
            {"energy_quadraticity", "skip", 0.0, 0.0, seed, "insufficient qualifying rows"});
    }
}

void add_verify_verdicts(std::vector<Verdict>& out, const RunConfig& cfg, const PreparedRun& pr,
                         std::uint64_t seed) {
    if (!pr.oracle) {
        out.push_back({"bhat_symmetric", "skip", 0.0, 1e-12, seed, "oracle disabled"});
        return;
    }
    const auto& ref = *pr.oracle;
    const int n = pr.op.dim();
    const double h = pr.op.weight();
    double asym = 0.0;
    double minpos = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 5; ++t) {
        Rng rng(sub_seed(seed, 1000 + t));
        Eigen::VectorXd u = rng.gaussian_vector(n);
        Eigen::VectorXd v = rng.gaussian_vector(n);
        u /= std::sqrt(h) * u.norm();
        v /= std::sqrt(h) * v.norm();
        const Eigen::VectorXd bu = diag::bhat_apply_inverse(ref, pr.precond, u);
        const Eigen::VectorXd bv = diag::bhat_apply_inverse(ref, pr.precond, v);
        asym = std::max(asym, std::abs(h * bu.dot(v) - h * u.dot(bv)));
        minpos = std::min(minpos, h * bu.dot(u));
    }
    out.push_back({"bhat_symmetric", asym <= 1e-12 ? "pass" : "fail", asym, 1e-12, seed, ""});
    out.push_back({"bhat_positive", minpos > 0 ? "pass" : "fail", minpos, 0.0, seed, ""});

    try {
        const auto ell = diag::ellipticity_probe(pr.problem, ref, 20, seed);
        std::ostringstream d;
        d << (ell.exact ? "exact tangent-basis minimum" : "seeded-trial upper estimate");
        out.push_back(
            {"ellipticity_min", ell.minimum > 0 ? "pass" : "fail", ell.minimum, 0.0, seed,
             d.str()});
        if (ell.exact && cfg.problem_kind == ProblemKind::simplified &&
            ref.subspace_dim < ref.eigenvalues.size()) {
            const double gap = diag::gap_check(ref).gap;
            if (gap > 1e-8) {
                const double rel = std::abs(ell.minimum - gap) / gap;
                out.push_back({"ellipticity_matches_gap", rel <= 1e-4 ? "pass" : "fail", rel,
                               1e-4, seed, "relative to spectral gap"});
            }
        }
    } catch (const BudgetExceeded&) {
        out.push_back({"ellipticity_min", "skip", 0.0, 0.0, seed, "dense budget exceeded"});
    }
}

std::string render_report(const RunConfig& cfg, const std::string& mode,
                          const std::vector<std::pair<std::string, std::string>>& lines,
                          const std::vector<Verdict>& verdicts) {
    std::ostringstream r;
    r << "grassmin " << mode << " report\n";
    r << "========================\n\n";
    r << "run.name          = " << cfg.name << "\n";
    r << "operator          = " << potential_name(cfg) << "\n";
    if (cfg.potential != PotentialKind::diagonal)
        r << "grid              = n " << cfg.grid_n << " on [" << format_double(cfg.grid_a)
          << ", " << format_double(cfg.grid_b) << "]\n";
    r << "problem           = "
      << (cfg.problem_kind == ProblemKind::simplified ? "simplified" : "toy_lda")
      << ", N = " << cfg.subspace_dim;
    if (cfg.problem_kind == ProblemKind::toy_lda) r << ", kappa = " << format_double(cfg.kappa);
    r << "\n";
    r << "preconditioner    = " << precond_name(cfg.precond_variant)
      << ", shift = " << format_double(cfg.precond_shift)
      << ", alpha = " << format_double(cfg.precond_alpha) << "\n";
    r << "algorithm         = " << algorithm_name(cfg.solver.algorithm)
      << ", ortho = " << ortho_name(cfg.solver.ortho)
      << ", tol = " << format_double(cfg.solver.tol)
      << ", max_iters = " << cfg.solver.max_iters << "\n";
    r << "seed              = " << cfg.solver.seed << "\n\n";
    for (const auto& [k, v] : lines) r << k << std::string(k.size() < 18 ? 18 - k.size() : 1, ' ')
                                       << "= " << v << "\n";
    if (!verdicts.empty()) {
        r << "\nverdicts\n--------\n";
        for (const auto& v : verdicts) {
            r << "  [" << v.status << "] " << v.check << ": measured "
              << format_double(v.measured) << " vs threshold " << format_double(v.threshold);
            if (!v.details.empty()) r << " (" << v.details << ")";
            r << "\n";
        }
    }
    return r.str();
}

ReportBundle emit(const RunConfig& cfg, const std::string& mode, const ConvergenceRecord& rec,
                  const std::vector<Verdict>& verdicts,
                  const std::vector<std::pair<std::string, std::string>>& report_lines,
                  int exit_code,
                  const std::vector<std::pair<std::string, ConvergenceRecord>>& extra = {}) {
    const auto dir = cfg.resolved_out_dir() / cfg.name;
    std::filesystem::create_directories(dir);
    ReportBundle b;
    b.convergence_csv = dir / "convergence.csv";
    b.verdicts_csv = dir / "verdicts.csv";
    b.report_txt = dir / "report.txt";
    b.exit_code = exit_code;
    write_text_atomic(b.convergence_csv, format_convergence_csv(rec));
    write_text_atomic(b.verdicts_csv, format_verdicts_csv(verdicts));
    write_text_atomic(b.report_txt, render_report(cfg, mode, report_lines, verdicts));
    for (const auto& [suffix, r] : extra) {
        const auto p = dir / ("convergence_" + suffix + ".csv");
        write_text_atomic(p, format_convergence_csv(r));
        b.extra_csv.push_back(p);
    }
    if (cfg.svg) {
        b.svg = dir / "convergence.svg";
        write_text_atomic(*b.svg, render_svg(rec));
    }
    return b;
}

std::vector<std::pair<std::string, std::string>> summary_lines(const PreparedRun& pr,
                                                               const SolveResult& res) {
    std::vector<std::pair<std::string, std::string>> lines;
    lines.emplace_back("status", status_name(res.record.status));
    lines.emplace_back("rows", std::to_string(res.record.rows.size()));
    lines.emplace_back("steps", std::to_string(res.record.steps_taken));
    if (!res.record.rows.empty()) {
        const auto& last = res.record.rows.back();
        lines.emplace_back("final.energy", format_double(last.energy));
        lines.emplace_back("final.res_dual", format_double(last.res_dual));
        if (last.err_l2) lines.emplace_back("final.err_l2", format_double(*last.err_l2));
        if (last.err_bhat) lines.emplace_back("final.err_bhat", format_double(*last.err_bhat));
    }
    if (pr.oracle)
        lines.emplace_back("oracle.min_energy", format_double(pr.oracle->minimum_energy()));
    return lines;
}

ReportBundle run_impl(const RunConfig& cfg, bool full_verify) {
    PreparedRun pr = prepare(cfg);
    ErrorProbe probe;
    if (pr.oracle)
        probe = diag::make_oracle_probe(pr.problem, *pr.oracle, pr.bhat.get());
    const SolveResult res = dispatch_solve(pr.problem, pr.precond, *pr.start, cfg.solver, probe);

    std::vector<Verdict> verdicts;
    add_general_verdicts(verdicts, pr, res.record, cfg.solver.seed);
    if (full_verify) add_verify_verdicts(verdicts, cfg, pr, cfg.solver.seed);

    int code = status_exit(res.record.status);
    if (full_verify && code == 0) {
        for (const auto& v : verdicts)
            if (v.status == "fail") code = 2;
    }
    return emit(cfg, full_verify ? "verify" : "solve", res.record, verdicts,
                summary_lines(pr, res), code);
}

}  // namespace

ReportBundle run(const RunConfig& cfg) { return run_impl(cfg, false); }

ReportBundle run_verify(const RunConfig& cfg) { return run_impl(cfg, true); }

ReportBundle run_compare(const RunConfig& cfg) {
    if (cfg.problem_kind == ProblemKind::toy_lda)
        throw ConfigError("compare runs the fixed-operator algorithms; use problem.kind = simplified");
    PreparedRun pr = prepare(cfg);
    ErrorProbe probe;
    if (pr.oracle)
        probe = diag::make_oracle_probe(pr.problem, *pr.oracle, pr.bhat.get());

    const Algorithm algs[3] = {Algorithm::alg1, Algorithm::alg2, Algorithm::alg3};
    std::vector<SolveResult> results;
    std::vector<std::pair<std::string, ConvergenceRecord>> extra;
    int worst = 0;
    for (const Algorithm a : algs) {
        SolverConfig scfg = cfg.solver;
        scfg.algorithm = a;
        results.push_back(solve(pr.problem, pr.precond, *pr.start, scfg, probe));
        worst = std::max(worst, status_exit(results.back().record.status));
        extra.emplace_back(algorithm_name(a), results.back().record);
    }

    std::vector<std::pair<std::string, std::string>> lines;
    double max_pair = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const double d =
                manifold::subspace_distance(results[i].frame, results[j].frame).procrustes;
            max_pair = std::max(max_pair, d);
            lines.emplace_back("dist." + algorithm_name(algs[i]) + "." + algorithm_name(algs[j]),
                               format_double(d));
        }
    }
    std::vector<Verdict> verdicts;
    verdicts.push_back({"algorithm_agreement", max_pair <= 1e-7 ? "pass" : "fail", max_pair,
                        1e-7, cfg.solver.seed, "max pairwise final subspace distance"});
    double chi_lo = std::numeric_limits<double>::infinity(), chi_hi = 0.0;
    bool have_chi = true;
    for (int i = 0; i < 3; ++i) {
        try {
            const auto est = diag::contraction_estimate(results[i].record, 10);
            chi_lo = std::min(chi_lo, est.chi_hat);
            chi_hi = std::max(chi_hi, est.chi_hat);
            lines.emplace_back("chi." + algorithm_name(algs[i]), format_double(est.chi_hat));
        } catch (const InsufficientData&) {
            have_chi = false;
        }
    }
    if (have_chi)
        verdicts.push_back({"chi_spread", chi_hi - chi_lo <= 0.15 ? "pass" : "fail",
                            chi_hi - chi_lo, 0.15, cfg.solver.seed,
                            "max - min trailing contraction"});
    for (int i = 0; i < 3; ++i)
        lines.emplace_back("status." + algorithm_name(algs[i]),
                           status_name(results[i].record.status));

    return emit(cfg, "compare", results[0].record, verdicts, lines, worst, extra);
}

}  // namespace grassmin::cli
