#include "grassmin/solvers.hpp"

#include <cmath>
#include <limits>

namespace grassmin {

using manifold::OrthoMethod;

void SolverConfig::validate() const {
    if (!(tol > 0)) throw Error("solver config: tol must be positive");
    if (max_iters < 1) throw Error("solver config: max_iters must be >= 1");
    if (!(step_t != 0.0) || !std::isfinite(step_t))
        throw Error("solver config: step_t must be finite and nonzero");
    if (linesearch) {
        if (!(linesearch->c1 > 0 && linesearch->c1 < 1))
            throw Error("solver config: armijo c1 must lie in (0,1)");
        if (!(linesearch->shrink > 0 && linesearch->shrink < 1))
            throw Error("solver config: armijo shrink must lie in (0,1)");
        if (linesearch->max_backtracks < 1)
            throw Error("solver config: armijo max_backtracks must be >= 1");
    }
    if (scf_inner) scf_inner->validate();
}

namespace {

BlockVector preconditioned_residual(const Problem& p, const Preconditioner& b,
                                    const OrthoFrame& phi) {
    const BlockVector r = p.residual(phi);
    return BlockVector(b.apply_inverse_block(r.data()), r.weight());
}

OrthoFrame reorthonormalize(const Problem& p, const OrthoFrame& phi, const BlockVector& raw,
                            OrthoMethod ortho) {
    if (ortho == OrthoMethod::rayleigh_ritz) {
        const SymmetricOperator a = p.gradient_operator(phi);
        return manifold::orthonormalize(raw, ortho, &a);
    }
    return manifold::orthonormalize(raw, ortho);
}

}  // namespace

OrthoFrame step_alg1(const Problem& p, const Preconditioner& b, const OrthoFrame& phi,
                     OrthoMethod ortho) {
    const BlockVector s = preconditioned_residual(p, b, phi);
    return reorthonormalize(p, phi, BlockVector(phi.data() - s.data(), phi.weight()), ortho);
}

OrthoFrame step_alg2(const Problem& p, const Preconditioner& b, const OrthoFrame& phi,
                     OrthoMethod ortho) {
    const BlockVector s = manifold::project_tangent(phi, preconditioned_residual(p, b, phi));
    return reorthonormalize(p, phi, BlockVector(phi.data() - s.data(), phi.weight()), ortho);
}

OrthoFrame step_alg3(const Problem& p, const Preconditioner& b, const OrthoFrame& phi,
                     double t) {
    const BlockVector k = manifold::project_tangent(phi, preconditioned_residual(p, b, phi));
    return manifold::geodesic_step(phi, BlockVector(-k.data(), k.weight()), t);
}

double armijo_search(const Problem& p, const OrthoFrame& phi, const BlockVector& direction,
                     const ArmijoParams& params) {
    const double slope = 2.0 * pair_trace(p.gradient_block(phi.block()), direction);
    if (!(slope < 0)) throw NoDecrease("armijo: not a descent direction");
    const double j0 = p.energy(phi);
    double t = 1.0;
    for (int k = 0; k < params.max_backtracks; ++k) {
        try {
            const OrthoFrame cand = manifold::orthonormalize(
                BlockVector(phi.data() + t * direction.data(), phi.weight()),
                OrthoMethod::cholesky);
            if (p.energy(cand) <= j0 + params.c1 * t * slope) return t;
        } catch (const RankDeficient&) {
            // step too wild; shrink
        }
        t *= params.shrink;
    }
    throw NoDecrease("armijo: no decrease within max_backtracks");
}

std::pair<double, double> optimal_alpha(double gamma, double big_gamma, double theta,
                                        double big_theta) {
    if (!(0 < gamma && gamma <= big_gamma && 0 < theta && theta <= big_theta))
        throw Error("optimal_alpha: requires 0 < gamma <= Gamma and 0 < theta <= Theta");
    const double alpha = 0.5 * (big_gamma / theta + gamma / big_theta);
    const double beta =
        (big_gamma * big_theta - gamma * theta) / (big_gamma * big_theta + gamma * theta);
    return {alpha, beta};
}

namespace {

struct StepOutcome {
    OrthoFrame frame;
    double step_used;
};

StepOutcome take_step(const Problem& p, const Preconditioner& b, const OrthoFrame& phi,
                      const SolverConfig& cfg) {
    if (!cfg.linesearch) {
        switch (cfg.algorithm) {
            case Algorithm::alg1:
                return {step_alg1(p, b, phi, cfg.ortho), 1.0};
            case Algorithm::alg2:
                return {step_alg2(p, b, phi, cfg.ortho), 1.0};
            case Algorithm::alg3:
                return {step_alg3(p, b, phi, cfg.step_t), cfg.step_t};
            default:
                throw Error("solve: scf must go through scf_solve");
        }
    }
    // Line-search path. Directions are tangent-projected for every algorithm
    // so the Armijo slope 2<<A_Phi Phi, d>> equals the manifold slope.
    const BlockVector s = manifold::project_tangent(phi, preconditioned_residual(p, b, phi));
    const BlockVector d(-s.data(), s.weight());
    if (cfg.algorithm == Algorithm::alg3) {
        const double slope = 2.0 * pair_trace(p.gradient_block(phi.block()), d);
        if (!(slope < 0)) throw NoDecrease("geodesic armijo: not a descent direction");
        const double j0 = p.energy(phi);
        double t = cfg.step_t;
        for (int k = 0; k < cfg.linesearch->max_backtracks; ++k) {
            const OrthoFrame cand = manifold::geodesic_step(phi, d, t);
            if (p.energy(cand) <= j0 + cfg.linesearch->c1 * t * slope) return {cand, t};
            t *= cfg.linesearch->shrink;
        }
        throw NoDecrease("geodesic armijo: no decrease within max_backtracks");
    }
    const double t = armijo_search(p, phi, d, *cfg.linesearch);
    return {reorthonormalize(p, phi, BlockVector(phi.data() + t * d.data(), phi.weight()),
                             cfg.ortho),
            t};
}

void fill_rate_estimates(ConvergenceRecord& rec) {
    for (std::size_t n = 1; n < rec.rows.size(); ++n) {
        const auto& prev = rec.rows[n - 1];
        const auto& cur = rec.rows[n];
        const auto pick = [](const RecordRow& r) {
            return r.err_bhat ? r.err_bhat : r.err_l2;
        };
        const auto ep = pick(prev);
        const auto ec = pick(cur);
        if (ep && ec && *ep > 0) rec.rows[n].rate_est = *ec / *ep;
    }
}

}  // namespace

SolveResult solve(const Problem& p, const Preconditioner& b, const OrthoFrame& start,
                  const SolverConfig& cfg, const ErrorProbe& probe,
                  const IterateCallback& on_iterate) {
    cfg.validate();
    if (cfg.algorithm == Algorithm::scf) return scf_solve(p, b, start, cfg, probe, on_iterate);

    OrthoFrame phi = start;
    ConvergenceRecord rec;
    double blowup = std::numeric_limits<double>::infinity();

    for (int n = 0;; ++n) {
        const double energy = p.energy(phi);
        const auto [res_l2, res_dual] = p.residual_norms(phi, b);
        if (n == 0) blowup = energy + 1e3 * std::abs(energy);

        RecordRow row;
        row.iter = n;
        row.energy = energy;
        row.res_l2 = res_l2;
        row.res_dual = res_dual;
        if (probe) {
            const ProbeValues v = probe(phi);
            row.err_l2 = v.err_l2;
            row.err_bhat = v.err_bhat;
            row.energy_error = v.energy_error;
        }

        if (!std::isfinite(energy) || !std::isfinite(res_dual) || energy > blowup) {
            if (std::isfinite(energy)) rec.rows.push_back(row);
            rec.status = SolveStatus::diverged;
            break;
        }
        if (res_dual <= cfg.tol) {
            rec.rows.push_back(row);
            rec.status = SolveStatus::converged;
            break;
        }
        if (n >= cfg.max_iters) {
            rec.status = SolveStatus::no_convergence;
            break;
        }
        rec.rows.push_back(row);

        const StepOutcome out = take_step(p, b, phi, cfg);
        rec.rows.back().step = out.step_used;
        phi = out.frame;
        rec.steps_taken = n + 1;
        if (on_iterate) on_iterate(n + 1, phi);
    }
    fill_rate_estimates(rec);
    return {phi, rec};
}

SolveResult scf_solve(const Problem& p, const Preconditioner& b, const OrthoFrame& start,
                      const SolverConfig& cfg, const ErrorProbe& probe,
                      const IterateCallback& on_iterate) {
    cfg.validate();
    if (p.kind() != ProblemKind::toy_lda)
        throw Error("scf_solve: requires a toy_lda problem (the operator must depend on Phi)");

    SolverConfig inner;
    if (cfg.scf_inner) inner = *cfg.scf_inner;
    else {
        inner.algorithm = Algorithm::alg1;
        inner.max_iters = 100;
        inner.tol = cfg.tol;
        inner.ortho = cfg.ortho;
    }
    if (inner.algorithm == Algorithm::scf) throw Error("scf_solve: inner algorithm cannot be scf");

    OrthoFrame phi = start;
    ConvergenceRecord rec;
    double blowup = std::numeric_limits<double>::infinity();

    for (int n = 0;; ++n) {
        const double energy = p.energy(phi);
        const auto [res_l2, res_dual] = p.residual_norms(phi, b);
        if (n == 0) blowup = energy + 1e3 * std::abs(energy);

        RecordRow row;
        row.iter = n;
        row.energy = energy;
        row.res_l2 = res_l2;
        row.res_dual = res_dual;
        if (probe) {
            const ProbeValues v = probe(phi);
            row.err_l2 = v.err_l2;
            row.err_bhat = v.err_bhat;
            row.energy_error = v.energy_error;
        }

        if (!std::isfinite(energy) || !std::isfinite(res_dual) || energy > blowup) {
            if (std::isfinite(energy)) rec.rows.push_back(row);
            rec.status = SolveStatus::diverged;
            break;
        }
        if (res_dual <= cfg.tol) {
            rec.rows.push_back(row);
            rec.status = SolveStatus::converged;
            break;
        }
        if (n >= cfg.max_iters) {
            rec.status = SolveStatus::no_convergence;
            break;
        }
        rec.rows.push_back(row);

        // freeze the operator, solve the simplified problem for it
        const Problem frozen =
            Problem::simplified(p.gradient_operator(phi), p.subspace_dim());
        SolverConfig icfg = inner;
        icfg.tol = std::max(inner.tol, 1e-2 * res_dual);
        const SolveResult ires = solve(frozen, b, phi, icfg);
        if (ires.record.status == SolveStatus::diverged)
            throw NoConvergence("scf_solve: inner iteration diverged");
        phi = ires.frame;
        rec.rows.back().step = static_cast<double>(ires.record.steps_taken);
        rec.steps_taken = n + 1;
        if (on_iterate) on_iterate(n + 1, phi);
    }
    fill_rate_estimates(rec);
    return {phi, rec};
}

}  // namespace grassmin
