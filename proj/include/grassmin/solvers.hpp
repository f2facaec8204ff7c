#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "grassmin/manifold.hpp"
#include "grassmin/problems.hpp"

namespace grassmin {

enum class Algorithm { alg1, alg2, alg3, scf };

struct ArmijoParams {
    double c1 = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 30;
};

struct SolverConfig {
    Algorithm algorithm = Algorithm::alg1;
    int max_iters = 500;
    double tol = 1e-10;  ///< stopping threshold on the dual residual norm
    manifold::OrthoMethod ortho = manifold::OrthoMethod::cholesky;
    std::optional<ArmijoParams> linesearch;  ///< nullopt = fixed step
    double step_t = 1.0;                     ///< geodesic step (alg3)
    std::uint64_t seed = 1;
    /// scf only: inner-loop configuration. The effective inner tolerance each
    /// outer step is max(scf_inner->tol, 1e-2 * outer dual residual).
    std::shared_ptr<SolverConfig> scf_inner;

    void validate() const;
};

struct RecordRow {
    int iter = 0;
    double energy = 0.0;
    double res_l2 = 0.0;
    double res_dual = 0.0;
    std::optional<double> err_l2;        ///< oracle subspace error, block l2
    std::optional<double> err_bhat;      ///< oracle subspace error, Bhat norm
    std::optional<double> energy_error;  ///< J(Phi) - J(Psi), stable evaluation
    std::optional<double> rate_est;      ///< e_n / e_{n-1}
    std::optional<double> step;          ///< step size used leaving this row
};

enum class SolveStatus { converged, no_convergence, diverged };

struct ConvergenceRecord {
    std::vector<RecordRow> rows;
    SolveStatus status = SolveStatus::no_convergence;
    int steps_taken = 0;
};

/// Per-iterate oracle measurements; wired in by diagnostics/cli when a
/// reference subspace is available.
struct ProbeValues {
    std::optional<double> err_l2;
    std::optional<double> err_bhat;
    std::optional<double> energy_error;
};
using ErrorProbe = std::function<ProbeValues(const OrthoFrame&)>;
using IterateCallback = std::function<void(int iter, const OrthoFrame&)>;

struct SolveResult {
    OrthoFrame frame;
    ConvergenceRecord record;
};

/// One projected-gradient step: Phi - B^{-1}(A_Phi Phi - Phi Lambda),
/// re-orthonormalized. Output spans the intermediate frame exactly.
OrthoFrame step_alg1(const Problem& p, const Preconditioner& b, const OrthoFrame& phi,
                     manifold::OrthoMethod ortho);

/// Variant with the preconditioned residual tangent-projected before the update.
OrthoFrame step_alg2(const Problem& p, const Preconditioner& b, const OrthoFrame& phi,
                     manifold::OrthoMethod ortho);

/// Geodesic step: exp(-t Xhat) Phi with K = (I-D) B^{-1} (I-D) A_Phi Phi; the
/// initial velocity is minus Algorithm 2's correction direction.
OrthoFrame step_alg3(const Problem& p, const Preconditioner& b, const OrthoFrame& phi,
                     double t);

/// Backtracking line search: largest t in {1, shrink, shrink^2, ...} with
/// J(orthonormalize(Phi + t d)) <= J(Phi) + c1 t 2<<A_Phi Phi, d>>.
/// Requires 2<<A_Phi Phi, d>> < 0; throws NoDecrease otherwise or when all
/// backtracks fail.
double armijo_search(const Problem& p, const OrthoFrame& phi, const BlockVector& direction,
                     const ArmijoParams& params);

/// Scaling alpha = (Gamma/theta + gamma/Theta)/2 and contraction bound
/// beta = (Gamma Theta - gamma theta)/(Gamma Theta + gamma theta) from the
/// spectral-equivalence constants.
std::pair<double, double> optimal_alpha(double gamma, double big_gamma, double theta,
                                        double big_theta);

/// Iterates the configured algorithm until the dual residual norm falls below
/// cfg.tol or max_iters steps were taken. Rows record the state at the start
/// of each iteration; a converged state appends its row, hitting the
/// iteration cap does not. Energy exceeding the initial value by 1e3*|J0|
/// flags divergence.
SolveResult solve(const Problem& p, const Preconditioner& b, const OrthoFrame& start,
                  const SolverConfig& cfg, const ErrorProbe& probe = {},
                  const IterateCallback& on_iterate = {});

/// Outer loop freezing A_Phi, inner loop solving the frozen simplified
/// problem per cfg.scf_inner. Inner iteration caps truncate (the inner result
/// feeds the next outer step); an inner divergence raises NoConvergence.
SolveResult scf_solve(const Problem& p, const Preconditioner& b, const OrthoFrame& start,
                      const SolverConfig& cfg, const ErrorProbe& probe = {},
                      const IterateCallback& on_iterate = {});

}  // namespace grassmin
