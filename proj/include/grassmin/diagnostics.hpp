#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "grassmin/block.hpp"
#include "grassmin/operators.hpp"
#include "grassmin/problems.hpp"
#include "grassmin/solvers.hpp"

namespace grassmin::diagnostics {

/// Dense eigendecomposition reference: lowest-N frame, full ascending
/// spectrum, and the complete eigenvector set (h-orthonormal columns).
struct OracleReference {
    OrthoFrame frame;
    Eigen::VectorXd eigenvalues;   ///< all of them, ascending
    Eigen::MatrixXd eigenvectors;  ///< n x n, h-orthonormal columns
    int subspace_dim = 0;

    double minimum_energy() const { return eigenvalues.head(subspace_dim).sum(); }
};

/// Cyclic Jacobi rotations on a plain symmetric matrix until the off-diagonal
/// Frobenius norm falls below 1e-12 * ||A||_F. Returns ascending eigenvalues
/// and orthonormal eigenvectors. Throws NoConvergence after max_sweeps.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigensolve(Eigen::MatrixXd a,
                                                              int max_sweeps = 100);

/// Full in-repo Jacobi eigendecomposition of a dense-realized operator;
/// the lowest-`want` frame is orthonormal in the h-weighted product.
OracleReference dense_eigensolve(const SymmetricOperator& a, int want);

/// Bhat^{-1} r = (I - D_Psi) B^{-1} (I - D_Psi) r + D_Psi r.
Eigen::VectorXd bhat_apply_inverse(const OracleReference& ref, const Preconditioner& b,
                                   const Eigen::VectorXd& r);

/// Dense factorization of Bhat^{-1} at oracle scale; evaluates the Bhat norm
/// ||x||^2 = <<Bhat x, x>> by solving with the factorization.
class BhatNorm {
public:
    BhatNorm(const OracleReference& ref, const Preconditioner& b);
    double norm_vec(const Eigen::VectorXd& x) const;
    double norm(const BlockVector& x) const;
    double weight() const { return weight_; }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double weight_;
};

/// ||(I - D_Psi) Phi|| in the block l2 norm.
double subspace_error(const OracleReference& ref, const OrthoFrame& phi);
/// Same error in the Bhat norm.
double subspace_error_bhat(const OracleReference& ref, const OrthoFrame& phi,
                           const BhatNorm& bn);

/// J(Phi) - J(Psi) for the simplified problem, evaluated through an exact
/// span-invariant identity that stays accurate when the difference is far
/// below the energy's own rounding floor.
double energy_error_stable(const Problem& p, const OracleReference& ref,
                           const OrthoFrame& phi);

/// Builds the per-iterate probe filling err_l2 / err_bhat / energy_error
/// record columns. `bn` may be null (err_bhat left empty).
ErrorProbe make_oracle_probe(const Problem& p, const OracleReference& ref,
                             const BhatNorm* bn);

struct ContractionEstimate {
    double chi_hat = 0.0;
    double stddev = 0.0;
    int ratios_used = 0;
};

/// Mean and sample stddev of e_{n+1}/e_n over the trailing window, excluding
/// rows below the rounding floor 1e-11.
ContractionEstimate contraction_estimate(const std::vector<double>& errors, int trailing);
ContractionEstimate contraction_estimate(const ConvergenceRecord& rec, int trailing);

/// Extremal ratios (dual residual)/(subspace error) over rows with error in
/// [1e-10, 1e-1]; returns {c, C}.
std::pair<double, double> residual_equivalence(
    const std::vector<std::pair<double, double>>& err_and_dual);
std::pair<double, double> residual_equivalence(const ConvergenceRecord& rec);

/// Extremal q = (J(Phi_n) - J(Psi)) / e_n^2 over rows with e in [1e-8, 1e-1].
/// Uses the stable energy_error column when present, else energy - j_star.
std::pair<double, double> energy_quadraticity(const ConvergenceRecord& rec, double j_star);

struct GapCheck {
    double gap = 0.0;
    bool satisfied = false;
};

/// lambda_{N+1} - lambda_N and whether it exceeds 1e-8.
GapCheck gap_check(const OracleReference& ref);

/// Tangent-space dimension budget for the exact projected-Hessian assembly.
inline constexpr int kEllipticityBudget = 400;

struct EllipticityResult {
    double minimum = 0.0;
    bool exact = false;  ///< true when the dense tangent-basis path ran
};

/// Minimum Rayleigh quotient of the projected Lagrangian Hessian on the
/// tangent space at the reference frame, <<J''(Psi)d - d Lambda, d>> for
/// h-l2-unit tangent d. J'' is applied by central differences of J' (step
/// 1e-5). Within kEllipticityBudget the Hessian is assembled on a tangent
/// basis and diagonalized (exact minimum); beyond it the seeded-trial minimum
/// is returned as an upper estimate. n beyond the dense budget throws.
EllipticityResult ellipticity_probe(const Problem& p, const OracleReference& ref, int trials,
                                    std::uint64_t seed);

}  // namespace grassmin::diagnostics
