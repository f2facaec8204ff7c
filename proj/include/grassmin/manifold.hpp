#pragma once

#include <functional>

#include "grassmin/block.hpp"
#include "grassmin/operators.hpp"

namespace grassmin::manifold {

/// Gram pivot threshold below which orthonormalization reports rank deficiency.
inline constexpr double kRankTol = 1e-12;
/// Tangency tolerance for geodesic_step's precondition.
inline constexpr double kTangentTol = 1e-8;
/// Dense-X budget for build_xhat_dense.
inline constexpr int kXhatBudget = 200;

/// (I - D_Phi) W = W - Phi gram(Phi, W): the L2-orthogonal projection onto
/// the tangent space of the Grassmann manifold at [Phi].
BlockVector project_tangent(const OrthoFrame& frame, const BlockVector& w);

/// D_Phi W = Phi gram(Phi, W): projection onto span(Phi).
BlockVector project_span(const OrthoFrame& frame, const BlockVector& w);

enum class OrthoMethod { gram_schmidt, cholesky, rayleigh_ritz };

/// Orthonormalizes the columns of `raw` preserving their span. gram_schmidt is
/// modified GS with one re-orthogonalization pass; cholesky factors the Gram
/// matrix; rayleigh_ritz additionally diagonalizes gram(A raw, raw) and orders
/// columns by ascending Ritz value (requires a_opt).
OrthoFrame orthonormalize(const BlockVector& raw, OrthoMethod method,
                          const SymmetricOperator* a_opt = nullptr);

struct SubspaceDistance {
    double procrustes;  ///< min over orthogonal U of ||a - b U||
    double projector;   ///< ||(I - D_a) b||
};

/// Grassmann distance d([a],[b]). The minimizing U comes from the SVD of
/// gram(b,a); the distance is the block norm of the explicitly aligned
/// difference (optionally under a caller-supplied norm, e.g. a Bhat norm).
SubspaceDistance subspace_distance(const OrthoFrame& a, const OrthoFrame& b,
                                   const std::function<double(const BlockVector&)>& norm = {});

/// The orthonormal basis of span(ref) closest to phi columnwise:
/// psi_i = D_ref phi_i / ||D_ref phi_i||, then Gram-Schmidt.
OrthoFrame closest_representative(const OrthoFrame& ref, const OrthoFrame& phi);

/// exp(t Xhat) Phi for the antisymmetric lift Xhat of the tangent block K,
/// evaluated without forming Xhat: with the compact h-weighted SVD
/// K = U S V^T the geodesic is Phi V cos(S t) V^T + U sin(S t) V^T.
/// Zero singular directions are exactly neutral. Result is re-orthonormalized.
OrthoFrame geodesic_step(const OrthoFrame& phi, const BlockVector& tangent, double t);

/// Dense antisymmetric lift Xhat = (I-D) X D - D X^T (I-D), D = h Phi Phi^T.
/// Oracle-scale only (dim <= kXhatBudget).
Eigen::MatrixXd build_xhat_dense(const OrthoFrame& phi, const Eigen::MatrixXd& x);

}  // namespace grassmin::manifold
