#pragma once

#include <utility>

#include "grassmin/block.hpp"
#include "grassmin/operators.hpp"

namespace grassmin {

enum class ProblemKind { simplified, toy_lda };

/// An orthogonality-constrained energy functional. `simplified` is the
/// quadratic trace functional sum_i <phi_i, A phi_i> of a fixed operator;
/// `toy_lda` adds the local density term (kappa/2) * h * sum_j n(x_j)^2 with
/// n = sum_i phi_i^2, whose gradient operator is A + kappa diag(n).
///
/// Gradient convention: J'(Phi) := A_Phi Phi with directional derivative
/// dJ(Phi)[delta] = 2 <<A_Phi Phi, delta>>.
class Problem {
public:
    static Problem simplified(SymmetricOperator a, int subspace_dim) {
        return Problem(ProblemKind::simplified, std::move(a), subspace_dim, 0.0);
    }
    static Problem toy_lda(SymmetricOperator a, int subspace_dim, double kappa) {
        if (kappa < 0) throw Error("toy_lda: kappa must be >= 0");
        return Problem(ProblemKind::toy_lda, std::move(a), subspace_dim, kappa);
    }

    ProblemKind kind() const { return kind_; }
    int subspace_dim() const { return subspace_dim_; }
    double kappa() const { return kappa_; }
    const SymmetricOperator& base_operator() const { return a_; }

    /// Electron-density analogue n(x_j) = sum_i phi_i(x_j)^2.
    Eigen::VectorXd density(const BlockVector& phi) const;

    /// The unconstrained functional at an arbitrary block (finite-difference
    /// probes and line searches evaluate off the manifold).
    double energy_block(const BlockVector& phi) const;
    double energy(const OrthoFrame& phi) const { return energy_block(phi.block()); }

    /// A_Phi as an operator (A itself for simplified).
    SymmetricOperator gradient_operator(const OrthoFrame& phi) const {
        return gradient_operator_at(phi.block());
    }
    SymmetricOperator gradient_operator_at(const BlockVector& phi) const;

    /// J'(Phi) = A_Phi Phi at an arbitrary block.
    BlockVector gradient_block(const BlockVector& phi) const;

    /// Lambda = gram(A_Phi Phi, Phi), symmetrized.
    SmallMatrix lagrange_matrix(const OrthoFrame& phi) const;

    /// R = A_Phi Phi - Phi Lambda; tangent at Phi.
    BlockVector residual(const OrthoFrame& phi) const;

    /// {l2, dual}: ||R|| in the block norm and sqrt(<<B^{-1} R, R>>).
    std::pair<double, double> residual_norms(const OrthoFrame& phi,
                                             const Preconditioner& b) const;

private:
    Problem(ProblemKind k, SymmetricOperator a, int n_sub, double kappa)
        : kind_(k), a_(std::move(a)), subspace_dim_(n_sub), kappa_(kappa) {
        if (subspace_dim_ < 1 || subspace_dim_ > a_.dim())
            throw Error("Problem: subspace dimension out of range");
    }

    ProblemKind kind_;
    SymmetricOperator a_;
    int subspace_dim_;
    double kappa_;
};

}  // namespace grassmin
