#include "grassmin/problems.hpp"

#include <cmath>

namespace grassmin {

Eigen::VectorXd Problem::density(const BlockVector& phi) const {
    return phi.data().array().square().rowwise().sum();
}

double Problem::energy_block(const BlockVector& phi) const {
    if (phi.dim() != a_.dim()) throw DimensionMismatch("energy: grid mismatch");
    const double h = phi.weight();
    double e = h * (phi.data().array() * a_.apply_block(phi.data()).array()).sum();
    if (kind_ == ProblemKind::toy_lda) {
        const Eigen::VectorXd n = density(phi);
        e += 0.5 * kappa_ * h * n.squaredNorm();
    }
    return e;
}

SymmetricOperator Problem::gradient_operator_at(const BlockVector& phi) const {
    if (kind_ == ProblemKind::simplified) return a_;
    return a_.shifted_by_diagonal(kappa_ * density(phi));
}

BlockVector Problem::gradient_block(const BlockVector& phi) const {
    if (phi.dim() != a_.dim()) throw DimensionMismatch("gradient: grid mismatch");
    Eigen::MatrixXd g = a_.apply_block(phi.data());
    if (kind_ == ProblemKind::toy_lda) {
        const Eigen::VectorXd n = density(phi);
        g += (kappa_ * n.array()).matrix().asDiagonal() * phi.data();
    }
    return BlockVector(std::move(g), phi.weight());
}

SmallMatrix Problem::lagrange_matrix(const OrthoFrame& phi) const {
    const BlockVector g = gradient_block(phi.block());
    const SmallMatrix lam = gram(g, phi.block());
    return 0.5 * (lam + lam.transpose());
}

BlockVector Problem::residual(const OrthoFrame& phi) const {
    const BlockVector g = gradient_block(phi.block());
    const SmallMatrix lam_raw = gram(g, phi.block());
    const SmallMatrix lam = 0.5 * (lam_raw + lam_raw.transpose());
    return BlockVector(g.data() - phi.data() * lam, phi.weight());
}

std::pair<double, double> Problem::residual_norms(const OrthoFrame& phi,
                                                  const Preconditioner& b) const {
    const BlockVector r = residual(phi);
    const double l2 = block_norm(r);
    const Eigen::MatrixXd pr = b.apply_inverse_block(r.data());
    const double dual2 = r.weight() * (pr.array() * r.data().array()).sum();
    return {l2, std::sqrt(std::max(0.0, dual2))};
}

}  // namespace grassmin
