#include "grassmin/manifold.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace grassmin::manifold {

BlockVector project_tangent(const OrthoFrame& frame, const BlockVector& w) {
    require_compatible(frame.block(), w);
    const SmallMatrix g = frame.weight() * (frame.data().transpose() * w.data());
    return BlockVector(w.data() - frame.data() * g, w.weight());
}

BlockVector project_span(const OrthoFrame& frame, const BlockVector& w) {
    require_compatible(frame.block(), w);
    const SmallMatrix g = frame.weight() * (frame.data().transpose() * w.data());
    return BlockVector(frame.data() * g, w.weight());
}

namespace {

// Modified Gram-Schmidt in the h-weighted product, one re-orthogonalization
// pass per column. Gram pivots below kRankTol reject the frame.
Eigen::MatrixXd mgs(const Eigen::MatrixXd& raw, double h) {
    Eigen::MatrixXd q = raw;
    const int ncols = static_cast<int>(q.cols());
    for (int j = 0; j < ncols; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < j; ++i) {
                const double c = h * q.col(i).dot(q.col(j));
                q.col(j) -= c * q.col(i);
            }
        }
        const double nrm2 = h * q.col(j).squaredNorm();
        if (!(nrm2 > kRankTol)) throw RankDeficient("gram_schmidt: pivot below tolerance");
        q.col(j) /= std::sqrt(nrm2);
    }
    return q;
}

Eigen::MatrixXd cholesky_orth(const Eigen::MatrixXd& raw, double h) {
    const SmallMatrix g = h * (raw.transpose() * raw);
    const int n = static_cast<int>(g.rows());
    // lower Cholesky with explicit pivot check
    SmallMatrix l = SmallMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double d = g(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > kRankTol)) throw RankDeficient("cholesky: Gram pivot below tolerance");
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i)
            l(i, j) = (g(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
    // raw * L^{-T}
    return l.triangularView<Eigen::Lower>()
        .transpose()
        .solve<Eigen::OnTheRight>(raw);
}

}  // namespace

OrthoFrame orthonormalize(const BlockVector& raw, OrthoMethod method,
                          const SymmetricOperator* a_opt) {
    const double h = raw.weight();
    switch (method) {
        case OrthoMethod::gram_schmidt:
            return OrthoFrame(BlockVector(mgs(raw.data(), h), h));
        case OrthoMethod::cholesky:
            return OrthoFrame(BlockVector(cholesky_orth(raw.data(), h), h));
        case OrthoMethod::rayleigh_ritz: {
            if (a_opt == nullptr)
                throw Error("orthonormalize: rayleigh_ritz requires an operator");
            if (a_opt->dim() != raw.dim())
                throw DimensionMismatch("orthonormalize: operator dimension mismatch");
            Eigen::MatrixXd q = cholesky_orth(raw.data(), h);
            // diagonalize the small matrix <A q_i, q_j>, ascending Ritz values
            const SmallMatrix m = h * (a_opt->apply_block(q).transpose() * q);
            Eigen::SelfAdjointEigenSolver<SmallMatrix> es(0.5 * (m + m.transpose()));
            return OrthoFrame(BlockVector(q * es.eigenvectors(), h));
        }
    }
    throw Error("orthonormalize: unknown method");
}

SubspaceDistance subspace_distance(const OrthoFrame& a, const OrthoFrame& b,
                                   const std::function<double(const BlockVector&)>& norm) {
    require_compatible(a.block(), b.block());
    if (a.count() != b.count())
        throw DimensionMismatch("subspace_distance: column count mismatch");
    const SmallMatrix g = gram(b.block(), a.block());
    Eigen::JacobiSVD<SmallMatrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const SmallMatrix u_star = svd.matrixU() * svd.matrixV().transpose();
    const BlockVector diff(a.data() - b.data() * u_star, a.weight());
    const BlockVector resid(b.data() - a.data() * gram(a.block(), b.block()), a.weight());
    SubspaceDistance out;
    out.procrustes = norm ? norm(diff) : block_norm(diff);
    out.projector = norm ? norm(resid) : block_norm(resid);
    return out;
}

OrthoFrame closest_representative(const OrthoFrame& ref, const OrthoFrame& phi) {
    require_compatible(ref.block(), phi.block());
    if (ref.count() != phi.count())
        throw DimensionMismatch("closest_representative: column count mismatch");
    const double h = phi.weight();
    // D_ref phi_i, rejected when the projected column is too short
    const SmallMatrix g = h * (ref.data().transpose() * phi.data());
    Eigen::MatrixXd proj = ref.data() * g;
    for (int j = 0; j < proj.cols(); ++j) {
        const double nrm = std::sqrt(h) * proj.col(j).norm();
        if (!(nrm >= 0.5)) throw TooFar("closest_representative: frame too far from reference");
        proj.col(j) /= nrm;
    }
    return OrthoFrame(BlockVector(mgs(proj, h), h));
}

OrthoFrame geodesic_step(const OrthoFrame& phi, const BlockVector& tangent, double t) {
    require_compatible(phi.block(), tangent);
    if (phi.count() != tangent.count())
        throw DimensionMismatch("geodesic_step: column count mismatch");
    const double h = phi.weight();
    const SmallMatrix overlap = h * (phi.data().transpose() * tangent.data());
    if (overlap.cwiseAbs().maxCoeff() > kTangentTol)
        throw NotTangent("geodesic_step: direction is not tangent at the frame");

    const double knorm = block_norm(tangent);
    if (t == 0.0 || knorm == 0.0) return phi;

    // compact SVD of K through the N x N matrix gram(K,K) = V S^2 V^T
    const SmallMatrix ktk = h * (tangent.data().transpose() * tangent.data());
    Eigen::SelfAdjointEigenSolver<SmallMatrix> es(ktk);
    const int ncols = phi.count();
    Eigen::VectorXd sigma(ncols);
    for (int i = 0; i < ncols; ++i) sigma[i] = std::sqrt(std::max(0.0, es.eigenvalues()[i]));
    const SmallMatrix v = es.eigenvectors();

    // Phi V cos(S t) V^T  +  sum_i sin(sigma_i t)/sigma_i (K v_i) v_i^T;
    // sigma = 0 directions contribute cos = 1, sin-term = 0 with no 0/0.
    Eigen::VectorXd cosv(ncols);
    for (int i = 0; i < ncols; ++i) cosv[i] = std::cos(sigma[i] * t);
    Eigen::MatrixXd next = phi.data() * (v * cosv.asDiagonal() * v.transpose());
    const double floor = 1e-14 * sigma.maxCoeff();
    for (int i = 0; i < ncols; ++i) {
        if (sigma[i] <= floor) continue;
        const double coeff = std::sin(sigma[i] * t) / sigma[i];
        next.noalias() += (tangent.data() * v.col(i)) * (coeff * v.col(i).transpose());
    }
    return orthonormalize(BlockVector(std::move(next), h), OrthoMethod::cholesky);
}

Eigen::MatrixXd build_xhat_dense(const OrthoFrame& phi, const Eigen::MatrixXd& x) {
    const int n = phi.dim();
    if (n > kXhatBudget)
        throw BudgetExceeded("build_xhat_dense limited to n <= " + std::to_string(kXhatBudget));
    if (x.rows() != n || x.cols() != n)
        throw DimensionMismatch("build_xhat_dense: X must be n x n");
    const double h = phi.weight();
    const Eigen::MatrixXd d = h * (phi.data() * phi.data().transpose());
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    return (id - d) * x * d - d * x.transpose() * (id - d);
}

}  // namespace grassmin::manifold
