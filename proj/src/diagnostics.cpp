#include "grassmin/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "grassmin/manifold.hpp"
#include "grassmin/rng.hpp"

namespace grassmin::diagnostics {

std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigensolve(Eigen::MatrixXd a,
                                                              int max_sweeps) {
    const int n = static_cast<int>(a.rows());
    if (a.cols() != n) throw DimensionMismatch("jacobi: square matrix required");
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double fro = a.norm();
    const double target = 1e-12 * fro;
    const double skip = n > 1 ? target / (2.0 * n) : 0.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (int q = 1; q < n; ++q)
            for (int p = 0; p < q; ++p) s += a(p, q) * a(p, q);
        return std::sqrt(2.0 * s);
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= target) {
            // ascending sort
            std::vector<int> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(),
                             [&](int i, int j) { return a(i, i) < a(j, j); });
            Eigen::VectorXd w(n);
            Eigen::MatrixXd vs(n, n);
            for (int k = 0; k < n; ++k) {
                w[k] = a(idx[k], idx[k]);
                vs.col(k) = v.col(idx[k]);
            }
            return {w, vs};
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= skip) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // A <- J^T A J on rows/cols p,q
                const Eigen::RowVectorXd ap = a.row(p);
                const Eigen::RowVectorXd aq = a.row(q);
                a.row(p) = c * ap - s * aq;
                a.row(q) = s * ap + c * aq;
                const Eigen::VectorXd cp = a.col(p);
                const Eigen::VectorXd cq = a.col(q);
                a.col(p) = c * cp - s * cq;
                a.col(q) = s * cp + c * cq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                const Eigen::VectorXd vp = v.col(p);
                const Eigen::VectorXd vq = v.col(q);
                v.col(p) = c * vp - s * vq;
                v.col(q) = s * vp + c * vq;
            }
        }
    }
    throw NoConvergence("jacobi: off-diagonal norm not reached within sweep budget");
}

OracleReference dense_eigensolve(const SymmetricOperator& a, int want) {
    if (want < 1 || want > a.dim()) throw Error("dense_eigensolve: bad subspace dimension");
    auto [w, v] = jacobi_eigensolve(a.dense_matrix());
    const double h = a.weight();
    v /= std::sqrt(h);  // h-orthonormal columns
    OrthoFrame frame{BlockVector(v.leftCols(want), h)};
    return OracleReference{std::move(frame), std::move(w), std::move(v), want};
}

Eigen::VectorXd bhat_apply_inverse(const OracleReference& ref, const Preconditioner& b,
                                   const Eigen::VectorXd& r) {
    if (r.size() != ref.frame.dim() || b.dim() != ref.frame.dim())
        throw DimensionMismatch("bhat_apply_inverse: size mismatch");
    const auto& psi = ref.frame.data();
    const double h = ref.frame.weight();
    const Eigen::VectorXd in_span = psi * (h * (psi.transpose() * r));
    const Eigen::VectorXd tang = b.apply_inverse(r - in_span);
    return tang - psi * (h * (psi.transpose() * tang)) + in_span;
}

BhatNorm::BhatNorm(const OracleReference& ref, const Preconditioner& b)
    : weight_(ref.frame.weight()) {
    const int n = ref.frame.dim();
    if (n > kDenseBudget) throw BudgetExceeded("BhatNorm: dense budget exceeded");
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        m.col(j) = bhat_apply_inverse(ref, b, e);
        e[j] = 0.0;
    }
    llt_.compute(0.5 * (m + m.transpose()));
    if (llt_.info() != Eigen::Success)
        throw NotPositiveDefinite("BhatNorm: Bhat^{-1} is not positive definite");
}

double BhatNorm::norm_vec(const Eigen::VectorXd& x) const {
    return std::sqrt(std::max(0.0, weight_ * x.dot(llt_.solve(x))));
}

double BhatNorm::norm(const BlockVector& x) const {
    double s = 0.0;
    for (int j = 0; j < x.count(); ++j) {
        const double v = norm_vec(x.data().col(j));
        s += v * v;
    }
    return std::sqrt(s);
}

namespace {

BlockVector error_block(const OracleReference& ref, const OrthoFrame& phi) {
    const auto& psi = ref.frame.data();
    const double h = phi.weight();
    return BlockVector(phi.data() - psi * (h * (psi.transpose() * phi.data())), h);
}

}  // namespace

double subspace_error(const OracleReference& ref, const OrthoFrame& phi) {
    return block_norm(error_block(ref, phi));
}

double subspace_error_bhat(const OracleReference& ref, const OrthoFrame& phi,
                           const BhatNorm& bn) {
    return bn.norm(error_block(ref, phi));
}

double energy_error_stable(const Problem& p, const OracleReference& ref,
                           const OrthoFrame& phi) {
    if (p.kind() != ProblemKind::simplified)
        return p.energy(phi) - ref.minimum_energy();
    // Exact span-invariant identity: with G = gram(Psi,Phi), W = Phi - Psi G,
    //   dJ = tr[gram(AW,W) (G^T G + gram(W,W))^{-1}] - tr[Lam* (I+K)^{-1} K],
    // K = G^{-T} gram(W,W) G^{-1}. Every term pairs O(1) with O(e^2) factors,
    // so no subtractive cancellation occurs at small errors.
    const auto& psi = ref.frame.data();
    const double h = phi.weight();
    const int nsub = ref.subspace_dim;
    const Eigen::MatrixXd g = h * (psi.transpose() * phi.data());
    const Eigen::MatrixXd w = phi.data() - psi * g;
    const Eigen::MatrixXd aw = p.base_operator().apply_block(w);
    const Eigen::MatrixXd s_w = h * (aw.transpose() * w);
    const Eigen::MatrixXd m_w = h * (w.transpose() * w);
    const Eigen::MatrixXd lam_star = ref.eigenvalues.head(nsub).asDiagonal();
    const Eigen::MatrixXd gi = g.inverse();
    const Eigen::MatrixXd k = gi.transpose() * m_w * gi;
    const Eigen::MatrixXd m_full = g.transpose() * g + m_w;
    const double t1 = (s_w * m_full.inverse()).trace();
    const Eigen::MatrixXd ik = Eigen::MatrixXd::Identity(nsub, nsub) + k;
    const double t2 = (lam_star * ik.llt().solve(k)).trace();
    return t1 - t2;
}

ErrorProbe make_oracle_probe(const Problem& p, const OracleReference& ref,
                             const BhatNorm* bn) {
    return [&p, &ref, bn](const OrthoFrame& phi) {
        ProbeValues v;
        v.err_l2 = subspace_error(ref, phi);
        if (bn != nullptr) v.err_bhat = subspace_error_bhat(ref, phi, *bn);
        v.energy_error = energy_error_stable(p, ref, phi);
        return v;
    };
}

namespace {
constexpr double kErrorFloor = 1e-11;  // 10x the rounding floor
}

ContractionEstimate contraction_estimate(const std::vector<double>& errors, int trailing) {
    if (trailing < 1) throw Error("contraction_estimate: trailing must be >= 1");
    std::vector<double> ratios;
    for (std::size_t n = 0; n + 1 < errors.size(); ++n) {
        if (errors[n] >= kErrorFloor && errors[n + 1] >= kErrorFloor)
            ratios.push_back(errors[n + 1] / errors[n]);
    }
    if (static_cast<int>(ratios.size()) < trailing)
        throw InsufficientData("contraction_estimate: fewer qualifying ratios than requested");
    const auto tail = std::vector<double>(ratios.end() - trailing, ratios.end());
    const double mean = std::accumulate(tail.begin(), tail.end(), 0.0) / trailing;
    double var = 0.0;
    for (double r : tail) var += (r - mean) * (r - mean);
    const double sd = trailing > 1 ? std::sqrt(var / (trailing - 1)) : 0.0;
    return {mean, sd, trailing};
}

namespace {

std::optional<double> row_error(const RecordRow& r) {
    if (r.err_bhat) return r.err_bhat;
    return r.err_l2;
}

}  // namespace

ContractionEstimate contraction_estimate(const ConvergenceRecord& rec, int trailing) {
    std::vector<double> errors;
    for (const auto& row : rec.rows)
        if (const auto e = row_error(row)) errors.push_back(*e);
    return contraction_estimate(errors, trailing);
}

std::pair<double, double> residual_equivalence(
    const std::vector<std::pair<double, double>>& err_and_dual) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    int used = 0;
    for (const auto& [e, dual] : err_and_dual) {
        if (e < 1e-10 || e > 1e-1) continue;
        const double ratio = dual / e;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++used;
    }
    if (used < 2) throw InsufficientData("residual_equivalence: fewer than 2 qualifying rows");
    return {lo, hi};
}

std::pair<double, double> residual_equivalence(const ConvergenceRecord& rec) {
    std::vector<std::pair<double, double>> rows;
    for (const auto& row : rec.rows)
        if (const auto e = row_error(row)) rows.emplace_back(*e, row.res_dual);
    return residual_equivalence(rows);
}

std::pair<double, double> energy_quadraticity(const ConvergenceRecord& rec, double j_star) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    int used = 0;
    for (const auto& row : rec.rows) {
        const auto e = row_error(row);
        if (!e || *e < 1e-8 || *e > 1e-1) continue;
        const double de = row.energy_error ? *row.energy_error : row.energy - j_star;
        const double q = de / (*e * *e);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        ++used;
    }
    if (used < 2) throw InsufficientData("energy_quadraticity: fewer than 2 qualifying rows");
    return {lo, hi};
}

GapCheck gap_check(const OracleReference& ref) {
    const int nsub = ref.subspace_dim;
    if (nsub >= ref.eigenvalues.size())
        throw InsufficientData("gap_check: needs the (N+1)-th eigenvalue");
    const double gap = ref.eigenvalues[nsub] - ref.eigenvalues[nsub - 1];
    return {gap, gap > 1e-8};
}

namespace {

// central difference of J' at psi in direction d, step 1e-5
BlockVector hessian_apply(const Problem& p, const BlockVector& psi, const BlockVector& d) {
    constexpr double t = 1e-5;
    const BlockVector plus(psi.data() + t * d.data(), psi.weight());
    const BlockVector minus(psi.data() - t * d.data(), psi.weight());
    return BlockVector(
        (p.gradient_block(plus).data() - p.gradient_block(minus).data()) / (2.0 * t),
        psi.weight());
}

double lagrangian_quotient(const Problem& p, const OrthoFrame& psi, const SmallMatrix& lam,
                           const BlockVector& d) {
    const BlockVector hd = hessian_apply(p, psi.block(), d);
    const BlockVector dl(d.data() * lam, d.weight());
    return pair_trace(hd, d) - pair_trace(dl, d);
}

}  // namespace

EllipticityResult ellipticity_probe(const Problem& p, const OracleReference& ref, int trials,
                                    std::uint64_t seed) {
    const int n = ref.frame.dim();
    const int nsub = ref.subspace_dim;
    if (n > kDenseBudget) throw BudgetExceeded("ellipticity_probe: dense budget exceeded");
    const double h = ref.frame.weight();
    const SmallMatrix lam = p.lagrange_matrix(ref.frame);

    EllipticityResult out;
    out.minimum = std::numeric_limits<double>::infinity();

    // seeded random tangent quotients (always evaluated; upper estimates)
    for (int t = 0; t < trials; ++t) {
        Rng rng(sub_seed(seed, t));
        BlockVector d(rng.gaussian_matrix(n, nsub), h);
        d = manifold::project_tangent(ref.frame, d);
        const double nrm = block_norm(d);
        if (nrm < 1e-12) continue;
        d = BlockVector(d.data() / nrm, h);
        out.minimum = std::min(out.minimum, lagrangian_quotient(p, ref.frame, lam, d));
    }

    // exact path: assemble the projected Hessian on the tangent basis spanned
    // by (complement eigenvector) x (column slot) and diagonalize it
    const int tangent_dim = (n - nsub) * nsub;
    if (tangent_dim > 0 && tangent_dim <= kEllipticityBudget) {
        std::vector<std::pair<int, int>> basis;  // (eigvec index >= nsub, column)
        basis.reserve(tangent_dim);
        for (int col = 0; col < nsub; ++col)
            for (int j = nsub; j < n; ++j) basis.emplace_back(j, col);

        std::vector<Eigen::MatrixXd> hcols(tangent_dim);
        for (int k = 0; k < tangent_dim; ++k) {
            Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, nsub);
            d.col(basis[k].second) = ref.eigenvectors.col(basis[k].first);
            const BlockVector db(d, h);
            const BlockVector hd = hessian_apply(p, ref.frame.block(), db);
            hcols[k] = hd.data() - d * lam;
        }
        Eigen::MatrixXd hess(tangent_dim, tangent_dim);
        for (int k = 0; k < tangent_dim; ++k) {
            for (int l = 0; l <= k; ++l) {
                const double v =
                    h * hcols[k].col(basis[l].second).dot(ref.eigenvectors.col(basis[l].first));
                hess(k, l) = v;
                hess(l, k) = v;
            }
        }
        const auto [w, _] = jacobi_eigensolve(0.5 * (hess + hess.transpose()));
        out.minimum = std::min(out.minimum, w[0]);
        out.exact = true;
    }
    if (!std::isfinite(out.minimum))
        throw InsufficientData("ellipticity_probe: no directions evaluated");
    return out;
}

}  // namespace grassmin::diagnostics
