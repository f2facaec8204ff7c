#include "grassmin/operators.hpp"

#include <cmath>

#include "grassmin/rng.hpp"

namespace grassmin {

SymmetricOperator SymmetricOperator::tridiagonal(TridiagBands bands, double weight,
                                                 std::optional<Grid1D> grid) {
    const auto n = bands.diag.size();
    if (n < 1) throw Error("tridiagonal operator: empty diagonal");
    if (bands.off.size() != n - 1)
        throw DimensionMismatch("tridiagonal operator: off-diagonal must have n-1 entries");
    if (!(weight > 0)) throw Error("tridiagonal operator: weight must be positive");
    return SymmetricOperator(std::move(bands), weight, std::move(grid));
}

SymmetricOperator SymmetricOperator::from_dense(Eigen::MatrixXd mat, double weight) {
    if (mat.rows() != mat.cols() || mat.rows() < 1)
        throw DimensionMismatch("from_dense: square non-empty matrix required");
    if (!(weight > 0)) throw Error("from_dense: weight must be positive");
    return SymmetricOperator(std::move(mat), weight, std::nullopt);
}

const TridiagBands& SymmetricOperator::bands() const {
    if (!is_tridiagonal()) throw Error("operator has no banded structure");
    return std::get<TridiagBands>(storage_);
}

Eigen::VectorXd SymmetricOperator::apply(const Eigen::VectorXd& u) const {
    if (u.size() != dim_) throw DimensionMismatch("operator apply: size mismatch");
    if (is_tridiagonal()) {
        const auto& t = std::get<TridiagBands>(storage_);
        Eigen::VectorXd r = t.diag.cwiseProduct(u);
        const int n = dim_;
        for (int i = 0; i + 1 < n; ++i) {
            r[i] += t.off[i] * u[i + 1];
            r[i + 1] += t.off[i] * u[i];
        }
        return r;
    }
    return std::get<Eigen::MatrixXd>(storage_) * u;
}

Eigen::MatrixXd SymmetricOperator::apply_block(const Eigen::MatrixXd& u) const {
    if (u.rows() != dim_) throw DimensionMismatch("operator apply: block size mismatch");
    if (is_tridiagonal()) {
        const auto& t = std::get<TridiagBands>(storage_);
        Eigen::MatrixXd r = u.array().colwise() * t.diag.array();
        const int n = dim_;
        for (int i = 0; i + 1 < n; ++i) {
            r.row(i) += t.off[i] * u.row(i + 1);
            r.row(i + 1) += t.off[i] * u.row(i);
        }
        return r;
    }
    return std::get<Eigen::MatrixXd>(storage_) * u;
}

Eigen::MatrixXd SymmetricOperator::dense_matrix() const {
    if (dim_ > kDenseBudget)
        throw BudgetExceeded("dense realization limited to n <= " + std::to_string(kDenseBudget));
    if (!is_tridiagonal()) return std::get<Eigen::MatrixXd>(storage_);
    const auto& t = std::get<TridiagBands>(storage_);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_, dim_);
    m.diagonal() = t.diag;
    for (int i = 0; i + 1 < dim_; ++i) m(i, i + 1) = m(i + 1, i) = t.off[i];
    return m;
}

double SymmetricOperator::norm_bound() const {
    if (is_tridiagonal()) {
        const auto& t = std::get<TridiagBands>(storage_);
        double best = 0.0;
        for (int i = 0; i < dim_; ++i) {
            double row = std::abs(t.diag[i]);
            if (i > 0) row += std::abs(t.off[i - 1]);
            if (i + 1 < dim_) row += std::abs(t.off[i]);
            best = std::max(best, row);
        }
        return best;
    }
    return std::get<Eigen::MatrixXd>(storage_).cwiseAbs().rowwise().sum().maxCoeff();
}

SymmetricOperator SymmetricOperator::shifted_by_diagonal(const Eigen::VectorXd& d) const {
    if (d.size() != dim_) throw DimensionMismatch("shifted_by_diagonal: size mismatch");
    if (is_tridiagonal()) {
        TridiagBands t = std::get<TridiagBands>(storage_);
        t.diag += d;
        return SymmetricOperator(std::move(t), weight_, grid_);
    }
    Eigen::MatrixXd m = std::get<Eigen::MatrixXd>(storage_);
    m.diagonal() += d;
    return SymmetricOperator(std::move(m), weight_, grid_);
}

SymmetricOperator build_schrodinger_1d(const Grid1D& grid,
                                       const std::function<double(double)>& potential) {
    const int n = grid.n;
    const double inv_h2 = 1.0 / (grid.h * grid.h);
    TridiagBands t{Eigen::VectorXd(n), Eigen::VectorXd::Constant(n - 1, -0.5 * inv_h2)};
    for (int j = 0; j < n; ++j) {
        const double v = potential(grid.point(j));
        if (!std::isfinite(v)) throw Error("build_schrodinger_1d: potential not finite at grid point");
        t.diag[j] = inv_h2 + v;
    }
    return SymmetricOperator::tridiagonal(std::move(t), grid.h, grid);
}

SymmetricOperator build_diagonal_operator(const std::vector<double>& values) {
    if (values.empty()) throw Error("build_diagonal_operator: empty list");
    const int n = static_cast<int>(values.size());
    TridiagBands t{Eigen::Map<const Eigen::VectorXd>(values.data(), n),
                   Eigen::VectorXd::Zero(std::max(0, n - 1))};
    return SymmetricOperator::tridiagonal(std::move(t), 1.0);
}

double check_symmetry(const SymmetricOperator& a, int trials, std::uint64_t seed) {
    if (trials < 1) throw Error("check_symmetry: trials must be >= 1");
    const double h = a.weight();
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(sub_seed(seed, t));
        Eigen::VectorXd u = rng.gaussian_vector(a.dim());
        Eigen::VectorXd v = rng.gaussian_vector(a.dim());
        u /= std::sqrt(h) * u.norm();
        v /= std::sqrt(h) * v.norm();
        const double lhs = h * a.apply(u).dot(v);
        const double rhs = h * u.dot(a.apply(v));
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

Preconditioner Preconditioner::identity(int dim, double weight, double alpha) {
    if (!(alpha > 0)) throw Error("preconditioner: alpha must be positive");
    Preconditioner p;
    p.variant_ = PrecondVariant::identity;
    p.dim_ = dim;
    p.alpha_ = alpha;
    p.weight_ = weight;
    return p;
}

Eigen::VectorXd Preconditioner::apply_inverse(const Eigen::VectorXd& r) const {
    if (r.size() != dim_) throw DimensionMismatch("preconditioner apply: size mismatch");
    if (variant_ == PrecondVariant::identity) return r / alpha_;
    // solve (L D L^T) x = r, then scale by 1/alpha
    Eigen::VectorXd x = r;
    const int n = dim_;
    for (int i = 1; i < n; ++i) x[i] -= fact_l_[i - 1] * x[i - 1];
    x.array() /= fact_d_.array();
    for (int i = n - 2; i >= 0; --i) x[i] -= fact_l_[i] * x[i + 1];
    return x / alpha_;
}

Eigen::MatrixXd Preconditioner::apply_inverse_block(const Eigen::MatrixXd& r) const {
    Eigen::MatrixXd out(r.rows(), r.cols());
    for (Eigen::Index j = 0; j < r.cols(); ++j) out.col(j) = apply_inverse(r.col(j));
    return out;
}

Eigen::VectorXd Preconditioner::apply(const Eigen::VectorXd& u) const {
    if (u.size() != dim_) throw DimensionMismatch("preconditioner apply: size mismatch");
    if (variant_ == PrecondVariant::identity) return alpha_ * u;
    Eigen::VectorXd r = base_.diag.cwiseProduct(u);
    for (int i = 0; i + 1 < dim_; ++i) {
        r[i] += base_.off[i] * u[i + 1];
        r[i + 1] += base_.off[i] * u[i];
    }
    return alpha_ * r;
}

Preconditioner build_preconditioner(PrecondVariant variant, const SymmetricOperator& a,
                                    double shift, double alpha) {
    if (!(alpha > 0)) throw Error("build_preconditioner: alpha must be positive");
    if (variant == PrecondVariant::identity)
        return Preconditioner::identity(a.dim(), a.weight(), alpha);
    if (!a.is_tridiagonal())
        throw Error("build_preconditioner: band variants require a tridiagonal operator");

    Preconditioner p;
    p.variant_ = variant;
    p.dim_ = a.dim();
    p.alpha_ = alpha;
    p.weight_ = a.weight();
    p.base_ = a.bands();
    if (variant == PrecondVariant::shifted) p.base_.diag.array() += shift;

    // LDL^T of the base; non-positive pivots reject the factorization.
    const int n = p.dim_;
    p.fact_d_.resize(n);
    p.fact_l_.resize(std::max(0, n - 1));
    double d = p.base_.diag[0];
    if (!(d > 0)) throw NotPositiveDefinite("preconditioner base: non-positive pivot");
    p.fact_d_[0] = d;
    for (int i = 1; i < n; ++i) {
        const double l = p.base_.off[i - 1] / p.fact_d_[i - 1];
        p.fact_l_[i - 1] = l;
        d = p.base_.diag[i] - l * l * p.fact_d_[i - 1];
        if (!(d > 0)) throw NotPositiveDefinite("preconditioner base: non-positive pivot");
        p.fact_d_[i] = d;
    }
    return p;
}

}  // namespace grassmin
