#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "grassmin/grid.hpp"

namespace grassmin {

/// Size budget for materializing dense realizations (oracle use).
inline constexpr int kDenseBudget = 2000;

/// Symmetric tridiagonal storage: diag has n entries, off has n-1.
struct TridiagBands {
    Eigen::VectorXd diag;
    Eigen::VectorXd off;
};

/// An applyable self-adjoint map on grid functions. Backed either by
/// tridiagonal bands (every operator the builders produce) or by a dense
/// matrix (test fixtures). Immutable after construction.
class SymmetricOperator {
public:
    static SymmetricOperator tridiagonal(TridiagBands bands, double weight,
                                         std::optional<Grid1D> grid = {});
    /// Dense storage; also used by tests to build deliberately asymmetric
    /// matrices for exercising check_symmetry.
    static SymmetricOperator from_dense(Eigen::MatrixXd mat, double weight = 1.0);

    int dim() const { return dim_; }
    /// Weight h of the discrete inner product this operator lives under.
    double weight() const { return weight_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    Eigen::MatrixXd apply_block(const Eigen::MatrixXd& u) const;

    bool is_tridiagonal() const { return std::holds_alternative<TridiagBands>(storage_); }
    const TridiagBands& bands() const;

    /// Dense realization; throws BudgetExceeded when dim > kDenseBudget.
    Eigen::MatrixXd dense_matrix() const;

    const std::optional<Grid1D>& grid() const { return grid_; }

    /// Gershgorin-style bound on the operator norm.
    double norm_bound() const;

    /// A + diag(d); preserves the banded/dense structure.
    SymmetricOperator shifted_by_diagonal(const Eigen::VectorXd& d) const;

private:
    SymmetricOperator(std::variant<TridiagBands, Eigen::MatrixXd> s, double w,
                      std::optional<Grid1D> g)
        : storage_(std::move(s)), weight_(w), grid_(std::move(g)) {
        dim_ = is_tridiagonal() ? static_cast<int>(std::get<TridiagBands>(storage_).diag.size())
                                : static_cast<int>(std::get<Eigen::MatrixXd>(storage_).rows());
    }

    std::variant<TridiagBands, Eigen::MatrixXd> storage_;
    double weight_ = 1.0;
    std::optional<Grid1D> grid_;
    int dim_ = 0;
};

/// -1/2 d^2/dx^2 + V(x) by the standard 3-point stencil, Dirichlet boundaries.
SymmetricOperator build_schrodinger_1d(const Grid1D& grid,
                                       const std::function<double(double)>& potential);

/// diag(values) with unit inner-product weight.
SymmetricOperator build_diagonal_operator(const std::vector<double>& values);

/// Max over seeded unit pairs (u,v) of |<Au,v> - <u,Av>|.
double check_symmetry(const SymmetricOperator& a, int trials, std::uint64_t seed);

enum class PrecondVariant { identity, shifted, inverse_a };

/// Applyable approximate inverse of a symmetric positive definite B = alpha * base.
/// shifted: base = (tridiagonal of A) + C*I;  inverse_a: base = A itself.
/// Band variants are realized by a tridiagonal LDL^T factorization computed
/// once at construction.
class Preconditioner {
public:
    static Preconditioner identity(int dim, double weight, double alpha);

    PrecondVariant variant() const { return variant_; }
    int dim() const { return dim_; }
    double alpha() const { return alpha_; }
    double weight() const { return weight_; }

    /// B^{-1} r.
    Eigen::VectorXd apply_inverse(const Eigen::VectorXd& r) const;
    Eigen::MatrixXd apply_inverse_block(const Eigen::MatrixXd& r) const;
    /// B u (the forward map; available for all variants).
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

private:
    friend Preconditioner build_preconditioner(PrecondVariant, const SymmetricOperator&,
                                               double, double);
    Preconditioner() = default;

    PrecondVariant variant_ = PrecondVariant::identity;
    int dim_ = 0;
    double alpha_ = 1.0;
    double weight_ = 1.0;
    // base bands and its LDL^T factors (band variants only)
    TridiagBands base_;
    Eigen::VectorXd fact_d_;
    Eigen::VectorXd fact_l_;
};

Preconditioner build_preconditioner(PrecondVariant variant, const SymmetricOperator& a,
                                    double shift, double alpha);

}  // namespace grassmin
