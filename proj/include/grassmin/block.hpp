#pragma once

#include <Eigen/Core>

#include "grassmin/errors.hpp"

namespace grassmin {

using SmallMatrix = Eigen::MatrixXd;  // N x N Gram / Lagrange / mixing matrices

/// An ordered set of N grid functions (columns) under the h-weighted inner
/// product. Plain value type; columns share one grid dimension.
class BlockVector {
public:
    BlockVector(Eigen::MatrixXd data, double weight) : data_(std::move(data)), weight_(weight) {
        if (!(weight_ > 0)) throw Error("BlockVector: weight must be positive");
        if (data_.size() == 0) throw Error("BlockVector: empty");
    }

    int dim() const { return static_cast<int>(data_.rows()); }
    int count() const { return static_cast<int>(data_.cols()); }
    double weight() const { return weight_; }

    Eigen::MatrixXd& data() { return data_; }
    const Eigen::MatrixXd& data() const { return data_; }

private:
    Eigen::MatrixXd data_;
    double weight_;
};

inline void require_compatible(const BlockVector& a, const BlockVector& b) {
    if (a.dim() != b.dim() || a.weight() != b.weight())
        throw DimensionMismatch("block vectors live on different grids");
}

/// gram(A,B)_{ij} = <a_i, b_j> = h * a_i . b_j
inline SmallMatrix gram(const BlockVector& a, const BlockVector& b) {
    require_compatible(a, b);
    if (a.count() != b.count())
        throw DimensionMismatch("gram: frames must have equal column counts");
    return a.weight() * (a.data().transpose() * b.data());
}

/// <<A,B>> = trace gram(A,B)
inline double pair_trace(const BlockVector& a, const BlockVector& b) {
    require_compatible(a, b);
    if (a.count() != b.count()) throw DimensionMismatch("pair_trace: column count mismatch");
    return a.weight() * (a.data().array() * b.data().array()).sum();
}

/// Block norm sqrt(sum_i <a_i,a_i>).
inline double block_norm(const BlockVector& a) {
    return std::sqrt(a.weight()) * a.data().norm();
}

/// Stiefel tolerance: ||gram(Phi,Phi) - I||_max on construction.
inline constexpr double kStiefelTol = 1e-10;

/// A BlockVector with Gram matrix equal to the identity (a Stiefel point,
/// representing its Grassmann class). Validated on construction.
class OrthoFrame {
public:
    explicit OrthoFrame(BlockVector block) : block_(std::move(block)) {
        const SmallMatrix g = gram(block_, block_);
        const double dev =
            (g - SmallMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
        if (!(dev <= kStiefelTol))
            throw NotOrthonormal("frame violates the Stiefel constraint (deviation " +
                                 std::to_string(dev) + ")");
    }

    const BlockVector& block() const { return block_; }
    int dim() const { return block_.dim(); }
    int count() const { return block_.count(); }
    double weight() const { return block_.weight(); }
    const Eigen::MatrixXd& data() const { return block_.data(); }

private:
    BlockVector block_;
};

}  // namespace grassmin
