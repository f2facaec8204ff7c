#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace grassmin {

/// Deterministic random source. Gaussians are produced by Box-Muller on
/// mt19937_64 uniforms so streams are reproducible independently of the
/// standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0,1).
    double uniform() {
        return std::generate_canonical<double, 53>(eng_);
    }

    double gaussian() {
        double u1 = 1.0 - uniform();  // (0,1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Eigen::VectorXd gaussian_vector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = gaussian();
        return v;
    }

    Eigen::MatrixXd gaussian_matrix(int rows, int cols) {
        Eigen::MatrixXd m(rows, cols);
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < rows; ++i) m(i, j) = gaussian();
        return m;
    }

private:
    std::mt19937_64 eng_;
};

/// Mixes a base seed with a trial index so per-trial streams are
/// order-independent (splitmix64 finalizer).
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace grassmin
