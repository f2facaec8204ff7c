#pragma once

#include "grassmin/errors.hpp"

namespace grassmin {

/// Uniform 1D grid of n interior points on (a,b) with Dirichlet boundaries.
/// The discrete inner product <u,v> := h * sum_j u_j v_j is used for all
/// L2 pairings everywhere in the library.
struct Grid1D {
    int n = 0;
    double a = 0.0;
    double b = 0.0;
    double h = 0.0;

    /// Interior point x_j = a + (j+1) h, j = 0..n-1.
    double point(int j) const { return a + (j + 1) * h; }
};

inline Grid1D build_grid(int n, double a, double b) {
    if (n < 2) throw Error("build_grid: n must be >= 2");
    if (!(a < b)) throw Error("build_grid: requires a < b");
    return Grid1D{n, a, b, (b - a) / (n + 1)};
}

}  // namespace grassmin
