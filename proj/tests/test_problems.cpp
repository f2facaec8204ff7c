#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grassmin/problems.hpp"
#include "grassmin/manifold.hpp"
#include "grassmin/rng.hpp"
#include "oracles.hpp"

using namespace grassmin;
namespace oracle = testing_oracles;

namespace {

OrthoFrame coordinate_pair(int n, int c0, int c1) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, 2);
    m(c0, 0) = 1.0;
    m(c1, 1) = 1.0;
    return OrthoFrame(BlockVector(m, 1.0));
}

Problem harmonic_problem(int n, int nsub, double kappa) {
    const Grid1D g = build_grid(n, -8.0, 8.0);
    const SymmetricOperator a = build_schrodinger_1d(g, [](double x) { return 0.5 * x * x; });
    return kappa == 0.0 ? Problem::simplified(a, nsub) : Problem::toy_lda(a, nsub, kappa);
}

}  // namespace

TEST_CASE("energy hand case and unitary invariance") {
    const SymmetricOperator a = build_diagonal_operator({1, 2, 4});
    const Problem p = Problem::simplified(a, 2);
    const OrthoFrame phi = coordinate_pair(3, 0, 1);
    CHECK(p.energy(phi) == doctest::Approx(3.0).epsilon(1e-15));

    const Problem ph = harmonic_problem(40, 3, 0.0);
    const Problem ph_lda = harmonic_problem(40, 3, 0.7);
    const OrthoFrame f = oracle::random_frame(40, 3, ph.base_operator().weight(), 2);
    for (const Problem* prob : {&ph, &ph_lda}) {
        const double j0 = prob->energy(f);
        const Eigen::MatrixXd u = oracle::random_orthogonal(3, 3);
        const OrthoFrame mixed{BlockVector(f.data() * u, f.weight())};
        CHECK(std::abs(prob->energy(mixed) - j0) <= 1e-10 * std::max(1.0, std::abs(j0)));
    }
}

TEST_CASE("toy_lda with kappa=0 coincides with the simplified energy") {
    const Grid1D g = build_grid(25, 0.0, 1.0);
    const SymmetricOperator a = build_schrodinger_1d(g, [](double x) { return 10 * x; });
    const Problem simp = Problem::simplified(a, 2);
    const Problem lda0 = Problem::toy_lda(a, 2, 0.0);
    const OrthoFrame f = oracle::random_frame(25, 2, g.h, 5);
    CHECK(simp.energy(f) == lda0.energy(f));
}

TEST_CASE("gradient operator: fixed for simplified, density shift for toy_lda") {
    const Problem p = harmonic_problem(30, 2, 0.0);
    const OrthoFrame f = oracle::random_frame(30, 2, p.base_operator().weight(), 7);
    const SymmetricOperator g1 = p.gradient_operator(f);
    Rng rng(8);
    const Eigen::VectorXd u = rng.gaussian_vector(30);
    CHECK((g1.apply(u) - p.base_operator().apply(u)).norm() == 0.0);

    // uniform density: operator = A + kappa * c * I
    const SymmetricOperator a = build_diagonal_operator({1, 2});
    const Problem lda = Problem::toy_lda(a, 2, 0.8);
    const OrthoFrame id = coordinate_pair(2, 0, 1);  // density = (1,1)
    const SymmetricOperator ga = lda.gradient_operator(id);
    Eigen::VectorXd v(2);
    v << 1.0, 1.0;
    const Eigen::VectorXd want = a.apply(v) + 0.8 * v;
    CHECK((ga.apply(v) - want).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("directional derivative matches central differences for both kinds") {
    for (double kappa : {0.0, 0.5}) {
        const Problem p = harmonic_problem(35, 3, kappa);
        const double h = p.base_operator().weight();
        for (int trial = 0; trial < 10; ++trial) {
            const OrthoFrame f = oracle::random_frame(35, 3, h, sub_seed(40, trial));
            Rng rng(sub_seed(41, trial));
            const BlockVector delta(rng.gaussian_matrix(35, 3), h);
            const double analytic = 2.0 * pair_trace(p.gradient_block(f.block()), delta);
            const double t = 1e-5;
            const double fd = oracle::central_difference(
                [&](double s) {
                    return p.energy_block(BlockVector(f.data() + s * delta.data(), h));
                },
                t);
            CHECK(std::abs(fd - analytic) <= 1e-6 * std::max(1.0, std::abs(analytic)));
        }
    }
}

TEST_CASE("lagrange matrix hand cases and symmetry") {
    const SymmetricOperator a124 = build_diagonal_operator({1, 2, 4});
    const Problem p = Problem::simplified(a124, 2);
    const SmallMatrix lam = p.lagrange_matrix(coordinate_pair(3, 0, 1));
    CHECK(lam(0, 0) == doctest::Approx(1.0));
    CHECK(lam(1, 1) == doctest::Approx(2.0));
    CHECK(std::abs(lam(0, 1)) + std::abs(lam(1, 0)) <= 1e-15);

    // non-eigen frame on A = diag(1,3)
    const SymmetricOperator a13 = build_diagonal_operator({1, 3});
    Eigen::MatrixXd m(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    m << s, s, s, -s;
    const Problem p13 = Problem::simplified(a13, 2);
    const SmallMatrix lam2 = p13.lagrange_matrix(OrthoFrame(BlockVector(m, 1.0)));
    CHECK(lam2(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(lam2(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(lam2(1, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(lam2(1, 1) == doctest::Approx(2.0).epsilon(1e-14));

    const Problem lda = harmonic_problem(28, 3, 0.6);
    for (int trial = 0; trial < 5; ++trial) {
        const OrthoFrame f =
            oracle::random_frame(28, 3, lda.base_operator().weight(), sub_seed(60, trial));
        const SmallMatrix l = lda.lagrange_matrix(f);
        CHECK((l - l.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("residual: stationarity, commutator identity, tangency") {
    const SymmetricOperator a = build_diagonal_operator({1, 2, 4, 9});
    const Problem p = Problem::simplified(a, 2);
    const OrthoFrame exact = coordinate_pair(4, 0, 1);
    CHECK(block_norm(p.residual(exact)) <= 1e-10);

    const Problem ph = harmonic_problem(26, 3, 0.4);
    const double h = ph.base_operator().weight();
    for (int trial = 0; trial < 5; ++trial) {
        const OrthoFrame f = oracle::random_frame(26, 3, h, sub_seed(70, trial));
        const BlockVector r = ph.residual(f);
        // tangency
        CHECK(gram(f.block(), r).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, block_norm(r)));
        // commutator identity [A_Phi, D_Phi] Phi evaluated densely
        const Eigen::MatrixXd amat = ph.gradient_operator(f).dense_matrix();
        const Eigen::MatrixXd d = h * (f.data() * f.data().transpose());
        const Eigen::MatrixXd comm = (amat * d - d * amat) * f.data();
        CHECK(std::sqrt(h) * (comm - r.data()).norm() <= 1e-12 * std::max(1.0, block_norm(r)));
        // residual is the tangent projection of A_Phi Phi
        const BlockVector proj =
            manifold::project_tangent(f, ph.gradient_block(f.block()));
        CHECK(std::sqrt(h) * (proj.data() - r.data()).norm() <= 1e-12 * std::max(1.0, block_norm(r)));
    }
}

TEST_CASE("residual norms: zero at solutions, dual norm scaling") {
    const SymmetricOperator a = build_diagonal_operator({1, 2, 4});
    const Problem p = Problem::simplified(a, 2);
    const OrthoFrame exact = coordinate_pair(3, 0, 1);
    const Preconditioner ident = Preconditioner::identity(3, 1.0, 1.0);
    const auto [l2z, dualz] = p.residual_norms(exact, ident);
    CHECK(l2z <= 1e-10);
    CHECK(dualz <= 1e-10);

    const Problem ph = harmonic_problem(32, 2, 0.0);
    const OrthoFrame f = oracle::random_frame(32, 2, ph.base_operator().weight(), 80);
    const Preconditioner b1 = Preconditioner::identity(32, ph.base_operator().weight(), 1.0);
    const auto [l2, dual] = ph.residual_norms(f, b1);
    CHECK(dual == doctest::Approx(l2).epsilon(1e-12));

    const double alpha = 3.7;
    const Preconditioner ba = Preconditioner::identity(32, ph.base_operator().weight(), alpha);
    const auto [l2a, duala] = ph.residual_norms(f, ba);
    CHECK(l2a == doctest::Approx(l2).epsilon(1e-14));
    CHECK(duala == doctest::Approx(dual / std::sqrt(alpha)).epsilon(1e-12));
}

TEST_CASE("toy_lda density is mixing invariant") {
    const Problem lda = harmonic_problem(30, 3, 0.9);
    const double h = lda.base_operator().weight();
    const OrthoFrame f = oracle::random_frame(30, 3, h, 90);
    const Eigen::MatrixXd u = oracle::random_orthogonal(3, 91);
    const Eigen::VectorXd n0 = lda.density(f.block());
    const Eigen::VectorXd n1 = lda.density(BlockVector(f.data() * u, h));
    CHECK((n0 - n1).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, n0.maxCoeff()));
}
