#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grassmin/diagnostics.hpp"
#include "grassmin/solvers.hpp"
#include "oracles.hpp"

using namespace grassmin;
using manifold::OrthoMethod;
namespace oracle = testing_oracles;
namespace diag = grassmin::diagnostics;

namespace {

struct Fixture {
    SymmetricOperator a;
    Problem p;
    Preconditioner b;
    diag::OracleReference ref;
};

Fixture harmonic_fixture(int n, int nsub, double kappa = 0.0) {
    const Grid1D g = build_grid(n, -10.0, 10.0);
    SymmetricOperator a = build_schrodinger_1d(g, [](double x) { return 0.5 * x * x; });
    Problem p = kappa == 0.0 ? Problem::simplified(a, nsub) : Problem::toy_lda(a, nsub, kappa);
    Preconditioner b = build_preconditioner(PrecondVariant::shifted, a, 1.0, 1.0);
    diag::OracleReference ref = diag::dense_eigensolve(a, nsub);
    return {std::move(a), std::move(p), std::move(b), std::move(ref)};
}

OrthoFrame perturbed_start(const diag::OracleReference& ref, double eps, std::uint64_t seed) {
    const double h = ref.frame.weight();
    BlockVector t = oracle::random_tangent(ref.frame, seed);
    const double nrm = block_norm(t);
    return manifold::orthonormalize(
        BlockVector(ref.frame.data() + (eps / nrm) * t.data(), h), OrthoMethod::cholesky);
}

OrthoFrame coordinate_frame1(int n, int col) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, 1);
    m(col, 0) = 1.0;
    return OrthoFrame(BlockVector(m, 1.0));
}

}  // namespace

TEST_CASE("steps fix exact invariant frames") {
    Fixture fx = harmonic_fixture(80, 3);
    const OrthoFrame& psi = fx.ref.frame;
    for (const auto method : {OrthoMethod::gram_schmidt, OrthoMethod::cholesky}) {
        CHECK(manifold::subspace_distance(step_alg1(fx.p, fx.b, psi, method), psi).procrustes <=
              1e-10);
        CHECK(manifold::subspace_distance(step_alg2(fx.p, fx.b, psi, method), psi).procrustes <=
              1e-10);
    }
    const OrthoFrame moved = step_alg3(fx.p, fx.b, psi, 1.0);
    CHECK(manifold::subspace_distance(moved, psi).procrustes <= 1e-10);
}

TEST_CASE("a non-minimal eigenvector is a stationary point of step_alg1") {
    const SymmetricOperator a = build_diagonal_operator({1, 2, 4});
    const Problem p = Problem::simplified(a, 1);
    const Preconditioner b = Preconditioner::identity(3, 1.0, 1.0);
    const OrthoFrame e2 = coordinate_frame1(3, 1);  // saddle, not the minimum
    const OrthoFrame next = step_alg1(p, b, e2, OrthoMethod::gram_schmidt);
    CHECK((next.data() - e2.data()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("one alg1 step reduces the subspace error on the harmonic fixture") {
    Fixture fx = harmonic_fixture(120, 4);
    const OrthoFrame start = perturbed_start(fx.ref, 1e-2, 7);
    const double e0 = diag::subspace_error(fx.ref, start);
    const OrthoFrame next = step_alg1(fx.p, fx.b, start, OrthoMethod::cholesky);
    CHECK(diag::subspace_error(fx.ref, next) < e0);
}

TEST_CASE("alg1 and alg2 coincide for the identity preconditioner") {
    Fixture fx = harmonic_fixture(60, 3);
    const Preconditioner ident = Preconditioner::identity(60, fx.a.weight(), 1.0);
    const OrthoFrame start = perturbed_start(fx.ref, 0.1, 8);
    const OrthoFrame s1 = step_alg1(fx.p, ident, start, OrthoMethod::cholesky);
    const OrthoFrame s2 = step_alg2(fx.p, ident, start, OrthoMethod::cholesky);
    CHECK(manifold::subspace_distance(s1, s2).procrustes <= 1e-12);
}

TEST_CASE("alg2 correction direction is tangent") {
    Fixture fx = harmonic_fixture(50, 2);
    const OrthoFrame start = perturbed_start(fx.ref, 0.2, 9);
    const BlockVector r = fx.p.residual(start);
    const BlockVector s(fx.b.apply_inverse_block(r.data()), r.weight());
    const BlockVector dir = manifold::project_tangent(start, s);
    CHECK(gram(start.block(), dir).cwiseAbs().maxCoeff() <= 1e-12 * block_norm(s));
}

TEST_CASE("alg3: small-step Taylor agreement and dense exponential oracle") {
    Fixture fx = harmonic_fixture(30, 3);
    const OrthoFrame phi = perturbed_start(fx.ref, 0.3, 10);
    const BlockVector r = fx.p.residual(phi);
    const BlockVector k =
        manifold::project_tangent(phi, BlockVector(fx.b.apply_inverse_block(r.data()), r.weight()));

    // quadratic shrinkage of the linearization defect
    double defect[2];
    int idx = 0;
    for (double t : {1e-2, 1e-3}) {
        const OrthoFrame stepped = step_alg3(fx.p, fx.b, phi, t);
        const Eigen::MatrixXd lin = phi.data() - t * k.data();
        defect[idx++] = std::sqrt(phi.weight()) * (stepped.data() - lin).norm();
    }
    CHECK(defect[1] <= defect[0] / 50.0);

    // dense exp(-t Xhat) Phi oracle
    const double h = phi.weight();
    const Eigen::MatrixXd x = h * (k.data() * phi.data().transpose());
    const Eigen::MatrixXd xhat = manifold::build_xhat_dense(phi, x);
    for (double t : {0.1, 1.0}) {
        const Eigen::MatrixXd want = oracle::dense_expm(-t * xhat) * phi.data();
        const OrthoFrame got = step_alg3(fx.p, fx.b, phi, t);
        CHECK(std::sqrt(h) * (got.data() - want).norm() <= 1e-10);
    }
}

TEST_CASE("solve: immediate convergence, loose tolerance, iteration cap semantics") {
    Fixture fx = harmonic_fixture(60, 3);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::alg1;
    cfg.tol = 1e-10;
    cfg.max_iters = 50;

    const SolveResult at_solution = solve(fx.p, fx.b, fx.ref.frame, cfg);
    CHECK(at_solution.record.status == SolveStatus::converged);
    CHECK(at_solution.record.rows.size() == 1);
    CHECK(at_solution.record.rows[0].iter == 0);

    SolverConfig loose = cfg;
    loose.tol = 1e3;
    const SolveResult quick = solve(fx.p, fx.b, perturbed_start(fx.ref, 0.2, 11), loose);
    CHECK(quick.record.status == SolveStatus::converged);
    CHECK(quick.record.rows.size() <= 2);

    SolverConfig one = cfg;
    one.max_iters = 1;
    one.tol = 1e-300;
    const SolveResult capped = solve(fx.p, fx.b, perturbed_start(fx.ref, 0.2, 12), one);
    CHECK(capped.record.status == SolveStatus::no_convergence);
    CHECK(capped.record.rows.size() == 1);
}

TEST_CASE("solve converges on the harmonic fixture for all three algorithms") {
    Fixture fx = harmonic_fixture(120, 4);
    const OrthoFrame start = perturbed_start(fx.ref, 0.1, 13);
    for (const Algorithm alg : {Algorithm::alg1, Algorithm::alg2, Algorithm::alg3}) {
        SolverConfig cfg;
        cfg.algorithm = alg;
        cfg.tol = 1e-10;
        cfg.max_iters = 500;
        const SolveResult res = solve(fx.p, fx.b, start, cfg);
        CHECK(res.record.status == SolveStatus::converged);
        CHECK(diag::subspace_error(fx.ref, res.frame) <= 1e-8);
        // fixed-point property at the converged frame
        const OrthoFrame again = step_alg1(fx.p, fx.b, res.frame, OrthoMethod::cholesky);
        CHECK(manifold::subspace_distance(again, res.frame).procrustes <= 1e-10);
    }
}

TEST_CASE("divergence guard flags energy blow-up") {
    const SymmetricOperator a = build_diagonal_operator({-1.0, 1e6, 2e6});
    const Problem p = Problem::simplified(a, 1);
    const Preconditioner b = Preconditioner::identity(3, 1.0, 1e-6);  // absurd step
    Eigen::MatrixXd m(3, 1);
    m << 0.995, 0.0995, 0.0;
    m /= m.norm();
    const OrthoFrame start{BlockVector(m, 1.0)};
    SolverConfig cfg;
    cfg.max_iters = 50;
    cfg.tol = 1e-12;
    const SolveResult res = solve(p, b, start, cfg);
    CHECK(res.record.status == SolveStatus::diverged);
}

TEST_CASE("armijo line search") {
    Fixture fx = harmonic_fixture(60, 2);
    const OrthoFrame far = perturbed_start(fx.ref, 0.4, 14);
    const BlockVector r = fx.p.residual(far);
    const BlockVector dir(-r.data(), r.weight());
    ArmijoParams params;
    const double t = armijo_search(fx.p, far, dir, params);
    const OrthoFrame moved = manifold::orthonormalize(
        BlockVector(far.data() + t * dir.data(), far.weight()), OrthoMethod::cholesky);
    CHECK(fx.p.energy(moved) < fx.p.energy(far));

    const BlockVector zero(Eigen::MatrixXd::Zero(60, 2), far.weight());
    CHECK_THROWS_AS(armijo_search(fx.p, fx.ref.frame, zero, params), NoDecrease);

    // 2x2 hand-checkable case: accepted t satisfies the Armijo inequality
    const SymmetricOperator a2 = build_diagonal_operator({1, 10});
    const Problem p2 = Problem::simplified(a2, 1);
    Eigen::MatrixXd m(2, 1);
    m << std::cos(0.7), std::sin(0.7);
    const OrthoFrame phi2{BlockVector(m, 1.0)};
    const BlockVector d2(-p2.residual(phi2).data(), 1.0);
    const double t2 = armijo_search(p2, phi2, d2, params);
    const double slope = 2.0 * pair_trace(p2.gradient_block(phi2.block()), d2);
    const OrthoFrame cand = manifold::orthonormalize(
        BlockVector(phi2.data() + t2 * d2.data(), 1.0), OrthoMethod::cholesky);
    CHECK(p2.energy(cand) <= p2.energy(phi2) + params.c1 * t2 * slope);
}

TEST_CASE("line-searched solve keeps energies non-increasing") {
    Fixture fx = harmonic_fixture(80, 3);
    for (const Algorithm alg : {Algorithm::alg1, Algorithm::alg3}) {
        SolverConfig cfg;
        cfg.algorithm = alg;
        cfg.tol = 1e-9;
        cfg.max_iters = 300;
        cfg.linesearch = ArmijoParams{};
        const SolveResult res = solve(fx.p, fx.b, perturbed_start(fx.ref, 0.2, 15), cfg);
        CHECK(res.record.status == SolveStatus::converged);
        for (std::size_t i = 1; i < res.record.rows.size(); ++i)
            CHECK(res.record.rows[i].energy <= res.record.rows[i - 1].energy + 1e-12);
    }
}

TEST_CASE("scf: kappa=0 finishes in one outer step and rejects simplified problems") {
    Fixture fx = harmonic_fixture(60, 2, 0.0);
    const Problem lda0 = Problem::toy_lda(fx.a, 2, 0.0);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::scf;
    cfg.tol = 1e-10;
    cfg.max_iters = 30;
    const SolveResult res = scf_solve(lda0, fx.b, perturbed_start(fx.ref, 0.1, 16), cfg);
    CHECK(res.record.status == SolveStatus::converged);
    CHECK(res.record.rows.size() <= 2);

    CHECK_THROWS_AS(scf_solve(fx.p, fx.b, fx.ref.frame, cfg), Error);
}

TEST_CASE("scf agrees with direct minimization on a toy_lda fixture") {
    Fixture fx = harmonic_fixture(120, 3, 0.5);
    const OrthoFrame start = perturbed_start(fx.ref, 0.15, 17);

    SolverConfig direct;
    direct.algorithm = Algorithm::alg1;
    direct.tol = 1e-10;
    direct.max_iters = 2000;
    const SolveResult dres = solve(fx.p, fx.b, start, direct);
    CHECK(dres.record.status == SolveStatus::converged);

    SolverConfig scf;
    scf.algorithm = Algorithm::scf;
    scf.tol = 1e-10;
    scf.max_iters = 100;
    const SolveResult sres = scf_solve(fx.p, fx.b, start, scf);
    CHECK(sres.record.status == SolveStatus::converged);

    CHECK(std::abs(fx.p.energy(dres.frame) - fx.p.energy(sres.frame)) <= 1e-8);
    CHECK(manifold::subspace_distance(dres.frame, sres.frame).procrustes <= 1e-6);
}

TEST_CASE("scf with a single inner step reproduces alg1 iterates") {
    Fixture fx = harmonic_fixture(100, 3, 0.5);
    const OrthoFrame start = perturbed_start(fx.ref, 0.15, 18);

    std::vector<OrthoFrame> scf_iterates;
    SolverConfig scf;
    scf.algorithm = Algorithm::scf;
    scf.tol = 1e-14;
    scf.max_iters = 20;
    scf.scf_inner = std::make_shared<SolverConfig>();
    scf.scf_inner->algorithm = Algorithm::alg1;
    scf.scf_inner->max_iters = 1;
    scf.scf_inner->tol = 1e-300;
    scf_solve(fx.p, fx.b, start, scf, {},
              [&](int, const OrthoFrame& f) { scf_iterates.push_back(f); });

    OrthoFrame phi = start;
    for (std::size_t i = 0; i < scf_iterates.size(); ++i) {
        phi = step_alg1(fx.p, fx.b, phi, OrthoMethod::cholesky);
        CHECK(manifold::subspace_distance(phi, scf_iterates[i]).procrustes <= 1e-10);
    }
    CHECK(scf_iterates.size() == 20);
}

TEST_CASE("optimal_alpha") {
    const auto [alpha, beta] = optimal_alpha(1, 2, 1, 2);
    CHECK(alpha == 1.25);
    CHECK(beta == 0.6);

    const auto [a1, b1] = optimal_alpha(1.0, 1.0, 1.0, 1.0);
    CHECK(a1 == doctest::Approx(1.0));
    CHECK(b1 == doctest::Approx(0.0));

    Rng rng(19);
    for (int i = 0; i < 1000; ++i) {
        const double g = 0.01 + rng.uniform();
        const double gg = g * (1.0 + 3 * rng.uniform());
        const double th = 0.01 + rng.uniform();
        const double tt = th * (1.0 + 3 * rng.uniform());
        const auto [al, be] = optimal_alpha(g, gg, th, tt);
        CHECK(al > 0);
        CHECK(be >= 0);
        CHECK(be < 1);
    }
    CHECK_THROWS_AS(optimal_alpha(2, 1, 1, 2), Error);
    CHECK_THROWS_AS(optimal_alpha(-1, 1, 1, 2), Error);
}
