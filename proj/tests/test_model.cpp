#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ftsyn/bench.hpp"
#include "ftsyn/model.hpp"

#include <cmath>

using namespace ftsyn;

namespace {

Mat random_mat(int rows, int cols, unsigned seed) {
    std::srand(seed);
    return Mat::Random(rows, cols);
}

} // namespace

TEST_CASE("box polytope has one scaled face row per bound") {
    Vec lo(2), hi(2);
    lo << -2.0, -0.5;
    hi << 1.0, 4.0;
    StatePolytope poly = StatePolytope::from_box(lo, hi);
    CHECK(poly.rows() == 4);
    CHECK(poly.dim() == 2);
    // Every row r satisfies r * x == 1 exactly on its face.
    Vec face(2);
    face << 1.0, 0.0;
    CHECK(poly.L.row(0).dot(face) == doctest::Approx(1.0));
    face << -2.0, 0.0;
    CHECK(poly.L.row(1).dot(face) == doctest::Approx(1.0));
    face << 0.0, 4.0;
    CHECK(poly.L.row(2).dot(face) == doctest::Approx(1.0));
    face << 0.0, -0.5;
    CHECK(poly.L.row(3).dot(face) == doctest::Approx(1.0));

    Vec inside(2), outside(2);
    inside << 0.5, 3.9;
    outside << 1.2, 0.0;
    CHECK(poly.box_contains(inside));
    CHECK(!poly.box_contains(outside));
    // Interior points satisfy L x <= 1 strictly.
    CHECK(((poly.L * inside).array() < 1.0).all());
}

TEST_CASE("box polytope rejects bad boxes") {
    Vec lo(1), hi(1);
    lo << 1.0;
    hi << 2.0; // origin outside
    CHECK_THROWS_AS(StatePolytope::from_box(lo, hi), ConfigError);
    lo << 3.0;
    hi << 2.0; // empty
    CHECK_THROWS_AS(StatePolytope::from_box(lo, hi), ConfigError);
}

TEST_CASE("input box rejects nonpositive thresholds") {
    InputBox box;
    box.u_max = Vec::Constant(2, 1.0);
    CHECK_NOTHROW(box.validate());
    box.u_max(1) = 0.0;
    CHECK_THROWS_AS(box.validate(), ConfigError);
}

TEST_CASE("fault set frees exactly one efficiency entry") {
    FaultSet faults{3};
    CHECK(faults.subproblems() == 3);
    Vec phi = faults.fault_vector(1, 0.25);
    CHECK(phi(0) == 1.0);
    CHECK(phi(1) == 0.25);
    CHECK(phi(2) == 1.0);
    CHECK(FaultSet::nominal(3).isApprox(Vec::Ones(3)));
}

TEST_CASE("linearization of a linear plant is exact") {
    const double dt = 0.01;
    Mat Ac = random_mat(3, 3, 7);
    Mat Bc = random_mat(3, 2, 8);
    NonlinearModel mdl = linear_test(Ac, Bc, dt);
    Vec x = random_mat(3, 1, 9);
    Vec phi(2);
    phi << 1.0, 0.4;
    JacobianPair jp = linearize(mdl, x, phi);
    CHECK((jp.A - (Mat::Identity(3, 3) + dt * Ac)).norm() == doctest::Approx(0.0));
    CHECK((jp.B - dt * Bc * phi.asDiagonal()).norm() == doctest::Approx(0.0));
    CHECK(jp.x0.isApprox(x));
    CHECK(jp.phi0.isApprox(phi));
}

TEST_CASE("actuation matrix is linear in the efficiency vector") {
    NonlinearModel mdl = auv2(auv2_default_params(), 0.01);
    Vec x(2);
    x << 0.3, -0.7;
    Vec pa(3), pb(3);
    pa << 1.0, 0.2, 0.5;
    pb << 0.1, 0.9, 0.3;
    Mat ga = mdl.g(x, pa);
    Mat gb = mdl.g(x, pb);
    Mat gsum = mdl.g(x, Vec(pa + pb));
    CHECK((ga + gb - gsum).norm() < 1e-14);
    Mat gscaled = mdl.g(x, Vec(2.5 * pa));
    CHECK((2.5 * ga - gscaled).norm() < 1e-14);
    // Column i depends only on phi_i.
    Vec pc = pa;
    pc(0) = 0.77;
    CHECK((mdl.g(x, pc).rightCols(2) - ga.rightCols(2)).norm() == 0.0);
}

TEST_CASE("one Euler step has quadratic local truncation error") {
    AuvParams params = auv2_default_params();
    Vec x0(2);
    x0 << 0.4, -0.2;
    Vec u(3);
    u << 10.0, -5.0, 3.0;
    Vec phi = Vec::Ones(3);

    // High-resolution reference for the same flow.
    auto flow = [&](double h, int substeps) {
        NonlinearModel fine = auv2(params, h / substeps);
        Vec x = x0;
        for (int k = 0; k < substeps; ++k) x = step(fine, x, u, phi);
        return x;
    };
    const double h = 0.2;
    Vec ref = flow(h, 20000);
    double e_full = (step(auv2(params, h), x0, u, phi) - ref).norm();
    Vec half = step(auv2(params, h / 2), x0, u, phi);
    half = step(auv2(params, h / 2), half, u, phi);
    double e_half = (half - ref).norm();
    // Halving the step should roughly halve the global error (first order),
    // i.e. the ratio lands well inside [1.5, 2.5].
    CHECK(e_full / e_half > 1.5);
    CHECK(e_full / e_half < 2.5);
}

TEST_CASE("step reports divergence via a typed error") {
    NonlinearModel mdl;
    mdl.name = "blow-up";
    mdl.n = 1;
    mdl.p = 1;
    mdl.dt = 1.0;
    mdl.f = [](const Vec& x) { return Vec(x * std::numeric_limits<double>::infinity()); };
    mdl.g = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
    mdl.df_dx = [](const Vec&) { return Mat::Zero(1, 1); };
    Vec x = Vec::Ones(1);
    CHECK_THROWS_AS(step(mdl, x, Vec::Zero(1), Vec::Ones(1), 5), DivergenceError);
    try {
        step(mdl, x, Vec::Zero(1), Vec::Ones(1), 5);
    } catch (const DivergenceError& e) {
        CHECK(e.step == 5);
    }
}

TEST_CASE("sampled Lipschitz estimate is deterministic and conservative on a linear plant") {
    Mat Ac(2, 2), Bc(2, 2);
    Ac << 0.0, 1.0, -2.0, -0.5;
    Bc << 1.0, 0.0, 0.3, 1.0;
    NonlinearModel mdl = linear_test(Ac, Bc, 0.01);
    StatePolytope poly = StatePolytope::from_box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
    FaultSet faults{2};

    LipschitzBounds a = estimate_lipschitz(mdl, poly, faults, 60, 2.0, 1);
    LipschitzBounds b = estimate_lipschitz(mdl, poly, faults, 60, 2.0, 1);
    CHECK(a.kappa_A == b.kappa_A);
    CHECK(a.kappa_B == b.kappa_B);
    CHECK(a.kappa_A_coord.isApprox(b.kappa_A_coord));
    CHECK(a.kappa_B_fault.isApprox(b.kappa_B_fault));
    CHECK(!a.certified);

    // A is constant, so its Jacobian Lipschitz constant is zero; B changes
    // with phi at exactly rate dt*||column||.
    CHECK(a.kappa_A == doctest::Approx(0.0));
    for (int i = 0; i < 2; ++i) {
        const double exact = 0.01 * Bc.col(i).norm();
        CHECK(a.kappa_B_fault(i) >= exact - 1e-12);      // never below truth
        CHECK(a.kappa_B_fault(i) <= 2.0 * exact + 1e-12); // safety factor 2
    }
}

TEST_CASE("sampled Lipschitz estimate brackets the analytic constants on the surge/yaw model") {
    AuvParams params = auv2_default_params();
    NonlinearModel mdl = auv2(params, 0.01);
    StatePolytope poly = StatePolytope::from_box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0));
    LipschitzBounds sampled = estimate_lipschitz(mdl, poly, FaultSet{3}, 120, 2.0, 3);
    LipschitzBounds exact = auv2_lipschitz(params, 0.01);
    REQUIRE(exact.certified);
    for (int c = 0; c < 2; ++c) {
        // Safety factor 2 on a sampled ratio of an affine map stays within
        // [1, 2] times the true constant.
        CHECK(sampled.kappa_A_coord(c) <= 2.0 * exact.kappa_A_coord(c) + 1e-12);
        CHECK(sampled.kappa_A_coord(c) >= 0.5 * exact.kappa_A_coord(c));
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(sampled.kappa_B_fault(i) >= exact.kappa_B_fault(i) - 1e-12);
        CHECK(sampled.kappa_B_fault(i) <= 2.0 * exact.kappa_B_fault(i) + 1e-12);
    }
}

TEST_CASE("lipschitz accessors fall back to scalars when vectors are absent") {
    LipschitzBounds lb;
    lb.kappa_A = 3.0;
    lb.kappa_B = 4.0;
    CHECK(lb.kappa_A_for(0) == 3.0);
    CHECK(lb.kappa_B_for_state(1) == 4.0);
    CHECK(lb.kappa_B_for_fault(2) == 4.0);
    lb.kappa_A_coord = Vec::Constant(3, 0.5);
    CHECK(lb.kappa_A_for(1) == 0.5);
}
