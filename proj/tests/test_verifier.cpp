#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ftsyn/bench.hpp"
#include "ftsyn/verifier.hpp"

#include <cmath>

using namespace ftsyn;

namespace {

Vec vec1(double v) { return Vec::Constant(1, v); }

// Scalar plant x' = a x + b u with a single fault-scaled actuator.
struct ScalarProblem {
    NonlinearModel model;
    StatePolytope poly;
    FaultSet faults{1};
    CegisConfig config;

    ScalarProblem(double a, double b)
        : model(linear_test(Mat::Constant(1, 1, a), Mat::Constant(1, 1, b), 0.01)),
          poly(StatePolytope::from_box(vec1(-2.0), vec1(2.0))) {}

    VerifierProblem verifier(double q, double y, double z) const {
        VerifierProblem vp;
        vp.Q = Mat::Constant(1, 1, q);
        vp.Y = Mat::Constant(1, 1, y);
        vp.Z = Mat::Constant(1, 1, z);
        vp.tau = config.tau;
        vp.eta = config.eta;
        vp.model = &model;
        vp.polytope = poly;
        vp.faults = faults;
        vp.lipschitz = *model.lipschitz;
        vp.settings = config.verifier;
        return vp;
    }
};

} // namespace

TEST_CASE("branch and bound finds the dip of a vee function") {
    // min |x - 0.3| - 0.1 on [0, 1], Lipschitz constant 1: negative on
    // (0.2, 0.4), so a counterexample must land there.
    auto f = [](const Vec& x) { return std::abs(x(0) - 0.3) - 0.1; };
    BranchBoundOptions opts;
    BranchBoundResult res = branch_and_bound(vec1(0.0), vec1(1.0), vec1(1.0), f, opts);
    CHECK(res.kind == BranchBoundResult::Kind::Counterexample);
    CHECK(res.best_value <= 0.0);
    CHECK(res.best_point(0) > 0.2);
    CHECK(res.best_point(0) < 0.4);
    // The refinement phase drives the point close to the true minimizer.
    CHECK(std::abs(res.best_point(0) - 0.3) < 0.02);
}

TEST_CASE("a positive constant certifies in a single evaluation") {
    auto f = [](const Vec&) { return 0.001; };
    BranchBoundOptions opts;
    // Zero cone weight: the center evaluation bounds the whole box.
    BranchBoundResult res =
        branch_and_bound(vec1(0.0), vec1(1.0), vec1(0.0), f, opts);
    CHECK(res.kind == BranchBoundResult::Kind::Certificate);
    CHECK(res.evaluations == 1);
    CHECK(res.certified_bound == doctest::Approx(0.001));
}

TEST_CASE("certified bounds never exceed the true minimum") {
    auto f = [](const Vec& x) { return x(0) * x(0) + 0.6 * std::sin(5.0 * x(0)) + 0.9; };
    // Lipschitz constant on [-2,2]: |2x| + 3 <= 7.
    BranchBoundOptions opts;
    BranchBoundResult res = branch_and_bound(vec1(-2.0), vec1(2.0), vec1(7.0), f, opts);
    REQUIRE(res.kind == BranchBoundResult::Kind::Certificate);
    double grid_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 100000; ++k)
        grid_min = std::min(grid_min, f(vec1(-2.0 + 4.0 * k / 100000.0)));
    CHECK(res.certified_bound <= grid_min + 1e-12);
    CHECK(res.best_value >= grid_min - 1e-12);
    CHECK(res.certified_bound > 0.0);
}

TEST_CASE("a tiny budget yields an undecided result with a gap") {
    auto f = [](const Vec& x) { return 0.01 + std::abs(std::sin(50.0 * x(0))); };
    BranchBoundOptions opts;
    opts.max_evals = 5;
    BranchBoundResult res = branch_and_bound(vec1(0.0), vec1(1.0), vec1(50.0), f, opts);
    CHECK(res.kind == BranchBoundResult::Kind::Undecided);
    CHECK(res.certified_bound < res.best_value);
}

TEST_CASE("branch and bound is deterministic") {
    auto f = [](const Vec& x) {
        return std::cos(7.0 * x(0)) * std::sin(3.0 * x(1)) + 1.2;
    };
    Vec lo = Vec::Constant(2, -1.0), hi = Vec::Constant(2, 1.0);
    Vec w = Vec::Constant(2, 10.0);
    BranchBoundOptions opts;
    BranchBoundResult a = branch_and_bound(lo, hi, w, f, opts);
    BranchBoundResult b = branch_and_bound(lo, hi, w, f, opts);
    CHECK(a.kind == b.kind);
    CHECK(a.evaluations == b.evaluations);
    CHECK(a.best_value == b.best_value);
    CHECK(a.best_point.isApprox(b.best_point, 0.0));
    CHECK(a.certified_bound == b.certified_bound);
}

TEST_CASE("branch and bound validates its inputs") {
    auto f = [](const Vec&) { return 1.0; };
    BranchBoundOptions opts;
    CHECK_THROWS_AS(branch_and_bound(vec1(1.0), vec1(0.0), vec1(1.0), f, opts),
                    ContractError);
    CHECK_THROWS_AS(branch_and_bound(vec1(0.0), vec1(1.0), vec1(-1.0), f, opts),
                    ContractError);
    CHECK_THROWS_AS(branch_and_bound(vec1(0.0), Vec::Constant(2, 1.0), vec1(1.0), f, opts),
                    ContractError);
}

TEST_CASE("verifier objective equals the direct block-matrix evaluation") {
    ScalarProblem sp(-2.0, 1.0);
    VerifierProblem vp = sp.verifier(4.0, -0.5, -0.25);
    SignMatrixSet signs = enumerate_sign_matrices(1);
    for (double x : {-1.5, 0.0, 0.7}) {
        for (double phi : {0.0, 0.4, 1.0}) {
            auto [lam, j] = verifier_objective(vp, vec1(x), phi, 0);
            JacobianPair jp = linearize(sp.model, vec1(x), sp.faults.fault_vector(0, phi));
            double expected = std::numeric_limits<double>::infinity();
            for (int k = 0; k < signs.count(); ++k)
                expected = std::min(expected, min_eig(build_xi(vp.Q, vp.Y, vp.Z, jp.A, jp.B,
                                                               signs.diag(k), vp.tau)));
            CHECK(lam == doctest::Approx(expected).epsilon(1e-10));
            CHECK(j >= 0);
            CHECK(j < signs.count());
        }
    }
}

TEST_CASE("a contracting open-loop plant earns a certificate at 1 - tau") {
    // Strong drag, zero feedback: the certificate value saturates at the
    // decoupled middle-block eigenvalue 1 - tau everywhere.
    ScalarProblem sp(-2.0, 1.0);
    LearnerSolution cand;
    cand.Q = Mat::Constant(1, 1, 4.0);
    cand.Y = Mat::Zero(1, 1);
    cand.Z = Mat::Zero(1, 1);
    VerifierResult res = verify(cand, sp.model, sp.poly, sp.faults, sp.config,
                                *sp.model.lipschitz);
    REQUIRE(res.kind == VerifierResult::Kind::Certificate);
    CHECK(res.lambda_star == doctest::Approx(1.0 - sp.config.tau).epsilon(1e-9));
    CHECK(res.certified_bound > 0.0);
    CHECK(res.certified_bound <= res.lambda_star);
    CHECK(res.lipschitz_certified); // analytic bounds on the linear test model
}

TEST_CASE("an expanding plant stabilized only by feedback fails at total fault") {
    // a > 0 open loop; feedback stabilizes phi = 1 but u is scaled by phi,
    // so phi near 0 must surface as a counterexample.
    ScalarProblem sp(0.5, 1.0);
    LearnerSolution cand;
    cand.Q = Mat::Constant(1, 1, 1.0);
    cand.Y = Mat::Constant(1, 1, -1.0);
    cand.Z = Mat::Constant(1, 1, -1.0);
    VerifierResult res = verify(cand, sp.model, sp.poly, sp.faults, sp.config,
                                *sp.model.lipschitz);
    REQUIRE(res.kind == VerifierResult::Kind::Counterexample);
    CHECK(res.lambda_value <= 0.0);
    CHECK(res.subproblem == 0);
    CHECK(res.pair.phi0(0) == doctest::Approx(res.pair.phi0(0))); // finite
    // The violation requires a deep fault: the certificate holds at
    // phi = 1, so the counterexample efficiency is strictly reduced.
    CHECK(res.pair.phi0(0) < 1.0);
    // Returned pair is the linearization at the reported point.
    JacobianPair jp = linearize(sp.model, res.pair.x0, res.pair.phi0);
    CHECK((jp.A - res.pair.A).norm() == doctest::Approx(0.0));
    CHECK((jp.B - res.pair.B).norm() == doctest::Approx(0.0));
}

TEST_CASE("cone weights use the exact actuation structure when present") {
    ScalarProblem sp(-1.0, 2.0);
    VerifierProblem vp = sp.verifier(1.0, -0.5, -0.25);
    Vec w = vp.cone_weights(0);
    REQUIRE(w.size() == 2);
    // Linear plant: no state dependence at all.
    CHECK(w(0) == doctest::Approx(0.0));
    // Fault coordinate: ||dB col|| * max(||Y row||, ||Z row||)
    //   = dt * |b| * max(|y|, |z|) = 0.01 * 2 * 0.5.
    CHECK(w(1) == doctest::Approx(0.01 * 2.0 * 0.5));
    // Dropping the exact structure falls back to the scalar constants and
    // can only grow the weights.
    VerifierProblem coarse = vp;
    coarse.lipschitz.dA_coord.clear();
    coarse.lipschitz.dB_fault_col = Mat();
    Vec wc = coarse.cone_weights(0);
    CHECK(wc(0) >= w(0) - 1e-15);
    CHECK(wc(1) >= w(1) - 1e-15);
}

TEST_CASE("per-subproblem minimization reports its search point") {
    ScalarProblem sp(-2.0, 1.0);
    VerifierProblem vp = sp.verifier(4.0, 0.0, 0.0);
    GlobalMinResult res = global_minimize(vp, 0);
    CHECK(res.decided);
    CHECK(res.lambda_star == doctest::Approx(1.0 - vp.tau).epsilon(1e-9));
    CHECK(res.phi_i >= 0.0);
    CHECK(res.phi_i <= 1.0);
    CHECK(vp.polytope.box_contains(res.x));
    CHECK(res.evaluations >= 1);
    CHECK_THROWS_AS(global_minimize(vp, 1), ContractError);
}

TEST_CASE("multi-threaded and sequential verification agree") {
    AuvParams params = auv2_default_params();
    NonlinearModel mdl = auv2(params, 0.01);
    StatePolytope poly =
        StatePolytope::from_box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0));
    LearnerSolution cand;
    cand.Q = Mat::Identity(2, 2);
    cand.Y = Mat::Zero(3, 2);
    cand.Z = Mat::Zero(3, 2);
    CegisConfig cfg;
    cfg.verifier.max_evals = 20000;
    CegisConfig seq = cfg;
    seq.verifier.threads = 1;
    VerifierResult par = verify(cand, mdl, poly, FaultSet{3}, cfg, *mdl.lipschitz);
    VerifierResult one = verify(cand, mdl, poly, FaultSet{3}, seq, *mdl.lipschitz);
    CHECK(par.kind == one.kind);
    CHECK(par.lambda_star == one.lambda_star);
    CHECK(par.certified_bound == one.certified_bound);
}
