#pragma once

#include "ftsyn/learner.hpp"

namespace ftsyn {

/// Generic deterministic branch-and-bound over a box with a per-coordinate
/// Lipschitz cone bound: on a region with center c and half-widths h, the
/// objective is bounded below by f(c) - sum_j w_j h_j. Regions are popped
/// lowest-bound-first and trisected along the coordinate with the largest
/// bound contribution.
struct BranchBoundResult {
    enum class Kind { Certificate, Counterexample, Undecided };
    Kind kind = Kind::Undecided;
    double best_value = 0.0;   // smallest evaluated objective value
    Vec best_point;            // its location
    double certified_bound = 0.0; // <= true global minimum (valid bound)
    long evaluations = 0;
};

struct BranchBoundOptions {
    double diam_tol_frac = 1e-4;
    long max_evals = 1000000;
    // Once a nonpositive value is found, keep refining toward the minimizer
    // for this many extra evaluations: deeper counterexamples let the
    // learner pin the violation itself rather than its periphery.
    long polish_evals = 30000;
};

BranchBoundResult branch_and_bound(const Vec& lo, const Vec& hi, const Vec& weights,
                                   const std::function<double(const Vec&)>& objective,
                                   const BranchBoundOptions& options);

/// One fault subproblem: search over (x in box) x (phi_i in [0,1]).
struct VerifierProblem {
    Mat Q, Y, Z;
    double tau = 0.999;
    double eta = 50.0;
    const NonlinearModel* model = nullptr;
    StatePolytope polytope;
    FaultSet faults;
    LipschitzBounds lipschitz;
    VerifierSettings settings;

    /// Scalar objective Lipschitz constant per Remark-1 arithmetic,
    /// eta * (kappa_A + kappa_B) on state coordinates.
    double L_ver_state() const { return eta * (lipschitz.kappa_A + lipschitz.kappa_B); }
    double L_ver_fault() const { return eta * lipschitz.kappa_B; }

    /// Per-coordinate cone weights actually used for pruning; tighter than
    /// the eta-based constant but still sound (uses the realized norms of
    /// Q, Y, Z instead of their a-priori bounds).
    Vec cone_weights(int subproblem) const;
};

struct VerifierResult {
    enum class Kind { Certificate, Counterexample, Undecided };
    Kind kind = Kind::Undecided;

    // Certificate
    double lambda_star = 0.0;
    double certified_bound = 0.0;
    bool lipschitz_certified = false;

    // Counterexample
    JacobianPair pair;
    double lambda_value = 0.0;
    int subproblem = -1;
    int sign_index = -1;

    double bound_gap = 0.0; // Undecided diagnostics
};

/// min over j of lambda_min(Xi(A(x,phi), B(x,phi), j)); ties by lowest j.
std::pair<double, int> verifier_objective(const VerifierProblem& problem, const Vec& x,
                                          double phi_i, int subproblem);

/// Lipschitz global minimization of the verifier objective on one
/// subproblem.
struct GlobalMinResult {
    double lambda_star = 0.0;
    Vec x;
    double phi_i = 1.0;
    int sign_index = -1;
    double certified_bound = 0.0;
    bool decided = false;   // false => budget/diameter exhaustion
    double bound_gap = 0.0;
    long evaluations = 0;
};

GlobalMinResult global_minimize(const VerifierProblem& problem, int subproblem);

/// Runs every fault subproblem (concurrently when settings.threads != 1)
/// and merges: worst counterexample wins, otherwise the smallest certified
/// bound.
VerifierResult verify(const LearnerSolution& candidate, const NonlinearModel& model,
                      const StatePolytope& polytope, const FaultSet& faults,
                      const CegisConfig& config, const LipschitzBounds& lipschitz);

} // namespace ftsyn
