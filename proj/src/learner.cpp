#include "ftsyn/learner.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace ftsyn {

SampleSet::AddResult SampleSet::add(const JacobianPair& pair, int iteration,
                                    bool counterexample) {
    if (!pair.A.allFinite() || !pair.B.allFinite())
        throw ContractError("SampleSet::add: non-finite jacobian pair");
    if (!entries_.empty() && min_distance_to(pair) < 1e-12)
        return AddResult::DuplicateRejected;
    entries_.push_back(Entry{pair, iteration, counterexample});
    return AddResult::Added;
}

double SampleSet::min_distance_to(const JacobianPair& pair) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Entry& e : entries_) {
        const double d = opnorm(e.pair.A - pair.A) + opnorm(e.pair.B - pair.B);
        best = std::min(best, d);
    }
    return best;
}

SdpProblem assemble_learner_sdp(const SampleSet& set, const CegisConfig& config,
                                const StatePolytope& polytope, const InputBox& box,
                                const SignMatrixSet& signs, const Mat* fixed_gain) {
    if (set.empty()) throw ContractError("assemble_learner_sdp: empty sample set");
    config.validate();
    box.validate();

    const int n = static_cast<int>(set.entries().front().pair.A.rows());
    const int p = static_cast<int>(set.entries().front().pair.B.cols());
    if (signs.p != p) throw AssemblyError("sign-matrix set does not match input dimension");
    if (polytope.dim() != n) throw AssemblyError("polytope does not match state dimension");
    if (box.dim() != p) throw AssemblyError("input box does not match input dimension");
    if (fixed_gain && (fixed_gain->rows() != p || fixed_gain->cols() != n))
        throw AssemblyError("fixed gain has wrong dimensions");

    SdpProblem problem;
    const int vQ = problem.add_variable("Q", n, n, true);
    const int vY = fixed_gain ? -1 : problem.add_variable("Y", p, n, false);
    const int vZ = problem.add_variable("Z", p, n, false);

    const Mat In = Mat::Identity(n, n);
    const Mat Ip = Mat::Identity(p, p);

    // Contraction certificates: Xi(A_i, B_i, E_j) - eps I >= 0.
    for (int i = 0; i < set.size(); ++i) {
        const JacobianPair& s = set.entries()[static_cast<size_t>(i)].pair;
        for (int j = 0; j < signs.count(); ++j) {
            SdpProblem::ConstraintBuilder cb(problem, 3 * n,
                                             "xi_s" + std::to_string(i) + "_j" + std::to_string(j));
            cb.add_constant(0, 0, -config.epsilon * Mat::Identity(3 * n, 3 * n));
            cb.add_constant(n, n, (1.0 - config.tau) * In);
            cb.add_variable_block(0, 0, vQ, config.tau * In, In);
            cb.add_variable_block(2 * n, 2 * n, vQ, In, In);
            const Mat BEj = s.B * signs.matrix(j);
            const Mat BEjm = s.B * signs.complement(j);
            if (fixed_gain) {
                cb.add_variable_block(2 * n, 0, vQ, s.A + BEj * (*fixed_gain), In);
            } else {
                cb.add_variable_block(2 * n, 0, vQ, s.A, In);
                cb.add_variable_block(2 * n, 0, vY, BEj, In);
            }
            cb.add_variable_block(2 * n, 0, vZ, BEjm, In);
            cb.finish();
        }
    }

    // State constraints: [[1, l_i Q], [Q l_i', Q]] >= 0.
    for (int r = 0; r < polytope.rows(); ++r) {
        SdpProblem::ConstraintBuilder cb(problem, n + 1, "state_" + std::to_string(r));
        cb.add_constant(0, 0, Mat::Constant(1, 1, 1.0));
        cb.add_variable_block(0, 1, vQ, polytope.L.row(r), In);
        cb.add_variable_block(1, 1, vQ, In, In);
        cb.finish();
    }

    // Input constraints: [[u_i^2, z_i], [z_i', Q]] >= 0, z_i the i-th row of Z.
    for (int i = 0; i < p; ++i) {
        SdpProblem::ConstraintBuilder cb(problem, n + 1, "input_" + std::to_string(i));
        cb.add_constant(0, 0, Mat::Constant(1, 1, box.u_max(i) * box.u_max(i)));
        cb.add_variable_block(0, 1, vZ, Ip.row(i), In);
        cb.add_variable_block(1, 1, vQ, In, In);
        cb.finish();
    }

    // Q <= eta I.
    {
        SdpProblem::ConstraintBuilder cb(problem, n, "eta_bound");
        cb.add_constant(0, 0, config.eta * In);
        cb.add_variable_block(0, 0, vQ, -In, In);
        cb.finish();
    }

    // Spectral-norm boxes ||Y|| <= eta/2, ||Z|| <= eta/2 as LMI blocks.
    {
        SdpProblem::ConstraintBuilder cb(problem, p + n, "y_norm");
        Mat half = Mat::Zero(p + n, p + n);
        half.topLeftCorner(p, p) = (config.eta / 2.0) * Ip;
        half.bottomRightCorner(n, n) = (config.eta / 2.0) * In;
        cb.add_constant(0, 0, half);
        if (fixed_gain)
            cb.add_variable_block(0, p, vQ, *fixed_gain, In);
        else
            cb.add_variable_block(0, p, vY, Ip, In);
        cb.finish();
    }
    {
        SdpProblem::ConstraintBuilder cb(problem, p + n, "z_norm");
        Mat half = Mat::Zero(p + n, p + n);
        half.topLeftCorner(p, p) = (config.eta / 2.0) * Ip;
        half.bottomRightCorner(n, n) = (config.eta / 2.0) * In;
        cb.add_constant(0, 0, half);
        cb.add_variable_block(0, p, vZ, Ip, In);
        cb.finish();
    }

    for (int i = 0; i < n; ++i) problem.add_objective_term(problem.scalar_index(vQ, i, i), 1.0);
    return problem;
}

namespace {

void re_verify_solution(const LearnerSolution& sol, const SampleSet& set,
                        const CegisConfig& config, const SignMatrixSet& signs,
                        double tol) {
    const int n = static_cast<int>(sol.Q.rows());
    const double slack = 10.0 * tol;
    for (const auto& e : set.entries())
        for (int j = 0; j < signs.count(); ++j) {
            const Mat Xi = build_xi(sol.Q, sol.Y, sol.Z, e.pair.A, e.pair.B,
                                    signs.diag(j), config.tau);
            if (min_eig(Xi - config.epsilon * Mat::Identity(3 * n, 3 * n)) < -slack)
                throw NumericalError("learner solution violates a sample certificate");
        }
    if (min_eig(config.eta * Mat::Identity(n, n) - sol.Q) < -slack)
        throw NumericalError("learner solution violates Q <= eta I");
    if (opnorm(sol.Y) > config.eta / 2.0 + slack || opnorm(sol.Z) > config.eta / 2.0 + slack)
        throw NumericalError("learner solution violates the spectral-norm bounds");
}

} // namespace

LearnOutcome learn(const SampleSet& set, const CegisConfig& config,
                   const StatePolytope& polytope, const InputBox& box,
                   const Mat* fixed_gain) {
    config.validate();
    if (set.empty()) throw ContractError("learn: empty sample set");
    const int p = static_cast<int>(set.entries().front().pair.B.cols());
    const SignMatrixSet signs = enumerate_sign_matrices(p);
    SdpProblem problem = assemble_learner_sdp(set, config, polytope, box, signs, fixed_gain);

    double tol = config.sdp_tol;
    SdpSolution sol = solve_sdp(problem, tol);
    if (sol.status.kind == SdpStatus::Kind::NumericalFailure) {
        tol = std::max(tol * 100.0, 1e-7);
        sol = solve_sdp(problem, tol);
        if (sol.status.kind == SdpStatus::Kind::NumericalFailure)
            throw NumericalError("learner SDP failed numerically: " + sol.status.message);
    }
    LearnOutcome out;
    if (sol.status.kind == SdpStatus::Kind::Infeasible) {
        out.kind = LearnOutcome::Kind::Infeasible;
        out.message = sol.status.message;
        return out;
    }
    if (sol.status.kind != SdpStatus::Kind::Optimal)
        throw NumericalError("learner SDP: unexpected solver status");

    out.kind = LearnOutcome::Kind::Optimal;
    out.solution.Q = problem.value(0, sol.theta);
    if (fixed_gain) {
        out.solution.Y = (*fixed_gain) * out.solution.Q;
        out.solution.Z = problem.value(1, sol.theta);
    } else {
        out.solution.Y = problem.value(1, sol.theta);
        out.solution.Z = problem.value(2, sol.theta);
    }
    out.solution.objective = out.solution.Q.trace();
    re_verify_solution(out.solution, set, config, signs, tol);
    return out;
}

Controller extract_controller(const LearnerSolution& sol, const InputBox& box) {
    const int n = static_cast<int>(sol.Q.rows());
    Eigen::SelfAdjointEigenSolver<Mat> es(sol.Q);
    if (es.info() != Eigen::Success || es.eigenvalues()(0) <= 1e-10)
        throw NumericalError(
            "extract_controller: Q is near-singular; consider a larger epsilon");
    Controller ctrl;
    ctrl.Q = 0.5 * (sol.Q + sol.Q.transpose());
    Mat P = es.eigenvectors() *
            es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    ctrl.P = 0.5 * (P + P.transpose());
    ctrl.K = sol.Y * ctrl.P;
    ctrl.H = sol.Z * ctrl.P;
    ctrl.u_max = box;
    if ((ctrl.P * ctrl.Q - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-6)
        throw NumericalError("extract_controller: P*Q deviates from identity");
    return ctrl;
}

} // namespace ftsyn
