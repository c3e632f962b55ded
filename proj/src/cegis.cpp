#include "ftsyn/cegis.hpp"

#include "ftsyn/errors.hpp"

#include <chrono>

namespace ftsyn {

JacobianPair default_initial_sample(const NonlinearModel& model, const FaultSet& faults) {
    return linearize(model, Vec::Zero(model.n), FaultSet::nominal(faults.p));
}

namespace {

// Shared loop body for synthesis (fixed_gain == nullptr) and the
// region-of-attraction computation for a given gain.
struct LoopResult {
    CegisOutcome::Kind kind = CegisOutcome::Kind::Budget;
    LearnerSolution solution;
    Certificate certificate;
    bool has_solution = false;
    int iterations = 0;
    std::vector<IterationRecord> history;
    std::string message;
};

LoopResult run_loop(const NonlinearModel& model, const StatePolytope& polytope,
                    const InputBox& box, const FaultSet& faults, const CegisConfig& config,
                    const std::optional<JacobianPair>& initial_sample, const Mat* fixed_gain) {
    config.validate();
    box.validate();
    if (box.dim() != faults.p)
        throw ContractError("input box dimension does not match the fault set");
    if (polytope.dim() != model.n)
        throw ContractError("state polytope dimension does not match the model");
    if (faults.p != model.p)
        throw ContractError("fault set size does not match the model input count");

    LipschitzBounds lipschitz = model.lipschitz.has_value()
                                    ? *model.lipschitz
                                    : estimate_lipschitz(model, polytope, faults);

    SampleSet samples;
    JacobianPair seed =
        initial_sample.has_value() ? *initial_sample : default_initial_sample(model, faults);
    samples.add(seed, 0, false);

    LoopResult out;
    int consecutive_duplicates = 0;

    for (int k = 1; k <= config.max_iterations; ++k) {
        auto t0 = std::chrono::steady_clock::now();
        IterationRecord rec;
        rec.iteration = k;
        rec.sample_count = samples.size();

        LearnOutcome lo = learn(samples, config, polytope, box, fixed_gain);
        if (lo.kind == LearnOutcome::Kind::Infeasible) {
            out.kind = CegisOutcome::Kind::Infeasible;
            out.iterations = k;
            out.message = lo.message.empty() ? "learner reported infeasibility" : lo.message;
            rec.duration_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.history.push_back(std::move(rec));
            return out;
        }
        rec.trace_Q = lo.solution.objective;

        VerifierResult vr = verify(lo.solution, model, polytope, faults, config, lipschitz);
        rec.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        if (vr.kind == VerifierResult::Kind::Certificate) {
            rec.certified = true;
            rec.lambda_star = vr.lambda_star;
            out.history.push_back(std::move(rec));
            out.kind = CegisOutcome::Kind::Converged;
            out.solution = lo.solution;
            out.has_solution = true;
            out.certificate.lambda_star = vr.lambda_star;
            out.certificate.margin = vr.certified_bound;
            out.certificate.lipschitz_certified = vr.lipschitz_certified;
            out.iterations = k;
            return out;
        }
        if (vr.kind == VerifierResult::Kind::Undecided) {
            rec.lambda_star = vr.lambda_star;
            out.history.push_back(std::move(rec));
            out.kind = CegisOutcome::Kind::Undecided;
            out.iterations = k;
            out.message = "verifier budget exhausted with bound gap " +
                          std::to_string(vr.bound_gap);
            return out;
        }

        rec.lambda_star = vr.lambda_value;
        rec.ce_subproblem = vr.subproblem;
        rec.ce_x = vr.pair.x0;
        rec.ce_phi = vr.pair.phi0(vr.subproblem);
        out.history.push_back(std::move(rec));

        if (samples.add(vr.pair, k, true) == SampleSet::AddResult::DuplicateRejected) {
            if (++consecutive_duplicates >= 2) {
                out.kind = CegisOutcome::Kind::Stalled;
                out.iterations = k;
                out.message =
                    "verifier returned an already-known counterexample twice in a row "
                    "(lambda = " +
                    std::to_string(vr.lambda_value) +
                    "); the loop cannot make progress at this tolerance";
                return out;
            }
        } else {
            consecutive_duplicates = 0;
        }
        out.iterations = k;
    }

    out.kind = CegisOutcome::Kind::Budget;
    out.message = "iteration budget exhausted without certificate or infeasibility";
    return out;
}

} // namespace

CegisOutcome run(const NonlinearModel& model, const StatePolytope& polytope,
                 const InputBox& box, const FaultSet& faults, const CegisConfig& config,
                 const std::optional<JacobianPair>& initial_sample) {
    LoopResult lr = run_loop(model, polytope, box, faults, config, initial_sample, nullptr);
    CegisOutcome out;
    out.kind = lr.kind;
    out.iterations = lr.iterations;
    out.history = std::move(lr.history);
    out.message = std::move(lr.message);
    if (lr.kind == CegisOutcome::Kind::Converged) {
        out.controller = extract_controller(lr.solution, box);
        out.controller.has_certificate = true;
        out.controller.certificate = lr.certificate;
    }
    return out;
}

RoaResult roa_for_fixed_gain(const Mat& K, const NonlinearModel& model,
                             const StatePolytope& polytope, const InputBox& box,
                             const FaultSet& faults, const CegisConfig& config) {
    if (K.rows() != model.p || K.cols() != model.n)
        throw ContractError("fixed gain must be p x n");
    LoopResult lr = run_loop(model, polytope, box, faults, config, std::nullopt, &K);
    RoaResult out;
    switch (lr.kind) {
    case CegisOutcome::Kind::Converged: out.kind = RoaResult::Kind::Converged; break;
    case CegisOutcome::Kind::Infeasible: out.kind = RoaResult::Kind::Infeasible; break;
    case CegisOutcome::Kind::Budget: out.kind = RoaResult::Kind::Budget; break;
    case CegisOutcome::Kind::Undecided: out.kind = RoaResult::Kind::Undecided; break;
    case CegisOutcome::Kind::Stalled: out.kind = RoaResult::Kind::Stalled; break;
    }
    out.iterations = lr.iterations;
    out.message = std::move(lr.message);
    if (lr.has_solution) {
        out.Q = lr.solution.Q;
        out.trace_Q = lr.solution.Q.trace();
    }
    return out;
}

} // namespace ftsyn
