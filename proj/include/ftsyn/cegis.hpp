#pragma once

#include "ftsyn/verifier.hpp"

#include <optional>

namespace ftsyn {

struct IterationRecord {
    int iteration = 0;      // 1-based
    int sample_count = 0;   // |S_k| used by the learner this iteration
    double trace_Q = 0.0;
    bool certified = false;
    double lambda_star = 0.0;      // certificate value, or counterexample depth
    int ce_subproblem = -1;        // -1 when certified
    double ce_phi = 1.0;
    Vec ce_x;
    double duration_seconds = 0.0;
};

struct CegisOutcome {
    enum class Kind { Converged, Infeasible, Budget, Undecided, Stalled };
    Kind kind = Kind::Budget;
    Controller controller; // valid when Converged
    int iterations = 0;
    std::vector<IterationRecord> history;
    std::string message;
};

/// Linearization at the nominal operating point (origin, all actuators
/// healthy) — the default seed for the sample set.
JacobianPair default_initial_sample(const NonlinearModel& model, const FaultSet& faults);

/// Alternates learner and verifier until a certificate, infeasibility, or
/// budget exhaustion; the full per-iteration history is recorded.
CegisOutcome run(const NonlinearModel& model, const StatePolytope& polytope,
                 const InputBox& box, const FaultSet& faults, const CegisConfig& config,
                 const std::optional<JacobianPair>& initial_sample = std::nullopt);

struct RoaResult {
    enum class Kind { Converged, Infeasible, Budget, Undecided, Stalled };
    Kind kind = Kind::Infeasible;
    Mat Q; // largest certified invariant ellipsoid {x : x' Q^-1 x <= 1}
    double trace_Q = 0.0;
    int iterations = 0;
    std::string message;
};

/// Largest certified invariant ellipsoid for a fixed gain K (Y = K Q
/// substituted into the learner), run inside its own synthesis loop.
RoaResult roa_for_fixed_gain(const Mat& K, const NonlinearModel& model,
                             const StatePolytope& polytope, const InputBox& box,
                             const FaultSet& faults, const CegisConfig& config);

} // namespace ftsyn
