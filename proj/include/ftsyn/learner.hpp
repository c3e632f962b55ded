#pragma once

#include "ftsyn/conic.hpp"
#include "ftsyn/ldi.hpp"

namespace ftsyn {

struct VerifierSettings {
    double diam_tol_frac = 1e-4; // fraction of the search-box diameter
    long max_evals = 1000000;    // region evaluation budget per subproblem
    int threads = 0;             // 0 = one thread per subproblem
};

struct CegisConfig {
    double eta = 50.0;
    double epsilon = 1e-4;
    double tau = 0.999;
    int max_iterations = 50;
    double dt = 0.01;
    double sdp_tol = 1e-8;
    VerifierSettings verifier;

    void validate() const {
        if (!(eta >= epsilon && epsilon > 0))
            throw ConfigError("hyperparameters must satisfy eta >= epsilon > 0");
        if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0,1]");
        if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
        if (!(dt > 0)) throw ConfigError("dt must be positive");
    }
};

/// Counterexample store S_k.
class SampleSet {
  public:
    struct Entry {
        JacobianPair pair;
        int iteration = 0;
        bool counterexample = false; // false for the initial seed
    };

    enum class AddResult { Added, DuplicateRejected };

    AddResult add(const JacobianPair& pair, int iteration, bool counterexample);

    bool empty() const { return entries_.empty(); }
    int size() const { return static_cast<int>(entries_.size()); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// Combined operator-norm distance ||dA|| + ||dB|| to the nearest entry.
    double min_distance_to(const JacobianPair& pair) const;

  private:
    std::vector<Entry> entries_;
};

struct LearnerSolution {
    Mat Q, Y, Z;
    double objective = 0.0; // trace(Q)
};

struct LearnOutcome {
    enum class Kind { Optimal, Infeasible };
    Kind kind = Kind::Infeasible;
    LearnerSolution solution; // valid when Optimal
    std::string message;
};

struct Certificate {
    double lambda_star = 0.0;
    double margin = 0.0; // certified global lower bound
    bool lipschitz_certified = false;
};

struct Controller {
    Mat K, H, P, Q;
    InputBox u_max;
    bool has_certificate = false;
    Certificate certificate;
};

/// Vertex-restricted maximal-ellipsoid SDP. When fixed_gain is non-null, Y
/// is eliminated through the substitution Y = K Q (region-of-attraction
/// computation for a given gain).
SdpProblem assemble_learner_sdp(const SampleSet& set, const CegisConfig& config,
                                const StatePolytope& polytope, const InputBox& box,
                                const SignMatrixSet& signs,
                                const Mat* fixed_gain = nullptr);

/// Solves the learner SDP and re-verifies every solution invariant
/// independently of the solver before returning.
LearnOutcome learn(const SampleSet& set, const CegisConfig& config,
                   const StatePolytope& polytope, const InputBox& box,
                   const Mat* fixed_gain = nullptr);

Controller extract_controller(const LearnerSolution& sol, const InputBox& box);

} // namespace ftsyn
