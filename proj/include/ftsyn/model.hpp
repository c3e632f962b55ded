#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ftsyn/errors.hpp"

namespace ftsyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Lipschitz constants of the Jacobian maps, used by the verifier to build
/// region lower bounds. The per-coordinate vectors refine the scalar
/// constants; when empty the scalars are used for every coordinate.
struct LipschitzBounds {
    double kappa_A = 0.0;
    double kappa_B = 0.0;
    bool certified = false;

    Vec kappa_A_coord;       // per state coordinate, optional
    Vec kappa_B_state_coord; // state dependence of B per coordinate, optional
    Vec kappa_B_fault;       // per actuator (fault coordinate), optional

    // Exact Jacobian-derivative structure, available when A is affine in x
    // and B is affine in phi with independently scaled columns: dA_coord[c]
    // is the constant matrix dA/dx_c; dB_fault_col.col(i) is dB/dphi_i
    // (supported on column i of B). When present, the verifier can bound
    // ||dM|| per coordinate exactly instead of through the scalar kappas.
    std::vector<Mat> dA_coord;
    Mat dB_fault_col;

    double kappa_A_for(int coord) const {
        return kappa_A_coord.size() > 0 ? kappa_A_coord(coord) : kappa_A;
    }
    double kappa_B_for_state(int coord) const {
        return kappa_B_state_coord.size() > 0 ? kappa_B_state_coord(coord) : kappa_B;
    }
    double kappa_B_for_fault(int actuator) const {
        return kappa_B_fault.size() > 0 ? kappa_B_fault(actuator) : kappa_B;
    }
};

/// Control-affine model x' = f(x) + g(x, phi) u, continuous time, with a
/// fixed Euler discretization step. Evaluators are pure; instances are
/// immutable after construction and safe to share between threads.
struct NonlinearModel {
    std::string name;
    int n = 0; // state dimension
    int p = 0; // input dimension
    double dt = 0.01;

    std::function<Vec(const Vec&)> f;
    std::function<Mat(const Vec&, const Vec&)> g;     // n x p
    std::function<Mat(const Vec&)> df_dx;             // n x n
    // Per-column state Jacobians of g; only used by the Lipschitz estimator.
    std::function<std::vector<Mat>(const Vec&, const Vec&)> dg_dx_cols;

    // Certified analytic Jacobian Lipschitz constants, when known; otherwise
    // the sampled estimator is used.
    std::optional<LipschitzBounds> lipschitz;
};

/// The admissible fault set: at most one efficiency entry below 1.
/// Subproblem i frees phi_i in [0,1] with all other entries pinned at 1.
struct FaultSet {
    int p = 0;

    int subproblems() const { return p; }

    Vec fault_vector(int subproblem, double phi_i) const {
        Vec phi = Vec::Ones(p);
        phi(subproblem) = phi_i;
        return phi;
    }

    static Vec nominal(int p) { return Vec::Ones(p); }
};

/// State domain D = { x : L x <= 1 } plus an axis-aligned bounding box used
/// by the verifier's search.
struct StatePolytope {
    Mat L;      // l x n
    Vec box_lo; // n
    Vec box_hi; // n

    int rows() const { return static_cast<int>(L.rows()); }
    int dim() const { return static_cast<int>(L.cols()); }

    static StatePolytope from_box(const Vec& lo, const Vec& hi);
    bool box_contains(const Vec& x) const;
};

struct InputBox {
    Vec u_max; // strictly positive thresholds

    int dim() const { return static_cast<int>(u_max.size()); }
    void validate() const;
};

/// Discrete-time Jacobian pair (A, B) together with the point that
/// generated it.
struct JacobianPair {
    Mat A; // n x n
    Mat B; // n x p
    Vec x0;
    Vec phi0;
};

/// Jacobian pair of the Euler-discretized map: A = I + dt*df/dx, B = dt*g.
JacobianPair linearize(const NonlinearModel& model, const Vec& x, const Vec& phi);

/// One explicit Euler step; u must already be saturated by the caller.
Vec step(const NonlinearModel& model, const Vec& x, const Vec& u, const Vec& phi,
         int time_index = -1);

/// Sampled pairwise-ratio estimate of the Jacobian Lipschitz constants,
/// inflated by safety_factor. Deterministic for a fixed seed.
LipschitzBounds estimate_lipschitz(const NonlinearModel& model,
                                   const StatePolytope& polytope,
                                   const FaultSet& faults,
                                   int samples = 200,
                                   double safety_factor = 2.0,
                                   unsigned seed = 1);

} // namespace ftsyn
