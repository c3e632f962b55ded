#pragma once

#include "ftsyn/model.hpp"

namespace ftsyn {

/// Thruster geometry: force projections F_x = F sin(alpha), F_y = F cos(alpha)
/// and yaw torque (-F_x * l_y + F_y * l_x).
struct Thruster {
    double alpha = 0.0; // rad
    double lx = 0.0;    // m
    double ly = 0.0;    // m
};

/// Physical parameter set for the AUV benchmarks. Default values are a
/// plausible documented set for a small hovering vehicle; they are not taken
/// from any published experiment.
struct AuvParams {
    double m = 400.0;   // kg
    double Jz = 320.0;  // kg m^2
    double Xu = 120.0;   // linear surge drag
    double Xuu = 10.0;  // quadratic surge drag
    double Yv = 60.0;   // linear sway drag (5-state model only)
    double Yvv = 40.0;  // quadratic sway drag (5-state model only)
    double Nr = 60.0;   // linear yaw drag
    double Nrr = 10.0; // quadratic yaw drag
    std::vector<Thruster> thrusters;
    Vec u_max; // per-thruster saturation, N

    void validate(int expected_thrusters) const;
};

AuvParams auv2_default_params();
AuvParams auv5_default_params();

/// Two-state surge/yaw-rate model with three fixed thrusters (n=2, p=3).
NonlinearModel auv2(const AuvParams& params, double dt = 0.01);

/// Five-state model with Coriolis coupling, yaw angle and its integral
/// (n=5, p=4).
NonlinearModel auv5(const AuvParams& params, double dt = 0.01);

/// x' = Ac x + Bc diag(phi) u encoded in the nonlinear-model interface.
NonlinearModel linear_test(const Mat& Ac, const Mat& Bc, double dt,
                           bool fault_scaled = true);

/// Exact Jacobian Lipschitz constants for the benchmark models (their state
/// Jacobians are affine in x and g is affine in phi), certified.
LipschitzBounds auv2_lipschitz(const AuvParams& params, double dt);
LipschitzBounds auv5_lipschitz(const AuvParams& params, double dt);

} // namespace ftsyn
