#pragma once

#include "ftsyn/learner.hpp"

#include <iosfwd>

namespace ftsyn {

/// Piecewise-constant actuator efficiency schedule. Phases must be
/// contiguous, non-overlapping, and cover [0, T].
struct FaultSchedule {
    struct Phase {
        double t_start = 0.0;
        double t_end = 0.0; // exclusive except for the final phase
        Vec phi;
    };
    std::vector<Phase> phases;

    void validate(double T, int p) const;
    const Vec& at(double t) const;
    int phase_index(double t) const;

    static FaultSchedule nominal(double T, int p);
};

/// Reference trajectory x_ref(t).
struct ReferenceSignal {
    enum class Kind { Constant, Sinusoid, Piecewise };
    Kind kind = Kind::Constant;

    Vec constant;

    Vec amplitude, frequency_hz, offset; // per-channel sinusoid

    std::vector<std::pair<double, Vec>> pieces; // (t_start, value), sorted

    Vec at(double t) const;
    int dim() const;

    static ReferenceSignal make_constant(const Vec& x_ref);
    static ReferenceSignal make_sinusoid(const Vec& amplitude, const Vec& frequency_hz,
                                         const Vec& offset);
    static ReferenceSignal make_piecewise(std::vector<std::pair<double, Vec>> pieces);
};

/// Uniform-grid closed-loop record. V holds (x - x_ref)' P (x - x_ref) when
/// the controller carries P, otherwise NaN.
struct Trace {
    double dt = 0.01;
    std::vector<double> t;
    std::vector<Vec> x;
    std::vector<Vec> u;   // post-saturation
    std::vector<Vec> phi;
    std::vector<Vec> x_ref;
    std::vector<double> V;

    int steps() const { return static_cast<int>(t.size()); }
};

/// Error feedback u = sat(K (x - x_ref)); x advances by one Euler step of
/// the faulty plant. Throws DivergenceError when ||x|| exceeds 1e6.
Trace simulate(const NonlinearModel& model, const Controller& controller,
               const FaultSchedule& schedule, const ReferenceSignal& reference,
               double T, const Vec& x0);

struct PhaseMetrics {
    int phase = 0;
    double t_start = 0.0, t_end = 0.0;
    double max_error = 0.0;
    double initial_error = 0.0;
    double final_error = 0.0;
    double steady_state_error = 0.0; // mean ||e|| over the final 10% of the phase
    Vec saturation_duty;             // fraction of steps at the input bound, per actuator
};

struct SimMetrics {
    std::vector<PhaseMetrics> phases;
};

/// Per-phase tracking metrics. Saturation duty is measured against u_max;
/// pass an empty vector when the bound is unknown (duty reported as zero).
SimMetrics metrics(const Trace& trace, const FaultSchedule& schedule,
                   const Vec& u_max = Vec());

/// CSV with header t, x1..xn, u1..up, phi1..phip, ref1..refn, V.
void write_trace_csv(std::ostream& os, const Trace& trace);

/// Human-readable per-phase report.
void write_metrics_report(std::ostream& os, const SimMetrics& m);

} // namespace ftsyn
