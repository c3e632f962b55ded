#include "ftsyn/ftsyn.h"

#include "ftsyn/cegis.hpp"
#include "ftsyn/errors.hpp"
#include "ftsyn/io.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

using namespace ftsyn;

struct ftsyn_problem {
    ProblemConfig config;
    NonlinearModel model;
    StatePolytope polytope;
    InputBox box;
    FaultSet faults;
};

struct ftsyn_controller {
    Controller controller;
    std::string model_name;
    std::string config_echo;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn> int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const DivergenceError& e) {
        return fail(FTSYN_DIVERGED, e.what());
    } catch (const UndecidedError& e) {
        return fail(FTSYN_BUDGET, e.what());
    } catch (const std::exception& e) {
        return fail(FTSYN_ERROR, e.what());
    }
}

const char* model_name(const ProblemConfig& cfg) {
    switch (cfg.model_kind) {
    case ProblemConfig::ModelKind::Auv2: return "auv2";
    case ProblemConfig::ModelKind::Auv5: return "auv5";
    case ProblemConfig::ModelKind::Linear: return "linear";
    }
    return "unknown";
}

void write_run_report(const std::string& path, const CegisOutcome& outcome,
                      const ProblemConfig& cfg) {
    KvFile kv;
    const char* kind = "budget";
    switch (outcome.kind) {
    case CegisOutcome::Kind::Converged: kind = "converged"; break;
    case CegisOutcome::Kind::Infeasible: kind = "infeasible"; break;
    case CegisOutcome::Kind::Budget: kind = "budget"; break;
    case CegisOutcome::Kind::Undecided: kind = "undecided"; break;
    case CegisOutcome::Kind::Stalled: kind = "stalled"; break;
    }
    kv.add("outcome", "kind", kind);
    kv.add("outcome", "iterations", std::to_string(outcome.iterations));
    if (!outcome.message.empty()) kv.add("outcome", "message", outcome.message);
    for (const auto& rec : outcome.history) {
        std::string s = "iteration" + std::to_string(rec.iteration);
        kv.add(s, "samples", std::to_string(rec.sample_count));
        kv.add(s, "trace_Q", format_double(rec.trace_Q));
        kv.add(s, "certified", rec.certified ? "true" : "false");
        kv.add(s, "lambda", format_double(rec.lambda_star));
        if (rec.ce_subproblem >= 0) {
            kv.add(s, "counterexample_subproblem", std::to_string(rec.ce_subproblem));
            kv.add(s, "counterexample_x", format_vec(rec.ce_x));
            kv.add(s, "counterexample_phi", format_double(rec.ce_phi));
        }
        kv.add(s, "seconds", format_double(rec.duration_seconds));
    }
    {
        std::istringstream is(cfg.echo);
        std::string line;
        int i = 0;
        while (std::getline(is, line))
            kv.add("config_echo", "line" + std::to_string(i++), line);
    }
    kv.write_file(path);
}

} // namespace

extern "C" {

const char* ftsyn_version(void) { return "1.0.0"; }

const char* ftsyn_last_error(void) { return g_last_error.c_str(); }

int ftsyn_problem_load(const char* config_path, ftsyn_problem** out) {
    if (config_path == nullptr || out == nullptr)
        return fail(FTSYN_ERROR, "null argument");
    return guarded([&] {
        auto p = std::make_unique<ftsyn_problem>();
        p->config = load_problem_config(config_path);
        p->model = p->config.make_model();
        p->polytope = p->config.make_polytope();
        p->box = p->config.make_input_box();
        p->faults = p->config.make_fault_set();
        if (p->config.lipschitz_override.has_value())
            p->model.lipschitz = p->config.lipschitz_override;
        if (p->polytope.dim() != p->model.n)
            return fail(FTSYN_ERROR, "domain box dimension does not match the model");
        if (p->box.dim() != p->model.p)
            return fail(FTSYN_ERROR, "u_max dimension does not match the model");
        *out = p.release();
        return FTSYN_OK;
    });
}

void ftsyn_problem_free(ftsyn_problem* problem) { delete problem; }

int ftsyn_problem_dims(const ftsyn_problem* problem, int* n, int* p) {
    if (problem == nullptr) return fail(FTSYN_ERROR, "null problem");
    if (n != nullptr) *n = problem->model.n;
    if (p != nullptr) *p = problem->model.p;
    return FTSYN_OK;
}

int ftsyn_problem_set_threads(ftsyn_problem* problem, int threads) {
    if (problem == nullptr) return fail(FTSYN_ERROR, "null problem");
    problem->config.cegis.verifier.threads = threads;
    return FTSYN_OK;
}

int ftsyn_synthesize(ftsyn_problem* problem, const char* controller_out_path,
                     const char* report_out_path, ftsyn_controller** out) {
    if (problem == nullptr) return fail(FTSYN_ERROR, "null problem");
    return guarded([&]() -> int {
        CegisOutcome outcome = run(problem->model, problem->polytope, problem->box,
                                   problem->faults, problem->config.cegis);
        if (report_out_path != nullptr)
            write_run_report(report_out_path, outcome, problem->config);
        switch (outcome.kind) {
        case CegisOutcome::Kind::Infeasible:
            return fail(FTSYN_INFEASIBLE, "synthesis: " + outcome.message);
        case CegisOutcome::Kind::Budget:
        case CegisOutcome::Kind::Undecided:
        case CegisOutcome::Kind::Stalled:
            return fail(FTSYN_BUDGET, "synthesis: " + outcome.message);
        case CegisOutcome::Kind::Converged: break;
        }
        if (controller_out_path != nullptr)
            save_controller(controller_out_path, outcome.controller,
                            model_name(problem->config), problem->config.echo);
        if (out != nullptr) {
            auto c = std::make_unique<ftsyn_controller>();
            c->controller = outcome.controller;
            c->model_name = model_name(problem->config);
            c->config_echo = problem->config.echo;
            *out = c.release();
        }
        return FTSYN_OK;
    });
}

int ftsyn_controller_load(const char* path, ftsyn_controller** out) {
    if (path == nullptr || out == nullptr) return fail(FTSYN_ERROR, "null argument");
    return guarded([&] {
        StoredController sc = load_controller(path);
        auto c = std::make_unique<ftsyn_controller>();
        c->controller = std::move(sc.controller);
        c->model_name = std::move(sc.model_name);
        *out = c.release();
        return FTSYN_OK;
    });
}

int ftsyn_controller_save(const ftsyn_controller* controller, const char* path) {
    if (controller == nullptr || path == nullptr) return fail(FTSYN_ERROR, "null argument");
    return guarded([&] {
        save_controller(path, controller->controller, controller->model_name,
                        controller->config_echo);
        return FTSYN_OK;
    });
}

void ftsyn_controller_free(ftsyn_controller* controller) { delete controller; }

int ftsyn_controller_dims(const ftsyn_controller* controller, int* n, int* p) {
    if (controller == nullptr) return fail(FTSYN_ERROR, "null controller");
    if (n != nullptr) *n = static_cast<int>(controller->controller.K.cols());
    if (p != nullptr) *p = static_cast<int>(controller->controller.K.rows());
    return FTSYN_OK;
}

int ftsyn_controller_gain(const ftsyn_controller* controller, double* K_out) {
    if (controller == nullptr || K_out == nullptr) return fail(FTSYN_ERROR, "null argument");
    const Mat& K = controller->controller.K;
    for (int r = 0; r < K.rows(); ++r)
        for (int c = 0; c < K.cols(); ++c) K_out[r * K.cols() + c] = K(r, c);
    return FTSYN_OK;
}

int ftsyn_verify(ftsyn_problem* problem, const ftsyn_controller* controller) {
    if (problem == nullptr || controller == nullptr)
        return fail(FTSYN_ERROR, "null argument");
    return guarded([&]() -> int {
        const Controller& c = controller->controller;
        if (c.K.cols() != problem->model.n || c.K.rows() != problem->model.p)
            return fail(FTSYN_ERROR, "controller dimensions do not match the problem");
        LearnerSolution sol;
        sol.Q = c.Q;
        sol.Y = c.K * c.Q;
        sol.Z = c.H * c.Q;
        sol.objective = c.Q.trace();
        LipschitzBounds lb = problem->model.lipschitz.has_value()
                                 ? *problem->model.lipschitz
                                 : estimate_lipschitz(problem->model, problem->polytope,
                                                      problem->faults);
        VerifierResult vr = verify(sol, problem->model, problem->polytope, problem->faults,
                                   problem->config.cegis, lb);
        if (vr.kind == VerifierResult::Kind::Certificate) {
            g_last_error.clear();
            return FTSYN_OK;
        }
        if (vr.kind == VerifierResult::Kind::Undecided)
            return fail(FTSYN_BUDGET, "verification undecided; bound gap " +
                                          format_double(vr.bound_gap));
        return fail(FTSYN_INFEASIBLE,
                    "counterexample: lambda = " + format_double(vr.lambda_value) +
                        ", x = [" + format_vec(vr.pair.x0) + "], phi = [" +
                        format_vec(vr.pair.phi0) + "], subproblem " +
                        std::to_string(vr.subproblem));
    });
}

int ftsyn_simulate(ftsyn_problem* problem, const ftsyn_controller* controller,
                   const char* scenario_path, const char* csv_out_path,
                   const char* metrics_out_path) {
    if (problem == nullptr || controller == nullptr || scenario_path == nullptr ||
        csv_out_path == nullptr)
        return fail(FTSYN_ERROR, "null argument");
    return guarded([&]() -> int {
        Scenario sc = load_scenario(scenario_path, problem->model.n, problem->model.p);
        Trace trace = simulate(problem->model, controller->controller, sc.schedule,
                               sc.reference, sc.T, sc.x0);
        {
            std::ofstream os(csv_out_path);
            if (!os) return fail(FTSYN_ERROR, std::string("cannot write '") + csv_out_path + "'");
            write_trace_csv(os, trace);
        }
        if (metrics_out_path != nullptr) {
            std::ofstream os(metrics_out_path);
            if (!os)
                return fail(FTSYN_ERROR,
                            std::string("cannot write '") + metrics_out_path + "'");
            write_metrics_report(
                os, metrics(trace, sc.schedule, controller->controller.u_max.u_max));
        }
        return FTSYN_OK;
    });
}

int ftsyn_roa(ftsyn_problem* problem, const ftsyn_controller* controller,
              const char* out_path) {
    if (problem == nullptr || controller == nullptr || out_path == nullptr)
        return fail(FTSYN_ERROR, "null argument");
    return guarded([&]() -> int {
        RoaResult rr = roa_for_fixed_gain(controller->controller.K, problem->model,
                                          problem->polytope, problem->box, problem->faults,
                                          problem->config.cegis);
        if (rr.kind == RoaResult::Kind::Infeasible)
            return fail(FTSYN_INFEASIBLE, "no certified invariant ellipsoid: " + rr.message);
        if (rr.kind != RoaResult::Kind::Converged)
            return fail(FTSYN_BUDGET, "ellipsoid search undecided: " + rr.message);

        KvFile kv;
        kv.add("roa", "model", model_name(problem->config));
        kv.add("roa", "Q", format_mat(rr.Q));
        kv.add("roa", "trace_Q", format_double(rr.trace_Q));
        kv.add("roa", "iterations", std::to_string(rr.iterations));
        if (rr.Q.rows() == 2) {
            // Boundary {x : x' Q^-1 x = 1} as a plot-ready polyline: x = C w
            // with C the Cholesky factor of Q and w on the unit circle.
            Eigen::LLT<Mat> llt(rr.Q);
            Mat C = llt.matrixL();
            std::string poly;
            for (int i = 0; i < 360; ++i) {
                double a = 2.0 * M_PI * i / 360.0;
                Vec w(2);
                w << std::cos(a), std::sin(a);
                Vec pt = C * w;
                if (i) poly += " ; ";
                poly += format_double(pt(0)) + " " + format_double(pt(1));
            }
            kv.add("roa", "boundary", poly);
        }
        {
            std::istringstream is(problem->config.echo);
            std::string line;
            int i = 0;
            while (std::getline(is, line))
                kv.add("config_echo", "line" + std::to_string(i++), line);
        }
        kv.write_file(out_path);
        return FTSYN_OK;
    });
}

} // extern "C"
