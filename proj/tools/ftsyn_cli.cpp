// Command-line front end: synthesis, verification, simulation, and
// region-of-attraction computation over config / controller / scenario
// files. Exit codes: 0 success, 1 usage or I/O error, 2 infeasible or
// counterexample, 3 budget exhausted, 4 divergence.
#include "ftsyn/ftsyn.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>

namespace {

bool g_verbose = false;

void note(const std::string& msg) {
    if (g_verbose) std::fprintf(stderr, "ftsyn: %s\n", msg.c_str());
}

int report(int code, const char* stage) {
    if (code != FTSYN_OK)
        std::fprintf(stderr, "ftsyn: %s: %s\n", stage, ftsyn_last_error());
    return code;
}

struct ProblemHandle {
    ftsyn_problem* p = nullptr;
    ~ProblemHandle() { ftsyn_problem_free(p); }
};

struct ControllerHandle {
    ftsyn_controller* c = nullptr;
    ~ControllerHandle() { ftsyn_controller_free(c); }
};

int load_problem(const std::string& config, int threads, ProblemHandle& ph) {
    int rc = ftsyn_problem_load(config.c_str(), &ph.p);
    if (rc != FTSYN_OK) return report(rc, "config");
    if (threads >= 0) ftsyn_problem_set_threads(ph.p, threads);
    int n = 0, p = 0;
    ftsyn_problem_dims(ph.p, &n, &p);
    note("loaded problem: n=" + std::to_string(n) + " p=" + std::to_string(p));
    return FTSYN_OK;
}

int load_ctrl(const std::string& path, ControllerHandle& ch) {
    int rc = ftsyn_controller_load(path.c_str(), &ch.c);
    return report(rc, "controller");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified fault-tolerant controller synthesis"};
    app.require_subcommand(1);
    app.add_flag("--verbose", g_verbose, "log progress to stderr");
    if (const char* lvl = std::getenv("FTSYN_LOG")) g_verbose = std::string(lvl) != "0";

    std::string config, out, controller, scenario, metrics_out;
    int threads = -1;

    auto* synth = app.add_subcommand("synth", "synthesize a certified controller");
    synth->add_option("--config", config, "problem config file")->required();
    synth->add_option("--out", out, "controller output file")->required();
    synth->add_option("--threads", threads, "verifier threads (0 = auto)");

    auto* verify = app.add_subcommand("verify", "re-verify a stored controller");
    verify->add_option("--config", config, "problem config file")->required();
    verify->add_option("--controller", controller, "controller file")->required();
    verify->add_option("--threads", threads, "verifier threads (0 = auto)");

    auto* simulate = app.add_subcommand("simulate", "closed-loop simulation of a scenario");
    simulate->add_option("--config", config, "problem config file")->required();
    simulate->add_option("--controller", controller, "controller file")->required();
    simulate->add_option("--scenario", scenario, "scenario file")->required();
    simulate->add_option("--out", out, "trace CSV output")->required();
    simulate->add_option("--metrics", metrics_out, "metrics report output");

    auto* roa = app.add_subcommand("roa", "largest invariant ellipsoid for a fixed gain");
    roa->add_option("--config", config, "problem config file")->required();
    roa->add_option("--controller", controller, "controller file")->required();
    roa->add_option("--out", out, "ellipsoid output file")->required();
    roa->add_option("--threads", threads, "verifier threads (0 = auto)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    ProblemHandle ph;
    int rc = load_problem(config, threads, ph);
    if (rc != FTSYN_OK) return rc;

    if (synth->parsed()) {
        std::string rpt = out + ".report";
        rc = ftsyn_synthesize(ph.p, out.c_str(), rpt.c_str(), nullptr);
        if (rc == FTSYN_OK)
            std::printf("converged: controller written to %s (report %s)\n", out.c_str(),
                        rpt.c_str());
        return report(rc, "synth");
    }

    ControllerHandle ch;
    rc = load_ctrl(controller, ch);
    if (rc != FTSYN_OK) return rc;

    if (verify->parsed()) {
        rc = ftsyn_verify(ph.p, ch.c);
        if (rc == FTSYN_OK) std::printf("certificate: controller verified\n");
        return report(rc, "verify");
    }
    if (simulate->parsed()) {
        rc = ftsyn_simulate(ph.p, ch.c, scenario.c_str(), out.c_str(),
                            metrics_out.empty() ? nullptr : metrics_out.c_str());
        if (rc == FTSYN_OK) std::printf("trace written to %s\n", out.c_str());
        return report(rc, "simulate");
    }
    if (roa->parsed()) {
        rc = ftsyn_roa(ph.p, ch.c, out.c_str());
        if (rc == FTSYN_OK) std::printf("ellipsoid written to %s\n", out.c_str());
        return report(rc, "roa");
    }
    return 1;
}
