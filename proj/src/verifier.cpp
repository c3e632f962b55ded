#include "ftsyn/verifier.hpp"

#include "ftsyn/errors.hpp"
#include "ftsyn/ldi.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <limits>
#include <queue>
#include <thread>

namespace ftsyn {

namespace {

// Shared evaluation state for one candidate (Q, Y, Z): the per-sign gain
// combinations W_j = E_j Y + E_j^- Z and tau*Q are fixed across the whole
// search, only (A, B) changes point to point.
struct XiEvaluator {
    const VerifierProblem& prob;
    SignMatrixSet signs;
    std::vector<Mat> W; // p x n each
    Mat tauQ;
    int n;

    explicit XiEvaluator(const VerifierProblem& problem)
        : prob(problem), signs(enumerate_sign_matrices(problem.faults.p)),
          n(static_cast<int>(problem.Q.rows())) {
        tauQ = problem.tau * problem.Q;
        W.reserve(static_cast<size_t>(signs.count()));
        for (int j = 0; j < signs.count(); ++j)
            W.push_back(signs.matrix(j) * problem.Y + signs.complement(j) * problem.Z);
    }

    // min over sign patterns j of lambda_min(Xi(A, B, j)), with the exact
    // reduction lambda_min(Xi) = min(1 - tau, lambda_min([[tau Q, M^T],[M, Q]]))
    // that follows from the middle block rows of Xi being (0, (1-tau)I, 0).
    std::pair<double, int> eval(const Vec& x, const Vec& phi) const {
        JacobianPair jp = linearize(*prob.model, x, phi);
        Mat outer(2 * n, 2 * n);
        outer.topLeftCorner(n, n) = tauQ;
        outer.bottomRightCorner(n, n) = prob.Q;
        double best = std::numeric_limits<double>::infinity();
        int best_j = -1;
        const double mid = 1.0 - prob.tau;
        Eigen::SelfAdjointEigenSolver<Mat> es;
        for (int j = 0; j < signs.count(); ++j) {
            Mat M = jp.A * prob.Q + jp.B * W[static_cast<size_t>(j)];
            outer.topRightCorner(n, n) = M.transpose();
            outer.bottomLeftCorner(n, n) = M;
            es.compute(outer, Eigen::EigenvaluesOnly);
            double lam = std::min(mid, es.eigenvalues()(0));
            if (lam < best) {
                best = lam;
                best_j = j;
            }
        }
        return {best, best_j};
    }
};

struct Region {
    Vec c;     // center
    Vec h;     // half-widths
    double fc; // objective at the center
    double lb; // fc - sum_j w_j h_j
    long seq;  // insertion order, deterministic tie-break
};

struct RegionOrder {
    bool operator()(const Region& a, const Region& b) const {
        if (a.lb != b.lb) return a.lb > b.lb; // min-heap on lower bound
        return a.seq > b.seq;
    }
};

double cone_sum(const Vec& w, const Vec& h) { return w.dot(h); }

} // namespace

Vec VerifierProblem::cone_weights(int subproblem) const {
    const int n = static_cast<int>(Q.rows());
    const double nQ = opnorm(Q);
    const double nYZ = opnorm(Y) + opnorm(Z); // bounds every ||E_j Y + E_j^- Z||
    Vec w(n + 1);
    const bool exact_A = static_cast<int>(lipschitz.dA_coord.size()) == n;
    for (int c = 0; c < n; ++c) {
        // |d lambda| <= ||dM|| <= ||dA Q|| + ||dB|| (||Y|| + ||Z||) per unit step
        double wa = exact_A ? opnorm(lipschitz.dA_coord[static_cast<size_t>(c)] * Q)
                            : nQ * lipschitz.kappa_A_for(c);
        w(c) = wa + nYZ * lipschitz.kappa_B_for_state(c);
    }
    if (lipschitz.dB_fault_col.cols() > subproblem && lipschitz.dB_fault_col.rows() == n) {
        // dB is supported on column i only, so dB * W_j picks out row i of
        // W_j = E_j Y + E_j^- Z, which is row i of either Y or Z.
        double row = std::max(Y.row(subproblem).norm(), Z.row(subproblem).norm());
        w(n) = lipschitz.dB_fault_col.col(subproblem).norm() * row;
    } else {
        w(n) = nYZ * lipschitz.kappa_B_for_fault(subproblem);
    }
    return w;
}

std::pair<double, int> verifier_objective(const VerifierProblem& problem, const Vec& x,
                                          double phi_i, int subproblem) {
    XiEvaluator ev(problem);
    return ev.eval(x, problem.faults.fault_vector(subproblem, phi_i));
}

BranchBoundResult branch_and_bound(const Vec& lo, const Vec& hi, const Vec& weights,
                                   const std::function<double(const Vec&)>& objective,
                                   const BranchBoundOptions& options) {
    const int d = static_cast<int>(lo.size());
    if (hi.size() != d || weights.size() != d)
        throw ContractError("branch_and_bound: dimension mismatch");
    for (int j = 0; j < d; ++j) {
        if (!(hi(j) >= lo(j))) throw ContractError("branch_and_bound: empty box");
        if (weights(j) < 0.0) throw ContractError("branch_and_bound: negative cone weight");
    }

    BranchBoundResult res;
    const Vec range = hi - lo;
    // A coordinate stops being split once its width falls below
    // diam_tol_frac of the original box width (or carries zero weight).
    Vec min_half(d);
    for (int j = 0; j < d; ++j) min_half(j) = 0.5 * options.diam_tol_frac * range(j);

    std::priority_queue<Region, std::vector<Region>, RegionOrder> heap;
    long seq = 0;
    long evals = 0;
    long hunt_evals = 0; // evaluations spent refining a found violation
    bool hunting = false;
    double best_value = std::numeric_limits<double>::infinity();
    Vec best_point;
    double frozen_min = std::numeric_limits<double>::infinity();

    auto evaluate = [&](const Vec& c) {
        ++evals;
        if (hunting) ++hunt_evals;
        double f = objective(c);
        if (f < best_value) {
            best_value = f;
            best_point = c;
        }
        if (f <= 0.0) hunting = true;
        return f;
    };

    auto finish_counterexample = [&]() {
        res.kind = BranchBoundResult::Kind::Counterexample;
        res.best_value = best_value;
        res.best_point = best_point;
        res.certified_bound = -std::numeric_limits<double>::infinity();
        res.evaluations = evals;
        return res;
    };

    auto push = [&](Vec c, Vec h, double fc) {
        Region r;
        r.lb = fc - cone_sum(weights, h);
        r.c = std::move(c);
        r.h = std::move(h);
        r.fc = fc;
        r.seq = seq++;
        heap.push(std::move(r));
    };

    auto finish_undecided = [&](double bound) {
        res.kind = BranchBoundResult::Kind::Undecided;
        res.best_value = best_value;
        res.best_point = best_point;
        res.certified_bound = bound;
        res.evaluations = evals;
        return res;
    };

    {
        Vec c = 0.5 * (lo + hi);
        double fc = evaluate(c);
        push(std::move(c), 0.5 * range, fc);
    }

    while (!heap.empty()) {
        Region r = heap.top();
        heap.pop();

        if (hunting) {
            if (hunt_evals >= options.polish_evals || r.lb >= best_value)
                return finish_counterexample();
        } else {
            double bound = std::min(r.lb, frozen_min);
            if (bound > 0.0) {
                res.kind = BranchBoundResult::Kind::Certificate;
                res.best_value = best_value;
                res.best_point = best_point;
                res.certified_bound = bound;
                res.evaluations = evals;
                return res;
            }
            // A frozen (minimum-diameter) region already pins the bound at
            // or below zero; further splitting elsewhere cannot certify.
            if (frozen_min <= 0.0) return finish_undecided(bound);
        }

        // Split along the coordinate with the largest cone contribution.
        int split = -1;
        double contrib = 0.0;
        for (int j = 0; j < d; ++j) {
            if (weights(j) <= 0.0 || r.h(j) <= min_half(j)) continue;
            double wj = weights(j) * r.h(j);
            if (wj > contrib) {
                contrib = wj;
                split = j;
            }
        }
        if (split < 0) { // at resolution limit everywhere
            if (hunting) continue;
            frozen_min = std::min(frozen_min, r.lb);
            if (frozen_min <= 0.0 && heap.empty())
                return finish_undecided(frozen_min);
            continue;
        }

        if (evals + 2 > options.max_evals)
            return hunting ? finish_counterexample()
                           : finish_undecided(std::min(r.lb, frozen_min));

        // Trisect: the middle child reuses the parent's center evaluation.
        Vec h = r.h;
        h(split) /= 3.0;
        const double off = 2.0 * h(split);
        for (int side : {-1, 0, +1}) {
            Vec c = r.c;
            c(split) += side * off;
            double fc = r.fc;
            if (side != 0) fc = evaluate(c);
            push(std::move(c), h, fc);
        }
    }

    if (hunting) return finish_counterexample();

    // Box fully resolved into frozen regions.
    if (frozen_min > 0.0) {
        res.kind = BranchBoundResult::Kind::Certificate;
        res.certified_bound = frozen_min;
        res.best_value = best_value;
        res.best_point = best_point;
        res.evaluations = evals;
        return res;
    }
    return finish_undecided(frozen_min);
}

GlobalMinResult global_minimize(const VerifierProblem& problem, int subproblem) {
    if (problem.model == nullptr) throw ContractError("global_minimize: null model");
    const int n = problem.model->n;
    if (subproblem < 0 || subproblem >= problem.faults.p)
        throw ContractError("global_minimize: subproblem out of range");

    Vec lo(n + 1), hi(n + 1);
    lo.head(n) = problem.polytope.box_lo;
    hi.head(n) = problem.polytope.box_hi;
    lo(n) = 0.0;
    hi(n) = 1.0;

    XiEvaluator ev(problem);
    auto objective = [&](const Vec& point) {
        Vec phi = problem.faults.fault_vector(subproblem, point(n));
        return ev.eval(point.head(n), phi).first;
    };

    BranchBoundOptions opts;
    opts.diam_tol_frac = problem.settings.diam_tol_frac;
    opts.max_evals = problem.settings.max_evals;
    BranchBoundResult bb =
        branch_and_bound(lo, hi, problem.cone_weights(subproblem), objective, opts);

    GlobalMinResult out;
    out.lambda_star = bb.best_value;
    out.x = bb.best_point.head(n);
    out.phi_i = bb.best_point(n);
    out.sign_index =
        ev.eval(out.x, problem.faults.fault_vector(subproblem, out.phi_i)).second;
    out.certified_bound = bb.certified_bound;
    out.decided = bb.kind != BranchBoundResult::Kind::Undecided;
    out.bound_gap = bb.best_value - bb.certified_bound;
    out.evaluations = bb.evaluations;
    return out;
}

VerifierResult verify(const LearnerSolution& candidate, const NonlinearModel& model,
                      const StatePolytope& polytope, const FaultSet& faults,
                      const CegisConfig& config, const LipschitzBounds& lipschitz) {
    VerifierProblem prob;
    prob.Q = candidate.Q;
    prob.Y = candidate.Y;
    prob.Z = candidate.Z;
    prob.tau = config.tau;
    prob.eta = config.eta;
    prob.model = &model;
    prob.polytope = polytope;
    prob.faults = faults;
    prob.lipschitz = lipschitz;
    prob.settings = config.verifier;

    const int subs = faults.subproblems();
    std::vector<GlobalMinResult> results(static_cast<size_t>(subs));

    int threads = config.verifier.threads;
    if (threads <= 0) threads = subs;
    threads = std::min(threads, subs);
    if (threads <= 1) {
        for (int s = 0; s < subs; ++s) results[static_cast<size_t>(s)] = global_minimize(prob, s);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(static_cast<size_t>(subs));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (int s = next.fetch_add(1); s < subs; s = next.fetch_add(1)) {
                    try {
                        results[static_cast<size_t>(s)] = global_minimize(prob, s);
                    } catch (...) {
                        errors[static_cast<size_t>(s)] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // Merge deterministically: the deepest violation wins; otherwise any
    // undecided subproblem makes the whole verification undecided.
    VerifierResult out;
    int worst = -1;
    for (int s = 0; s < subs; ++s) {
        const auto& r = results[static_cast<size_t>(s)];
        if (r.decided && r.lambda_star <= 0.0 &&
            (worst < 0 || r.lambda_star < results[static_cast<size_t>(worst)].lambda_star))
            worst = s;
    }
    if (worst >= 0) {
        const auto& r = results[static_cast<size_t>(worst)];
        out.kind = VerifierResult::Kind::Counterexample;
        out.lambda_value = r.lambda_star;
        out.lambda_star = r.lambda_star;
        out.subproblem = worst;
        out.sign_index = r.sign_index;
        out.pair = linearize(model, r.x, faults.fault_vector(worst, r.phi_i));
        return out;
    }

    bool undecided = false;
    double lambda_star = std::numeric_limits<double>::infinity();
    double bound = std::numeric_limits<double>::infinity();
    double gap = 0.0;
    for (const auto& r : results) {
        lambda_star = std::min(lambda_star, r.lambda_star);
        bound = std::min(bound, r.certified_bound);
        if (!r.decided) {
            undecided = true;
            gap = std::max(gap, r.bound_gap);
        }
    }
    out.lambda_star = lambda_star;
    out.certified_bound = bound;
    out.bound_gap = gap;
    if (undecided) {
        out.kind = VerifierResult::Kind::Undecided;
        return out;
    }
    out.kind = VerifierResult::Kind::Certificate;
    out.lipschitz_certified = lipschitz.certified;
    return out;
}

} // namespace ftsyn
