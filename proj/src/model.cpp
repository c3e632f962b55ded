#include "ftsyn/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ftsyn {

StatePolytope StatePolytope::from_box(const Vec& lo, const Vec& hi) {
    const int n = static_cast<int>(lo.size());
    if (hi.size() != n) throw ConfigError("box bounds have mismatched dimensions");
    for (int i = 0; i < n; ++i) {
        if (!(lo(i) < hi(i)))
            throw ConfigError("degenerate box: lo >= hi in coordinate " + std::to_string(i));
    }
    StatePolytope poly;
    poly.box_lo = lo;
    poly.box_hi = hi;
    // Each finite face contributes one row of L x <= 1. Faces through zero
    // are shifted impossible here since lo < 0 < hi is not required; rows
    // are scaled so the offset is exactly 1.
    std::vector<Eigen::RowVectorXd> rows;
    for (int i = 0; i < n; ++i) {
        if (hi(i) <= 0 || lo(i) >= 0)
            throw ConfigError("domain box must contain the origin in its interior");
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
        r(i) = 1.0 / hi(i);
        rows.push_back(r);
        r(i) = 1.0 / lo(i); // negative bound: x_i/lo <= 1 <=> x_i >= lo
        rows.push_back(r);
    }
    poly.L.resize(static_cast<int>(rows.size()), n);
    for (size_t k = 0; k < rows.size(); ++k) poly.L.row(static_cast<int>(k)) = rows[k];
    return poly;
}

bool StatePolytope::box_contains(const Vec& x) const {
    const double slack = 1e-12;
    for (int i = 0; i < x.size(); ++i)
        if (x(i) < box_lo(i) - slack || x(i) > box_hi(i) + slack) return false;
    return true;
}

void InputBox::validate() const {
    for (int i = 0; i < u_max.size(); ++i)
        if (!(u_max(i) > 0.0))
            throw ConfigError("u_max must be strictly positive (entry " + std::to_string(i) + ")");
}

namespace {

void check_finite(const Mat& M, const char* what) {
    for (int r = 0; r < M.rows(); ++r)
        for (int c = 0; c < M.cols(); ++c)
            if (!std::isfinite(M(r, c))) {
                std::ostringstream os;
                os << "non-finite " << what << " entry (" << r << "," << c << ")";
                throw EvalError(os.str());
            }
}

} // namespace

JacobianPair linearize(const NonlinearModel& model, const Vec& x, const Vec& phi) {
    JacobianPair pair;
    pair.x0 = x;
    pair.phi0 = phi;
    Mat J = model.df_dx(x);
    Mat G = model.g(x, phi);
    check_finite(J, "df/dx");
    check_finite(G, "g");
    pair.A = Mat::Identity(model.n, model.n) + model.dt * J;
    pair.B = model.dt * G;
    return pair;
}

Vec step(const NonlinearModel& model, const Vec& x, const Vec& u, const Vec& phi,
         int time_index) {
    Vec xn = x + model.dt * (model.f(x) + model.g(x, phi) * u);
    for (int i = 0; i < xn.size(); ++i)
        if (!std::isfinite(xn(i)))
            throw DivergenceError("simulation diverged at step " + std::to_string(time_index),
                                  time_index);
    return xn;
}

LipschitzBounds estimate_lipschitz(const NonlinearModel& model,
                                   const StatePolytope& polytope,
                                   const FaultSet& faults,
                                   int samples,
                                   double safety_factor,
                                   unsigned seed) {
    if (samples < 2) throw ContractError("estimate_lipschitz needs at least 2 samples");
    const int n = model.n;
    for (int i = 0; i < n; ++i)
        if (!(polytope.box_hi(i) - polytope.box_lo(i) > 0))
            throw ConfigError("degenerate (zero-volume) domain for Lipschitz estimation");

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_state = [&]() {
        Vec x(n);
        for (int i = 0; i < n; ++i)
            x(i) = polytope.box_lo(i) + unit(rng) * (polytope.box_hi(i) - polytope.box_lo(i));
        return x;
    };
    std::uniform_int_distribution<int> pick_sub(0, faults.p - 1);

    struct Sample {
        Vec x, phi;
        Mat A, B;
    };
    std::vector<Sample> pts;
    pts.reserve(static_cast<size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        Sample s;
        s.x = random_state();
        s.phi = faults.fault_vector(pick_sub(rng), unit(rng));
        JacobianPair jp = linearize(model, s.x, s.phi);
        s.A = jp.A;
        s.B = jp.B;
        pts.push_back(std::move(s));
    }

    double ka = 0.0, kb = 0.0;
    Vec ka_coord = Vec::Zero(n);
    Vec kb_state = Vec::Zero(n);
    Vec kb_fault = Vec::Zero(model.p);
    auto opnorm = [](const Mat& M) {
        Eigen::JacobiSVD<Mat> svd(M);
        return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    };
    for (size_t a = 0; a < pts.size(); ++a) {
        for (size_t b = a + 1; b < pts.size(); ++b) {
            const double dx = (pts[a].x - pts[b].x).norm();
            const double dphi = (pts[a].phi - pts[b].phi).lpNorm<1>();
            const double dA = opnorm(pts[a].A - pts[b].A);
            const double dB = opnorm(pts[a].B - pts[b].B);
            if (dx > 1e-12) ka = std::max(ka, dA / dx);
            if (dx + dphi > 1e-12) kb = std::max(kb, dB / (dx + dphi));
        }
        // Per-coordinate ratios from one-coordinate perturbations of each sample.
        for (int c = 0; c < n; ++c) {
            Vec x2 = pts[a].x;
            const double h = 1e-4 * (polytope.box_hi(c) - polytope.box_lo(c));
            x2(c) = std::min(x2(c) + h, polytope.box_hi(c));
            const double dc = x2(c) - pts[a].x(c);
            if (dc <= 0) continue;
            JacobianPair jp = linearize(model, x2, pts[a].phi);
            ka_coord(c) = std::max(ka_coord(c), opnorm(jp.A - pts[a].A) / dc);
            kb_state(c) = std::max(kb_state(c), opnorm(jp.B - pts[a].B) / dc);
        }
        for (int i = 0; i < model.p; ++i) {
            Vec phi2 = FaultSet::nominal(model.p);
            phi2(i) = 0.0;
            JacobianPair lo = linearize(model, pts[a].x, phi2);
            JacobianPair hi = linearize(model, pts[a].x, FaultSet::nominal(model.p));
            kb_fault(i) = std::max(kb_fault(i), opnorm(hi.B - lo.B));
        }
    }

    LipschitzBounds out;
    out.kappa_A = safety_factor * ka;
    out.kappa_B = safety_factor * kb;
    out.kappa_A_coord = safety_factor * ka_coord;
    out.kappa_B_state_coord = safety_factor * kb_state;
    out.kappa_B_fault = safety_factor * kb_fault;
    out.certified = false;
    return out;
}

} // namespace ftsyn
