#include "ftsyn/sim.hpp"

#include "ftsyn/errors.hpp"
#include "ftsyn/ldi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace ftsyn {

void FaultSchedule::validate(double T, int p) const {
    if (phases.empty()) throw ConfigError("fault schedule has no phases");
    double cursor = 0.0;
    for (size_t i = 0; i < phases.size(); ++i) {
        const Phase& ph = phases[i];
        if (ph.phi.size() != p)
            throw ConfigError("fault schedule phase " + std::to_string(i) +
                              ": phi has wrong dimension");
        for (int j = 0; j < p; ++j)
            if (ph.phi(j) < 0.0 || ph.phi(j) > 1.0)
                throw ConfigError("fault schedule phase " + std::to_string(i) +
                                  ": efficiency outside [0,1]");
        if (std::abs(ph.t_start - cursor) > 1e-9)
            throw ConfigError("fault schedule phases must be contiguous from t = 0");
        if (!(ph.t_end > ph.t_start))
            throw ConfigError("fault schedule phase " + std::to_string(i) +
                              ": t_end must exceed t_start");
        cursor = ph.t_end;
    }
    if (cursor < T - 1e-9)
        throw ConfigError("fault schedule does not cover the full horizon");
}

int FaultSchedule::phase_index(double t) const {
    for (size_t i = 0; i + 1 < phases.size(); ++i)
        if (t < phases[i].t_end) return static_cast<int>(i);
    return static_cast<int>(phases.size()) - 1;
}

const Vec& FaultSchedule::at(double t) const {
    return phases[static_cast<size_t>(phase_index(t))].phi;
}

FaultSchedule FaultSchedule::nominal(double T, int p) {
    FaultSchedule s;
    s.phases.push_back({0.0, T, Vec::Ones(p)});
    return s;
}

ReferenceSignal ReferenceSignal::make_constant(const Vec& x_ref) {
    ReferenceSignal r;
    r.kind = Kind::Constant;
    r.constant = x_ref;
    return r;
}

ReferenceSignal ReferenceSignal::make_sinusoid(const Vec& amplitude, const Vec& frequency_hz,
                                               const Vec& offset) {
    if (amplitude.size() != frequency_hz.size() || amplitude.size() != offset.size())
        throw ConfigError("sinusoid reference: channel counts differ");
    ReferenceSignal r;
    r.kind = Kind::Sinusoid;
    r.amplitude = amplitude;
    r.frequency_hz = frequency_hz;
    r.offset = offset;
    return r;
}

ReferenceSignal ReferenceSignal::make_piecewise(std::vector<std::pair<double, Vec>> pieces) {
    if (pieces.empty()) throw ConfigError("piecewise reference: no pieces");
    for (size_t i = 1; i < pieces.size(); ++i) {
        if (pieces[i].first <= pieces[i - 1].first)
            throw ConfigError("piecewise reference: times must be strictly increasing");
        if (pieces[i].second.size() != pieces[0].second.size())
            throw ConfigError("piecewise reference: inconsistent dimensions");
    }
    if (pieces[0].first > 1e-12)
        throw ConfigError("piecewise reference must start at t = 0");
    ReferenceSignal r;
    r.kind = Kind::Piecewise;
    r.pieces = std::move(pieces);
    return r;
}

int ReferenceSignal::dim() const {
    switch (kind) {
    case Kind::Constant: return static_cast<int>(constant.size());
    case Kind::Sinusoid: return static_cast<int>(amplitude.size());
    case Kind::Piecewise: return static_cast<int>(pieces[0].second.size());
    }
    return 0;
}

Vec ReferenceSignal::at(double t) const {
    switch (kind) {
    case Kind::Constant: return constant;
    case Kind::Sinusoid: {
        Vec r(amplitude.size());
        for (int i = 0; i < r.size(); ++i)
            r(i) = offset(i) +
                   amplitude(i) * std::sin(2.0 * M_PI * frequency_hz(i) * t);
        return r;
    }
    case Kind::Piecewise: {
        size_t idx = 0;
        while (idx + 1 < pieces.size() && t >= pieces[idx + 1].first) ++idx;
        return pieces[idx].second;
    }
    }
    throw ContractError("reference signal: unknown kind");
}

Trace simulate(const NonlinearModel& model, const Controller& controller,
               const FaultSchedule& schedule, const ReferenceSignal& reference,
               double T, const Vec& x0) {
    if (controller.K.rows() != model.p || controller.K.cols() != model.n)
        throw ContractError("controller gain must be p x n");
    if (reference.dim() != model.n)
        throw ContractError("reference dimension does not match the model");
    if (x0.size() != model.n) throw ContractError("initial state has wrong dimension");
    schedule.validate(T, model.p);

    const bool have_P = controller.P.rows() == model.n && controller.P.cols() == model.n;
    const int steps = static_cast<int>(std::llround(T / model.dt));

    Trace tr;
    tr.dt = model.dt;
    tr.t.reserve(static_cast<size_t>(steps) + 1);
    Vec x = x0;
    for (int k = 0; k <= steps; ++k) {
        const double t = k * model.dt;
        const Vec ref = reference.at(t);
        const Vec phi = schedule.at(t);
        const Vec e = x - ref;
        const Vec u = saturate(controller.K * e, controller.u_max);

        tr.t.push_back(t);
        tr.x.push_back(x);
        tr.u.push_back(u);
        tr.phi.push_back(phi);
        tr.x_ref.push_back(ref);
        tr.V.push_back(have_P ? double(e.transpose() * controller.P * e)
                              : std::numeric_limits<double>::quiet_NaN());

        if (k == steps) break;
        x = step(model, x, u, phi, k);
        if (x.norm() > 1e6)
            throw DivergenceError("state norm exceeded 1e6 at t = " +
                                      std::to_string((k + 1) * model.dt),
                                  k + 1);
    }
    return tr;
}

SimMetrics metrics(const Trace& trace, const FaultSchedule& schedule, const Vec& u_max) {
    if (trace.steps() == 0) throw ContractError("metrics: empty trace");
    const int p = static_cast<int>(trace.u[0].size());
    if (u_max.size() != 0 && u_max.size() != p)
        throw ContractError("metrics: u_max dimension does not match the trace");

    SimMetrics out;
    for (size_t ph = 0; ph < schedule.phases.size(); ++ph) {
        const auto& phase = schedule.phases[ph];
        PhaseMetrics m;
        m.phase = static_cast<int>(ph);
        m.t_start = phase.t_start;
        m.t_end = phase.t_end;
        m.saturation_duty = Vec::Zero(p);

        std::vector<double> errs;
        int count = 0;
        for (int k = 0; k < trace.steps(); ++k) {
            const double t = trace.t[static_cast<size_t>(k)];
            if (t < phase.t_start - 1e-12) continue;
            if (t > phase.t_end + 1e-12) break;
            // A boundary sample belongs to the phase it starts.
            if (t >= phase.t_end - 1e-12 && ph + 1 < schedule.phases.size()) break;
            const Vec e = trace.x[static_cast<size_t>(k)] - trace.x_ref[static_cast<size_t>(k)];
            const double en = e.norm();
            errs.push_back(en);
            if (count == 0) m.initial_error = en;
            m.max_error = std::max(m.max_error, en);
            m.final_error = en;
            if (u_max.size() == p)
                for (int i = 0; i < p; ++i)
                    if (std::abs(trace.u[static_cast<size_t>(k)](i)) >= u_max(i) - 1e-12)
                        m.saturation_duty(i) += 1.0;
            ++count;
        }
        if (count == 0) continue;
        m.saturation_duty /= count;
        const int tail = std::max(1, count / 10);
        double acc = 0.0;
        for (int i = count - tail; i < count; ++i) acc += errs[static_cast<size_t>(i)];
        m.steady_state_error = acc / tail;
        out.phases.push_back(std::move(m));
    }
    return out;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
    if (trace.steps() == 0) throw ContractError("write_trace_csv: empty trace");
    const int n = static_cast<int>(trace.x[0].size());
    const int p = static_cast<int>(trace.u[0].size());
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= p; ++i) os << ",u" << i;
    for (int i = 1; i <= p; ++i) os << ",phi" << i;
    for (int i = 1; i <= n; ++i) os << ",ref" << i;
    os << ",V\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (int k = 0; k < trace.steps(); ++k) {
        const size_t s = static_cast<size_t>(k);
        put(trace.t[s]);
        for (int i = 0; i < n; ++i) { os << ','; put(trace.x[s](i)); }
        for (int i = 0; i < p; ++i) { os << ','; put(trace.u[s](i)); }
        for (int i = 0; i < p; ++i) { os << ','; put(trace.phi[s](i)); }
        for (int i = 0; i < n; ++i) { os << ','; put(trace.x_ref[s](i)); }
        os << ',';
        put(trace.V[s]);
        os << '\n';
    }
}

void write_metrics_report(std::ostream& os, const SimMetrics& m) {
    for (const auto& ph : m.phases) {
        os << "phase " << ph.phase << " [" << ph.t_start << ", " << ph.t_end << "]\n";
        os << "  initial_error      " << ph.initial_error << '\n';
        os << "  max_error          " << ph.max_error << '\n';
        os << "  final_error        " << ph.final_error << '\n';
        os << "  steady_state_error " << ph.steady_state_error << '\n';
        os << "  saturation_duty   ";
        for (int i = 0; i < ph.saturation_duty.size(); ++i)
            os << ' ' << ph.saturation_duty(i);
        os << '\n';
    }
}

} // namespace ftsyn
