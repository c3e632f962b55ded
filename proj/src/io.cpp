#include "ftsyn/io.hpp"

#include "ftsyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ftsyn {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string qualify(const std::string& section, const std::string& key) {
    return section + "/" + key;
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("not finite");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": cannot parse '" + text + "' as a number");
    }
}

} // namespace

KvFile KvFile::parse(std::istream& is) {
    KvFile kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (kv.find(section, key) != nullptr)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" +
                              qualify(section, key) + "'");
        kv.entries_.push_back({section, key, value});
    }
    return kv;
}

KvFile KvFile::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    try {
        return parse(is);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void KvFile::add(const std::string& section, const std::string& key, const std::string& value) {
    if (find(section, key) != nullptr)
        throw ContractError("duplicate key '" + qualify(section, key) + "'");
    entries_.push_back({section, key, value});
}

const KvFile::Entry* KvFile::find(const std::string& section, const std::string& key) const {
    for (const auto& e : entries_)
        if (e.section == section && e.key == key) return &e;
    return nullptr;
}

bool KvFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::vector<std::string> KvFile::sections() const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
        if (std::find(out.begin(), out.end(), e.section) == out.end())
            out.push_back(e.section);
    return out;
}

std::string KvFile::get_string(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (e == nullptr)
        throw ConfigError("missing required key '" + qualify(section, key) + "'");
    consumed_.insert(qualify(section, key));
    return e->value;
}

std::string KvFile::get_string_or(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    return get_string(section, key);
}

double KvFile::get_double(const std::string& section, const std::string& key) const {
    return parse_double(get_string(section, key), qualify(section, key));
}

double KvFile::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
    if (!has(section, key)) return fallback;
    return get_double(section, key);
}

long KvFile::get_long(const std::string& section, const std::string& key) const {
    std::string s = get_string(section, key);
    try {
        size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(qualify(section, key) + ": cannot parse '" + s + "' as an integer");
    }
}

long KvFile::get_long_or(const std::string& section, const std::string& key,
                         long fallback) const {
    if (!has(section, key)) return fallback;
    return get_long(section, key);
}

bool KvFile::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string s = get_string(section, key);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError(qualify(section, key) + ": expected 'true' or 'false', got '" + s + "'");
}

Vec KvFile::get_vec(const std::string& section, const std::string& key) const {
    try {
        return parse_vec(get_string(section, key));
    } catch (const ConfigError& e) {
        throw ConfigError(qualify(section, key) + ": " + e.what());
    }
}

Mat KvFile::get_mat(const std::string& section, const std::string& key) const {
    try {
        return parse_mat(get_string(section, key));
    } catch (const ConfigError& e) {
        throw ConfigError(qualify(section, key) + ": " + e.what());
    }
}

void KvFile::reject_unconsumed() const {
    for (const auto& e : entries_)
        if (consumed_.count(qualify(e.section, e.key)) == 0)
            throw ConfigError("unknown key '" + qualify(e.section, e.key) + "'");
}

void KvFile::write(std::ostream& os) const {
    std::string current;
    bool first = true;
    for (const auto& e : entries_) {
        if (first || e.section != current) {
            if (!first) os << '\n';
            if (!e.section.empty()) os << '[' << e.section << "]\n";
            current = e.section;
            first = false;
        }
        os << e.key << " = " << e.value << '\n';
    }
}

void KvFile::write_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write '" + path + "'");
    write(os);
    if (!os) throw IoError("write failed for '" + path + "'");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_vec(const Vec& v) {
    std::string out;
    for (int i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += format_double(v(i));
    }
    return out;
}

std::string format_mat(const Mat& m) {
    std::string out;
    for (int r = 0; r < m.rows(); ++r) {
        if (r) out += " ; ";
        for (int c = 0; c < m.cols(); ++c) {
            if (c) out += ' ';
            out += format_double(m(r, c));
        }
    }
    return out;
}

Vec parse_vec(const std::string& text) {
    std::istringstream is(text);
    std::vector<double> vals;
    std::string tok;
    while (is >> tok) vals.push_back(parse_double(tok, "vector entry"));
    if (vals.empty()) throw ConfigError("empty vector");
    Vec v(static_cast<int>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v(static_cast<int>(i)) = vals[i];
    return v;
}

Mat parse_mat(const std::string& text) {
    std::vector<Vec> rows;
    size_t start = 0;
    while (start <= text.size()) {
        size_t semi = text.find(';', start);
        std::string row = text.substr(start, semi == std::string::npos ? std::string::npos
                                                                       : semi - start);
        rows.push_back(parse_vec(row));
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    const int cols = static_cast<int>(rows[0].size());
    for (const auto& r : rows)
        if (r.size() != cols) throw ConfigError("ragged matrix rows");
    Mat m(static_cast<int>(rows.size()), cols);
    for (size_t r = 0; r < rows.size(); ++r) m.row(static_cast<int>(r)) = rows[r];
    return m;
}

NonlinearModel ProblemConfig::make_model() const {
    switch (model_kind) {
    case ModelKind::Auv2: return auv2(auv, dt);
    case ModelKind::Auv5: return auv5(auv, dt);
    case ModelKind::Linear: return linear_test(A, B, dt, linear_fault_scaled);
    }
    throw ContractError("unknown model kind");
}

StatePolytope ProblemConfig::make_polytope() const {
    return StatePolytope::from_box(box_lo, box_hi);
}

InputBox ProblemConfig::make_input_box() const {
    InputBox box;
    box.u_max = u_max;
    box.validate();
    return box;
}

FaultSet ProblemConfig::make_fault_set() const {
    FaultSet fs;
    fs.p = static_cast<int>(u_max.size());
    return fs;
}

ProblemConfig load_problem_config(const std::string& path) {
    std::ifstream raw(path);
    if (!raw) throw IoError("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << raw.rdbuf();

    KvFile kv;
    try {
        std::istringstream is(buffer.str());
        kv = KvFile::parse(is);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }

    ProblemConfig cfg;
    cfg.echo = buffer.str();

    std::string name = kv.get_string("model", "name");
    cfg.dt = kv.get_double_or("model", "dt", 0.01);
    if (name == "auv2" || name == "auv5") {
        cfg.model_kind = name == "auv2" ? ProblemConfig::ModelKind::Auv2
                                        : ProblemConfig::ModelKind::Auv5;
        cfg.auv = name == "auv2" ? auv2_default_params() : auv5_default_params();
        cfg.auv.m = kv.get_double_or("model", "m", cfg.auv.m);
        cfg.auv.Jz = kv.get_double_or("model", "Jz", cfg.auv.Jz);
        cfg.auv.Xu = kv.get_double_or("model", "Xu", cfg.auv.Xu);
        cfg.auv.Xuu = kv.get_double_or("model", "Xuu", cfg.auv.Xuu);
        cfg.auv.Yv = kv.get_double_or("model", "Yv", cfg.auv.Yv);
        cfg.auv.Yvv = kv.get_double_or("model", "Yvv", cfg.auv.Yvv);
        cfg.auv.Nr = kv.get_double_or("model", "Nr", cfg.auv.Nr);
        cfg.auv.Nrr = kv.get_double_or("model", "Nrr", cfg.auv.Nrr);
        if (kv.has("model", "thrusters")) {
            Mat th = kv.get_mat("model", "thrusters"); // rows: alpha lx ly
            if (th.cols() != 3)
                throw ConfigError("model/thrusters: expected rows of 'alpha lx ly'");
            cfg.auv.thrusters.clear();
            for (int r = 0; r < th.rows(); ++r)
                cfg.auv.thrusters.push_back({th(r, 0), th(r, 1), th(r, 2)});
        }
        cfg.u_max = kv.has("model", "u_max") ? kv.get_vec("model", "u_max") : cfg.auv.u_max;
        cfg.auv.u_max = cfg.u_max;
    } else if (name == "linear") {
        cfg.model_kind = ProblemConfig::ModelKind::Linear;
        cfg.A = kv.get_mat("model", "A");
        cfg.B = kv.get_mat("model", "B");
        cfg.linear_fault_scaled = kv.get_bool_or("model", "fault_scaled", true);
        cfg.u_max = kv.get_vec("model", "u_max");
    } else {
        throw ConfigError("model/name: expected auv2, auv5, or linear; got '" + name + "'");
    }

    cfg.box_lo = kv.get_vec("domain", "box_lo");
    cfg.box_hi = kv.get_vec("domain", "box_hi");
    if (cfg.box_lo.size() != cfg.box_hi.size())
        throw ConfigError("domain: box_lo and box_hi differ in length");

    cfg.cegis.eta = kv.get_double_or("synthesis", "eta", 50.0);
    cfg.cegis.epsilon = kv.get_double_or("synthesis", "epsilon", 1e-4);
    cfg.cegis.tau = kv.get_double_or("synthesis", "tau", 0.999);
    cfg.cegis.max_iterations =
        static_cast<int>(kv.get_long_or("synthesis", "max_iterations", 50));
    cfg.cegis.sdp_tol = kv.get_double_or("synthesis", "sdp_tol", 1e-8);
    cfg.cegis.dt = cfg.dt;
    cfg.cegis.verifier.diam_tol_frac =
        kv.get_double_or("verifier", "diam_tol_frac", 1e-4);
    cfg.cegis.verifier.max_evals = kv.get_long_or("verifier", "max_evals", 1000000);
    cfg.cegis.verifier.threads =
        static_cast<int>(kv.get_long_or("verifier", "threads", 0));
    cfg.cegis.validate();

    if (kv.has("lipschitz", "kappa_A") || kv.has("lipschitz", "kappa_B")) {
        LipschitzBounds lb;
        lb.kappa_A = kv.get_double("lipschitz", "kappa_A");
        lb.kappa_B = kv.get_double("lipschitz", "kappa_B");
        lb.certified = kv.get_bool_or("lipschitz", "certified", false);
        if (lb.kappa_A < 0 || lb.kappa_B < 0)
            throw ConfigError("lipschitz constants must be nonnegative");
        cfg.lipschitz_override = lb;
    }

    cfg.seed = static_cast<unsigned>(kv.get_long_or("sampling", "seed", 1));

    kv.reject_unconsumed();
    return cfg;
}

namespace {

void add_echo(KvFile& kv, const std::string& echo) {
    // The verbatim source config rides along in its own section so outputs
    // are self-describing; line keys keep it parseable.
    std::istringstream is(echo);
    std::string line;
    int i = 0;
    while (std::getline(is, line)) kv.add("config_echo", "line" + std::to_string(i++), line);
}

} // namespace

void save_controller(const std::string& path, const Controller& c,
                     const std::string& model_name, const std::string& config_echo) {
    KvFile kv;
    kv.add("controller", "model", model_name);
    kv.add("controller", "n", std::to_string(c.K.cols()));
    kv.add("controller", "p", std::to_string(c.K.rows()));
    kv.add("controller", "K", format_mat(c.K));
    kv.add("controller", "H", format_mat(c.H));
    kv.add("controller", "P", format_mat(c.P));
    kv.add("controller", "Q", format_mat(c.Q));
    kv.add("controller", "u_max", format_vec(c.u_max.u_max));
    kv.add("certificate", "present", c.has_certificate ? "true" : "false");
    if (c.has_certificate) {
        kv.add("certificate", "lambda_star", format_double(c.certificate.lambda_star));
        kv.add("certificate", "margin", format_double(c.certificate.margin));
        kv.add("certificate", "lipschitz_certified",
               c.certificate.lipschitz_certified ? "true" : "false");
    }
    if (!config_echo.empty()) add_echo(kv, config_echo);
    kv.write_file(path);
}

StoredController load_controller(const std::string& path) {
    KvFile kv = KvFile::parse_file(path);
    StoredController out;
    out.model_name = kv.get_string("controller", "model");
    long n = kv.get_long("controller", "n");
    long p = kv.get_long("controller", "p");
    Controller& c = out.controller;
    c.K = kv.get_mat("controller", "K");
    c.H = kv.get_mat("controller", "H");
    c.P = kv.get_mat("controller", "P");
    c.Q = kv.get_mat("controller", "Q");
    c.u_max.u_max = kv.get_vec("controller", "u_max");
    if (c.K.rows() != p || c.K.cols() != n || c.H.rows() != p || c.H.cols() != n ||
        c.P.rows() != n || c.P.cols() != n || c.Q.rows() != n || c.Q.cols() != n ||
        c.u_max.u_max.size() != p)
        throw ConfigError(path + ": controller block dimensions are inconsistent");
    c.u_max.validate();
    c.has_certificate = kv.get_bool_or("certificate", "present", false);
    if (c.has_certificate) {
        c.certificate.lambda_star = kv.get_double("certificate", "lambda_star");
        c.certificate.margin = kv.get_double("certificate", "margin");
        c.certificate.lipschitz_certified =
            kv.get_bool_or("certificate", "lipschitz_certified", false);
    }
    // Echo lines and any certificate extras are deliberately not schema-checked.
    for (const auto& e : kv.entries())
        if (e.section == "config_echo") (void)kv.get_string("config_echo", e.key);
    kv.reject_unconsumed();
    return out;
}

Scenario load_scenario(const std::string& path, int n, int p) {
    KvFile kv = KvFile::parse_file(path);
    Scenario sc;
    sc.T = kv.get_double("scenario", "T");
    if (!(sc.T > 0)) throw ConfigError("scenario/T must be positive");
    sc.x0 = kv.get_vec("scenario", "x0");
    if (sc.x0.size() != n) throw ConfigError("scenario/x0 has wrong dimension");

    std::string kind = kv.get_string("reference", "kind");
    if (kind == "constant") {
        sc.reference = ReferenceSignal::make_constant(kv.get_vec("reference", "value"));
    } else if (kind == "sinusoid") {
        sc.reference = ReferenceSignal::make_sinusoid(kv.get_vec("reference", "amplitude"),
                                                      kv.get_vec("reference", "frequency_hz"),
                                                      kv.get_vec("reference", "offset"));
    } else if (kind == "piecewise") {
        std::vector<std::pair<double, Vec>> pieces;
        for (int i = 0;; ++i) {
            std::string key = "t" + std::to_string(i);
            if (!kv.has("reference", key)) break;
            Vec row = kv.get_vec("reference", key);
            if (row.size() != n + 1)
                throw ConfigError("reference/" + key + ": expected 't value...'");
            pieces.emplace_back(row(0), Vec(row.tail(n)));
        }
        sc.reference = ReferenceSignal::make_piecewise(std::move(pieces));
    } else {
        throw ConfigError("reference/kind: expected constant, sinusoid, or piecewise");
    }
    if (sc.reference.dim() != n)
        throw ConfigError("reference dimension does not match the model");

    for (int i = 0;; ++i) {
        std::string section = "phase" + std::to_string(i);
        if (!kv.has(section, "t_start")) break;
        FaultSchedule::Phase ph;
        ph.t_start = kv.get_double(section, "t_start");
        ph.t_end = kv.get_double(section, "t_end");
        ph.phi = kv.get_vec(section, "phi");
        sc.schedule.phases.push_back(std::move(ph));
    }
    if (sc.schedule.phases.empty()) sc.schedule = FaultSchedule::nominal(sc.T, p);
    sc.schedule.validate(sc.T, p);

    kv.reject_unconsumed();
    return sc;
}

} // namespace ftsyn
