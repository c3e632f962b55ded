#pragma once

#include "ftsyn/bench.hpp"
#include "ftsyn/learner.hpp"
#include "ftsyn/sim.hpp"

#include <iosfwd>
#include <map>
#include <set>

namespace ftsyn {

/// Line-oriented key-value text with [section] headers. Lines starting
/// with '#' are comments; values keep 17 significant digits so numeric
/// round-trips are bit-identical.
class KvFile {
  public:
    struct Entry {
        std::string section, key, value;
    };

    static KvFile parse(std::istream& is);
    static KvFile parse_file(const std::string& path);

    void add(const std::string& section, const std::string& key, const std::string& value);
    bool has(const std::string& section, const std::string& key) const;
    std::vector<std::string> sections() const; // in first-appearance order

    // Typed getters; every get marks the key as consumed.
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    long get_long(const std::string& section, const std::string& key) const;
    long get_long_or(const std::string& section, const std::string& key, long fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
    Vec get_vec(const std::string& section, const std::string& key) const;
    Mat get_mat(const std::string& section, const std::string& key) const;

    /// Throws ConfigError naming the first entry never consumed by a getter.
    void reject_unconsumed() const;

    void write(std::ostream& os) const;
    void write_file(const std::string& path) const;

    const std::vector<Entry>& entries() const { return entries_; }

  private:
    const Entry* find(const std::string& section, const std::string& key) const;
    std::vector<Entry> entries_;
    mutable std::set<std::string> consumed_;
};

std::string format_double(double v); // %.17g
std::string format_vec(const Vec& v);
std::string format_mat(const Mat& m); // rows joined by " ; "
Vec parse_vec(const std::string& text);
Mat parse_mat(const std::string& text);

/// Everything a synthesis run needs, schema-validated on load.
struct ProblemConfig {
    enum class ModelKind { Auv2, Auv5, Linear };
    ModelKind model_kind = ModelKind::Auv2;
    AuvParams auv;    // Auv2 / Auv5
    Mat A, B;         // Linear
    bool linear_fault_scaled = true;
    double dt = 0.01;

    Vec box_lo, box_hi;
    Vec u_max;

    CegisConfig cegis;
    std::optional<LipschitzBounds> lipschitz_override;
    unsigned seed = 1;

    std::string echo; // verbatim source text, re-embedded in outputs

    NonlinearModel make_model() const;
    StatePolytope make_polytope() const;
    InputBox make_input_box() const;
    FaultSet make_fault_set() const;
};

ProblemConfig load_problem_config(const std::string& path);

struct StoredController {
    std::string model_name;
    Controller controller;
};

void save_controller(const std::string& path, const Controller& c,
                     const std::string& model_name, const std::string& config_echo);
StoredController load_controller(const std::string& path);

struct Scenario {
    double T = 0.0;
    Vec x0;
    ReferenceSignal reference;
    FaultSchedule schedule;
};

Scenario load_scenario(const std::string& path, int n, int p);

} // namespace ftsyn
