#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ftsyn/errors.hpp"
#include "ftsyn/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace ftsyn;

namespace {

// Each test writes its fixtures into a fresh directory under the system
// temp root so runs cannot interfere with each other.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            path = base / ("ftsyn_io_test_" + std::to_string(::getpid()) + "_" +
                           std::to_string(i));
            if (std::filesystem::create_directory(path)) break;
        }
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name, const std::string& text) const {
        std::string p = (path / name).string();
        std::ofstream os(p);
        os << text;
        return p;
    }
};

KvFile parse_text(const std::string& text) {
    std::istringstream is(text);
    return KvFile::parse(is);
}

} // namespace

TEST_CASE("key-value parser handles sections, comments, and whitespace") {
    KvFile kv = parse_text("# leading comment\n"
                           "top = 1\n"
                           "\n"
                           "[alpha]\n"
                           "  x =  7.5 \n"
                           "name = hello world\n"
                           "[beta]\n"
                           "x = -2\n");
    CHECK(kv.has("", "top"));
    CHECK(kv.get_double("", "top") == 1.0);
    CHECK(kv.get_double("alpha", "x") == 7.5);
    CHECK(kv.get_string("alpha", "name") == "hello world");
    CHECK(kv.get_double("beta", "x") == -2.0);
    CHECK(kv.sections() == std::vector<std::string>{"", "alpha", "beta"});
    CHECK_NOTHROW(kv.reject_unconsumed());
}

TEST_CASE("key-value parser rejects malformed input with line numbers") {
    CHECK_THROWS_AS(parse_text("[sec\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_text("[]\n"), ConfigError);
    CHECK_THROWS_AS(parse_text("just a bare line\n"), ConfigError);
    CHECK_THROWS_AS(parse_text("= value\n"), ConfigError);
    CHECK_THROWS_AS(parse_text("[s]\nx = 1\nx = 2\n"), ConfigError);
    try {
        parse_text("ok = 1\noops\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("typed getters validate values and mark keys consumed") {
    KvFile kv = parse_text("[s]\n"
                           "d = 2.5\n"
                           "bad = 1.5x\n"
                           "i = 42\n"
                           "flag = true\n"
                           "v = 1 2 3\n"
                           "m = 1 2 ; 3 4\n");
    CHECK(kv.get_double("s", "d") == 2.5);
    CHECK_THROWS_AS(kv.get_double("s", "bad"), ConfigError);
    CHECK(kv.get_long("s", "i") == 42);
    CHECK_THROWS_AS(kv.get_long("s", "d"), ConfigError);
    CHECK(kv.get_bool_or("s", "flag", false));
    CHECK(kv.get_bool_or("s", "absent", true));
    CHECK_THROWS_AS(kv.get_bool_or("s", "i", false), ConfigError);
    Vec v = kv.get_vec("s", "v");
    REQUIRE(v.size() == 3);
    CHECK(v(2) == 3.0);
    Mat m = kv.get_mat("s", "m");
    REQUIRE(m.rows() == 2);
    CHECK(m(1, 0) == 3.0);
    CHECK(kv.get_double_or("s", "absent", -9.0) == -9.0);
    CHECK(kv.get_long_or("s", "absent", 7) == 7);
    CHECK(kv.get_string_or("s", "absent", "dflt") == "dflt");
    // "bad" was touched by the failed getter, so everything is consumed now.
    CHECK_NOTHROW(kv.reject_unconsumed());
}

TEST_CASE("unconsumed keys are rejected by name") {
    KvFile kv = parse_text("[s]\nused = 1\nmystery = 2\n");
    (void)kv.get_double("s", "used");
    try {
        kv.reject_unconsumed();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("s/mystery") != std::string::npos);
    }
}

TEST_CASE("missing required key names the key") {
    KvFile kv = parse_text("[s]\nx = 1\n");
    try {
        (void)kv.get_double("s", "y");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("s/y") != std::string::npos);
    }
}

TEST_CASE("programmatic add rejects duplicates") {
    KvFile kv;
    kv.add("s", "x", "1");
    CHECK_THROWS_AS(kv.add("s", "x", "2"), ContractError);
    CHECK_NOTHROW(kv.add("other", "x", "2"));
}

TEST_CASE("numeric round-trips through text are bit-identical") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    std::vector<double> values = {0.0, -0.0, 1.0 / 3.0, 0.1, 1e-300, 1e300, 38.0};
    for (int i = 0; i < 200; ++i) values.push_back(std::ldexp(mant(rng), expo(rng)));
    for (double v : values) {
        Vec parsed = parse_vec(format_double(v));
        REQUIRE(parsed.size() == 1);
        // Bit-for-bit equality, which also distinguishes -0.0 from +0.0.
        CHECK(std::signbit(parsed(0)) == std::signbit(v));
        CHECK(parsed(0) == v);
    }
    Mat m(2, 2);
    m << 1.0 / 3.0, -2e-17, 3.14159, -0.0;
    Mat back = parse_mat(format_mat(m));
    CHECK((back.array() == m.array()).all());
}

TEST_CASE("vector and matrix text forms reject malformed input") {
    CHECK_THROWS_AS(parse_vec(""), ConfigError);
    CHECK_THROWS_AS(parse_vec("1 two 3"), ConfigError);
    CHECK_THROWS_AS(parse_mat("1 2 ; 3"), ConfigError);
    CHECK_THROWS_AS(parse_mat("1 2 ; "), ConfigError);
    Vec v = parse_vec("  4   5 ");
    CHECK(v.size() == 2);
    Mat m = parse_mat("1 ; 2 ; 3");
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 1);
}

TEST_CASE("written files parse back to the same entries") {
    KvFile kv;
    kv.add("", "top", "1");
    kv.add("a", "x", format_double(1.0 / 7.0));
    kv.add("a", "y", "text with spaces");
    kv.add("b", "x", "2");
    std::ostringstream os;
    kv.write(os);
    KvFile back = parse_text(os.str());
    REQUIRE(back.entries().size() == kv.entries().size());
    for (size_t i = 0; i < kv.entries().size(); ++i) {
        CHECK(back.entries()[i].section == kv.entries()[i].section);
        CHECK(back.entries()[i].key == kv.entries()[i].key);
        CHECK(back.entries()[i].value == kv.entries()[i].value);
    }
}

TEST_CASE("problem config loads a full vehicle description") {
    TempDir tmp;
    std::string path = tmp.file("prob.cfg",
                                "[model]\n"
                                "name = auv2\n"
                                "m = 123\n"
                                "u_max = 10 10 10\n"
                                "[domain]\n"
                                "box_lo = -2 -2\n"
                                "box_hi = 2 2\n"
                                "[synthesis]\n"
                                "eta = 40\n"
                                "max_iterations = 12\n"
                                "[verifier]\n"
                                "max_evals = 5000\n"
                                "[sampling]\n"
                                "seed = 9\n");
    ProblemConfig cfg = load_problem_config(path);
    CHECK(cfg.model_kind == ProblemConfig::ModelKind::Auv2);
    CHECK(cfg.auv.m == 123.0);
    CHECK(cfg.auv.Jz == auv2_default_params().Jz); // untouched keys keep defaults
    CHECK(cfg.u_max.size() == 3);
    CHECK(cfg.u_max(0) == 10.0);
    CHECK(cfg.box_lo(0) == -2.0);
    CHECK(cfg.cegis.eta == 40.0);
    CHECK(cfg.cegis.max_iterations == 12);
    CHECK(cfg.cegis.verifier.max_evals == 5000);
    CHECK(cfg.seed == 9u);
    CHECK(cfg.echo.find("name = auv2") != std::string::npos);

    NonlinearModel mdl = cfg.make_model();
    CHECK(mdl.n == 2);
    CHECK(mdl.p == 3);
    StatePolytope poly = cfg.make_polytope();
    CHECK(poly.rows() == 4);
    CHECK(cfg.make_input_box().u_max(2) == 10.0);
    CHECK(cfg.make_fault_set().p == 3);
}

TEST_CASE("problem config loads a linear plant with explicit matrices") {
    TempDir tmp;
    std::string path = tmp.file("lin.cfg",
                                "[model]\n"
                                "name = linear\n"
                                "A = 0 1 ; -1 -0.5\n"
                                "B = 0 ; 1\n"
                                "u_max = 3\n"
                                "fault_scaled = false\n"
                                "dt = 0.02\n"
                                "[domain]\n"
                                "box_lo = -1 -1\n"
                                "box_hi = 1 1\n");
    ProblemConfig cfg = load_problem_config(path);
    CHECK(cfg.model_kind == ProblemConfig::ModelKind::Linear);
    CHECK(cfg.A(0, 1) == 1.0);
    CHECK(cfg.B(1, 0) == 1.0);
    CHECK_FALSE(cfg.linear_fault_scaled);
    CHECK(cfg.dt == 0.02);
    NonlinearModel mdl = cfg.make_model();
    CHECK(mdl.n == 2);
    CHECK(mdl.p == 1);
}

TEST_CASE("problem config enforces its schema") {
    TempDir tmp;
    std::string base = "[model]\nname = auv2\n[domain]\nbox_lo = -2 -2\nbox_hi = 2 2\n";
    CHECK_NOTHROW(load_problem_config(tmp.file("ok.cfg", base)));
    CHECK_THROWS_AS(load_problem_config(tmp.file("unknown.cfg", base + "[extra]\nz = 1\n")),
                    ConfigError);
    CHECK_THROWS_AS(
        load_problem_config(tmp.file("badname.cfg",
                                     "[model]\nname = quadrotor\n"
                                     "[domain]\nbox_lo = -1\nbox_hi = 1\n")),
        ConfigError);
    CHECK_THROWS_AS(
        load_problem_config(tmp.file("ragged.cfg",
                                     "[model]\nname = auv2\n"
                                     "[domain]\nbox_lo = -2\nbox_hi = 2 2\n")),
        ConfigError);
    CHECK_THROWS_AS(load_problem_config((tmp.path / "missing.cfg").string()), IoError);
}

TEST_CASE("lipschitz overrides require both constants and nonnegativity") {
    TempDir tmp;
    std::string base = "[model]\nname = auv2\n[domain]\nbox_lo = -2 -2\nbox_hi = 2 2\n";
    ProblemConfig cfg = load_problem_config(
        tmp.file("lip.cfg", base + "[lipschitz]\nkappa_A = 0.5\nkappa_B = 0.25\n"
                                   "certified = true\n"));
    REQUIRE(cfg.lipschitz_override.has_value());
    CHECK(cfg.lipschitz_override->kappa_A == 0.5);
    CHECK(cfg.lipschitz_override->kappa_B == 0.25);
    CHECK(cfg.lipschitz_override->certified);
    CHECK_THROWS_AS(
        load_problem_config(tmp.file("lip_half.cfg", base + "[lipschitz]\nkappa_A = 0.5\n")),
        ConfigError);
    CHECK_THROWS_AS(
        load_problem_config(tmp.file(
            "lip_neg.cfg", base + "[lipschitz]\nkappa_A = -1\nkappa_B = 0\n")),
        ConfigError);
}

TEST_CASE("controllers round-trip through files with certificates and echo") {
    TempDir tmp;
    Controller c;
    c.K = Mat(2, 2);
    c.K << -43987.0, 308.0, 1.0 / 3.0, -7e-12;
    c.H = Mat::Zero(2, 2);
    c.H(0, 1) = 0.125;
    c.Q = Mat(2, 2);
    c.Q << 2.0, 0.5, 0.5, 1.0;
    c.P = c.Q.inverse();
    c.u_max.u_max = Vec::Constant(2, 38.0);
    c.has_certificate = true;
    c.certificate.lambda_star = 1.25e-4;
    c.certificate.margin = 9.99e-5;
    c.certificate.lipschitz_certified = true;

    std::string path = (tmp.path / "ctrl.cfg").string();
    save_controller(path, c, "auv2", "[model]\nname = auv2\n");
    StoredController back = load_controller(path);
    CHECK(back.model_name == "auv2");
    CHECK((back.controller.K.array() == c.K.array()).all());
    CHECK((back.controller.H.array() == c.H.array()).all());
    CHECK((back.controller.P.array() == c.P.array()).all());
    CHECK((back.controller.Q.array() == c.Q.array()).all());
    CHECK((back.controller.u_max.u_max.array() == c.u_max.u_max.array()).all());
    REQUIRE(back.controller.has_certificate);
    CHECK(back.controller.certificate.lambda_star == c.certificate.lambda_star);
    CHECK(back.controller.certificate.margin == c.certificate.margin);
    CHECK(back.controller.certificate.lipschitz_certified);

    // The original config text is embedded and survives re-parsing.
    KvFile kv = KvFile::parse_file(path);
    CHECK(kv.get_string("config_echo", "line1") == "name = auv2");
}

TEST_CASE("controllers without certificates round-trip too") {
    TempDir tmp;
    Controller c;
    c.K = Mat::Constant(1, 1, -2.0);
    c.H = Mat::Zero(1, 1);
    c.Q = Mat::Identity(1, 1);
    c.P = Mat::Identity(1, 1);
    c.u_max.u_max = Vec::Constant(1, 1.0);
    std::string path = (tmp.path / "ctrl.cfg").string();
    save_controller(path, c, "linear", "");
    StoredController back = load_controller(path);
    CHECK_FALSE(back.controller.has_certificate);
    CHECK(back.controller.K(0, 0) == -2.0);
}

TEST_CASE("controller files with inconsistent dimensions are rejected") {
    TempDir tmp;
    Controller c;
    c.K = Mat::Constant(1, 1, -2.0);
    c.H = Mat::Zero(1, 1);
    c.Q = Mat::Identity(1, 1);
    c.P = Mat::Identity(1, 1);
    c.u_max.u_max = Vec::Constant(1, 1.0);
    std::string path = (tmp.path / "ctrl.cfg").string();
    save_controller(path, c, "linear", "");

    // Corrupt the declared state dimension and reload.
    std::ifstream is(path);
    std::stringstream buf;
    buf << is.rdbuf();
    std::string text = buf.str();
    size_t pos = text.find("n = 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 5, "n = 2");
    std::string bad = tmp.file("bad.cfg", text);
    CHECK_THROWS_AS(load_controller(bad), ConfigError);
}

TEST_CASE("scenario files load phases and references") {
    TempDir tmp;
    std::string path = tmp.file("scn.cfg",
                                "[scenario]\n"
                                "T = 30\n"
                                "x0 = 0 0\n"
                                "[reference]\n"
                                "kind = constant\n"
                                "value = 0.5 0\n"
                                "[phase0]\n"
                                "t_start = 0\n"
                                "t_end = 10\n"
                                "phi = 1 1 1\n"
                                "[phase1]\n"
                                "t_start = 10\n"
                                "t_end = 20\n"
                                "phi = 1 1 0.1\n"
                                "[phase2]\n"
                                "t_start = 20\n"
                                "t_end = 30\n"
                                "phi = 1 0.1 1\n");
    Scenario sc = load_scenario(path, 2, 3);
    CHECK(sc.T == 30.0);
    CHECK(sc.x0.size() == 2);
    REQUIRE(sc.schedule.phases.size() == 3);
    CHECK(sc.schedule.phases[1].phi(2) == 0.1);
    CHECK(sc.reference.at(12.0)(0) == 0.5);
}

TEST_CASE("scenario reference kinds cover sinusoid and piecewise") {
    TempDir tmp;
    std::string sin_path = tmp.file("sin.cfg",
                                    "[scenario]\n"
                                    "T = 1\n"
                                    "x0 = 0\n"
                                    "[reference]\n"
                                    "kind = sinusoid\n"
                                    "amplitude = 2\n"
                                    "frequency_hz = 0.25\n"
                                    "offset = 1\n");
    Scenario sc = load_scenario(sin_path, 1, 2);
    CHECK(sc.schedule.phases.size() == 1); // nominal schedule filled in
    CHECK(sc.reference.at(0.0)(0) == doctest::Approx(1.0));
    CHECK(sc.reference.at(1.0)(0) == doctest::Approx(3.0)); // quarter period

    std::string pw_path = tmp.file("pw.cfg",
                                   "[scenario]\n"
                                   "T = 2\n"
                                   "x0 = 0\n"
                                   "[reference]\n"
                                   "kind = piecewise\n"
                                   "t0 = 0 1\n"
                                   "t1 = 1 -1\n");
    Scenario pw = load_scenario(pw_path, 1, 2);
    CHECK(pw.reference.at(0.5)(0) == 1.0);
    CHECK(pw.reference.at(1.5)(0) == -1.0);
}

TEST_CASE("scenario files are schema-checked") {
    TempDir tmp;
    std::string good = "[scenario]\nT = 1\nx0 = 0\n[reference]\nkind = constant\nvalue = 0\n";
    CHECK_NOTHROW(load_scenario(tmp.file("ok.cfg", good), 1, 2));
    CHECK_THROWS_AS(load_scenario(tmp.file("ok2.cfg", good), 2, 2), ConfigError); // x0 dim
    CHECK_THROWS_AS(
        load_scenario(tmp.file("negT.cfg",
                               "[scenario]\nT = 0\nx0 = 0\n"
                               "[reference]\nkind = constant\nvalue = 0\n"),
                      1, 2),
        ConfigError);
    CHECK_THROWS_AS(
        load_scenario(tmp.file("badref.cfg",
                               "[scenario]\nT = 1\nx0 = 0\n"
                               "[reference]\nkind = ramp\nvalue = 0\n"),
                      1, 2),
        ConfigError);
    CHECK_THROWS_AS(
        load_scenario(tmp.file("hole.cfg",
                               good + "[phase0]\nt_start = 0\nt_end = 0.4\nphi = 1 1\n"
                                      "[phase1]\nt_start = 0.6\nt_end = 1\nphi = 1 1\n"),
                      1, 2),
        ConfigError);
    CHECK_THROWS_AS(
        load_scenario(tmp.file("extra.cfg", good + "[mystery]\nx = 1\n"), 1, 2),
        ConfigError);
}
