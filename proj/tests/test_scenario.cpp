#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cp2flow/diagnostics.hpp"
#include "cp2flow/scenario.hpp"
#include "support.hpp"

using namespace cp2flow;
using testsupport::pi;

namespace {

// Time for A' = 6A - c to carry `a0` down to zero, by RK4.
double area_ode_extinction(double a0, double c) {
    const double h = 1e-6;
    double a = a0, t = 0.0;
    const auto f = [c](double x) { return 6 * x - c; };
    while (true) {
        const double k1 = f(a), k2 = f(a + 0.5 * h * k1), k3 = f(a + 0.5 * h * k2), k4 = f(a + h * k3);
        const double next = a + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (next <= 0)
            return t + h * a / (a - next);
        a = next;
        t += h;
    }
}

// Symplectic area of a Euclidean disc measured on a fine polygon, paired with its negative so the
// curve is a valid Chekanov configuration.
double polygon_disc_area(PlanarPoint c, double r) {
    ProfileCurve pair;
    pair.symmetry_class = SymmetryClass::Chekanov;
    pair.components.push_back(testsupport::sample_loop([&](double t) { return c + std::polar(r, t); }, 4096));
    pair.components.push_back(testsupport::sample_loop([&](double t) { return -c + std::polar(r, t); }, 4096));
    return enclosed_area(pair, 0);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

FlowEvent ev(FlowEventKind k) { return FlowEvent{k, 0.0, "", std::nullopt, 0.0}; }

}  // namespace

TEST_CASE("shrink times follow the area ode") {
    CHECK(exact_shrink_time(1 / std::sqrt(2.0)) == doctest::Approx(std::log(4.0) / 6).epsilon(1e-14));
    CHECK(exact_shrink_time(1 / std::sqrt(2.0)) == doctest::Approx(area_ode_extinction(pi / 2, 4 * pi)).epsilon(1e-6));
    CHECK(exact_shrink_time_chekanov(pi / 18) == doctest::Approx(std::log(6.0 / 5.0) / 6).epsilon(1e-14));
    CHECK(exact_shrink_time_chekanov(pi / 18) == doctest::Approx(area_ode_extinction(pi / 18, 2 * pi)).epsilon(1e-6));
    CHECK(exact_shrink_time(0.3) == doctest::Approx(area_ode_extinction(2 * pi * 0.09 / 1.18, 4 * pi)).epsilon(1e-6));
    CHECK_THROWS_AS(exact_shrink_time(1.0), Error);
    CHECK_THROWS_AS(exact_shrink_time_chekanov(pi / 3), Error);
}

TEST_CASE("radius bound for shrinking discs") {
    CHECK(shrink_radius_bound(pi / 18) == doctest::Approx(0.25).epsilon(1e-14));
    for (double a : {0.01, 0.2, 1.0}) {
        const double R = shrink_radius_bound(a);
        CHECK(R * R * (pi - 2 * a) == doctest::Approx(a).epsilon(1e-13));
    }
    CHECK_THROWS_AS(shrink_radius_bound(0.0), Error);
}

TEST_CASE("simple generators") {
    FlowConfig cfg;
    cfg.vertices_per_component = 256;
    GeneratorSpec round;
    const Generated g = generate(round, cfg);
    CHECK(g.curve.components.at(0).size() == 256);
    CHECK(monotone_defect(g.curve).defect < 1e-12);

    GeneratorSpec pair;
    pair.kind = GeneratorKind::ChekanovPair;
    pair.target_area = pi / 3;
    const Generated p = generate(pair, cfg);
    CHECK(p.curve.symmetry_class == SymmetryClass::Chekanov);
    CHECK(enclosed_area(p.curve, 0) == doctest::Approx(pi / 3).epsilon(1e-10));

    GeneratorSpec lens;
    lens.kind = GeneratorKind::ChekanovLens;
    const Generated l = generate(lens, cfg);
    CHECK(l.curve.symmetry_class == SymmetryClass::Chekanov);
    CHECK(monotone_defect(l.curve).defect < 1e-10);
    CHECK(neck_count(l.curve) == 2);

    GeneratorSpec noisy;
    noisy.kind = GeneratorKind::PerturbedClifford;
    noisy.random_amplitude = 0.02;
    noisy.seed = 7;
    const Generated a = generate(noisy, cfg), b = generate(noisy, cfg);
    CHECK(a.curve.components == b.curve.components);
    noisy.seed = 8;
    CHECK_FALSE(generate(noisy, cfg).curve.components == a.curve.components);

    GeneratorSpec far;
    far.kind = GeneratorKind::ChekanovPair;
    far.center = 2.0;
    far.radius = 2.5;
    CHECK_THROWS_AS(generate(far, cfg), Error);
}

TEST_CASE("two-surgery construction self-checks") {
    FlowConfig cfg;
    cfg.vertices_per_component = 512;
    GeneratorSpec spec;
    spec.kind = GeneratorKind::TwoSurgery;
    const Generated g = generate(spec, cfg);
    REQUIRE(g.two_surgery.has_value());
    const TwoSurgeryReport& r = *g.two_surgery;

    CHECK(g.curve.symmetry_class == SymmetryClass::Clifford);
    CHECK(monotone_defect(g.curve).defect < 1e-10);
    CHECK(r.triangle_area == doctest::Approx(pi / 216).epsilon(1e-6));
    CHECK(r.psi > 2 * pi / 3);
    CHECK(r.wide_cone_crossings == 12);
    CHECK(r.radius_bound == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(is_embedded(g.curve));

    // the lower pocket holds the target disc away from the origin
    CHECK(r.lower.area == doctest::Approx(pi / 18).epsilon(1e-6));
    CHECK(polygon_disc_area(r.lower.center, r.lower.radius) == doctest::Approx(r.lower.area).epsilon(1e-6));
    CHECK(r.lower.min_r > r.radius_bound);
    CHECK(r.lower.clearance >= 0);

    // the upper pocket sits in the 30 degree sector between pi/3 and pi/2
    CHECK(std::arg(r.upper.center) > pi / 3);
    CHECK(std::arg(r.upper.center) < pi / 2);
    CHECK(polygon_disc_area(r.upper.center, r.upper.radius) == doctest::Approx(r.upper.area).epsilon(1e-6));
    CHECK_FALSE(r.ok());
    for (const auto& f : r.failures)
        CHECK(f.find("upper") != std::string::npos);
}

TEST_CASE("no disc of area pi/18 fits in a 30 degree sector") {
    // discs inscribed in the sector (pi/3, pi/2), centre on the bisector, scanned over distance
    const double half = pi / 12;
    double best = 0.0;
    for (double d = 0.02; d < 50; d *= 1.02)
        best = std::max(best, polygon_disc_area(std::polar(d, 5 * pi / 12), d * std::sin(half)));
    CHECK(best < pi / 18);
    CHECK(best < pi / 36);
    CHECK(best > 0.04);
}

TEST_CASE("builtin scenarios round-trip through json") {
    for (const auto& name : builtin_scenario_names()) {
        const ScenarioSpec s = builtin_scenario(name);
        const std::string text = scenario_to_json(s);
        const ScenarioSpec back = scenario_from_json(text);
        CHECK(scenario_to_json(back) == text);
        CHECK(config_hash(back) == config_hash(s));
    }
    CHECK_THROWS_AS(builtin_scenario("nope"), Error);
}

TEST_CASE("config files") {
    const ScenarioSpec s = scenario_from_json(
        R"({"name": "mine", "base": "round_circle", "flow": {"vertices_per_component": 64},
            "expected_events": ["graphical-attained?", "converged"]})");
    CHECK(s.name == "mine");
    CHECK(s.flow.vertices_per_component == 64);
    CHECK(s.flow.monotone_projection);
    REQUIRE(s.expected.size() == 2);
    CHECK(s.expected[0].optional);
    CHECK_FALSE(s.expected[1].optional);
    CHECK(config_hash(s) != config_hash(builtin_scenario("round_circle")));

    const auto config_error = [](const std::string& text) {
        try {
            scenario_from_json(text);
        } catch (const Error& e) {
            return e.kind() == ErrorKind::Config;
        }
        return false;
    };
    CHECK(config_error(R"({"name": "x", "colour": 1})"));
    CHECK(config_error(R"({"name": "x", "flow": {"cfl2": 0.1}})"));
    CHECK(config_error(R"({"name": "x", "generator": {"two_surgery": {"r_x": 1}}})"));
    CHECK(config_error(R"({"name": "x", "generator": {"kind": "square"}})"));
    CHECK(config_error(R"({"name": "x", "expected_events": ["exploded"]})"));
    CHECK(config_error(R"({"name": "x", "flow": {"cfl": "fast"}})"));
    CHECK(config_error(R"({"name": "x", "flow": {"cfl": -1}})"));
    CHECK(config_error(R"({"flow": {}})"));
    CHECK(config_error("{not json"));
}

TEST_CASE("event matching") {
    using K = FlowEventKind;
    const std::vector<ExpectedEvent> want{{K::SingularityDetected, false}, {K::SurgeryPerformed, false},
                                          {K::GraphicalAttained, true}, {K::Converged, false}};
    CHECK(event_diff(want, {ev(K::SingularityDetected), ev(K::SurgeryPerformed), ev(K::Converged)}).empty());
    CHECK(event_diff(want, {ev(K::SingularityDetected), ev(K::ScaleProbeHit), ev(K::SurgeryPerformed),
                            ev(K::GraphicalAttained), ev(K::ConeCountDropped), ev(K::Converged)})
              .empty());
    CHECK_FALSE(event_diff(want, {ev(K::SingularityDetected), ev(K::Converged)}).empty());
    CHECK_FALSE(event_diff(want, {ev(K::SingularityDetected), ev(K::SurgeryPerformed), ev(K::GraphicalAttained),
                                  ev(K::GraphicalAttained), ev(K::Converged)})
                    .empty());
    CHECK_FALSE(event_diff(want, {ev(K::SingularityDetected), ev(K::SurgeryPerformed), ev(K::Converged),
                                  ev(K::InvariantViolation)})
                    .empty());
    CHECK(event_diff({}, {ev(K::ScaleProbeHit)}).empty());
}

TEST_CASE("svg rendering") {
    const ProfileCurve unit = testsupport::circle(1.0, 256);
    SvgDecorations d;
    d.cones = {ConeSpec{0.0, pi / 2}};
    const std::string svg = render_svg({unit}, d);
    CHECK(svg == render_svg({unit}, d));
    std::size_t markers = 0;
    for (std::size_t at = svg.find("class=\"crossing\""); at != std::string::npos;
         at = svg.find("class=\"crossing\"", at + 1))
        ++markers;
    CHECK(markers == 4);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("shrinking circle scenario writes its outputs") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cp2flow_scenario_test";
    fs::remove_all(dir);
    const ScenarioSpec spec = builtin_scenario("shrinking_circle");
    const ScenarioResult r = run_scenario(spec, {dir.string(), 5});
    CHECK(r.diff.empty());
    CHECK_FALSE(r.numerical_failure);
    REQUIRE_FALSE(r.run.events.empty());
    CHECK(r.run.events.back().kind == FlowEventKind::SingularityDetected);
    CHECK(r.run.events.back().t == doctest::Approx(std::log(4.0) / 6).epsilon(0.01));

    for (const char* f : {"trajectory.csv", "surgery.jsonl", "curves.json", "manifest.json"})
        CHECK(fs::exists(dir / f));
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest.at("scenario") == "shrinking_circle");
    CHECK(manifest.at("config_hash") == config_hash(spec));
    CHECK(manifest.at("events_matched") == true);
    CHECK(manifest.at("terminal_event") == "singularity-detected");
    int frames = 0;
    for (const auto& e : fs::directory_iterator(dir))
        frames += e.path().extension() == ".svg";
    CHECK(frames >= 2);
    const auto curves = nlohmann::json::parse(slurp(dir / "curves.json"));
    CHECK(curves.at("curves").front().at("label") == "initial");
    CHECK(curves.at("curves").back().at("label") == "final");

    // reruns are byte-identical apart from the timestamps
    const std::string first = slurp(dir / "trajectory.csv");
    run_scenario(spec, {dir.string(), 5});
    CHECK(slurp(dir / "trajectory.csv") == first);
    fs::remove_all(dir);
}

TEST_CASE("scenario errors") {
    ScenarioSpec minimal;
    minimal.name = "m";
    minimal.generator.kind = GeneratorKind::MinimalProfile;
    minimal.generator.C = 100.0;
    CHECK_THROWS_AS(run_scenario(minimal), Error);

    // the strict two-surgery scenario stops at its self-checks
    try {
        run_scenario(builtin_scenario("two_surgery"));
        FAIL("expected a generator error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Generator);
        CHECK(std::string(e.what()).find("upper pocket") != std::string::npos);
    }
}
