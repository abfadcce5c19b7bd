#include "cp2flow/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "cp2flow/numerics.hpp"

namespace cp2flow {

using num::pi;
using nlohmann::json;

namespace {

constexpr FlowEventKind kAllKinds[] = {
    FlowEventKind::SingularityDetected, FlowEventKind::ScaleProbeHit,    FlowEventKind::GraphicalAttained,
    FlowEventKind::ConeCountDropped,    FlowEventKind::SurgeryPerformed, FlowEventKind::Converged,
    FlowEventKind::Halted,              FlowEventKind::InvariantViolation,
};

FlowEventKind event_kind_from_string(const std::string& name) {
    for (auto k : kAllKinds)
        if (name == to_string(k))
            return k;
    throw Error(ErrorKind::Config, "unknown event '" + name + "'");
}

std::string event_label(const ExpectedEvent& e) { return std::string(to_string(e.kind)) + (e.optional ? "?" : ""); }

ExpectedEvent parse_expected(const std::string& s) {
    if (!s.empty() && s.back() == '?')
        return {event_kind_from_string(s.substr(0, s.size() - 1)), true};
    return {event_kind_from_string(s), false};
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object())
        throw Error(ErrorKind::Config, "'" + where + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            known = known || it.key() == a;
        if (!known)
            throw Error(ErrorKind::Config, "unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

json flow_to_json(const FlowConfig& c) {
    return {{"vertices_per_component", c.vertices_per_component},
            {"cfl", c.cfl},
            {"remesh_ratio", c.remesh_ratio},
            {"singular_radius", c.singular_radius},
            {"curvature_resolution_factor", c.curvature_resolution_factor},
            {"max_time", c.max_time},
            {"grading", c.grading},
            {"sample_interval", c.sample_interval},
            {"convergence_speed", c.convergence_speed},
            {"max_steps", c.max_steps},
            {"monotone_projection", c.monotone_projection},
            {"projection_interval", c.projection_interval},
            {"monitor_cones", c.monitor_cones},
            {"monitor_defect", c.monitor_defect},
            {"monitor_triangle", c.monitor_triangle},
            {"check_embedding", c.check_embedding}};
}

FlowConfig flow_from_json(const json& j, FlowConfig c) {
    check_keys(j,
               {"vertices_per_component", "cfl", "remesh_ratio", "singular_radius", "curvature_resolution_factor",
                "max_time", "grading", "sample_interval", "convergence_speed", "max_steps", "monotone_projection",
                "projection_interval", "monitor_cones", "monitor_defect", "monitor_triangle", "check_embedding"},
               "flow");
    read(j, "vertices_per_component", c.vertices_per_component);
    read(j, "cfl", c.cfl);
    read(j, "remesh_ratio", c.remesh_ratio);
    read(j, "singular_radius", c.singular_radius);
    read(j, "curvature_resolution_factor", c.curvature_resolution_factor);
    read(j, "max_time", c.max_time);
    read(j, "grading", c.grading);
    read(j, "sample_interval", c.sample_interval);
    read(j, "convergence_speed", c.convergence_speed);
    read(j, "max_steps", c.max_steps);
    read(j, "monotone_projection", c.monotone_projection);
    read(j, "projection_interval", c.projection_interval);
    read(j, "monitor_cones", c.monitor_cones);
    read(j, "monitor_defect", c.monitor_defect);
    read(j, "monitor_triangle", c.monitor_triangle);
    read(j, "check_embedding", c.check_embedding);
    return c;
}

json surgery_to_json(const SurgeryOptions& o) {
    return {{"eps0", o.eps0},
            {"scale_factor", o.scale_factor},
            {"max_scale", o.max_scale},
            {"retries", o.retries},
            {"step_budget", o.step_budget},
            {"max_surgeries", o.max_surgeries}};
}

SurgeryOptions surgery_from_json(const json& j, SurgeryOptions o) {
    check_keys(j, {"eps0", "scale_factor", "max_scale", "retries", "step_budget", "max_surgeries"}, "surgery");
    read(j, "eps0", o.eps0);
    read(j, "scale_factor", o.scale_factor);
    read(j, "max_scale", o.max_scale);
    read(j, "retries", o.retries);
    read(j, "step_budget", o.step_budget);
    read(j, "max_surgeries", o.max_surgeries);
    if (!(o.eps0 > 0 && o.eps0 < pi / 4 && o.scale_factor > 0 && o.max_scale > 0 && o.retries >= 0 &&
          o.step_budget > 0 && o.max_surgeries >= 0))
        throw Error(ErrorKind::Config, "surgery options out of range");
    return o;
}

json two_surgery_to_json(const TwoSurgeryParams& p) {
    return {{"triangle_area", p.triangle_area}, {"pocket_disc_area", p.pocket_disc_area},
            {"phi_max", p.phi_max},             {"phi_min", p.phi_min},
            {"r_b", p.r_b},                     {"s_tip", p.s_tip},
            {"s_turn", p.s_turn},               {"blend", p.blend},
            {"dense_per_quadrant", p.dense_per_quadrant}};
}

TwoSurgeryParams two_surgery_from_json(const json& j, TwoSurgeryParams p) {
    check_keys(j,
               {"triangle_area", "pocket_disc_area", "phi_max", "phi_min", "r_b", "s_tip", "s_turn", "blend",
                "dense_per_quadrant"},
               "two_surgery");
    read(j, "triangle_area", p.triangle_area);
    read(j, "pocket_disc_area", p.pocket_disc_area);
    read(j, "phi_max", p.phi_max);
    read(j, "phi_min", p.phi_min);
    read(j, "r_b", p.r_b);
    read(j, "s_tip", p.s_tip);
    read(j, "s_turn", p.s_turn);
    read(j, "blend", p.blend);
    read(j, "dense_per_quadrant", p.dense_per_quadrant);
    return p;
}

json generator_to_json(const GeneratorSpec& g) {
    json j = {{"kind", to_string(g.kind)},
              {"radius", g.radius},
              {"a", g.a},
              {"b", g.b},
              {"center", g.center},
              {"amplitudes", g.amplitudes},
              {"random_amplitude", g.random_amplitude},
              {"seed", g.seed},
              {"renormalize", g.renormalize},
              {"enforce_checks", g.enforce_checks},
              {"two_surgery", two_surgery_to_json(g.two_surgery)},
              {"m", g.m},
              {"k", g.k},
              {"dense_vertices", g.dense_vertices}};
    if (g.target_area)
        j["target_area"] = *g.target_area;
    if (g.C)
        j["C"] = *g.C;
    return j;
}

GeneratorSpec generator_from_json(const json& j, GeneratorSpec g) {
    check_keys(j,
               {"kind", "radius", "a", "b", "center", "target_area", "amplitudes", "random_amplitude", "seed",
                "renormalize", "enforce_checks", "two_surgery", "C", "m", "k", "dense_vertices"},
               "generator");
    if (j.contains("kind"))
        g.kind = generator_kind_from_string(j.at("kind").get<std::string>());
    read(j, "radius", g.radius);
    read(j, "a", g.a);
    read(j, "b", g.b);
    read(j, "center", g.center);
    if (j.contains("target_area"))
        g.target_area = j.at("target_area").get<double>();
    read(j, "amplitudes", g.amplitudes);
    read(j, "random_amplitude", g.random_amplitude);
    read(j, "seed", g.seed);
    read(j, "renormalize", g.renormalize);
    read(j, "enforce_checks", g.enforce_checks);
    if (j.contains("two_surgery"))
        g.two_surgery = two_surgery_from_json(j.at("two_surgery"), g.two_surgery);
    if (j.contains("C"))
        g.C = j.at("C").get<double>();
    read(j, "m", g.m);
    read(j, "k", g.k);
    read(j, "dense_vertices", g.dense_vertices);
    return g;
}

std::vector<ExpectedEvent> events(std::initializer_list<const char*> names) {
    std::vector<ExpectedEvent> out;
    for (const char* n : names)
        out.push_back(parse_expected(n));
    return out;
}

FlowConfig monotone_flow(int n, double max_time, double sample) {
    FlowConfig c;
    c.vertices_per_component = n;
    c.monotone_projection = true;
    c.max_time = max_time;
    c.sample_interval = sample;
    return c;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json sample_json(const std::string& label, const TrajectorySample& s) {
    json comps = json::array();
    for (const auto& loop : s.curve.components) {
        json pts = json::array();
        for (auto p : loop)
            pts.push_back({p.real(), p.imag()});
        comps.push_back(std::move(pts));
    }
    return {{"label", label}, {"t", s.t}, {"class", to_string(s.curve.symmetry_class)}, {"components", std::move(comps)}};
}

SvgDecorations frame_decorations() {
    SvgDecorations d;
    d.cones = {ConeSpec{0.0, pi / 2}, ConeSpec{0.0, 2 * pi / 3}};
    d.circles = {SvgCircle{{0, 0}, 1.0, false}};
    return d;
}

std::string frame_name(int index, double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "frame_%04d_%.6f.svg", index, t);
    return buf;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
    return {"round_circle",  "shrinking_circle", "ellipse",     "graphical_clifford", "chekanov_pair",
            "chekanov_collapse", "two_surgery", "two_surgery_flow"};
}

ScenarioSpec builtin_scenario(const std::string& name) {
    ScenarioSpec s;
    s.name = name;
    if (name == "round_circle") {
        s.generator.kind = GeneratorKind::RoundCircle;
        s.flow = monotone_flow(256, 1.0, 0.01);
        s.expected = events({"graphical-attained?", "converged"});
    } else if (name == "shrinking_circle") {
        s.generator.kind = GeneratorKind::RoundCircle;
        s.generator.radius = 1 / std::sqrt(2.0);
        s.generator.renormalize = false;
        s.flow.vertices_per_component = 128;
        s.flow.cfl = 0.02;
        s.flow.sample_interval = 0.002;
        s.surgery_enabled = false;
        s.expected = events({"graphical-attained?", "singularity-detected"});
    } else if (name == "ellipse") {
        s.generator.kind = GeneratorKind::Ellipse;
        s.flow = monotone_flow(256, 5.0, 0.01);
        s.expected = events({"graphical-attained?", "converged"});
    } else if (name == "graphical_clifford") {
        s.generator.kind = GeneratorKind::PerturbedClifford;
        s.flow = monotone_flow(256, 5.0, 0.01);
        s.expected = events({"graphical-attained?", "converged"});
    } else if (name == "chekanov_pair") {
        s.generator.kind = GeneratorKind::ChekanovPair;
        s.generator.target_area = pi / 3;
        s.flow = monotone_flow(256, 5.0, 0.01);
        s.expected = events({"singularity-detected", "surgery-performed", "graphical-attained?", "converged"});
    } else if (name == "chekanov_collapse") {
        s.generator.kind = GeneratorKind::ChekanovLens;
        s.flow = monotone_flow(256, 3.0, 0.01);
        s.expected = events({"singularity-detected", "surgery-performed", "graphical-attained?", "converged"});
    } else if (name == "two_surgery" || name == "two_surgery_flow") {
        s.generator.kind = GeneratorKind::TwoSurgery;
        s.generator.enforce_checks = name == "two_surgery";
        s.flow = monotone_flow(512, 3.0, 0.004);
        s.expected = events({"singularity-detected", "surgery-performed", "singularity-detected", "surgery-performed",
                             "graphical-attained?", "converged"});
    } else {
        throw Error(ErrorKind::Config, "unknown scenario '" + name + "'");
    }
    return s;
}

ScenarioSpec scenario_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        check_keys(j, {"name", "base", "generator", "flow", "surgery", "surgery_enabled", "expected_events"}, "scenario");
        ScenarioSpec s;
        if (j.contains("base"))
            s = builtin_scenario(j.at("base").get<std::string>());
        read(j, "name", s.name);
        if (s.name.empty())
            throw Error(ErrorKind::Config, "scenario needs a name");
        if (j.contains("generator"))
            s.generator = generator_from_json(j.at("generator"), s.generator);
        if (j.contains("flow"))
            s.flow = flow_from_json(j.at("flow"), s.flow);
        if (j.contains("surgery"))
            s.surgery = surgery_from_json(j.at("surgery"), s.surgery);
        read(j, "surgery_enabled", s.surgery_enabled);
        if (j.contains("expected_events")) {
            s.expected.clear();
            for (const auto& e : j.at("expected_events"))
                s.expected.push_back(parse_expected(e.get<std::string>()));
        }
        s.flow.validate();
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, e.what());
    }
}

std::string scenario_to_json(const ScenarioSpec& s) {
    json ev = json::array();
    for (const auto& e : s.expected)
        ev.push_back(event_label(e));
    const json j = {{"name", s.name},
                    {"generator", generator_to_json(s.generator)},
                    {"flow", flow_to_json(s.flow)},
                    {"surgery", surgery_to_json(s.surgery)},
                    {"surgery_enabled", s.surgery_enabled},
                    {"expected_events", ev}};
    return j.dump();
}

std::string config_hash(const ScenarioSpec& spec) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : scenario_to_json(spec)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool is_milestone(FlowEventKind kind) {
    switch (kind) {
        case FlowEventKind::SingularityDetected:
        case FlowEventKind::SurgeryPerformed:
        case FlowEventKind::GraphicalAttained:
        case FlowEventKind::Converged:
        case FlowEventKind::Halted:
        case FlowEventKind::InvariantViolation: return true;
        default: return false;
    }
}

std::string event_diff(const std::vector<ExpectedEvent>& expected, const std::vector<FlowEvent>& events) {
    std::vector<FlowEventKind> seen;
    for (const auto& e : events)
        if (is_milestone(e.kind))
            seen.push_back(e.kind);
    const std::function<bool(std::size_t, std::size_t)> match = [&](std::size_t i, std::size_t j) -> bool {
        if (i == expected.size())
            return j == seen.size();
        const bool here = j < seen.size() && seen[j] == expected[i].kind && match(i + 1, j + 1);
        return here || (expected[i].optional && match(i + 1, j));
    };
    if (match(0, 0))
        return "";
    std::ostringstream os;
    os << "expected:";
    for (const auto& e : expected)
        os << ' ' << event_label(e);
    os << "\nobserved:";
    for (const auto& e : events)
        if (is_milestone(e.kind))
            os << ' ' << to_string(e.kind) << "@" << e.t;
    os << '\n';
    return os.str();
}

void write_manifest_json(std::ostream& out, const RunManifest& m) {
    const json j = {{"scenario", m.scenario},         {"config_hash", m.config_hash},
                    {"start_time", m.start_time},     {"end_time", m.end_time},
                    {"outputs", m.outputs},           {"terminal_event", m.terminal_event},
                    {"surgeries", m.surgeries},       {"events_matched", m.events_matched}};
    out << j.dump(2) << '\n';
}

void write_curves_json(std::ostream& out, const std::vector<std::pair<std::string, TrajectorySample>>& curves) {
    json arr = json::array();
    for (const auto& [label, s] : curves)
        arr.push_back(sample_json(label, s));
    out << json{{"curves", std::move(arr)}}.dump() << '\n';
}

ScenarioResult run_scenario(const ScenarioSpec& spec, const OutputOptions& output) {
    ScenarioResult res;
    RunManifest& man = res.manifest;
    man.scenario = spec.name;
    man.config_hash = config_hash(spec);
    man.start_time = utc_now();
    if (spec.generator.kind == GeneratorKind::MinimalProfile)
        throw Error(ErrorKind::Config, "minimal profiles are not flowed by scenarios");

    res.initial = generate(spec.generator, spec.flow);
    if (res.initial.two_surgery && spec.generator.enforce_checks && !res.initial.two_surgery->ok()) {
        std::string msg = "two-surgery self-checks failed";
        for (const auto& f : res.initial.two_surgery->failures)
            msg += "; " + f;
        throw Error(ErrorKind::Generator, msg);
    }

    FlowState start = FlowState::from_curve(res.initial.curve);
    if (spec.surgery_enabled) {
        res.run = flow_with_surgery(std::move(start), spec.flow, spec.surgery);
    } else {
        RunResult r = run(std::move(start), spec.flow);
        res.run.state = std::move(r.state);
        res.run.trajectory = std::move(r.trajectory);
        res.run.events = std::move(r.events);
        res.run.converged = !res.run.events.empty() && res.run.events.back().kind == FlowEventKind::Converged;
        if (res.run.state.halted)
            res.run.failure = "halted: " + res.run.events.back().detail;
    }
    const std::string& f = res.run.failure;
    res.numerical_failure = !f.empty() && f != "time limit reached" && f != "surgery limit reached";
    res.diff = event_diff(spec.expected, res.run.events);
    man.events_matched = res.diff.empty();
    man.surgeries = static_cast<int>(res.run.records.size());
    man.terminal_event = res.run.events.empty() ? "none" : to_string(res.run.events.back().kind);

    if (!output.directory.empty()) {
        namespace fs = std::filesystem;
        const fs::path dir(output.directory);
        fs::create_directories(dir);
        const auto open = [&](const std::string& name) {
            man.outputs.push_back((dir / name).string());
            std::ofstream os(dir / name);
            if (!os)
                throw Error(ErrorKind::Config, "cannot write " + (dir / name).string());
            return os;
        };
        const Trajectory& tr = res.run.trajectory;
        {
            std::ofstream os = open("trajectory.csv");
            write_trajectory_csv(os, tr);
        }
        {
            std::ofstream os = open("surgery.jsonl");
            for (const auto& r : res.run.records)
                write_surgery_record(os, r);
        }
        {
            std::vector<std::pair<std::string, TrajectorySample>> snaps;
            snaps.emplace_back("initial", make_sample(res.initial.curve, 0.0, 0, false));
            for (std::size_t i = 1; i < tr.size(); ++i)
                if (tr[i].segment != tr[i - 1].segment) {
                    snaps.emplace_back("pre-surgery-" + std::to_string(tr[i - 1].segment + 1), tr[i - 1]);
                    snaps.emplace_back("post-surgery-" + std::to_string(tr[i].segment), tr[i]);
                }
            if (!tr.empty())
                snaps.emplace_back("final", tr.back());
            std::ofstream os = open("curves.json");
            write_curves_json(os, snaps);
        }
        const int stride = std::max(1, output.frame_stride);
        for (std::size_t i = 0; i < tr.size(); ++i) {
            if (i % stride != 0 && i + 1 != tr.size())
                continue;
            SvgDecorations d = frame_decorations();
            if (i == 0 && res.initial.two_surgery)
                for (const PocketDisc* disc : {&res.initial.two_surgery->upper, &res.initial.two_surgery->lower})
                    for (PlanarPoint s : {PlanarPoint(1, 0), PlanarPoint(-1, 0)}) {
                        d.circles.push_back({s * disc->center, disc->radius, true});
                        d.circles.push_back({s * std::conj(disc->center), disc->radius, true});
                    }
            d.title = spec.name + " t=" + std::to_string(tr[i].t);
            std::ofstream os = open(frame_name(static_cast<int>(i), tr[i].t));
            os << render_svg({tr[i].curve}, d);
        }
        man.end_time = utc_now();
        const fs::path mpath = dir / "manifest.json";
        man.outputs.push_back(mpath.string());
        std::ofstream os(mpath);
        write_manifest_json(os, man);
    } else {
        man.end_time = utc_now();
    }
    return res;
}

}  // namespace cp2flow
