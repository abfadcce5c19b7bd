#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fmt/core.h>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "cp2flow/diagnostics.hpp"
#include "cp2flow/minimal.hpp"
#include "cp2flow/scenario.hpp"
#include "cp2flow/surgery.hpp"

using namespace cp2flow;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kEvents = 2, kNumerical = 3, kConfig = 4 };

struct Globals {
    std::string config;
    std::string out;
    int vertices = 0;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Config, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Config, "cannot write " + path.string());
    out << text;
}

int exit_for(const Error& e) {
    return e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Generator ? kConfig : kNumerical;
}

// Runs one scenario and reports on stdout; returns the exit code.
int run_one(ScenarioSpec spec, const Globals& g, const std::string& out_dir, std::ostream& log) {
    if (g.vertices > 0)
        spec.flow.vertices_per_component = g.vertices;
    if (g.seed)
        spec.generator.seed = *g.seed;
    try {
        spec.flow.validate();
        const ScenarioResult r = run_scenario(spec, {out_dir, 10});
        for (const auto& line : r.initial.log)
            log << spec.name << ": " << line << '\n';
        for (const auto& e : r.run.events)
            log << fmt::format("{}: t={:.6f} {} {}\n", spec.name, e.t, to_string(e.kind), e.detail);
        log << fmt::format("{}: {} surgeries, terminal {}, hash {}\n", spec.name, r.manifest.surgeries,
                           r.manifest.terminal_event, r.manifest.config_hash);
        if (r.numerical_failure) {
            log << spec.name << ": numerical failure: " << r.run.failure << '\n';
            return kNumerical;
        }
        if (!r.diff.empty()) {
            log << spec.name << ": event mismatch\n" << r.diff;
            return kEvents;
        }
        log << spec.name << ": ok\n";
        return kOk;
    } catch (const Error& e) {
        log << spec.name << ": " << e.what() << '\n';
        return exit_for(e);
    }
}

int cmd_scenario(const std::vector<std::string>& names, const Globals& g) {
    std::vector<ScenarioSpec> specs;
    try {
        if (!g.config.empty())
            specs.push_back(scenario_from_json(read_file(g.config)));
        for (const auto& n : names) {
            if (n == "all") {
                for (const auto& b : builtin_scenario_names())
                    specs.push_back(builtin_scenario(b));
            } else {
                specs.push_back(builtin_scenario(n));
            }
        }
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return kConfig;
    }
    if (specs.empty()) {
        std::cerr << "no scenario given; builtins:";
        for (const auto& b : builtin_scenario_names())
            std::cerr << ' ' << b;
        std::cerr << '\n';
        return kConfig;
    }
    const auto dir_for = [&](const ScenarioSpec& s) {
        if (g.out.empty())
            return std::string();
        return specs.size() == 1 ? g.out : (fs::path(g.out) / s.name).string();
    };
    std::vector<int> codes(specs.size());
    std::vector<std::string> logs(specs.size());
    const int jobs = std::max(1, g.jobs);
    for (std::size_t start = 0; start < specs.size(); start += jobs) {
        std::vector<std::future<void>> batch;
        for (std::size_t i = start; i < std::min(specs.size(), start + jobs); ++i)
            batch.push_back(std::async(std::launch::async, [&, i] {
                std::ostringstream os;
                codes[i] = run_one(specs[i], g, dir_for(specs[i]), os);
                logs[i] = os.str();
            }));
        for (auto& f : batch)
            f.get();
    }
    int worst = kOk;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        std::cout << logs[i];
        worst = std::max(worst, codes[i]);
    }
    return worst;
}

int cmd_flow(const std::string& curve_path, double max_time, bool surgery, const Globals& g) {
    FlowConfig cfg;
    FlowState start;
    // anything wrong with the input curve is a configuration error
    try {
        const ProfileCurve c = curve_from_json(read_file(curve_path));
        cfg.max_time = max_time;
        cfg.monotone_projection = monotone_defect(c).defect < 1e-6;
        cfg.sample_interval = std::max(1e-4, max_time / 200);
        if (g.vertices > 0)
            cfg.vertices_per_component = g.vertices;
        cfg.validate();
        start = FlowState::from_curve(prepare_curve(c, cfg));
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return kConfig;
    }
    try {
        SurgeryRun run;
        if (surgery) {
            run = flow_with_surgery(start, cfg);
        } else {
            RunResult r = cp2flow::run(start, cfg);
            run.state = std::move(r.state);
            run.trajectory = std::move(r.trajectory);
            run.events = std::move(r.events);
        }
        for (const auto& e : run.events)
            std::cout << fmt::format("t={:.6f} {} {}\n", e.t, to_string(e.kind), e.detail);
        if (!g.out.empty()) {
            std::ostringstream csv, log;
            write_trajectory_csv(csv, run.trajectory);
            for (const auto& rec : run.records)
                write_surgery_record(log, rec);
            write_file(fs::path(g.out) / "trajectory.csv", csv.str());
            write_file(fs::path(g.out) / "surgery.jsonl", log.str());
            write_file(fs::path(g.out) / "final.json", curve_to_json(run.state.curve) + "\n");
            write_file(fs::path(g.out) / "final.svg", render_svg({run.state.curve}, {{ConeSpec{0.0, 3.14159265358979323846 / 2}}, {}, {}, "final"}));
        }
        if (run.state.halted || (!run.failure.empty() && run.failure != "time limit reached"))
            return kNumerical;
        return kOk;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return exit_for(e);
    }
}

int cmd_minimal(std::optional<double> C, int m, int k, const Globals& g) {
    try {
        GeneratorSpec spec;
        spec.kind = GeneratorKind::MinimalProfile;
        spec.C = C;
        spec.m = m;
        spec.k = k;
        FlowConfig cfg;
        const Generated gen = generate(spec, cfg);
        for (const auto& line : gen.log)
            std::cout << line << '\n';
        if (C) {
            const MinimalProfile p = minimal_profile(*C);
            std::cout << fmt::format("C={} r1={:.12g} r2={:.12g} period={:.12g} cone_radius={:.12g}\n", *C, p.r1, p.r2,
                                     p.period, p.cone_radius);
        }
        if (!g.out.empty()) {
            write_file(fs::path(g.out) / "profile.json", curve_to_json(gen.curve) + "\n");
            SvgDecorations d;
            d.circles = {SvgCircle{{0, 0}, 1.0, false}};
            d.title = "minimal profile";
            write_file(fs::path(g.out) / "profile.svg", render_svg({gen.curve}, d));
        }
        return kOk;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return exit_for(e);
    }
}

int cmd_catalog(int max_m, const Globals& g) {
    try {
        const auto entries = catalog(max_m);
        std::ostringstream os;
        write_catalog_csv(os, entries);
        if (g.out.empty())
            std::cout << os.str();
        else
            write_file(fs::path(g.out) / "catalog.csv", os.str());
        return kOk;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return exit_for(e);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equivariant Lagrangian mean curvature flow in CP2 with neck-to-neck surgery"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "scenario JSON file");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--vertices", g.vertices, "vertices per component")->check(CLI::Range(8, 1 << 20));
    app.add_option("--seed", g.seed, "seed for random perturbations");
    app.add_option("--jobs", g.jobs, "scenarios run in parallel")->check(CLI::Range(1, 256));

    auto* scenario = app.add_subcommand("scenario", "run builtin scenarios (or 'all') and/or --config");
    std::vector<std::string> names;
    scenario->add_option("names", names, "scenario names");

    auto* flow = app.add_subcommand("flow", "flow a curve given in the exchange format");
    std::string curve_path;
    double max_time = 1.0;
    bool no_surgery = false;
    flow->add_option("curve", curve_path, "curve JSON file")->required();
    flow->add_option("--max-time", max_time, "flow time limit")->check(CLI::PositiveNumber);
    flow->add_flag("--no-surgery", no_surgery, "stop at the first singularity");

    auto* minimal = app.add_subcommand("minimal", "minimal equivariant profile by C or by closure (m, k)");
    std::optional<double> C;
    int m = 0, k = 0;
    minimal->add_option("--C", C, "first-integral constant")->check(CLI::Range(27.0, 1e12));
    minimal->add_option("--m", m, "periods")->check(CLI::PositiveNumber);
    minimal->add_option("--k", k, "winding")->check(CLI::PositiveNumber);

    auto* demo = app.add_subcommand("surgery-demo", "collapsing Chekanov lens with one surgery");

    auto* cat = app.add_subcommand("catalog", "closed minimal profiles up to a period count");
    int max_m = 40;
    cat->add_option("--max-m", max_m, "largest period count")->check(CLI::Range(1, 400));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    if (*scenario)
        return cmd_scenario(names, g);
    if (*flow)
        return cmd_flow(curve_path, max_time, !no_surgery, g);
    if (*minimal) {
        if (!C && (m == 0 || k == 0)) {
            std::cerr << "minimal needs --C or both --m and --k\n";
            return kConfig;
        }
        return cmd_minimal(C, m, k, g);
    }
    if (*demo)
        return cmd_scenario({"chekanov_collapse"}, g);
    if (*cat)
        return cmd_catalog(max_m, g);
    return kConfig;
}
