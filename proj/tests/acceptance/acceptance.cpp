// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "cp2flow/diagnostics.hpp"
#include "cp2flow/flow.hpp"
#include "cp2flow/minimal.hpp"
#include "cp2flow/scenario.hpp"
#include "cp2flow/surgery.hpp"

using namespace cp2flow;

namespace {

constexpr double pi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

Polyline sample_loop(const std::function<PlanarPoint(double)>& f, int n) {
    Polyline p(n);
    for (int i = 0; i < n; ++i)
        p[i] = f(2 * pi * i / n);
    return p;
}

ProfileCurve loop_curve(const std::function<PlanarPoint(double)>& f, int n) {
    ProfileCurve c;
    c.components.push_back(sample_loop(f, n));
    c.symmetry_class = SymmetryClass::Clifford;
    return c;
}

ProfileCurve circle(double r, int n) {
    return loop_curve([r](double t) { return std::polar(r, t); }, n);
}

ProfileCurve star(const std::vector<double>& amps, int n) {
    return loop_curve(
        [&](double t) {
            double r = 1.0;
            for (std::size_t j = 0; j < amps.size(); ++j)
                r += amps[j] * std::cos(2.0 * (j + 1) * t);
            return std::polar(r, t);
        },
        n);
}

// Trajectories collected for the monotonicity sweep.
std::vector<std::pair<std::string, Trajectory>> g_trajectories;

Outcome area_formula() {
    double worst = 0.0;
    for (double r : {0.25, 0.5, 1 / std::sqrt(2.0), 1.0, 2.0, 4.0})
        worst = std::max(worst, std::abs(enclosed_area(circle(r, 4096), 0) - 2 * pi * r * r / (1 + 2 * r * r)));
    return {worst < 1e-8, fmt::format("max error {:.2e}", worst)};
}

Outcome clifford_minimality() {
    double vmax = 0.0;
    for (const auto& comp : normal_velocity(circle(1.0, 1024)))
        for (double v : comp)
            vmax = std::max(vmax, std::abs(v));
    // convergence order of the discrete speed, against the exact speed on an ellipse
    const double a = 1.3, b = 0.8;
    const auto exact = [&](double t) {
        const PlanarPoint p(a * std::cos(t), b * std::sin(t));
        const PlanarPoint d(-a * std::sin(t), b * std::cos(t));
        const double k = a * b / std::pow(std::norm(d), 1.5);
        const PlanarPoint nu = PlanarPoint(0, 1) * d / std::abs(d);
        const double r2 = std::norm(p);
        const double s = 1 + 2 * r2;
        return 0.5 * s * s * (k - (1 - 4 * r2) / s * dot(p, nu) / r2);
    };
    std::vector<double> err;
    for (int n : {256, 512, 1024}) {
        const ProfileCurve c = loop_curve([&](double t) { return PlanarPoint(a * std::cos(t), b * std::sin(t)); }, n);
        const auto v = normal_velocity(c)[0];
        double e = 0.0;
        for (int i = 0; i < n; ++i)
            e = std::max(e, std::abs(v[i] - exact(2 * pi * i / n)));
        err.push_back(e);
    }
    const double r1 = err[0] / err[1], r2 = err[1] / err[2];
    const bool ok = vmax < 1e-6 && std::abs(r1 - 4) < 1 && std::abs(r2 - 4) < 1;
    return {ok, fmt::format("max |v| on unit circle {:.2e}; error ratios {:.3f}, {:.3f}", vmax, r1, r2)};
}

Outcome shrink_time() {
    const ShrinkerTiming t = shrinker_timing(1 / std::sqrt(2.0));
    const double rel = std::abs(t.t_sim - t.t_exact) / t.t_exact;
    return {rel < 0.01 && std::abs(t.t_exact - std::log(4.0) / 6) < 1e-14,
            fmt::format("T_sim {:.6f}, T_exact {:.6f}, relative error {:.2e}", t.t_sim, t.t_exact, rel)};
}

Outcome cg_identity() {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> amp(-0.08, 0.08);
    double worst = 0.0, worst_ratio = 1e300;
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<double> a{amp(rng), amp(rng), amp(rng)};
        double prev = 0.0;
        for (int n : {1024, 2048, 4096}) {
            const double res = std::abs(cg_residual(star(a, n), 0));
            if (n > 1024 && prev > 1e-11)
                worst_ratio = std::min(worst_ratio, prev / res);
            if (n == 4096)
                worst = std::max(worst, res);
            prev = res;
        }
    }
    double poly = 0.0;
    const int n = 2400;
    const ProfileCurve c = circle(1.0, n);
    for (double psi : {pi / 6, pi / 3, pi / 2, 2 * pi / 3}) {
        const int q = static_cast<int>(std::lround(psi / 2 / (2 * pi) * n));
        poly = std::max(poly, std::abs(cg_polygon_residual(make_triangle_patch(c, 0, n - q, q, true), c)));
    }
    const bool ok = worst < 1e-3 && worst_ratio > 3.5 && poly < 1e-8;
    return {ok, fmt::format("max residual at N=4096 {:.2e}; smallest doubling ratio {:.2f}; polygon {:.2e}", worst,
                            worst_ratio, poly)};
}

Outcome period_limits() {
    const QuadratureResult p54 = period_estimate(54.0);
    const double margin = p54.value - 1.5 * pi;
    const double big = std::abs(period(1e8) - 1.5 * pi);
    const double lin = std::abs(period(27.0001) - pi * std::sqrt(3.0));
    double inner_min = 1e300;
    for (double C : {30.0, 54.0, 1e3, 1e6})
        inner_min = std::min(inner_min, inner_period(C) - pi / 2);
    const bool ok = margin > std::max(1e-9, p54.error) && big < 0.05 && lin < 1e-2 && inner_min > 0;
    return {ok, fmt::format("psi_54 - 3pi/2 = {:.3e} (quadrature {:.1e}); |psi_1e8 - 3pi/2| = {:.4f}; "
                            "|psi_27.0001 - pi sqrt3| = {:.2e}; min inner - pi/2 = {:.3e}",
                            margin, p54.error, big, lin, inner_min)};
}

Outcome closure_catalog() {
    const auto sol = find_closed(5, 4);
    if (!sol)
        return {false, "no closed (5,4) profile"};
    double vmax = 0.0;
    const auto speeds = normal_velocity(sol->profile);
    for (double v : speeds[0])
        vmax = std::max(vmax, std::abs(v));
    const auto a = catalog(40), b = catalog(40);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
        same = a[i].m == b[i].m && a[i].k == b[i].k && a[i].C == b[i].C;
    const bool ok = sol->closure_gap < 1e-6 && vmax < 1e-4 && !a.empty() && same;
    return {ok, fmt::format("C = {:.6f}, gap {:.2e}, max speed {:.2e}; catalog m<=40 has {} entries, deterministic {}",
                            sol->C, sol->closure_gap, vmax, a.size(), same)};
}

Outcome cone_radius_limits() {
    const double r3 = cone_radius(1e3), r4 = cone_radius(1e4), r6 = cone_radius(1e6), r8 = cone_radius(1e8);
    bool below_half = true;
    for (double C : {1e3, 1e4, 1e5, 1e6, 1e7, 1e8})
        below_half = below_half && cone_radius(C) < 0.5;
    const bool ok = below_half && r6 < r4 && r4 < r3 && r8 < 0.1;
    return {ok, fmt::format("R_1e3 {:.4f}, R_1e4 {:.4f}, R_1e6 {:.4f}, R_1e8 {:.4f} (needs < 0.1)", r3, r4, r6, r8)};
}

Outcome chekanov_collapse() {
    ScenarioSpec spec = builtin_scenario("chekanov_pair");
    spec.surgery_enabled = false;
    spec.flow.monitor_triangle = true;
    spec.flow.sample_interval = 0.001;
    const ScenarioResult r = run_scenario(spec);
    g_trajectories.emplace_back("chekanov collapse", r.run.trajectory);
    const FlowEvent* sd = nullptr;
    for (const auto& e : r.run.events)
        if (e.kind == FlowEventKind::SingularityDetected)
            sd = &e;
    if (!sd || !sd->singularity)
        return {false, "no singularity detected"};
    double rise = 0.0;
    const Trajectory& tr = r.run.trajectory;
    for (std::size_t i = 1; i < tr.size(); ++i)
        rise = std::max(rise, tr[i].psi_max - tr[i - 1].psi_max);
    int violations = 0;
    for (const auto& s : triangle_monitor(tr))
        violations += s.violation;
    const bool ok = sd->singularity->at_origin && sd->singularity->cone_deviation < 0.1 && rise <= 0 && violations == 0;
    return {ok, fmt::format("singular at t = {:.5f}, at origin {}, cone deviation {:.4f} rad; largest psi rise {:.2e}; "
                            "triangle violations {}",
                            sd->t, sd->singularity->at_origin, sd->singularity->cone_deviation, rise, violations)};
}

Outcome graphical_convergence() {
    const ScenarioResult r = run_scenario(builtin_scenario("graphical_clifford"));
    g_trajectories.emplace_back("graphical clifford", r.run.trajectory);
    double defect = 0.0;
    bool cones = true;
    for (const auto& s : r.run.trajectory) {
        defect = std::max(defect, s.defect);
        cones = cones && s.n_cone == 4;
    }
    const double h = hausdorff_to_circle(r.run.state.curve);
    const bool ok = r.run.converged && h < 1e-3 && defect < 1e-4 && cones;
    return {ok, fmt::format("converged {} at t = {:.4f}, Hausdorff {:.2e}, max defect {:.2e}, cone count constant {}",
                            r.run.converged, r.run.state.t, h, defect, cones)};
}

Outcome surgery_contract() {
    const ScenarioResult r = run_scenario(builtin_scenario("chekanov_collapse"));
    g_trajectories.emplace_back("chekanov surgery", r.run.trajectory);
    if (r.run.records.size() != 1)
        return {false, fmt::format("{} surgeries ({})", r.run.records.size(), r.run.failure)};
    const SurgeryRecord& rec = r.run.records[0];
    const double h = hausdorff_to_circle(r.run.state.curve);
    const bool ok = rec.n_after < rec.n_before && rec.class_before == SymmetryClass::Chekanov &&
                    rec.class_after == SymmetryClass::Clifford && rec.defect_after < 1e-10 && r.run.converged && h < 1e-3;
    return {ok, fmt::format("1 surgery at t = {:.5f}, n {} -> {}, {} -> {}, defect {:.1e}, terminal Hausdorff {:.2e}",
                            rec.t, rec.n_before, rec.n_after, to_string(rec.class_before), to_string(rec.class_after),
                            rec.defect_after, h)};
}

Outcome two_surgery() {
    // the flow runs on the non-strict variant so that the event contract is measured even when
    // a self-check fails
    const ScenarioResult r = run_scenario(builtin_scenario("two_surgery_flow"));
    g_trajectories.emplace_back("two surgery", r.run.trajectory);
    const TwoSurgeryReport& rep = *r.initial.two_surgery;
    const double T = std::log(6.0 / 5.0) / 6;
    double first = -1.0;
    for (const auto& e : r.run.events)
        if (e.kind == FlowEventKind::SingularityDetected) {
            first = e.t;
            break;
        }
    const bool checks = rep.ok() && std::abs(rep.radius_bound - 0.25) < 1e-6;
    const bool flow = first >= 0 && first < T && r.run.records.size() == 2 && r.run.converged && r.diff.empty();
    std::string failures;
    for (const auto& f : rep.failures)
        failures += "; " + f;
    return {checks && flow,
            fmt::format("area(P) {:.8f} (target {:.8f}), pockets {:.6f} / {:.6f} (target {:.6f}), R {:.6f}{}; first "
                        "singularity t = {:.5f} (bound {:.5f}), surgeries {}, converged {}",
                        rep.triangle_area, pi / 216, rep.upper.area, rep.lower.area, pi / 18, rep.radius_bound, failures,
                        first, T, r.run.records.size(), r.run.converged)};
}

Outcome sturm_monotonicity() {
    std::ostringstream bad;
    int checked = 0, increases = 0;
    for (const auto& [name, tr] : g_trajectories) {
        for (std::size_t i = 1; i < tr.size(); ++i) {
            if (tr[i].segment != tr[i - 1].segment)
                continue;
            ++checked;
            const bool up = tr[i].n_cone > tr[i - 1].n_cone || tr[i].n_cone_wide > tr[i - 1].n_cone_wide ||
                            tr[i].n_unit > tr[i - 1].n_unit;
            if (up) {
                if (increases < 3)
                    bad << fmt::format("; {} at t = {:.5f}", name, tr[i].t);
                ++increases;
            }
        }
    }
    return {checked > 0 && increases == 0,
            fmt::format("{} sample pairs over {} runs, {} increases{}", checked, g_trajectories.size(), increases, bad.str())};
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"area formula", area_formula},
        {"Clifford minimality", clifford_minimality},
        {"exact shrink time", shrink_time},
        {"closed-curve identity", cg_identity},
        {"period limits", period_limits},
        {"closure catalog", closure_catalog},
        {"cone radius", cone_radius_limits},
        {"Chekanov collapse", chekanov_collapse},
        {"graphical Clifford convergence", graphical_convergence},
        {"surgery contract", surgery_contract},
        {"two-surgery construction", two_surgery},
        {"Sturm monotonicity", sturm_monotonicity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
