#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cp2flow/core.hpp"
#include "cp2flow/flow.hpp"
#include "cp2flow/surgery.hpp"

namespace cp2flow {

// ---- generators -------------------------------------------------------------------------

enum class GeneratorKind { RoundCircle, Ellipse, ChekanovPair, ChekanovLens, PerturbedClifford, TwoSurgery, MinimalProfile };

const char* to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& name);  // throws Error(Config)

// Shape of the two-surgery curve in the first quadrant, written in log-polar coordinates
// (u = log r, phi): an arc of radius r_a from the real axis to the tip angle phi_max, a radial
// stroke out to r_b, a clockwise arc of radius r_b down to phi_min, a radial stroke out to r_c and
// an arc of radius r_c up to the imaginary axis, with smoothed corners. r_a is tuned for the
// triangle area and r_c for the monotone area.
struct TwoSurgeryParams {
    double triangle_area = 3.14159265358979323846 / 216;
    double pocket_disc_area = 3.14159265358979323846 / 18;
    double phi_max = 1.30;
    double phi_min = 0.03;
    double r_b = 0.30;
    double s_tip = 0.25;   // curve parameter of the tip, in [0, 1] per quadrant
    double s_turn = 0.6;   // curve parameter of the lower turn
    double blend = 0.08;   // parameter width of the radial strokes
    int dense_per_quadrant = 4000;
};

struct PocketDisc {
    PlanarPoint center;
    double radius = 0.0;
    double area = 0.0;        // symplectic area of the Euclidean disc
    double max_area = 0.0;    // largest disc that fits in the pocket
    double min_r = 0.0;       // smallest |w| over the disc
    double clearance = 0.0;   // distance from the disc to the pocket boundary
};

struct TwoSurgeryReport {
    double r_a = 0.0;
    double r_c = 0.0;
    double lambda = 1.0;      // final homothety onto the monotone area
    double psi = 0.0;         // maximal opening angle of the triangle
    double triangle_area = 0.0;
    double disc_area = 0.0;   // monotone disc area after generation
    int wide_cone_crossings = 0;  // with C^0_{2pi/3}, whole curve
    PocketDisc upper;         // pocket above the line at pi/3 (between the tip and the clockwise arc)
    PocketDisc lower;         // pocket below it (between the clockwise arc and the outer arc)
    double radius_bound = 0.0;  // R(pocket_disc_area)
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::RoundCircle;
    double radius = 1.0;          // round circle; chekanov pair radius when target_area is unset
    double a = 1.2, b = 0.8;      // ellipse semi-axes
    double center = 2.0;          // chekanov pair centre on the real axis
    std::optional<double> target_area;  // chekanov pair: tune the radius to this component area
    std::vector<double> amplitudes{0.1, -0.05};  // perturbed clifford: cos(2 j t) mode amplitudes
    double random_amplitude = 0.0;  // extra uniform noise on each mode, drawn from the seed
    std::uint64_t seed = 0;
    bool renormalize = true;      // rescale onto the monotone area after generation
    bool enforce_checks = true;   // failed two-surgery self-checks abort the run
    TwoSurgeryParams two_surgery;
    std::optional<double> C;      // minimal profile by constant
    int m = 0, k = 0;             // or by closure (m periods, winding k)
    int dense_vertices = 8192;
};

struct Generated {
    ProfileCurve curve;  // canonical at the configured vertex count
    std::optional<TwoSurgeryReport> two_surgery;
    std::vector<std::string> log;
};

// R(A) = sqrt(A / (pi - 2A)): circles of Maslov-2 area A staying outside this radius shrink away
// from the origin.
double shrink_radius_bound(double area);

TwoSurgeryReport check_two_surgery(const ProfileCurve& curve, const TwoSurgeryParams& params);

// Minimal profiles are returned as they are (no canonical mesh); everything else is canonical.
Generated generate(const GeneratorSpec& spec, const FlowConfig& config);

// ---- shrinkers --------------------------------------------------------------------------

// Extinction time of a round Clifford circle of radius r0 < 1.
double exact_shrink_time(double r0);
// Extinction time of a Maslov-2 disc of area A < pi/3.
double exact_shrink_time_chekanov(double area);

struct ShrinkerTiming {
    double t_sim = 0.0;
    double t_exact = 0.0;
};

ShrinkerTiming shrinker_timing(double r0, int vertices = 128);

// ---- scenarios --------------------------------------------------------------------------

struct ExpectedEvent {
    FlowEventKind kind = FlowEventKind::Converged;
    bool optional = false;
};

struct ScenarioSpec {
    std::string name;
    GeneratorSpec generator;
    FlowConfig flow;
    SurgeryOptions surgery;
    bool surgery_enabled = true;
    std::vector<ExpectedEvent> expected;
};

std::vector<std::string> builtin_scenario_names();
ScenarioSpec builtin_scenario(const std::string& name);  // throws Error(Config)

// Config files mirror ScenarioSpec; unknown keys are rejected with Error(Config).
ScenarioSpec scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioSpec& spec);
std::string config_hash(const ScenarioSpec& spec);  // FNV-1a of the canonical JSON, hex

// Events that take part in the expected-sequence comparison.
bool is_milestone(FlowEventKind kind);
// Empty when the milestones of `events` match `expected`, otherwise a line-by-line diff.
std::string event_diff(const std::vector<ExpectedEvent>& expected, const std::vector<FlowEvent>& events);

struct RunManifest {
    std::string scenario;
    std::string config_hash;
    std::string start_time;  // UTC, ISO 8601
    std::string end_time;
    std::vector<std::string> outputs;
    std::string terminal_event;
    int surgeries = 0;
    bool events_matched = false;
};

struct ScenarioResult {
    RunManifest manifest;
    Generated initial;
    SurgeryRun run;
    std::string diff;             // event mismatch report, empty on success
    bool numerical_failure = false;
};

struct OutputOptions {
    std::string directory;   // empty: nothing is written
    int frame_stride = 10;   // SVG frame every n-th trajectory sample (first and last always)
};

ScenarioResult run_scenario(const ScenarioSpec& spec, const OutputOptions& output = {});

void write_manifest_json(std::ostream& out, const RunManifest& manifest);
// {"curves": [{"label", "t", "class", "components": [[[x, y], ...], ...]}, ...]}
void write_curves_json(std::ostream& out, const std::vector<std::pair<std::string, TrajectorySample>>& curves);

// ---- rendering --------------------------------------------------------------------------

struct SvgCircle {
    PlanarPoint center;
    double radius = 0.0;
    bool filled = false;
};

struct SvgDecorations {
    std::vector<ConeSpec> cones;       // dashed lines; their crossings with the curves are marked
    std::vector<SvgCircle> circles;
    std::vector<Polyline> regions;     // shaded closed polygons
    std::string title;
};

// Fixed viewport [-3, 3]^2, y up.
std::string render_svg(const std::vector<ProfileCurve>& curves, const SvgDecorations& decorations = {});

}  // namespace cp2flow
