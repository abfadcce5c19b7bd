#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cp2flow/core.hpp"
#include "cp2flow/trajectory.hpp"

namespace cp2flow {

struct FlowConfig {
    int vertices_per_component = 1024;
    double cfl = 0.2;
    double remesh_ratio = 2.0;
    double singular_radius = 1e-3;
    double curvature_resolution_factor = 0.1;
    double max_time = 1.0;
    double grading = 0.15;           // near-origin spacing is at most grading * r
    double sample_interval = 1e-3;   // flow time between trajectory samples
    double convergence_speed = 1e-6;
    long max_steps = 200'000'000;
    // Rescale towards the monotone area every `projection_interval` steps. The exact flow preserves
    // monotonicity, but the area mode is linearly unstable and grows from round-off.
    bool monotone_projection = false;
    int projection_interval = 20;
    bool monitor_cones = true;
    bool monitor_defect = true;
    bool monitor_triangle = false;
    bool check_embedding = true;

    void validate() const;  // throws Error(Config)
};

enum class FlowEventKind {
    SingularityDetected,
    ScaleProbeHit,
    GraphicalAttained,
    ConeCountDropped,
    SurgeryPerformed,
    Converged,
    Halted,
    InvariantViolation,
};

const char* to_string(FlowEventKind kind);

struct SingularityReport {
    double t_detected = 0.0;
    bool at_origin = false;
    double cone_deviation = 0.0;
    double type_one_ratio = 0.0;
    double estimated_T = 0.0;
    double min_radius = 0.0;
};

struct FlowEvent {
    FlowEventKind kind = FlowEventKind::Halted;
    double t = 0.0;
    std::string detail;
    std::optional<SingularityReport> singularity;
    double value = 0.0;
};

struct RadiusRecord {
    double t = 0.0;
    double r2 = 0.0;
};

struct FlowState {
    ProfileCurve curve;
    double t = 0.0;
    double min_radius = 0.0;
    double max_curvature = 0.0;
    long step_count = 0;
    std::vector<FlowEvent> event_log;
    // (t, min_radius^2) recorded each time min_radius^2 drops by a fixed factor; feeds the
    // singular-time extrapolation
    std::vector<RadiusRecord> radius_history;
    double last_dt = 0.0;
    double last_defect = 0.0;  // monotone defect before the latest projection
    bool halted = false;

    static FlowState from_curve(ProfileCurve curve);
};

struct RunResult {
    FlowState state;
    Trajectory trajectory;
    std::vector<FlowEvent> events;  // events raised by this run, also appended to state.event_log
};

struct ScaleProbeHit {
    double epsilon = 0.0;
    std::vector<PlanarPoint> points;
};

struct ConeCount {
    double t = 0.0;
    int count = 0;
    bool increased = false;
};

// Normal speed V at each vertex, motion V * nu with nu the left unit normal.
std::vector<std::vector<double>> normal_velocity(const ProfileCurve& curve);

// Largest admissible explicit time step for a canonical curve.
double stable_time_step(const ProfileCurve& curve, const FlowConfig& config);

// Bring a curve onto the canonical symmetric mesh of the configured size.
ProfileCurve prepare_curve(const ProfileCurve& curve, const FlowConfig& config);

FlowState step(const FlowState& state, const FlowConfig& config);
RunResult run(FlowState state, const FlowConfig& config);

// Explicit steps on an arbitrary closed polyline without symmetry handling or remeshing;
// returns the elapsed flow time.
double free_step(ProfileCurve& curve, double cfl, int steps);

std::optional<SingularityReport> detect_singularity(const FlowState& state, const FlowConfig& config);
// Cones C^axis_{pi/2 + 2 eps}; axis 0 probes necks along the real axis.
std::optional<ScaleProbeHit> scale_probe(const FlowState& state, double R, double eps0, double axis = 0.0);
std::vector<ConeCount> intersection_monitor(const Trajectory& trajectory, const ConeSpec& cone);

// Diagnostics snapshot of a curve at time t.
TrajectorySample make_sample(const ProfileCurve& curve, double t, int segment, bool with_triangle);

// phi strictly monotone along the (single) component.
bool is_graphical(const ProfileCurve& curve);

// Least-squares fit of r^2 = a (T - t) over the trailing records; NaN if fewer than 3 records.
double estimate_singular_time(const std::vector<RadiusRecord>& history, std::size_t window = 16);

}  // namespace cp2flow
