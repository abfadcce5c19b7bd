#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cp2flow/core.hpp"
#include "cp2flow/flow.hpp"

namespace cp2flow {

enum class NeckAxis { Real, Imaginary };

const char* to_string(NeckAxis axis);

// Neck at the origin crossing `axis_before`; p_plus and p_minus are the smallest-radius crossings
// of the curve with the lines at +-(pi/4 + epsilon) from that axis, inside radius `scale`.
struct NeckSpec {
    double scale = 0.0;
    double epsilon = 0.0;
    PlanarPoint p_plus;
    PlanarPoint p_minus;
    NeckAxis axis_before = NeckAxis::Real;
};

struct SurgeryRecord {
    double t = 0.0;
    NeckSpec neck;
    SymmetryClass class_before = SymmetryClass::Clifford;
    SymmetryClass class_after = SymmetryClass::Clifford;
    int n_before = 0;
    int n_after = 0;
    double lambda = 1.0;
    double defect_after = 0.0;
    int attempts = 1;
};

struct SurgeryOptions {
    double eps0 = 0.2;
    double scale_factor = 50.0;  // initial probe radius in units of the minimal radius
    double max_scale = 0.25;
    int retries = 5;
    long step_budget = 10'000'000;
    int max_surgeries = 8;
};

struct Renormalization {
    ProfileCurve curve;
    double lambda = 1.0;
};

struct SurgeryRun {
    FlowState state;
    Trajectory trajectory;
    std::vector<FlowEvent> events;
    std::vector<SurgeryRecord> records;
    bool converged = false;
    std::string failure;  // empty unless the run stopped on a halt or a failed surgery
};

// Crossings with C^0_{pi/2} divided by four.
int neck_count(const ProfileCurve& curve);

// Axis crossed by the arc closest to the origin.
NeckAxis neck_axis(const ProfileCurve& curve);

// Empty unless the state is near-singular (min radius below 10 * singular_radius) and the scale
// probe finds a crossing inside radius r.
std::optional<NeckSpec> detect_neck(const FlowState& state, double r, double eps0, const FlowConfig& config);

// Replaces the two neck arcs inside |p_plus| by arcs crossing the other axis, then remeshes to the
// configured vertex count. Throws SurgeryFailed if the result is not an embedded curve of the other
// class with fewer cone crossings.
ProfileCurve neck_to_neck(const ProfileCurve& curve, const NeckSpec& neck, const FlowConfig& config);

// Homothety w -> lambda w onto the monotone area.
Renormalization monotone_renormalize(const ProfileCurve& curve);

SurgeryRun flow_with_surgery(FlowState state, const FlowConfig& config, const SurgeryOptions& options = {});

void write_surgery_record(std::ostream& out, const SurgeryRecord& record);  // one JSON line

}  // namespace cp2flow
