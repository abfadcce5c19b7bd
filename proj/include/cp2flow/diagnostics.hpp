#pragma once

#include <optional>

#include "cp2flow/core.hpp"
#include "cp2flow/trajectory.hpp"

namespace cp2flow {

struct MonotoneDefect {
    SymmetryClass cls = SymmetryClass::Clifford;
    double disc_area = 0.0;
    double target = 0.0;
    double defect = 0.0;
};

struct TrianglePatch {
    double psi = 0.0;
    PlanarPoint p_plus;
    PlanarPoint p_minus;
    CurveArc arc;
    double area = 0.0;
    double xi = 0.0;
};

struct OpeningAngle {
    double psi = 0.0;
    PlanarPoint p_plus;
    int component = 0;
    int vertex = 0;
};

enum class DiscSelection { ByClass, Maslov4, Maslov2 };

struct TriangleSample {
    double t = 0.0;
    double area = 0.0;
    double psi = 0.0;
    double rate = 0.0;   // NaN at the trajectory ends
    double bound = 0.0;  // 6 area + (pi - 2 psi)
    bool violation = false;
};

// 6 * area - pi * mu + integral of H over the full component.
double cg_residual(const ProfileCurve& curve, int component);

// Triangle with a vertex at the origin, rays to the curve vertices `minus` and `plus`, closed by the
// curve walked from `minus` to `plus` (forward or backward in vertex order).
TrianglePatch make_triangle_patch(const ProfileCurve& curve, int component, int minus, int plus, bool forward);

// Triangle spanned by the maximal opening cone of a Chekanov component and its inner arc.
TrianglePatch max_opening_patch(const ProfileCurve& curve);

double cg_polygon_residual(const TrianglePatch& patch, const ProfileCurve& curve);

// Target area 2pi/3 for the Maslov-4 disc of a Clifford curve, pi/3 for the Maslov-2 disc of a
// Chekanov component (the one on the positive side of its axis).
MonotoneDefect monotone_defect(const ProfileCurve& curve);
double monotone_target(SymmetryClass cls);
int maslov_disc_component(const ProfileCurve& curve);

// Largest deviation between the centred difference rate of the disc area and 6 * area - pi * mu.
// Triples spanning a change of segment or class are skipped.
double area_rate_check(const Trajectory& trajectory, DiscSelection disc = DiscSelection::ByClass);

// Chekanov pairs: psi = 2 * max angular distance of the positive-side component from its axis.
OpeningAngle max_opening_angle(const ProfileCurve& curve);

std::vector<TriangleSample> triangle_monitor(const Trajectory& trajectory, double tolerance = 1e-3);

}  // namespace cp2flow
