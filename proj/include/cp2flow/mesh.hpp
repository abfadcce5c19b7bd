#pragma once

#include "cp2flow/core.hpp"

namespace cp2flow {

// Canonical symmetric meshes.
//
// Clifford: one loop of N = 4M vertices, vertex 0 on the positive real axis, vertex M on the
// positive imaginary axis; v[-i] = conj(v[i]) and v[i + N/2] = -v[i].
// Chekanov: two loops of N = 2M vertices with component 1 = -component 0. Component 0 is
// reflection-symmetric about its axis (real or imaginary), v[-i] = S(v[i]); vertex 0 is the outer
// axis crossing and vertex M the inner one.
//
// The fundamental arc is the part of component 0 between the two fixed vertices, from which the
// whole curve is rebuilt by reflection.

struct FundamentalArc {
    Polyline points;
    SymmetryClass cls = SymmetryClass::Clifford;
    bool real_axis = true;  // Chekanov only: reflection axis of component 0
};

bool chekanov_real_axis(const ProfileCurve& curve);

FundamentalArc fundamental_arc(const ProfileCurve& canonical);
ProfileCurve assemble(const FundamentalArc& arc);

// Menger curvatures along the fundamental arc, using reflected ghost vertices at both ends.
std::vector<double> arc_curvatures(const FundamentalArc& arc);

// Resample the fundamental arc into `segments` edges; spacing follows min(h, grading * r) so that
// the neighbourhood of the origin stays resolved. Points are placed on circular-arc edges.
Polyline resample_arc(const FundamentalArc& arc, int segments, double grading);

// Ratio of the largest to smallest edge length measured against the graded spacing.
double mesh_ratio(const ProfileCurve& canonical, double grading);

ProfileCurve remesh(const ProfileCurve& canonical, double grading);

// Build a canonical mesh from dense closed loops that are symmetric up to sampling.
ProfileCurve canonicalize(const ProfileCurve& dense, int vertices_per_component, double grading);

int fundamental_segments(SymmetryClass cls, int vertices_per_component);

}  // namespace cp2flow
