#pragma once

#include <iosfwd>
#include <vector>

#include "cp2flow/core.hpp"

namespace cp2flow {

// Snapshot of a flow taken at a sample time. Quantities that do not apply to the current class
// are NaN (area_m2 for Clifford curves, area_m4 and psi_max for Chekanov/Clifford respectively).
struct TrajectorySample {
    double t = 0.0;
    ProfileCurve curve;
    int segment = 0;  // number of surgeries performed before this sample
    double min_r = 0.0;
    double max_k = 0.0;
    double area_m2 = 0.0;
    double area_m4 = 0.0;
    double defect = 0.0;
    double psi_max = 0.0;
    double max_speed = 0.0;
    int n_cone = 0;       // crossings with C^0_{pi/2}
    int n_cone_wide = 0;  // crossings with C^0_{2pi/3}
    int n_unit = 0;       // crossings with the unit circle
    bool graphical = false;
};

using Trajectory = std::vector<TrajectorySample>;

// Header t,min_r,max_k,area_m2,area_m4,defect,n_cone,psi_max,max_speed and one row per sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace cp2flow
