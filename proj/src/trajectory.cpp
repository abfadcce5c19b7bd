#include "cp2flow/trajectory.hpp"

#include <iomanip>
#include <ostream>

namespace cp2flow {

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << "t,min_r,max_k,area_m2,area_m4,defect,n_cone,psi_max,max_speed\n";
    out << std::setprecision(15);
    for (const auto& s : trajectory)
        out << s.t << ',' << s.min_r << ',' << s.max_k << ',' << s.area_m2 << ',' << s.area_m4 << ',' << s.defect
            << ',' << s.n_cone << ',' << s.psi_max << ',' << s.max_speed << '\n';
}

}  // namespace cp2flow
