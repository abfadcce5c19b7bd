#include "cp2flow/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "cp2flow/mesh.hpp"
#include "cp2flow/numerics.hpp"

namespace cp2flow {

using num::pi;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PlanarPoint centroid(const Polyline& loop) {
    PlanarPoint c(0, 0);
    for (auto p : loop)
        c += p;
    return loop.empty() ? c : c / static_cast<double>(loop.size());
}

// Rotation taking the Chekanov axis direction to the positive real axis.
PlanarPoint to_axis_frame(bool real_axis) { return real_axis ? PlanarPoint(1, 0) : PlanarPoint(0, -1); }

int positive_side_component(const ProfileCurve& curve, bool real_axis) {
    const PlanarPoint rot = to_axis_frame(real_axis);
    for (int c = 0; c < static_cast<int>(curve.components.size()); ++c)
        if ((centroid(curve.components[c]) * rot).real() > 0)
            return c;
    return 0;
}

// Second-order derivative of f at the middle of three (possibly unevenly spaced) samples.
double centred_rate(double t0, double t1, double t2, double f0, double f1, double f2) {
    const double h1 = t1 - t0;
    const double h2 = t2 - t1;
    return -f0 * h2 / (h1 * (h1 + h2)) + f1 * (h2 - h1) / (h1 * h2) + f2 * h1 / (h2 * (h1 + h2));
}

}  // namespace

double cg_residual(const ProfileCurve& curve, int component) {
    return 6.0 * enclosed_area(curve, component) - pi * maslov_disc(curve, component) +
           mean_curvature_integral(curve, CurveArc{component, 0, 0, true});
}

TrianglePatch make_triangle_patch(const ProfileCurve& curve, int component, int minus, int plus, bool forward) {
    if (component < 0 || component >= static_cast<int>(curve.components.size()))
        throw Error(ErrorKind::InvalidArc, "component index out of range");
    const Polyline& loop = curve.components[component];
    const int n = static_cast<int>(loop.size());
    if (minus < 0 || minus >= n || plus < 0 || plus >= n || minus == plus)
        throw Error(ErrorKind::InvalidArc, "triangle corners must be distinct vertices");
    TrianglePatch patch;
    patch.p_minus = loop[minus];
    patch.p_plus = loop[plus];
    patch.arc = CurveArc{component, minus, plus, forward};
    patch.psi = std::atan2(cross(patch.p_minus, patch.p_plus), dot(patch.p_minus, patch.p_plus));
    const RegionSpec region{{ConeRay{std::arg(patch.p_minus), 0.0, std::abs(patch.p_minus)}, patch.arc,
                             ConeRay{std::arg(patch.p_plus), std::abs(patch.p_plus), 0.0}}};
    patch.area = symplectic_area(region, curve);
    // corner at p-: from the outgoing ray direction to the tangent of the curve walk
    PlanarPoint tangent = loop[(minus + 1) % n] - loop[(minus + n - 1) % n];
    if (!forward)
        tangent = -tangent;
    patch.xi = std::abs(turning_angle(patch.p_minus, tangent));
    return patch;
}

OpeningAngle max_opening_angle(const ProfileCurve& curve) {
    if (curve.symmetry_class != SymmetryClass::Chekanov)
        throw Error(ErrorKind::InvalidClass, "opening angle is defined for Chekanov pairs");
    const bool real_axis = chekanov_real_axis(curve);
    const PlanarPoint rot = to_axis_frame(real_axis);
    OpeningAngle out;
    out.component = positive_side_component(curve, real_axis);
    const Polyline& loop = curve.components.at(out.component);
    double hi = -pi;
    double lo = pi;
    for (int i = 0; i < static_cast<int>(loop.size()); ++i) {
        const PlanarPoint p = loop[i] * rot;
        if (!(p.real() > 0))
            throw Error(ErrorKind::InvalidClass, "component crosses the axis perpendicular to its own");
        const double a = std::arg(p);
        if (a > hi) {
            hi = a;
            out.vertex = i;
        }
        lo = std::min(lo, a);
    }
    // p+ is reported on the counterclockwise side of the axis; by symmetry both sides agree
    const double best = std::max(hi, -lo);
    out.psi = 2.0 * best;
    out.p_plus = loop[out.vertex];
    return out;
}

TrianglePatch max_opening_patch(const ProfileCurve& curve) {
    const OpeningAngle oa = max_opening_angle(curve);
    const bool real_axis = chekanov_real_axis(curve);
    const PlanarPoint rot = to_axis_frame(real_axis);
    const Polyline& loop = curve.components[oa.component];
    const int n = static_cast<int>(loop.size());
    int minus = 0;
    int nearest = 0;
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double a = std::arg(loop[i] * rot);
        if (a < lo) {
            lo = a;
            minus = i;
        }
        if (std::abs(loop[i]) < std::abs(loop[nearest]))
            nearest = i;
    }
    // the inner arc is the one through the vertex closest to the origin
    bool forward = false;
    for (int i = minus; i != oa.vertex; i = (i + 1) % n)
        if (i == nearest)
            forward = true;
    TrianglePatch patch = make_triangle_patch(curve, oa.component, minus, oa.vertex, forward);
    // the corners are tangencies with the cone, where the curve turns back along the ray
    patch.xi = pi;
    return patch;
}

double cg_polygon_residual(const TrianglePatch& patch, const ProfileCurve& curve) {
    return 6.0 * patch.area - pi * maslov_polygon(patch.xi, patch.psi) + mean_curvature_integral(curve, patch.arc);
}

double monotone_target(SymmetryClass cls) { return cls == SymmetryClass::Clifford ? 2.0 * pi / 3.0 : pi / 3.0; }

int maslov_disc_component(const ProfileCurve& curve) {
    if (curve.symmetry_class == SymmetryClass::Clifford)
        return 0;
    return positive_side_component(curve, chekanov_real_axis(curve));
}

MonotoneDefect monotone_defect(const ProfileCurve& curve) {
    MonotoneDefect d;
    d.cls = classify(curve);
    d.disc_area = enclosed_area(curve, maslov_disc_component(curve));
    d.target = monotone_target(d.cls);
    d.defect = std::abs(d.disc_area - d.target);
    return d;
}

double area_rate_check(const Trajectory& tr, DiscSelection disc) {
    double worst = 0.0;
    const auto area_of = [](const TrajectorySample& s) {
        return s.curve.symmetry_class == SymmetryClass::Clifford ? s.area_m4 : s.area_m2;
    };
    for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
        const auto& a = tr[k - 1];
        const auto& b = tr[k];
        const auto& c = tr[k + 1];
        if (a.segment != b.segment || b.segment != c.segment)
            continue;
        const SymmetryClass cls = b.curve.symmetry_class;
        if (a.curve.symmetry_class != cls || c.curve.symmetry_class != cls)
            continue;
        if (!(a.t < b.t && b.t < c.t))
            continue;
        int mu = cls == SymmetryClass::Clifford ? 4 : 2;
        if (disc == DiscSelection::Maslov4)
            mu = 4;
        else if (disc == DiscSelection::Maslov2)
            mu = 2;
        const double rate = centred_rate(a.t, b.t, c.t, area_of(a), area_of(b), area_of(c));
        const double dev = std::abs(rate - (6.0 * area_of(b) - pi * mu));
        if (std::isfinite(dev))
            worst = std::max(worst, dev);
    }
    return worst;
}

std::vector<TriangleSample> triangle_monitor(const Trajectory& tr, double tolerance) {
    std::vector<TriangleSample> out;
    std::vector<int> seg;
    for (const auto& s : tr) {
        if (s.curve.symmetry_class != SymmetryClass::Chekanov)
            continue;
        try {
            const TrianglePatch p = max_opening_patch(s.curve);
            TriangleSample ts;
            ts.t = s.t;
            ts.area = p.area;
            ts.psi = p.psi;
            ts.rate = kNaN;
            ts.bound = 6.0 * p.area + (pi - 2.0 * p.psi);
            out.push_back(ts);
            seg.push_back(s.segment);
        } catch (const Error&) {
            // monitor inactive on this sample
        }
    }
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
        if (seg[k - 1] != seg[k] || seg[k] != seg[k + 1])
            continue;
        if (!(out[k - 1].t < out[k].t && out[k].t < out[k + 1].t))
            continue;
        out[k].rate = centred_rate(out[k - 1].t, out[k].t, out[k + 1].t, out[k - 1].area, out[k].area, out[k + 1].area);
        out[k].violation = out[k].rate > out[k].bound + tolerance;
    }
    return out;
}

}  // namespace cp2flow
