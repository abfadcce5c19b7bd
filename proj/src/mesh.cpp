#include "cp2flow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cp2flow {

namespace {

PlanarPoint reflect(PlanarPoint p, bool real_axis) { return real_axis ? std::conj(p) : -std::conj(p); }

struct Ghosts {
    PlanarPoint before, after;
};

Ghosts ghosts(const FundamentalArc& arc) {
    const Polyline& q = arc.points;
    const std::size_t m = q.size() - 1;
    if (arc.cls == SymmetryClass::Clifford)
        return {std::conj(q[1]), -std::conj(q[m - 1])};
    return {reflect(q[1], arc.real_axis), reflect(q[m - 1], arc.real_axis)};
}

double shoelace(const Polyline& loop) {
    double a = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
        a += cross(loop[i], loop[(i + 1) % loop.size()]);
    return 0.5 * a;
}

Polyline ccw(Polyline loop) {
    if (shoelace(loop) < 0)
        std::reverse(loop.begin(), loop.end());
    return loop;
}

struct AxisCrossing {
    int edge;          // edge index i (from vertex i to i+1)
    PlanarPoint point;
    bool upward;       // coordinate across the axis goes from negative to non-negative
};

// Crossings of a closed loop with the real axis (real_axis) or the imaginary axis.
std::vector<AxisCrossing> axis_crossings(const Polyline& loop, bool real_axis) {
    std::vector<AxisCrossing> out;
    const int n = static_cast<int>(loop.size());
    const auto across = [&](PlanarPoint p) { return real_axis ? p.imag() : p.real(); };
    for (int i = 0; i < n; ++i) {
        const PlanarPoint a = loop[i];
        const PlanarPoint b = loop[(i + 1) % n];
        const double sa = across(a);
        const double sb = across(b);
        if ((sa >= 0) != (sb >= 0)) {
            const double f = sa / (sa - sb);
            PlanarPoint p = a + f * (b - a);
            if (real_axis)
                p.imag(0.0);
            else
                p.real(0.0);
            out.push_back({i, p, sb >= 0});
        }
    }
    return out;
}

// Vertices strictly after crossing c0 up to crossing c1 (walking forward), bracketed by the
// crossing points themselves.
Polyline extract(const Polyline& loop, const AxisCrossing& c0, const AxisCrossing& c1) {
    const int n = static_cast<int>(loop.size());
    Polyline out{c0.point};
    int i = (c0.edge + 1) % n;
    while (true) {
        if (std::abs(loop[i] - out.back()) > 1e-14)
            out.push_back(loop[i]);
        if (i == c1.edge)
            break;
        i = (i + 1) % n;
    }
    if (std::abs(c1.point - out.back()) > 1e-14)
        out.push_back(c1.point);
    else
        out.back() = c1.point;
    return out;
}

}  // namespace

int fundamental_segments(SymmetryClass cls, int vertices_per_component) {
    return cls == SymmetryClass::Clifford ? vertices_per_component / 4 : vertices_per_component / 2;
}

bool chekanov_real_axis(const ProfileCurve& curve) {
    PlanarPoint c(0, 0);
    for (auto p : curve.components.at(0))
        c += p;
    return std::abs(c.real()) >= std::abs(c.imag());
}

FundamentalArc fundamental_arc(const ProfileCurve& curve) {
    FundamentalArc arc;
    arc.cls = curve.symmetry_class;
    const Polyline& v = curve.components.at(0);
    const int n = static_cast<int>(v.size());
    const int m = fundamental_segments(arc.cls, n);
    if (arc.cls == SymmetryClass::Chekanov)
        arc.real_axis = chekanov_real_axis(curve);
    arc.points.assign(v.begin(), v.begin() + m + 1);
    return arc;
}

ProfileCurve assemble(const FundamentalArc& arc) {
    const Polyline& q = arc.points;
    const int m = static_cast<int>(q.size()) - 1;
    ProfileCurve out;
    out.symmetry_class = arc.cls;
    if (arc.cls == SymmetryClass::Clifford) {
        const int n = 4 * m;
        Polyline v(n);
        for (int i = 0; i <= m; ++i) {
            v[i] = q[i];
            v[2 * m - i] = -std::conj(q[i]);
        }
        v[0].imag(0.0);
        v[m].real(0.0);
        v[2 * m].imag(0.0);
        for (int i = 0; i < 2 * m; ++i)
            v[i + 2 * m] = -v[i];
        out.components.push_back(std::move(v));
    } else {
        const int n = 2 * m;
        Polyline v(n);
        for (int i = 0; i <= m; ++i)
            v[i] = q[i];
        for (int i = 1; i < m; ++i)
            v[n - i] = reflect(q[i], arc.real_axis);
        if (arc.real_axis) {
            v[0].imag(0.0);
            v[m].imag(0.0);
        } else {
            v[0].real(0.0);
            v[m].real(0.0);
        }
        Polyline w(n);
        for (int i = 0; i < n; ++i)
            w[i] = -v[i];
        out.components.push_back(std::move(v));
        out.components.push_back(std::move(w));
    }
    return out;
}

std::vector<double> arc_curvatures(const FundamentalArc& arc) {
    const Polyline& q = arc.points;
    const std::size_t m = q.size() - 1;
    const Ghosts g = ghosts(arc);
    std::vector<double> k(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        const PlanarPoint a = i == 0 ? g.before : q[i - 1];
        const PlanarPoint c = i == m ? g.after : q[i + 1];
        k[i] = menger_curvature(a, q[i], c);
    }
    return k;
}

namespace {

double spacing_weight(double r, double h_uniform, double grading) {
    return 1.0 / std::min(h_uniform, grading * r);
}

}  // namespace

Polyline resample_arc(const FundamentalArc& arc, int segments, double grading) {
    const Polyline& q = arc.points;
    const int m = static_cast<int>(q.size()) - 1;
    if (m < 2 || segments < 2)
        throw Error(ErrorKind::InvalidArc, "fundamental arc too short to resample");
    const std::vector<double> k = arc_curvatures(arc);
    std::vector<ArcEdge> edges;
    edges.reserve(m);
    double total_len = 0.0;
    for (int j = 0; j < m; ++j) {
        edges.emplace_back(q[j], q[j + 1], 0.5 * (k[j] + k[j + 1]));
        total_len += edges.back().length;
    }
    const double h_u = total_len / segments;
    constexpr int sub = 4;
    // cumulative weighted length at sub-piece boundaries
    std::vector<double> cum(static_cast<std::size_t>(m) * sub + 1, 0.0);
    for (int j = 0; j < m; ++j) {
        for (int s = 0; s < sub; ++s) {
            const double tau = (s + 0.5) / sub;
            const double w = spacing_weight(std::abs(edges[j].point(tau)), h_u, grading);
            cum[j * sub + s + 1] = cum[j * sub + s] + w * edges[j].length / sub;
        }
    }
    const double total_w = cum.back();
    Polyline out(segments + 1);
    out[0] = q[0];
    out[segments] = q[m];
    std::size_t piece = 0;
    for (int i = 1; i < segments; ++i) {
        const double target = total_w * i / segments;
        while (piece + 1 < cum.size() - 1 && cum[piece + 1] < target)
            ++piece;
        const double span = cum[piece + 1] - cum[piece];
        const double f = span > 0 ? (target - cum[piece]) / span : 0.0;
        const int j = static_cast<int>(piece / sub);
        const double tau = (static_cast<double>(piece % sub) + std::clamp(f, 0.0, 1.0)) / sub;
        out[i] = edges[j].point(tau);
    }
    return out;
}

double mesh_ratio(const ProfileCurve& curve, double grading) {
    const FundamentalArc arc = fundamental_arc(curve);
    const Polyline& q = arc.points;
    const int m = static_cast<int>(q.size()) - 1;
    double total = 0.0;
    for (int j = 0; j < m; ++j)
        total += std::abs(q[j + 1] - q[j]);
    const double h_u = total / m;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int j = 0; j < m; ++j) {
        const double len = std::abs(q[j + 1] - q[j]);
        const double rel = len * spacing_weight(std::abs(0.5 * (q[j] + q[j + 1])), h_u, grading);
        lo = std::min(lo, rel);
        hi = std::max(hi, rel);
    }
    return lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
}

ProfileCurve remesh(const ProfileCurve& curve, double grading) {
    FundamentalArc arc = fundamental_arc(curve);
    const int m = static_cast<int>(arc.points.size()) - 1;
    arc.points = resample_arc(arc, m, grading);
    return assemble(arc);
}

ProfileCurve canonicalize(const ProfileCurve& dense, int vertices_per_component, double grading) {
    const SymmetryClass cls = dense.symmetry_class;
    const int segments = fundamental_segments(cls, vertices_per_component);
    if ((cls == SymmetryClass::Clifford && vertices_per_component % 4 != 0) ||
        (cls == SymmetryClass::Chekanov && vertices_per_component % 2 != 0) || segments < 2)
        throw Error(ErrorKind::Domain, "vertex count incompatible with the symmetry class");
    FundamentalArc arc;
    arc.cls = cls;
    if (cls == SymmetryClass::Clifford) {
        if (dense.components.size() != 1)
            throw Error(ErrorKind::UnsupportedTopology, "clifford curve needs one component");
        const Polyline loop = ccw(dense.components[0]);
        std::vector<AxisCrossing> start;
        for (const auto& c : axis_crossings(loop, true))
            if (c.upward && c.point.real() > 0)
                start.push_back(c);
        std::vector<AxisCrossing> stop;
        for (const auto& c : axis_crossings(loop, false))
            if (!c.upward && c.point.imag() > 0)
                stop.push_back(c);
        if (start.size() != 1 || stop.size() != 1)
            throw Error(ErrorKind::UnsupportedTopology, "clifford curve must cross each half-axis once");
        arc.points = extract(loop, start[0], stop[0]);
    } else {
        if (dense.components.size() != 2)
            throw Error(ErrorKind::UnsupportedTopology, "chekanov curve needs two components");
        ProfileCurve probe = dense;
        arc.real_axis = chekanov_real_axis(probe);
        // component on the positive side of its axis
        int pick = 0;
        {
            PlanarPoint c(0, 0);
            for (auto p : dense.components[0])
                c += p;
            const double side = arc.real_axis ? c.real() : c.imag();
            if (side < 0)
                pick = 1;
        }
        const Polyline loop = ccw(dense.components[pick]);
        const auto xs = axis_crossings(loop, arc.real_axis);
        if (xs.size() != 2)
            throw Error(ErrorKind::UnsupportedTopology, "chekanov component must cross its axis twice");
        const bool first_far = std::abs(xs[0].point) > std::abs(xs[1].point);
        const AxisCrossing& far = first_far ? xs[0] : xs[1];
        const AxisCrossing& near = first_far ? xs[1] : xs[0];
        arc.points = extract(loop, far, near);
    }
    // one pass to spread the dense samples, a second to settle the graded spacing
    arc.points = resample_arc(arc, segments, grading);
    arc.points = resample_arc(arc, segments, grading);
    return assemble(arc);
}

}  // namespace cp2flow
