#include "cp2flow/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cp2flow/numerics.hpp"

namespace cp2flow {

using num::pi;

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::RegionMalformed: return "region-malformed";
        case ErrorKind::DegenerateRegion: return "degenerate-region";
        case ErrorKind::InvalidArc: return "invalid-arc";
        case ErrorKind::UnsupportedTopology: return "unsupported-topology";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::OnBoundary: return "on-boundary";
        case ErrorKind::SymmetryBroken: return "symmetry-broken";
        case ErrorKind::DegenerateTangent: return "degenerate-tangent";
        case ErrorKind::NearOrigin: return "near-origin";
        case ErrorKind::InvalidClass: return "invalid-class";
        case ErrorKind::OpenArc: return "open-arc";
        case ErrorKind::SurgeryFailed: return "surgery-failed";
        case ErrorKind::RenormalizationFailed: return "renormalization-failed";
        case ErrorKind::InfiniteTime: return "infinite-time";
        case ErrorKind::Generator: return "generator";
        case ErrorKind::Config: return "config";
        case ErrorKind::InvariantViolation: return "invariant-violation";
    }
    return "unknown";
}

const char* to_string(SymmetryClass cls) {
    return cls == SymmetryClass::Clifford ? "clifford" : "chekanov";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

std::size_t ProfileCurve::vertex_count() const {
    std::size_t n = 0;
    for (const auto& c : components)
        n += c.size();
    return n;
}

// ---- discrete geometry ------------------------------------------------------------------

namespace {

double sinc(double x) {
    if (std::abs(x) < 1e-4)
        return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

double polar_step(PlanarPoint a, PlanarPoint b) { return std::atan2(cross(a, b), dot(a, b)); }

double mc_density(double r2) { return (1.0 - 4.0 * r2) / (1.0 + 2.0 * r2); }

double dist_point_segment(PlanarPoint p, PlanarPoint a, PlanarPoint b) {
    const PlanarPoint d = b - a;
    const double len2 = std::norm(d);
    double t = len2 > 0 ? dot(p - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

double dist_point_loop(PlanarPoint p, const Polyline& loop) {
    double best = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i)
        best = std::min(best, dist_point_segment(p, loop[i], loop[(i + 1) % n]));
    return best;
}

// Uniform grid over the edges of a set of loops, for nearest-distance queries on dense curves.
class SegmentGrid {
public:
    explicit SegmentGrid(const std::vector<const Polyline*>& loops) {
        double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
        std::size_t edges = 0;
        for (const Polyline* l : loops) {
            edges += l->size();
            for (auto p : *l) {
                xlo = std::min(xlo, p.real());
                xhi = std::max(xhi, p.real());
                ylo = std::min(ylo, p.imag());
                yhi = std::max(yhi, p.imag());
            }
        }
        const double extent = std::max({xhi - xlo, yhi - ylo, 1e-300});
        dim_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(edges))), 1, 1024);
        cell_ = extent / dim_ * (1 + 1e-9);
        x0_ = xlo;
        y0_ = ylo;
        cells_.resize(static_cast<std::size_t>(dim_) * dim_);
        for (const Polyline* l : loops) {
            const int n = static_cast<int>(l->size());
            for (int i = 0; i < n; ++i) {
                const PlanarPoint a = (*l)[i], b = (*l)[(i + 1) % n];
                const int i0 = index(std::min(a.real(), b.real()) - x0_), i1 = index(std::max(a.real(), b.real()) - x0_);
                const int j0 = index(std::min(a.imag(), b.imag()) - y0_), j1 = index(std::max(a.imag(), b.imag()) - y0_);
                for (int ci = i0; ci <= i1; ++ci)
                    for (int cj = j0; cj <= j1; ++cj)
                        cells_[static_cast<std::size_t>(ci) * dim_ + cj].push_back({a, b});
            }
        }
    }

    double distance(PlanarPoint p) const {
        const int pi_ = index(p.real() - x0_), pj = index(p.imag() - y0_);
        // after ring k every unvisited edge is at least k cells away
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= dim_; ++k) {
            for (int ci = pi_ - k; ci <= pi_ + k; ++ci)
                for (int cj = pj - k; cj <= pj + k; ++cj) {
                    if (std::max(std::abs(ci - pi_), std::abs(cj - pj)) != k || ci < 0 || cj < 0 || ci >= dim_ || cj >= dim_)
                        continue;
                    for (const auto& [a, b] : cells_[static_cast<std::size_t>(ci) * dim_ + cj])
                        best = std::min(best, dist_point_segment(p, a, b));
                }
            if (best <= k * cell_)
                break;
        }
        return best;
    }

private:
    int index(double offset) const { return std::clamp(static_cast<int>(std::floor(offset / cell_)), 0, dim_ - 1); }

    int dim_ = 1;
    double cell_ = 1.0, x0_ = 0.0, y0_ = 0.0;
    std::vector<std::vector<std::pair<PlanarPoint, PlanarPoint>>> cells_;
};

// Below this many distance evaluations the plain scan is cheaper than building a grid.
constexpr double kGridThreshold = 1e6;

}  // namespace

double menger_curvature(PlanarPoint a, PlanarPoint b, PlanarPoint c) {
    const double ab = std::abs(b - a);
    const double bc = std::abs(c - b);
    const double ca = std::abs(c - a);
    const double denom = ab * bc * ca;
    if (denom <= 0.0)
        return 0.0;
    return 2.0 * cross(b - a, c - b) / denom;
}

std::vector<double> vertex_curvatures(const Polyline& loop) {
    const int n = static_cast<int>(loop.size());
    std::vector<double> k(n);
    for (int i = 0; i < n; ++i)
        k[i] = menger_curvature(loop[wrap(i - 1, n)], loop[i], loop[wrap(i + 1, n)]);
    return k;
}

double turning_angle(PlanarPoint u, PlanarPoint v) { return std::atan2(cross(u, v), dot(u, v)); }

ArcEdge::ArcEdge(PlanarPoint a_, PlanarPoint b, double kappa) : a(a_) {
    chord = std::abs(b - a_);
    dir = chord > 0 ? (b - a_) / chord : PlanarPoint(1.0, 0.0);
    const double s = std::clamp(0.5 * kappa * chord, -0.95, 0.95);
    alpha = std::asin(s);
    length = chord / sinc(alpha);
}

PlanarPoint ArcEdge::point(double tau) const {
    const PlanarPoint z = tau * length * sinc(alpha * tau) * std::polar(1.0, alpha * (tau - 1.0));
    return a + dir * z;
}

PlanarPoint ArcEdge::deriv(double tau) const {
    return dir * length * std::polar(1.0, alpha * (2.0 * tau - 1.0));
}

PlanarPoint ArcEdge::tangent_start() const { return dir * std::polar(1.0, -alpha); }
PlanarPoint ArcEdge::tangent_end() const { return dir * std::polar(1.0, alpha); }

// ---- area -------------------------------------------------------------------------------

double area_primitive(double r2) { return r2 / (1.0 + 2.0 * r2); }

namespace {

constexpr double kAreaTol = 1e-10;
constexpr double kMaxPhiSpan = 0.1;
constexpr double kClosureTol = 1e-9;

double arc_edge_area(const ArcEdge& e, PlanarPoint b) {
    const double span = std::abs(polar_step(e.a, b)) + 2.0 * std::abs(e.alpha);
    const int pieces = std::max(1, static_cast<int>(std::ceil(span / kMaxPhiSpan)));
    const auto f = [&e](double tau) {
        const PlanarPoint p = e.point(tau);
        return cross(p, e.deriv(tau)) / (1.0 + 2.0 * std::norm(p));
    };
    double total = 0.0;
    for (int j = 0; j < pieces; ++j) {
        const double t0 = static_cast<double>(j) / pieces;
        const double t1 = static_cast<double>(j + 1) / pieces;
        const double tol = kAreaTol * (span / pieces) / (2.0 * pi) + 1e-17;
        total += num::adaptive_simpson(f, t0, t1, tol);
    }
    return total;
}

struct ArcWalk {
    int n;
    std::vector<int> idx;  // vertex indices along the traversal, first..last
};

ArcWalk walk(const ProfileCurve& curve, const CurveArc& arc) {
    if (arc.component < 0 || arc.component >= static_cast<int>(curve.components.size()))
        throw Error(ErrorKind::InvalidArc, "component index out of range");
    const int n = static_cast<int>(curve.components[arc.component].size());
    if (n < 3)
        throw Error(ErrorKind::InvalidArc, "component has fewer than 3 vertices");
    if (arc.first < 0 || arc.first >= n || arc.last < 0 || arc.last >= n)
        throw Error(ErrorKind::InvalidArc, "vertex range outside component");
    ArcWalk w{n, {}};
    const int step = arc.forward ? 1 : -1;
    int i = arc.first;
    w.idx.push_back(i);
    do {
        i = wrap(i + step, n);
        w.idx.push_back(i);
    } while (i != arc.last);
    return w;
}

double edge_kappa(const std::vector<double>& k, int i, int j, bool forward) {
    const double kk = 0.5 * (k[i] + k[j]);
    return forward ? kk : -kk;
}

double curve_arc_area(const ProfileCurve& curve, const CurveArc& arc) {
    const ArcWalk w = walk(curve, arc);
    const Polyline& loop = curve.components[arc.component];
    const std::vector<double> k = vertex_curvatures(loop);
    double total = 0.0;
    for (std::size_t e = 0; e + 1 < w.idx.size(); ++e) {
        const PlanarPoint a = loop[w.idx[e]];
        const PlanarPoint b = loop[w.idx[e + 1]];
        if (dist_point_segment(PlanarPoint(0, 0), a, b) < 1e-14)
            throw Error(ErrorKind::DegenerateRegion, "curve edge passes through the origin");
        total += arc_edge_area(ArcEdge(a, b, edge_kappa(k, w.idx[e], w.idx[e + 1], arc.forward)), b);
    }
    return total;
}

std::pair<PlanarPoint, PlanarPoint> endpoints(const Segment& seg, const ProfileCurve* curve) {
    if (const auto* c = std::get_if<CurveArc>(&seg)) {
        if (!curve)
            throw Error(ErrorKind::RegionMalformed, "curve arc without a curve");
        if (c->component < 0 || c->component >= static_cast<int>(curve->components.size()))
            throw Error(ErrorKind::InvalidArc, "component index out of range");
        const Polyline& loop = curve->components[c->component];
        const int n = static_cast<int>(loop.size());
        if (c->first < 0 || c->first >= n || c->last < 0 || c->last >= n)
            throw Error(ErrorKind::InvalidArc, "vertex range outside component");
        return {loop[c->first], loop[c->last]};
    }
    if (const auto* r = std::get_if<ConeRay>(&seg))
        return {std::polar(r->r_from, r->angle), std::polar(r->r_to, r->angle)};
    const auto& a = std::get<CircleArc>(seg);
    return {std::polar(a.radius, a.phi_from), std::polar(a.radius, a.phi_to)};
}

double region_area(const RegionSpec& region, const ProfileCurve* curve) {
    const auto& segs = region.boundary;
    if (segs.empty())
        return 0.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto end_i = endpoints(segs[i], curve).second;
        const auto start_next = endpoints(segs[(i + 1) % segs.size()], curve).first;
        if (std::abs(end_i - start_next) > kClosureTol)
            throw Error(ErrorKind::RegionMalformed, "boundary segments do not close up");
    }
    double total = 0.0;
    for (const auto& seg : segs) {
        if (const auto* c = std::get_if<CurveArc>(&seg)) {
            total += curve_arc_area(*curve, *c);
        } else if (const auto* r = std::get_if<ConeRay>(&seg)) {
            if (r->r_from < 0 || r->r_to < 0)
                throw Error(ErrorKind::DegenerateRegion, "cone ray passes through the origin");
        } else {
            const auto& a = std::get<CircleArc>(seg);
            if (a.radius <= 0)
                throw Error(ErrorKind::DegenerateRegion, "circle arc of zero radius");
            total += area_primitive(a.radius * a.radius) * (a.phi_to - a.phi_from);
        }
    }
    return total;
}

}  // namespace

double symplectic_area(const RegionSpec& region, const ProfileCurve& curve) {
    return region_area(region, &curve);
}

double symplectic_area(const RegionSpec& region) { return region_area(region, nullptr); }

double enclosed_area(const ProfileCurve& curve, int component) {
    return curve_arc_area(curve, CurveArc{component, 0, 0, true});
}

double euclidean_disc_area(PlanarPoint center, double radius) {
    const auto f = [&](double t) {
        const PlanarPoint e = std::polar(1.0, t);
        const PlanarPoint p = center + radius * e;
        return cross(p, PlanarPoint(0, 1) * radius * e) / (1.0 + 2.0 * std::norm(p));
    };
    const int pieces = 64;
    double total = 0.0;
    for (int j = 0; j < pieces; ++j)
        total += num::adaptive_simpson(f, 2 * pi * j / pieces, 2 * pi * (j + 1) / pieces, kAreaTol / pieces);
    return total;
}

// ---- mean curvature ---------------------------------------------------------------------

double mean_curvature_integral(const ProfileCurve& curve, const CurveArc& arc) {
    const ArcWalk w = walk(curve, arc);
    const Polyline& loop = curve.components[arc.component];
    const std::vector<double> k = vertex_curvatures(loop);
    const bool closed = arc.first == arc.last;
    std::vector<ArcEdge> edges;
    edges.reserve(w.idx.size());
    double total = 0.0;
    for (std::size_t e = 0; e + 1 < w.idx.size(); ++e) {
        const PlanarPoint a = loop[w.idx[e]];
        const PlanarPoint b = loop[w.idx[e + 1]];
        if (std::norm(a) < 1e-24 || std::norm(b) < 1e-24)
            throw Error(ErrorKind::DegenerateRegion, "vertex at the origin");
        edges.emplace_back(a, b, edge_kappa(k, w.idx[e], w.idx[e + 1], arc.forward));
        total += 2.0 * edges.back().alpha;
        total += 0.5 * (mc_density(std::norm(a)) + mc_density(std::norm(b))) * polar_step(a, b);
    }
    for (std::size_t e = 0; e + 1 < edges.size(); ++e)
        total += turning_angle(edges[e].tangent_end(), edges[e + 1].tangent_start());
    if (closed)
        total += turning_angle(edges.back().tangent_end(), edges.front().tangent_start());
    return total;
}

// ---- Maslov -----------------------------------------------------------------------------

int maslov_disc(const ProfileCurve& curve, int component) {
    if (component < 0 || component >= static_cast<int>(curve.components.size()))
        throw Error(ErrorKind::InvalidArc, "component index out of range");
    const int w = winding_number(curve.components[component], PlanarPoint(0, 0));
    if (std::abs(w) > 1)
        throw Error(ErrorKind::UnsupportedTopology, "winding number about the origin exceeds 1");
    return w == 0 ? 2 : 4;
}

MaslovData maslov_polygon_data(double xi, double psi) {
    if (!(xi > 0.0 && xi <= pi) || !(psi > 0.0 && psi < pi))
        throw Error(ErrorKind::Domain, "corner angles out of range");
    MaslovData m;
    m.topological_part = 2;
    m.corner_part = -(2.0 / pi) * xi;
    m.origin_part = -(1.0 / pi) * (pi - 2.0 * psi);
    m.total = m.topological_part + m.corner_part + m.origin_part;
    return m;
}

double maslov_polygon(double xi, double psi) { return maslov_polygon_data(xi, psi).total; }

// ---- topology ---------------------------------------------------------------------------

int winding_number(const Polyline& loop, PlanarPoint p) {
    const int n = static_cast<int>(loop.size());
    double scale = 1.0 + std::abs(p);
    int wn = 0;
    for (int i = 0; i < n; ++i) {
        const PlanarPoint a = loop[i];
        const PlanarPoint b = loop[(i + 1) % n];
        if (dist_point_segment(p, a, b) < 1e-13 * scale)
            throw Error(ErrorKind::OnBoundary, "point lies on the polyline");
        const double side = cross(b - a, p - a);
        if (a.imag() <= p.imag()) {
            if (b.imag() > p.imag() && side > 0)
                ++wn;
        } else if (b.imag() <= p.imag() && side < 0) {
            --wn;
        }
    }
    return wn;
}

ConeIntersections cone_intersections(const ProfileCurve& curve, const ConeSpec& cone) {
    ConeIntersections out;
    const double angles[2] = {cone.axis - 0.5 * cone.opening, cone.axis + 0.5 * cone.opening};
    for (int c = 0; c < static_cast<int>(curve.components.size()); ++c) {
        const Polyline& loop = curve.components[c];
        const int n = static_cast<int>(loop.size());
        for (double ang : angles) {
            const PlanarPoint d = std::polar(1.0, ang);
            std::vector<double> s(n);
            for (int i = 0; i < n; ++i) {
                s[i] = cross(d, loop[i]);
                if (std::abs(s[i]) < 1e-12) {
                    const PlanarPoint t = loop[wrap(i + 1, n)] - loop[wrap(i - 1, n)];
                    const PlanarPoint nu = PlanarPoint(0, 1) * t / std::max(std::abs(t), 1e-300);
                    s[i] = cross(d, loop[i] + 1e-12 * nu);
                    if (s[i] == 0.0)
                        s[i] = 1e-300;
                }
            }
            for (int i = 0; i < n; ++i) {
                const int j = (i + 1) % n;
                if ((s[i] > 0) != (s[j] > 0)) {
                    const double f = s[i] / (s[i] - s[j]);
                    out.points.push_back({loop[i] + f * (loop[j] - loop[i]), c, i + f});
                }
            }
        }
    }
    out.count = static_cast<int>(out.points.size());
    std::sort(out.points.begin(), out.points.end(),
              [](const ConeCrossing& x, const ConeCrossing& y) { return std::abs(x.point) < std::abs(y.point); });
    return out;
}

int count_circle_crossings(const ProfileCurve& curve, double radius) {
    int count = 0;
    const double r2 = radius * radius;
    for (const auto& loop : curve.components) {
        const int n = static_cast<int>(loop.size());
        for (int i = 0; i < n; ++i) {
            const bool a = std::norm(loop[i]) >= r2;
            const bool b = std::norm(loop[(i + 1) % n]) >= r2;
            count += a != b;
        }
    }
    return count;
}

// ---- symmetry ---------------------------------------------------------------------------

namespace {

double mean_edge(const ProfileCurve& curve) {
    double len = 0.0;
    std::size_t m = 0;
    for (const auto& loop : curve.components) {
        for (std::size_t i = 0; i < loop.size(); ++i)
            len += std::abs(loop[(i + 1) % loop.size()] - loop[i]);
        m += loop.size();
    }
    return m ? len / m : 0.0;
}

bool chekanov_on_real_axis(const Polyline& comp) {
    PlanarPoint c(0, 0);
    for (auto p : comp)
        c += p;
    return std::abs(c.real()) >= std::abs(c.imag());
}

PlanarPoint reflect(PlanarPoint p, bool real_axis) {
    return real_axis ? std::conj(p) : -std::conj(p);
}

// Index rotation that puts vertex 0 on the reflection axis; the outermost axis vertex wins.
int axis_vertex(const Polyline& loop, bool real_axis) {
    const int n = static_cast<int>(loop.size());
    int best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const PlanarPoint p = loop[i];
        const double off = real_axis ? std::abs(p.imag()) : std::abs(p.real());
        const double along = real_axis ? p.real() : p.imag();
        // off-axis distance first, prefer the positive side and larger radius on ties
        const double score = off - 1e-9 * along;
        if (score < best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

Polyline rotated(const Polyline& loop, int shift) {
    Polyline out(loop.size());
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i)
        out[i] = loop[(i + shift) % n];
    return out;
}

ProfileCurve to_canonical_indexing(const ProfileCurve& curve) {
    ProfileCurve out = curve;
    if (curve.symmetry_class == SymmetryClass::Clifford) {
        if (curve.components.size() != 1)
            throw Error(ErrorKind::UnsupportedTopology, "clifford curve needs one component");
        const Polyline& loop = curve.components[0];
        if (loop.size() % 4 != 0)
            throw Error(ErrorKind::SymmetryBroken, "clifford vertex count must be divisible by 4");
        const int n = static_cast<int>(loop.size());
        // among vertices near the positive real axis choose the one with the smallest |arg|
        int best = 0;
        double best_arg = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double a = std::abs(std::arg(loop[i]));
            if (a < best_arg) {
                best_arg = a;
                best = i;
            }
        }
        out.components[0] = rotated(loop, best);
    } else {
        if (curve.components.size() != 2 || curve.components[0].size() != curve.components[1].size())
            throw Error(ErrorKind::UnsupportedTopology, "chekanov curve needs two equal components");
        if (curve.components[0].size() % 2 != 0)
            throw Error(ErrorKind::SymmetryBroken, "chekanov vertex count must be even");
        const bool real_axis = chekanov_on_real_axis(curve.components[0]);
        const Polyline& c0 = curve.components[0];
        const Polyline& c1 = curve.components[1];
        const int s0 = axis_vertex(c0, real_axis);
        out.components[0] = rotated(c0, s0);
        const PlanarPoint target = -out.components[0][0];
        int s1 = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(c1.size()); ++i) {
            const double d = std::abs(c1[i] - target);
            if (d < best) {
                best = d;
                s1 = i;
            }
        }
        out.components[1] = rotated(c1, s1);
    }
    return out;
}

}  // namespace

double asymmetry(const ProfileCurve& curve) {
    const ProfileCurve c = to_canonical_indexing(curve);
    double worst = 0.0;
    if (c.symmetry_class == SymmetryClass::Clifford) {
        const Polyline& v = c.components[0];
        const int n = static_cast<int>(v.size());
        for (int i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(v[i] - std::conj(v[wrap(-i, n)])));
            worst = std::max(worst, std::abs(v[i] + v[wrap(i + n / 2, n)]));
        }
    } else {
        const bool real_axis = chekanov_on_real_axis(c.components[0]);
        const Polyline& v = c.components[0];
        const Polyline& w = c.components[1];
        const int n = static_cast<int>(v.size());
        for (int i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(v[i] - reflect(v[wrap(-i, n)], real_axis)));
            worst = std::max(worst, std::abs(v[i] + w[i]));
        }
    }
    return worst;
}

ProfileCurve symmetrize(const ProfileCurve& curve) {
    const ProfileCurve c = to_canonical_indexing(curve);
    const double asym = asymmetry(c);
    const double limit = mean_edge(c);
    if (!(asym < limit))
        throw Error(ErrorKind::SymmetryBroken, "asymmetry exceeds the mesh spacing");
    // Average over the symmetry orbit on a fundamental range, then copy exact images so that a
    // second application reproduces the input bit for bit.
    const auto avg4 = [](PlanarPoint a, PlanarPoint b, PlanarPoint c2, PlanarPoint d) {
        return 0.5 * (0.5 * (a + b) + 0.5 * (c2 + d));
    };
    ProfileCurve out = c;
    if (c.symmetry_class == SymmetryClass::Clifford) {
        const Polyline& v = c.components[0];
        const int n = static_cast<int>(v.size());
        const int q = n / 4;
        Polyline& o = out.components[0];
        for (int i = 0; i <= q; ++i)
            o[i] = avg4(v[i], std::conj(v[wrap(-i, n)]), -v[wrap(i + n / 2, n)], -std::conj(v[wrap(n / 2 - i, n)]));
        o[0].imag(0.0);
        o[q].real(0.0);
        for (int i = 0; i <= q; ++i) {
            o[wrap(-i, n)] = std::conj(o[i]);
            o[2 * q - i] = -std::conj(o[i]);
        }
        for (int i = 0; i < n / 2; ++i)
            o[i + n / 2] = -o[i];
    } else {
        const bool real_axis = chekanov_on_real_axis(c.components[0]);
        const Polyline& v = c.components[0];
        const Polyline& w = c.components[1];
        const int n = static_cast<int>(v.size());
        Polyline& o0 = out.components[0];
        Polyline& o1 = out.components[1];
        for (int i = 0; i <= n / 2; ++i) {
            const int j = wrap(-i, n);
            o0[i] = avg4(v[i], reflect(v[j], real_axis), -w[i], -reflect(w[j], real_axis));
        }
        if (real_axis) {
            o0[0].imag(0.0);
            o0[n / 2].imag(0.0);
        } else {
            o0[0].real(0.0);
            o0[n / 2].real(0.0);
        }
        for (int i = 1; i < n / 2; ++i)
            o0[n - i] = reflect(o0[i], real_axis);
        for (int i = 0; i < n; ++i)
            o1[i] = -o0[i];
    }
    return out;
}

double geometric_asymmetry(const ProfileCurve& curve) {
    std::vector<const Polyline*> loops;
    double n = 0;
    for (const auto& loop : curve.components) {
        loops.push_back(&loop);
        n += loop.size();
    }
    std::optional<SegmentGrid> grid;
    if (n * n > kGridThreshold)
        grid.emplace(loops);
    const auto dist_to_curve = [&](PlanarPoint q) {
        if (grid)
            return grid->distance(q);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& loop : curve.components)
            best = std::min(best, dist_point_loop(q, loop));
        return best;
    };
    double worst = 0.0;
    for (const auto& loop : curve.components)
        for (auto p : loop)
            worst = std::max({worst, dist_to_curve(std::conj(p)), dist_to_curve(-p)});
    return worst;
}

double mean_edge_length(const ProfileCurve& curve) { return mean_edge(curve); }

SymmetryClass classify(const ProfileCurve& curve) {
    const auto& comps = curve.components;
    const auto symmetric_under_negation = [](const Polyline& a, const Polyline& b) {
        double edge = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i)
            edge = std::max(edge, std::abs(b[(i + 1) % b.size()] - b[i]));
        const double n = static_cast<double>(a.size()) * b.size();
        std::optional<SegmentGrid> grid;
        if (n > kGridThreshold)
            grid.emplace(std::vector<const Polyline*>{&b});
        for (auto p : a)
            if ((grid ? grid->distance(-p) : dist_point_loop(-p, b)) > edge + 1e-12)
                return false;
        return true;
    };
    if (comps.size() == 1) {
        const int w = winding_number(comps[0], PlanarPoint(0, 0));
        if (std::abs(w) == 1 && symmetric_under_negation(comps[0], comps[0]))
            return SymmetryClass::Clifford;
        throw Error(ErrorKind::UnsupportedTopology, "single component is not a point-symmetric loop around the origin");
    }
    if (comps.size() == 2) {
        const int w0 = winding_number(comps[0], PlanarPoint(0, 0));
        const int w1 = winding_number(comps[1], PlanarPoint(0, 0));
        if (w0 == 0 && w1 == 0 && symmetric_under_negation(comps[0], comps[1]))
            return SymmetryClass::Chekanov;
        throw Error(ErrorKind::UnsupportedTopology, "component pair is not a swapped pair avoiding the origin");
    }
    throw Error(ErrorKind::UnsupportedTopology, "unsupported number of components");
}

std::vector<std::vector<double>> relative_angle(const ProfileCurve& curve) {
    std::vector<std::vector<double>> out;
    for (const auto& loop : curve.components) {
        const int n = static_cast<int>(loop.size());
        std::vector<double> theta(n);
        for (int i = 0; i < n; ++i) {
            const PlanarPoint a = loop[wrap(i - 1, n)];
            const PlanarPoint b = loop[wrap(i + 1, n)];
            const PlanarPoint p = loop[i];
            if (std::norm(p) < 1e-24)
                throw Error(ErrorKind::NearOrigin, "vertex at the origin");
            const double dr = std::abs(b) - std::abs(a);
            const double dphi = polar_step(a, b);
            if (dr == 0.0 && dphi == 0.0)
                throw Error(ErrorKind::DegenerateTangent, "stationary vertex");
            theta[i] = -std::atan2(dr, std::abs(p) * dphi);
        }
        for (int i = 1; i < n; ++i) {
            double d = theta[i] - theta[i - 1];
            while (d > pi) {
                theta[i] -= 2 * pi;
                d -= 2 * pi;
            }
            while (d < -pi) {
                theta[i] += 2 * pi;
                d += 2 * pi;
            }
        }
        out.push_back(std::move(theta));
    }
    return out;
}

// ---- embeddedness and distances ---------------------------------------------------------

namespace {

bool segments_intersect(PlanarPoint a, PlanarPoint b, PlanarPoint c, PlanarPoint d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    const auto on_seg = [](PlanarPoint p, PlanarPoint q, PlanarPoint r) {
        return std::min(p.real(), q.real()) <= r.real() && r.real() <= std::max(p.real(), q.real()) &&
               std::min(p.imag(), q.imag()) <= r.imag() && r.imag() <= std::max(p.imag(), q.imag());
    };
    if (d1 == 0 && on_seg(a, b, c)) return true;
    if (d2 == 0 && on_seg(a, b, d)) return true;
    if (d3 == 0 && on_seg(c, d, a)) return true;
    if (d4 == 0 && on_seg(c, d, b)) return true;
    return false;
}

struct Edge {
    PlanarPoint a, b;
    int comp, index;
    double xmin, xmax;
};

}  // namespace

bool is_embedded(const ProfileCurve& curve) {
    std::vector<Edge> edges;
    for (int c = 0; c < static_cast<int>(curve.components.size()); ++c) {
        const Polyline& loop = curve.components[c];
        const int n = static_cast<int>(loop.size());
        for (int i = 0; i < n; ++i) {
            const PlanarPoint a = loop[i];
            const PlanarPoint b = loop[(i + 1) % n];
            edges.push_back({a, b, c, i, std::min(a.real(), b.real()), std::max(a.real(), b.real())});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.xmin < y.xmin; });
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        for (std::size_t j = i + 1; j < edges.size() && edges[j].xmin <= e.xmax; ++j) {
            const Edge& f = edges[j];
            if (e.comp == f.comp) {
                const int n = static_cast<int>(curve.components[e.comp].size());
                const int d = std::abs(e.index - f.index);
                if (d == 1 || d == n - 1)
                    continue;
            }
            if (std::max(e.a.imag(), e.b.imag()) < std::min(f.a.imag(), f.b.imag()) ||
                std::max(f.a.imag(), f.b.imag()) < std::min(e.a.imag(), e.b.imag()))
                continue;
            if (segments_intersect(e.a, e.b, f.a, f.b))
                return false;
        }
    }
    return true;
}

double min_radius(const ProfileCurve& curve) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& loop : curve.components)
        for (auto p : loop)
            m = std::min(m, std::abs(p));
    return m;
}

double max_radius(const ProfileCurve& curve) {
    double m = 0.0;
    for (const auto& loop : curve.components)
        for (auto p : loop)
            m = std::max(m, std::abs(p));
    return m;
}

double hausdorff_distance(const Polyline& a, const Polyline& b) {
    const bool big = static_cast<double>(a.size()) * b.size() > kGridThreshold;
    std::optional<SegmentGrid> ga, gb;
    if (big) {
        ga.emplace(std::vector<const Polyline*>{&a});
        gb.emplace(std::vector<const Polyline*>{&b});
    }
    double h = 0.0;
    for (auto p : a)
        h = std::max(h, big ? gb->distance(p) : dist_point_loop(p, b));
    for (auto q : b)
        h = std::max(h, big ? ga->distance(q) : dist_point_loop(q, a));
    return h;
}

double hausdorff_to_circle(const ProfileCurve& curve, double radius) {
    double h = 0.0;
    for (const auto& loop : curve.components)
        for (auto p : loop)
            h = std::max(h, std::abs(std::abs(p) - radius));
    // circle points far from every component
    const int samples = 1440;
    for (int j = 0; j < samples; ++j) {
        const PlanarPoint q = std::polar(radius, 2 * pi * j / samples);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& loop : curve.components)
            best = std::min(best, dist_point_loop(q, loop));
        h = std::max(h, best);
    }
    return h;
}

}  // namespace cp2flow
