#include "cp2flow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cp2flow/diagnostics.hpp"
#include "cp2flow/mesh.hpp"
#include "cp2flow/numerics.hpp"

namespace cp2flow {

using num::pi;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMinDt = 1e-14;
constexpr double kHistoryFactor = 0.95;

double mc_density(double r2) { return (1.0 - 4.0 * r2) / (1.0 + 2.0 * r2); }

double speed_coefficient(double r2) {
    const double s = 1.0 + 2.0 * r2;
    return 0.5 * s * s;
}

// V at p with neighbours a and c.
double vertex_speed(PlanarPoint a, PlanarPoint p, PlanarPoint c, PlanarPoint* normal) {
    const double r2 = std::norm(p);
    if (r2 < 1e-24)
        throw Error(ErrorKind::NearOrigin, "vertex within 1e-12 of the origin");
    const PlanarPoint t = c - a;
    const double tl = std::abs(t);
    if (tl == 0.0)
        throw Error(ErrorKind::DegenerateTangent, "coincident neighbours");
    const PlanarPoint nu = PlanarPoint(0, 1) * t / tl;
    if (normal)
        *normal = nu;
    const double k = menger_curvature(a, p, c);
    return speed_coefficient(r2) * (k - mc_density(r2) * dot(p, nu) / r2);
}

struct ArcMotion {
    std::vector<PlanarPoint> velocity;  // V * nu
    double dt_max = std::numeric_limits<double>::infinity();
    double max_speed = 0.0;
    double max_k = 0.0;
};

struct ArcNeighbours {
    const FundamentalArc& arc;
    PlanarPoint before, after;

    PlanarPoint prev(std::size_t i) const { return i == 0 ? before : arc.points[i - 1]; }
    PlanarPoint next(std::size_t i) const { return i + 1 == arc.points.size() ? after : arc.points[i + 1]; }
};

ArcNeighbours neighbours(const FundamentalArc& arc) {
    const Polyline& q = arc.points;
    const std::size_t m = q.size() - 1;
    if (arc.cls == SymmetryClass::Clifford)
        return {arc, std::conj(q[1]), -std::conj(q[m - 1])};
    const auto s = [&](PlanarPoint p) { return arc.real_axis ? std::conj(p) : -std::conj(p); };
    return {arc, s(q[1]), s(q[m - 1])};
}

ArcMotion arc_motion(const FundamentalArc& arc, double cfl) {
    const ArcNeighbours nb = neighbours(arc);
    const Polyline& q = arc.points;
    ArcMotion m;
    m.velocity.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const PlanarPoint a = nb.prev(i);
        const PlanarPoint c = nb.next(i);
        PlanarPoint nu;
        const double v = vertex_speed(a, q[i], c, &nu);
        m.velocity[i] = v * nu;
        m.max_speed = std::max(m.max_speed, std::abs(v));
        m.max_k = std::max(m.max_k, std::abs(menger_curvature(a, q[i], c)));
        const double h = std::min(std::abs(q[i] - a), std::abs(c - q[i]));
        m.dt_max = std::min(m.dt_max, cfl * h * h / speed_coefficient(std::norm(q[i])));
    }
    return m;
}

void pin_axis_vertices(FundamentalArc& arc) {
    Polyline& q = arc.points;
    const std::size_t m = q.size() - 1;
    if (arc.cls == SymmetryClass::Clifford) {
        q[0].imag(0.0);
        q[m].real(0.0);
    } else if (arc.real_axis) {
        q[0].imag(0.0);
        q[m].imag(0.0);
    } else {
        q[0].real(0.0);
        q[m].real(0.0);
    }
}

// d/dlambda of the disc area under w -> lambda w at lambda = 1, by the midpoint rule.
double area_scale_derivative(const Polyline& loop) {
    double d = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const PlanarPoint a = loop[i];
        const PlanarPoint b = loop[(i + 1) % n];
        const double r2 = std::norm(0.5 * (a + b));
        const double dphi = std::atan2(cross(a, b), dot(a, b));
        d += 2.0 * r2 / ((1.0 + 2.0 * r2) * (1.0 + 2.0 * r2)) * dphi;
    }
    return d;
}

void update_stats(FlowState& s) {
    s.min_radius = min_radius(s.curve);
    double k = 0.0;
    for (const auto& loop : s.curve.components)
        for (double v : vertex_curvatures(loop))
            k = std::max(k, std::abs(v));
    s.max_curvature = k;
    const double r2 = s.min_radius * s.min_radius;
    if (s.radius_history.empty() || r2 > s.radius_history.back().r2 / kHistoryFactor)
        s.radius_history.assign(1, {s.t, r2});
    else if (r2 < kHistoryFactor * s.radius_history.back().r2)
        s.radius_history.push_back({s.t, r2});
}

void project_monotone(FlowState& s) {
    const int c = maslov_disc_component(s.curve);
    const double area = enclosed_area(s.curve, c);
    const double target = monotone_target(s.curve.symmetry_class);
    s.last_defect = std::abs(area - target);
    const double d = area_scale_derivative(s.curve.components[c]);
    if (std::abs(d) < 1e-8)
        return;
    const double lambda = 1.0 - (area - target) / d;
    for (auto& loop : s.curve.components)
        for (auto& p : loop)
            p *= lambda;
}

// One explicit step of at most `cap` in time; returns the step taken.
double advance(FlowState& s, const FlowConfig& config, double cap) {
    FundamentalArc arc = fundamental_arc(s.curve);
    const ArcMotion m = arc_motion(arc, config.cfl);
    const double dt = std::min(m.dt_max, cap);
    for (std::size_t i = 0; i < arc.points.size(); ++i)
        arc.points[i] += dt * m.velocity[i];
    pin_axis_vertices(arc);
    s.curve = assemble(arc);
    if (mesh_ratio(s.curve, config.grading) > config.remesh_ratio)
        s.curve = remesh(s.curve, config.grading);
    s.t += dt;
    s.last_dt = dt;
    ++s.step_count;
    if (config.monotone_projection && s.step_count % config.projection_interval == 0)
        project_monotone(s);
    update_stats(s);
    return m.max_speed;
}

double line_distance(double phi) {
    // angular distance to the lines at +-pi/4, which repeat every pi/2
    double x = std::fmod(phi, pi / 2);
    if (x < 0)
        x += pi / 2;
    return std::abs(x - pi / 4);
}

}  // namespace

void FlowConfig::validate() const {
    if (vertices_per_component < 8 || vertices_per_component % 4 != 0)
        throw Error(ErrorKind::Config, "vertices_per_component must be a multiple of 4, at least 8");
    if (!(cfl > 0.0 && cfl <= 0.5))
        throw Error(ErrorKind::Config, "cfl must lie in (0, 0.5]");
    if (!(remesh_ratio > 1.0))
        throw Error(ErrorKind::Config, "remesh_ratio must exceed 1");
    if (!(singular_radius > 0.0 && curvature_resolution_factor > 0.0 && max_time > 0.0 && grading > 0.0 &&
          sample_interval > 0.0 && convergence_speed > 0.0 && max_steps > 0 && projection_interval > 0))
        throw Error(ErrorKind::Config, "thresholds must be positive");
}

const char* to_string(FlowEventKind kind) {
    switch (kind) {
        case FlowEventKind::SingularityDetected: return "singularity-detected";
        case FlowEventKind::ScaleProbeHit: return "scale-probe-hit";
        case FlowEventKind::GraphicalAttained: return "graphical-attained";
        case FlowEventKind::ConeCountDropped: return "cone-count-dropped";
        case FlowEventKind::SurgeryPerformed: return "surgery-performed";
        case FlowEventKind::Converged: return "converged";
        case FlowEventKind::Halted: return "halted";
        case FlowEventKind::InvariantViolation: return "invariant-violation";
    }
    return "unknown";
}

FlowState FlowState::from_curve(ProfileCurve curve) {
    FlowState s;
    s.curve = std::move(curve);
    update_stats(s);
    return s;
}

std::vector<std::vector<double>> normal_velocity(const ProfileCurve& curve) {
    std::vector<std::vector<double>> out;
    for (const auto& loop : curve.components) {
        const int n = static_cast<int>(loop.size());
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i)
            v[i] = vertex_speed(loop[(i + n - 1) % n], loop[i], loop[(i + 1) % n], nullptr);
        out.push_back(std::move(v));
    }
    return out;
}

double stable_time_step(const ProfileCurve& curve, const FlowConfig& config) {
    return arc_motion(fundamental_arc(curve), config.cfl).dt_max;
}

ProfileCurve prepare_curve(const ProfileCurve& curve, const FlowConfig& config) {
    ProfileCurve c = curve;
    c.symmetry_class = classify(curve);
    if (geometric_asymmetry(c) > mean_edge_length(c))
        throw Error(ErrorKind::SymmetryBroken, "curve is not symmetric up to the mesh spacing");
    const int n = config.vertices_per_component;
    bool sized = true;
    for (const auto& loop : c.components)
        sized = sized && static_cast<int>(loop.size()) == n;
    if (sized) {
        try {
            return symmetrize(c);
        } catch (const Error&) {
            // fall through to a fresh mesh
        }
    }
    return canonicalize(c, n, config.grading);
}

FlowState step(const FlowState& state, const FlowConfig& config) {
    FlowState s = state;
    advance(s, config, std::numeric_limits<double>::infinity());
    if (s.last_dt < kMinDt)
        throw Error(ErrorKind::InvariantViolation, "time step underflow: resolution exhausted");
    return s;
}

double free_step(ProfileCurve& curve, double cfl, int steps) {
    double elapsed = 0.0;
    for (int it = 0; it < steps; ++it) {
        double dt = std::numeric_limits<double>::infinity();
        std::vector<std::vector<PlanarPoint>> vel;
        for (const auto& loop : curve.components) {
            const std::size_t n = loop.size();
            std::vector<PlanarPoint> v(n);
            for (std::size_t i = 0; i < n; ++i) {
                const PlanarPoint a = loop[(i + n - 1) % n];
                const PlanarPoint c = loop[(i + 1) % n];
                PlanarPoint nu;
                v[i] = vertex_speed(a, loop[i], c, &nu) * nu;
                const double h = std::min(std::abs(loop[i] - a), std::abs(c - loop[i]));
                dt = std::min(dt, cfl * h * h / speed_coefficient(std::norm(loop[i])));
            }
            vel.push_back(std::move(v));
        }
        for (std::size_t c = 0; c < curve.components.size(); ++c)
            for (std::size_t i = 0; i < vel[c].size(); ++i)
                curve.components[c][i] += dt * vel[c][i];
        elapsed += dt;
    }
    return elapsed;
}

bool is_graphical(const ProfileCurve& curve) {
    if (curve.components.size() != 1)
        return false;
    const Polyline& loop = curve.components[0];
    const std::size_t n = loop.size();
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const PlanarPoint a = loop[i];
        const PlanarPoint b = loop[(i + 1) % n];
        const double c = cross(a, b);
        const int s = c > 0 ? 1 : (c < 0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign))
            return false;
        sign = s;
    }
    return true;
}

TrajectorySample make_sample(const ProfileCurve& curve, double t, int segment, bool /*with_triangle*/) {
    TrajectorySample s;
    s.t = t;
    s.curve = curve;
    s.segment = segment;
    s.min_r = min_radius(curve);
    double k = 0.0;
    for (const auto& loop : curve.components)
        for (double v : vertex_curvatures(loop))
            k = std::max(k, std::abs(v));
    s.max_k = k;
    double vmax = 0.0;
    for (const auto& comp : normal_velocity(curve))
        for (double v : comp)
            vmax = std::max(vmax, std::abs(v));
    s.max_speed = vmax;
    const double area = enclosed_area(curve, maslov_disc_component(curve));
    const bool clifford = curve.symmetry_class == SymmetryClass::Clifford;
    s.area_m4 = clifford ? area : kNaN;
    s.area_m2 = clifford ? kNaN : area;
    s.defect = std::abs(area - monotone_target(curve.symmetry_class));
    s.psi_max = kNaN;
    if (!clifford) {
        try {
            s.psi_max = max_opening_angle(curve).psi;
        } catch (const Error&) {
        }
    }
    s.n_cone = cone_intersections(curve, ConeSpec{0.0, pi / 2}).count;
    s.n_cone_wide = cone_intersections(curve, ConeSpec{0.0, 2 * pi / 3}).count;
    s.n_unit = count_circle_crossings(curve, 1.0);
    s.graphical = clifford && is_graphical(curve);
    return s;
}

double estimate_singular_time(const std::vector<RadiusRecord>& history, std::size_t window) {
    if (history.size() < 3)
        return kNaN;
    const std::size_t first = history.size() > window ? history.size() - window : 0;
    double st = 0, sr = 0, stt = 0, str = 0;
    const double n = static_cast<double>(history.size() - first);
    const double t0 = history.back().t;
    for (std::size_t i = first; i < history.size(); ++i) {
        const double t = history[i].t - t0;
        st += t;
        sr += history[i].r2;
        stt += t * t;
        str += t * history[i].r2;
    }
    const double denom = n * stt - st * st;
    if (denom <= 0)
        return kNaN;
    const double slope = (n * str - st * sr) / denom;
    const double icpt = (sr - slope * st) / n;
    if (!(slope < 0))
        return kNaN;
    return t0 - icpt / slope;
}

std::optional<SingularityReport> detect_singularity(const FlowState& state, const FlowConfig& config) {
    const ProfileCurve& c = state.curve;
    const double rmin = min_radius(c);
    bool fire = rmin < config.singular_radius;
    double kmax_near = 0.0;
    for (const auto& loop : c.components) {
        const int n = static_cast<int>(loop.size());
        const std::vector<double> k = vertex_curvatures(loop);
        for (int i = 0; i < n; ++i) {
            if (std::abs(loop[i]) >= 10.0 * rmin)
                continue;
            const double h = std::min(std::abs(loop[(i + 1) % n] - loop[i]), std::abs(loop[i] - loop[(i + n - 1) % n]));
            kmax_near = std::max(kmax_near, std::abs(k[i]));
            if (std::abs(k[i]) * h > 1.0 / config.curvature_resolution_factor)
                fire = true;
        }
    }
    if (!fire)
        return std::nullopt;
    SingularityReport rep;
    rep.t_detected = state.t;
    rep.min_radius = rmin;
    rep.at_origin = rmin < config.singular_radius;
    // angular distance from the lines at +-pi/4 on the annulus [3, 10] * rmin; the neck tip itself is
    // excluded since it always sits on the axis
    double dev = -1.0;
    for (int pass = 0; pass < 2 && dev < 0; ++pass) {
        const double inner = pass == 0 ? 3.0 * rmin : 0.0;
        for (const auto& loop : c.components)
            for (auto p : loop) {
                const double r = std::abs(p);
                if (r >= inner && r <= 10.0 * rmin)
                    dev = std::max(dev, line_distance(std::arg(p)));
            }
    }
    rep.cone_deviation = std::clamp(dev, 0.0, pi / 4);
    rep.estimated_T = estimate_singular_time(state.radius_history);
    const double kmax = std::max(kmax_near, state.max_curvature);
    rep.type_one_ratio = std::isfinite(rep.estimated_T) ? (rep.estimated_T - state.t) * kmax * kmax : kNaN;
    return rep;
}

std::optional<ScaleProbeHit> scale_probe(const FlowState& state, double R, double eps0, double axis) {
    if (!(R > 0) || !(eps0 > 0 && eps0 < pi / 8))
        throw Error(ErrorKind::Domain, "scale probe needs R > 0 and eps0 in (0, pi/8)");
    const auto hits = [&](double eps) {
        std::vector<PlanarPoint> pts;
        for (const auto& x : cone_intersections(state.curve, ConeSpec{axis, pi / 2 + 2 * eps}).points)
            if (std::abs(x.point) < R)
                pts.push_back(x.point);
        return pts;
    };
    constexpr int grid = 32;
    int best = 0;
    for (int j = grid; j >= 1; --j) {
        const double eps = j == grid ? eps0 * (1 - 1e-12) : eps0 * j / grid;
        if (!hits(eps).empty()) {
            best = j;
            break;
        }
    }
    if (best == 0)
        return std::nullopt;
    double lo = best == grid ? eps0 * (1 - 1e-12) : eps0 * best / grid;
    if (best < grid) {
        double hi = eps0 * (best + 1) / grid;
        for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (!hits(mid).empty())
                lo = mid;
            else
                hi = mid;
        }
    }
    return ScaleProbeHit{lo, hits(lo)};
}

std::vector<ConeCount> intersection_monitor(const Trajectory& trajectory, const ConeSpec& cone) {
    std::vector<ConeCount> out;
    for (const auto& s : trajectory) {
        ConeCount c{s.t, cone_intersections(s.curve, cone).count, false};
        c.increased = !out.empty() && c.count > out.back().count;
        out.push_back(c);
    }
    return out;
}

RunResult run(FlowState state, const FlowConfig& config) {
    config.validate();
    RunResult res;
    const auto emit = [&](FlowEvent e) {
        res.events.push_back(e);
        state.event_log.push_back(std::move(e));
    };
    const auto finish = [&]() {
        res.state = std::move(state);
        return std::move(res);
    };
    const int segment = static_cast<int>(std::count_if(state.event_log.begin(), state.event_log.end(), [](const FlowEvent& e) {
        return e.kind == FlowEventKind::SurgeryPerformed;
    }));
    try {
        state.curve = prepare_curve(state.curve, config);
    } catch (const Error& e) {
        state.halted = true;
        emit({FlowEventKind::Halted, state.t, e.what(), std::nullopt, 0.0});
        return finish();
    }
    update_stats(state);
    if (config.monotone_projection)
        state.last_defect = monotone_defect(state.curve).defect;

    const auto take_sample = [&]() {
        TrajectorySample s = make_sample(state.curve, state.t, segment, config.monitor_triangle);
        if (!res.trajectory.empty()) {
            const TrajectorySample& p = res.trajectory.back();
            if (config.monitor_cones) {
                if (s.n_cone < p.n_cone)
                    emit({FlowEventKind::ConeCountDropped, s.t, "C^0_{pi/2} crossings dropped", std::nullopt,
                          static_cast<double>(s.n_cone)});
                if (s.n_cone > p.n_cone || s.n_cone_wide > p.n_cone_wide || s.n_unit > p.n_unit)
                    emit({FlowEventKind::InvariantViolation, s.t, "crossing count increased", std::nullopt, 0.0});
            }
            if (s.graphical && !p.graphical)
                emit({FlowEventKind::GraphicalAttained, s.t, "", std::nullopt, 0.0});
        } else if (s.graphical) {
            emit({FlowEventKind::GraphicalAttained, s.t, "", std::nullopt, 0.0});
        }
        if (config.monitor_defect && config.monotone_projection && s.defect > 1e-4)
            emit({FlowEventKind::InvariantViolation, s.t, "monotone defect above 1e-4", std::nullopt, s.defect});
        if (config.check_embedding && !is_embedded(state.curve)) {
            state.halted = true;
            emit({FlowEventKind::Halted, s.t, "curve lost embeddedness", std::nullopt, 0.0});
        }
        res.trajectory.push_back(std::move(s));
    };

    take_sample();
    double next_sample = state.t + config.sample_interval;
    const long step_limit = state.step_count + config.max_steps;
    while (!state.halted) {
        if (state.t >= config.max_time * (1 - 1e-14))
            break;
        if (state.step_count >= step_limit) {
            state.halted = true;
            emit({FlowEventKind::Halted, state.t, "step limit reached", std::nullopt, 0.0});
            break;
        }
        const double cap = std::min(next_sample, config.max_time) - state.t;
        double speed = 0.0;
        try {
            speed = advance(state, config, cap);
        } catch (const Error& e) {
            state.halted = true;
            emit({FlowEventKind::Halted, state.t, e.what(), std::nullopt, 0.0});
            break;
        }
        if (auto rep = detect_singularity(state, config)) {
            emit({FlowEventKind::SingularityDetected, state.t, rep->at_origin ? "origin" : "resolution", rep, rep->cone_deviation});
            take_sample();
            break;
        }
        if (state.last_dt < kMinDt && state.last_dt < cap) {
            state.halted = true;
            FlowEvent e{FlowEventKind::Halted, state.t, "resolution exhausted", detect_singularity(state, config), 0.0};
            emit(std::move(e));
            take_sample();
            break;
        }
        if (speed < config.convergence_speed) {
            emit({FlowEventKind::Converged, state.t, "", std::nullopt, speed});
            take_sample();
            break;
        }
        if (state.t >= next_sample - 1e-12 * std::max(1.0, next_sample)) {
            take_sample();
            next_sample += config.sample_interval;
        }
    }
    if (config.monitor_triangle) {
        for (const auto& ts : triangle_monitor(res.trajectory))
            if (ts.violation)
                emit({FlowEventKind::InvariantViolation, ts.t, "triangle area rate above bound", std::nullopt, ts.rate - ts.bound});
    }
    if (res.trajectory.back().t < state.t)
        take_sample();
    return finish();
}

}  // namespace cp2flow
