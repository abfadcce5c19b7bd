#include "cp2flow/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <json.hpp>
#include <ostream>

#include "cp2flow/diagnostics.hpp"
#include "cp2flow/numerics.hpp"

namespace cp2flow {

using num::pi;

namespace {

// Labels of the four cut points in the neck frame.
enum Cut { PPlus = 0, PMinus = 1, NPlus = 2, NMinus = 3 };

struct CutPoint {
    int component = 0;
    double param = 0.0;  // edge index plus fraction
    PlanarPoint point;
};

struct Interval {
    CutPoint start, end;  // removed arc runs forward from start to end
    int start_label = 0, end_label = 0;
};

struct Piece {
    Polyline points;
    int start_label = 0, end_label = 0;
};

PlanarPoint frame_rotation(NeckAxis axis) { return axis == NeckAxis::Real ? PlanarPoint(1, 0) : PlanarPoint(0, -1); }

ProfileCurve rotated(const ProfileCurve& c, PlanarPoint rot) {
    ProfileCurve out = c;
    for (auto& loop : out.components)
        for (auto& p : loop)
            p *= rot;
    return out;
}

double forward_distance(double from, double to, int n) {
    double d = to - from;
    while (d < 0)
        d += n;
    while (d >= n)
        d -= n;
    return d;
}

// Euclidean length of the forward walk from parameter a to b.
double walk_length(const Polyline& loop, double a, double b) {
    const int n = static_cast<int>(loop.size());
    const auto at = [&](double s) {
        const int i = static_cast<int>(std::floor(s)) % n;
        const double f = s - std::floor(s);
        return loop[i] + f * (loop[(i + 1) % n] - loop[i]);
    };
    const double span = forward_distance(a, b, n);
    double len = 0.0;
    PlanarPoint prev = at(a);
    double s = std::floor(a) + 1;
    while (s < a + span) {
        const PlanarPoint p = loop[static_cast<int>(s) % n];
        len += std::abs(p - prev);
        prev = p;
        s += 1;
    }
    return len + std::abs(at(a + span) - prev);
}

// Crossing of `loop` with the line at angle `ang` nearest to `target`.
std::optional<CutPoint> nearest_crossing(const ProfileCurve& c, double ang, PlanarPoint target, double max_dist) {
    std::optional<CutPoint> best;
    double bd = max_dist;
    const ConeIntersections xs = cone_intersections(c, ConeSpec{ang, 0.0});
    for (const auto& x : xs.points) {
        // both lines of a zero-opening cone coincide; every crossing is reported twice
        const double d = std::abs(x.point - target);
        if (d < bd) {
            bd = d;
            best = CutPoint{x.component, x.parameter, x.point};
        }
    }
    return best;
}

// Remove the shorter of the two arcs between a and b on their common component.
Interval neck_interval(const ProfileCurve& c, const CutPoint& a, int la, const CutPoint& b, int lb) {
    if (a.component != b.component)
        throw Error(ErrorKind::SurgeryFailed, "neck cut points lie on different components");
    const Polyline& loop = c.components[a.component];
    if (walk_length(loop, a.param, b.param) <= walk_length(loop, b.param, a.param))
        return {a, b, la, lb};
    return {b, a, lb, la};
}

// Points strictly inside the forward walk from a to b, bracketed by the exact endpoints.
Polyline walk_points(const Polyline& loop, const CutPoint& a, const CutPoint& b) {
    const int n = static_cast<int>(loop.size());
    Polyline out{a.point};
    const double span = forward_distance(a.param, b.param, n);
    double s = std::floor(a.param) + 1;
    while (s < a.param + span - 1e-12) {
        const PlanarPoint p = loop[static_cast<int>(s) % n];
        if (std::abs(p - out.back()) > 1e-14)
            out.push_back(p);
        s += 1;
    }
    if (std::abs(b.point - out.back()) > 1e-14)
        out.push_back(b.point);
    else
        out.back() = b.point;
    return out;
}

PlanarPoint unit(PlanarPoint v) { return v / std::abs(v); }

void append_hermite(Polyline& out, PlanarPoint p0, PlanarPoint d0, PlanarPoint p1, PlanarPoint d1, double h) {
    const double L = std::abs(p1 - p0);
    const int m = std::max(4, static_cast<int>(std::ceil(L / h)));
    for (int j = 1; j <= m; ++j) {
        const double s = static_cast<double>(j) / m;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        out.push_back(h00 * p0 + h10 * L * d0 + h01 * p1 + h11 * L * d1);
    }
}

// Path from P (first quadrant) to Q (second quadrant) in the neck frame: Hermite join to the circle
// tangent to the lines at pi/4 + eps/2 and 3pi/4 - eps/2, the circle arc across the imaginary axis,
// and a Hermite join to Q. dP leaves P, dQ arrives at Q.
Polyline connector(PlanarPoint P, PlanarPoint dP, PlanarPoint Q, PlanarPoint dQ, double eps, double h) {
    const double alpha = pi / 4 + eps / 2;
    const double rr = 0.5 * std::abs(P);
    const PlanarPoint T = std::polar(rr, alpha);
    const PlanarPoint T2 = -std::conj(T);
    const double c = rr / std::sin(alpha);
    const double rho = c * std::cos(alpha);
    const PlanarPoint center(0.0, c);
    Polyline out{P};
    append_hermite(out, P, dP, T, -unit(T), std::min(h, 0.25 * rr));
    const double th0 = std::arg(T - center);
    const double th1 = -pi - th0;
    const int m = std::max(8, static_cast<int>(std::ceil(rho * std::abs(th1 - th0) / std::min(h, 0.25 * rr))));
    for (int j = 1; j <= m; ++j)
        out.push_back(center + std::polar(rho, th0 + (th1 - th0) * j / m));
    append_hermite(out, T2, unit(T2), Q, dQ, std::min(h, 0.25 * rr));
    return out;
}

// Direction leaving the piece at its endpoint (towards the removed arc).
PlanarPoint outward(const Piece& piece, bool at_start) {
    const Polyline& q = piece.points;
    if (q.size() < 2)
        throw Error(ErrorKind::SurgeryFailed, "degenerate piece");
    return at_start ? unit(q[0] - q[1]) : unit(q.back() - q[q.size() - 2]);
}

double local_spacing(const Piece& piece, bool at_start) {
    const Polyline& q = piece.points;
    return at_start ? std::abs(q[1] - q[0]) : std::abs(q.back() - q[q.size() - 2]);
}

}  // namespace

const char* to_string(NeckAxis axis) { return axis == NeckAxis::Real ? "real" : "imaginary"; }

int neck_count(const ProfileCurve& curve) { return cone_intersections(curve, ConeSpec{0.0, pi / 2}).count / 4; }

NeckAxis neck_axis(const ProfileCurve& curve) {
    PlanarPoint best(std::numeric_limits<double>::infinity(), 0);
    for (const auto& loop : curve.components)
        for (auto p : loop)
            if (std::abs(p) < std::abs(best))
                best = p;
    return std::abs(best.real()) >= std::abs(best.imag()) ? NeckAxis::Real : NeckAxis::Imaginary;
}

std::optional<NeckSpec> detect_neck(const FlowState& state, double r, double eps0, const FlowConfig& config) {
    if (!(state.min_radius < 10.0 * config.singular_radius))
        return std::nullopt;
    const NeckAxis axis = neck_axis(state.curve);
    const auto hit = scale_probe(state, r, eps0, axis == NeckAxis::Real ? 0.0 : pi / 2);
    if (!hit)
        return std::nullopt;
    // back off from the tangency found by the probe so the lines are crossed transversally
    const double eps = 0.5 * hit->epsilon;
    const PlanarPoint rot = frame_rotation(axis);
    const ProfileCurve c = rotated(state.curve, rot);
    const ConeIntersections xs = cone_intersections(c, ConeSpec{0.0, pi / 2 + 2 * eps});
    for (const auto& x : xs.points) {
        if (std::abs(x.point) >= r)
            break;
        if (x.point.real() > 0 && x.point.imag() > 0) {
            NeckSpec neck;
            neck.scale = r;
            neck.epsilon = eps;
            neck.axis_before = axis;
            neck.p_plus = x.point * std::conj(rot);
            neck.p_minus = std::conj(x.point) * std::conj(rot);
            return neck;
        }
    }
    return std::nullopt;
}

ProfileCurve neck_to_neck(const ProfileCurve& curve, const NeckSpec& neck, const FlowConfig& config) {
    const PlanarPoint rot = frame_rotation(neck.axis_before);
    const ProfileCurve c = rotated(curve, rot);
    const SymmetryClass before = classify(curve);
    const int n_before = neck_count(curve);
    const PlanarPoint pp = neck.p_plus * rot;
    const double beta = pi / 4 + neck.epsilon;
    const double tol = 0.25 * std::abs(pp);
    const PlanarPoint targets[4] = {pp, std::conj(pp), -pp, -std::conj(pp)};
    const double angles[4] = {beta, -beta, beta, -beta};
    CutPoint cuts[4];
    for (int k = 0; k < 4; ++k) {
        const auto x = nearest_crossing(c, angles[k], targets[k], tol);
        if (!x)
            throw Error(ErrorKind::SurgeryFailed, "neck crossing not found");
        cuts[k] = *x;
    }
    const Interval removed[2] = {neck_interval(c, cuts[PPlus], PPlus, cuts[PMinus], PMinus),
                                 neck_interval(c, cuts[NPlus], NPlus, cuts[NMinus], NMinus)};
    for (const auto& iv : removed) {
        const Polyline& loop = c.components[iv.start.component];
        if (walk_length(loop, iv.start.param, iv.end.param) > 8.0 * std::abs(pp))
            throw Error(ErrorKind::SurgeryFailed, "neck arc is not local to the origin");
        // the replaced arc has to pass closer to the origin than the connector does
        double r_min = std::abs(pp);
        for (PlanarPoint q : walk_points(loop, iv.start, iv.end))
            r_min = std::min(r_min, std::abs(q));
        if (!(r_min < 0.5 * std::abs(pp)))
            throw Error(ErrorKind::SurgeryFailed, "neck arc does not enter the connector radius");
    }

    // remaining pieces, and untouched components
    std::vector<Piece> pieces;
    ProfileCurve out;
    for (int comp = 0; comp < static_cast<int>(c.components.size()); ++comp) {
        std::vector<Interval> ivs;
        for (const auto& iv : removed)
            if (iv.start.component == comp)
                ivs.push_back(iv);
        if (ivs.empty()) {
            out.components.push_back(c.components[comp]);
            continue;
        }
        std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.start.param < b.start.param; });
        for (std::size_t i = 0; i < ivs.size(); ++i) {
            const Interval& a = ivs[i];
            const Interval& b = ivs[(i + 1) % ivs.size()];
            pieces.push_back({walk_points(c.components[comp], a.end, b.start), a.end_label, b.start_label});
        }
    }

    // upper connector joins p+ to -p-, the lower one is its negative from -p+ to p-
    const auto piece_at = [&](int label, bool& at_start) -> const Piece& {
        for (const auto& p : pieces) {
            if (p.start_label == label) {
                at_start = true;
                return p;
            }
            if (p.end_label == label) {
                at_start = false;
                return p;
            }
        }
        throw Error(ErrorKind::SurgeryFailed, "cut point without a piece");
    };
    bool sp = false, sq = false;
    const Piece& piece_p = piece_at(PPlus, sp);
    const Piece& piece_q = piece_at(NMinus, sq);
    const double h = std::min(local_spacing(piece_p, sp), local_spacing(piece_q, sq));
    const PlanarPoint P = sp ? piece_p.points.front() : piece_p.points.back();
    const PlanarPoint Q = sq ? piece_q.points.front() : piece_q.points.back();
    const Polyline upper = connector(P, outward(piece_p, sp), Q, -outward(piece_q, sq), neck.epsilon, h);
    Polyline lower(upper.size());
    std::transform(upper.begin(), upper.end(), lower.begin(), [](PlanarPoint p) { return -p; });
    struct Link {
        int a, b;
        const Polyline* path;  // runs from label a to label b
    };
    const Link links[2] = {{PPlus, NMinus, &upper}, {NPlus, PMinus, &lower}};

    // walk pieces and connectors into closed loops
    std::vector<bool> used(pieces.size(), false);
    for (std::size_t start = 0; start < pieces.size(); ++start) {
        if (used[start])
            continue;
        Polyline loop;
        std::size_t cur = start;
        while (!used[cur]) {
            used[cur] = true;
            const Piece& pc = pieces[cur];
            loop.insert(loop.end(), pc.points.begin(), pc.points.end() - 1);
            const int label = pc.end_label;
            const Link* link = nullptr;
            bool reverse = false;
            for (const auto& l : links) {
                if (l.a == label)
                    link = &l;
                else if (l.b == label) {
                    link = &l;
                    reverse = true;
                }
            }
            if (!link)
                throw Error(ErrorKind::SurgeryFailed, "cut point without a connector");
            const Polyline& path = *link->path;
            if (reverse)
                loop.insert(loop.end(), path.rbegin(), path.rend() - 1);
            else
                loop.insert(loop.end(), path.begin(), path.end() - 1);
            const int next_label = reverse ? link->a : link->b;
            std::size_t next = pieces.size();
            for (std::size_t j = 0; j < pieces.size(); ++j)
                if (pieces[j].start_label == next_label)
                    next = j;
            if (next == pieces.size())
                throw Error(ErrorKind::SurgeryFailed, "inconsistent orientation at the neck");
            cur = next;
        }
        if (cur != start)
            throw Error(ErrorKind::SurgeryFailed, "pieces do not close up");
        out.components.push_back(std::move(loop));
    }

    for (auto& loop : out.components)
        for (auto& p : loop)
            p *= std::conj(rot);
    if (!is_embedded(out))
        throw Error(ErrorKind::SurgeryFailed, "spliced curve self-intersects");
    out.symmetry_class = classify(out);
    if (out.symmetry_class == before)
        throw Error(ErrorKind::SurgeryFailed, "surgery did not change the class");
    ProfileCurve result;
    try {
        result = prepare_curve(out, config);
    } catch (const Error& e) {
        throw Error(ErrorKind::SurgeryFailed, std::string("remeshing the spliced curve failed: ") + e.what());
    }
    if (!is_embedded(result))
        throw Error(ErrorKind::SurgeryFailed, "remeshed curve self-intersects");
    if (neck_count(result) >= n_before)
        throw Error(ErrorKind::SurgeryFailed, "cone crossings did not decrease");
    return result;
}

Renormalization monotone_renormalize(const ProfileCurve& curve) {
    ProfileCurve base = curve;
    base.symmetry_class = classify(curve);
    const int comp = maslov_disc_component(base);
    const double target = monotone_target(base.symmetry_class);
    const auto scaled = [&](double lambda) {
        ProfileCurve c = base;
        for (auto& loop : c.components)
            for (auto& p : loop)
                p *= lambda;
        return c;
    };
    const auto f = [&](double lambda) { return enclosed_area(scaled(lambda), comp) - target; };
    const double f1 = f(1.0);
    if (!(f1 > 0 || f1 < 0))
        return {base, 1.0};
    if (base.symmetry_class == SymmetryClass::Clifford && !(target < pi))
        throw Error(ErrorKind::RenormalizationFailed, "target beyond the area bound");
    // march in the direction that moves the area towards the target; the area is not monotone in
    // lambda once the curve winds back towards the origin, so the slope at 1 picks the direction
    const double slope = f(1.0 + 1e-4) - f(1.0 - 1e-4);
    if (!(slope > 0 || slope < 0))
        throw Error(ErrorKind::RenormalizationFailed, "area is stationary under rescaling");
    const bool up = (f1 < 0) == (slope > 0);
    double lo = 1.0, flo = f1, hi = 1.0, fhi = f1;
    double ratio = 1.01;
    for (int it = 0; it < 200; ++it) {
        hi = up ? lo * ratio : lo / ratio;
        fhi = f(hi);
        if ((fhi < 0) != (flo < 0))
            break;
        if (std::abs(fhi) >= std::abs(flo))
            throw Error(ErrorKind::RenormalizationFailed, "monotone area is not reachable by rescaling");
        lo = hi;
        flo = fhi;
        ratio = std::min(1.25, 1.0 + 2.0 * (ratio - 1.0));
    }
    if ((fhi < 0) == (flo < 0))
        throw Error(ErrorKind::RenormalizationFailed, "no bracket for the monotone scale");
    double a = lo, b = hi, fa = flo;
    double lambda = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        lambda = 0.5 * (a + b);
        const double fm = f(lambda);
        if (std::abs(fm) < 1e-13 || std::abs(b - a) < 1e-16 * lambda)
            break;
        if ((fm < 0) == (fa < 0)) {
            a = lambda;
            fa = fm;
        } else {
            b = lambda;
        }
    }
    ProfileCurve c = scaled(lambda);
    if (std::abs(f(lambda)) > 1e-10)
        throw Error(ErrorKind::RenormalizationFailed, "bisection did not reach the monotone area");
    return {std::move(c), lambda};
}

SurgeryRun flow_with_surgery(FlowState state, const FlowConfig& config, const SurgeryOptions& options) {
    SurgeryRun out;
    const long budget_end = state.step_count + options.step_budget;
    const auto stop = [&](std::string why) {
        out.failure = std::move(why);
        out.state = std::move(state);
        return std::move(out);
    };
    while (true) {
        FlowConfig cfg = config;
        cfg.max_steps = std::max(1L, budget_end - state.step_count);
        RunResult r = run(std::move(state), cfg);
        state = std::move(r.state);
        out.events.insert(out.events.end(), r.events.begin(), r.events.end());
        out.trajectory.insert(out.trajectory.end(), r.trajectory.begin(), r.trajectory.end());
        for (const auto& e : r.events)
            if (e.kind == FlowEventKind::InvariantViolation && e.detail == "crossing count increased")
                return stop("invariant violation: crossing count increased");
        if (r.events.empty())
            return stop("time limit reached");
        const FlowEvent& last = r.events.back();
        if (last.kind == FlowEventKind::Converged) {
            out.converged = true;
            out.state = std::move(state);
            return out;
        }
        if (last.kind == FlowEventKind::Halted)
            return stop("halted: " + last.detail);
        if (last.kind != FlowEventKind::SingularityDetected)
            return stop("time limit reached");
        if (static_cast<int>(out.records.size()) >= options.max_surgeries)
            return stop("surgery limit reached");

        SurgeryRecord rec;
        rec.t = state.t;
        rec.class_before = classify(state.curve);
        rec.n_before = neck_count(state.curve);
        // grow the probe scale until the cone is met, then shrink it on failed splices
        double R = std::min(options.scale_factor * state.min_radius, options.max_scale);
        std::optional<NeckSpec> neck;
        while (!(neck = detect_neck(state, R, options.eps0, cfg)) && 2 * R <= options.max_scale)
            R *= 2;
        ProfileCurve next;
        std::string error = "no neck found by the scale probe";
        bool done = false;
        for (int attempt = 0; neck && attempt <= options.retries; ++attempt) {
            try {
                next = neck_to_neck(state.curve, *neck, cfg);
                rec.neck = *neck;
                rec.attempts = attempt + 1;
                done = true;
                break;
            } catch (const Error& e) {
                error = e.what();
            }
            const double eps = neck->epsilon;
            R *= 0.5;
            neck = detect_neck(state, R, options.eps0, cfg);
            if (!neck) {
                // keep the scale and bend less instead
                R *= 2;
                neck = detect_neck(state, R, options.eps0, cfg);
                if (neck)
                    neck->epsilon = 0.5 * eps;
            }
        }
        if (!done) {
            state.halted = true;
            FlowEvent e{FlowEventKind::Halted, state.t, "surgery failed: " + error, std::nullopt, 0.0};
            out.events.push_back(e);
            state.event_log.push_back(e);
            return stop("surgery failed: " + error);
        }
        Renormalization ren;
        try {
            ren = monotone_renormalize(next);
        } catch (const Error& e) {
            return stop(std::string("renormalization failed: ") + e.what());
        }
        rec.lambda = ren.lambda;
        rec.class_after = ren.curve.symmetry_class;
        rec.n_after = neck_count(ren.curve);
        rec.defect_after = monotone_defect(ren.curve).defect;
        out.records.push_back(rec);
        FlowEvent e{FlowEventKind::SurgeryPerformed, state.t,
                    std::string(to_string(rec.class_before)) + " -> " + to_string(rec.class_after), std::nullopt,
                    static_cast<double>(rec.n_after)};
        out.events.push_back(e);
        state.event_log.push_back(e);
        state.curve = std::move(ren.curve);
        state.radius_history.clear();
        const double t = state.t;
        FlowState fresh = FlowState::from_curve(state.curve);
        fresh.t = t;
        fresh.step_count = state.step_count;
        fresh.event_log = std::move(state.event_log);
        state = std::move(fresh);
    }
}

void write_surgery_record(std::ostream& out, const SurgeryRecord& r) {
    const nlohmann::json j = {
        {"t", r.t},
        {"scale", r.neck.scale},
        {"epsilon", r.neck.epsilon},
        {"p_plus", {r.neck.p_plus.real(), r.neck.p_plus.imag()}},
        {"p_minus", {r.neck.p_minus.real(), r.neck.p_minus.imag()}},
        {"axis_before", to_string(r.neck.axis_before)},
        {"class_before", to_string(r.class_before)},
        {"class_after", to_string(r.class_after)},
        {"n_before", r.n_before},
        {"n_after", r.n_after},
        {"lambda", r.lambda},
        {"defect_after", r.defect_after},
        {"attempts", r.attempts},
    };
    out << j.dump() << '\n';
}

}  // namespace cp2flow
