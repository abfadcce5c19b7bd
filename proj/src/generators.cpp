#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "cp2flow/diagnostics.hpp"
#include "cp2flow/mesh.hpp"
#include "cp2flow/minimal.hpp"
#include "cp2flow/numerics.hpp"
#include "cp2flow/scenario.hpp"

namespace cp2flow {

using num::pi;

namespace {

// Chekanov lens: superellipse in log-polar coordinates around the positive real axis, exponent 4.
// Its centre u0 is tuned so that each component bounds area pi/3, on the branch nearer the origin.
constexpr double kLensA = 1.25;
constexpr double kLensB = 1.4;
constexpr double kLensP = 4.0;

Polyline sample_loop(int n, const std::function<PlanarPoint(double)>& f) {
    Polyline p(n);
    for (int i = 0; i < n; ++i)
        p[i] = f(2 * pi * i / n);
    return p;
}

ProfileCurve negated_pair(Polyline first) {
    ProfileCurve c;
    Polyline second = first;
    for (auto& p : second)
        p = -p;
    c.components = {std::move(first), std::move(second)};
    c.symmetry_class = SymmetryClass::Chekanov;
    return c;
}

ProfileCurve circle_pair(double center, double radius, int n) {
    return negated_pair(sample_loop(n, [&](double t) { return PlanarPoint(center, 0) + std::polar(radius, t); }));
}

std::string num_str(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

// ---- two-surgery curve ----

double smoothstep(double x) {
    if (x <= 0)
        return 0;
    if (x >= 1)
        return 1;
    return x * x * x * (10 - 15 * x + 6 * x * x);
}

PlanarPoint quadrant_point(const TwoSurgeryParams& p, double ua, double uc, double s) {
    const double ub = std::log(p.r_b);
    double phi;
    if (s <= p.s_tip)
        phi = p.phi_max * std::sin(0.5 * pi * s / p.s_tip);
    else if (s <= p.s_turn)
        phi = p.phi_min + (p.phi_max - p.phi_min) * 0.5 * (1 + std::cos(pi * (s - p.s_tip) / (p.s_turn - p.s_tip)));
    else
        phi = 0.5 * pi - (0.5 * pi - p.phi_min) * std::cos(0.5 * pi * (s - p.s_turn) / (1 - p.s_turn));
    const double u = ua + (ub - ua) * smoothstep((s - p.s_tip) / p.blend + 0.5) +
                     (uc - ub) * smoothstep((s - p.s_turn) / p.blend + 0.5);
    return std::exp(PlanarPoint(u, phi));
}

ProfileCurve two_surgery_dense(const TwoSurgeryParams& p, double r_a, double r_c) {
    const int m = p.dense_per_quadrant;
    const double ua = std::log(r_a), uc = std::log(r_c);
    Polyline q(m + 1);
    for (int i = 0; i <= m; ++i)
        q[i] = quadrant_point(p, ua, uc, static_cast<double>(i) / m);
    Polyline loop(q.begin(), q.end());
    for (int i = m - 1; i > 0; --i)
        loop.push_back(-std::conj(q[i]));
    const std::size_t half = loop.size();
    for (std::size_t i = 0; i < half; ++i)
        loop.push_back(-loop[i]);
    ProfileCurve c;
    c.components = {std::move(loop)};
    c.symmetry_class = SymmetryClass::Clifford;
    return c;
}

void validate_two_surgery(const TwoSurgeryParams& p) {
    const bool ok = p.phi_max > pi / 3 && p.phi_max < pi / 2 && p.phi_min > 0 && p.phi_min < pi / 4 && p.r_b > 0 &&
                    p.s_tip > p.blend && p.s_turn - p.s_tip > p.blend && 1 - p.s_turn > p.blend && p.blend > 0 &&
                    p.dense_per_quadrant >= 100 && p.triangle_area > 0 && p.pocket_disc_area > 0 &&
                    p.pocket_disc_area < pi / 3;
    if (!ok)
        throw Error(ErrorKind::Config, "two-surgery parameters out of range");
}

int first_quadrant_end(const ProfileCurve& c) { return static_cast<int>(c.components.at(0).size()) / 4; }

int tip_vertex(const ProfileCurve& c) {
    const Polyline& loop = c.components.at(0);
    const int M = first_quadrant_end(c);
    for (int i = 1; i < M; ++i)
        if (std::arg(loop[i + 1]) < std::arg(loop[i]))
            return i;
    throw Error(ErrorKind::Generator, "curve has no opening-angle maximum in the first quadrant");
}

double point_segment_distance(PlanarPoint p, PlanarPoint a, PlanarPoint b) {
    const PlanarPoint d = b - a;
    const double len2 = std::norm(d);
    const double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
    return std::abs(p - (a + t * d));
}

double boundary_distance(const Polyline& poly, PlanarPoint p) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i)
        d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
    return d;
}

// Centre and radius of the largest disc inside a simple polygon: grid search, then a
// compass search on the distance to the boundary.
std::pair<PlanarPoint, double> largest_inscribed_disc(const Polyline& poly) {
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (auto p : poly) {
        xlo = std::min(xlo, p.real());
        xhi = std::max(xhi, p.real());
        ylo = std::min(ylo, p.imag());
        yhi = std::max(yhi, p.imag());
    }
    const auto value = [&](PlanarPoint p) { return winding_number(poly, p) != 0 ? boundary_distance(poly, p) : -1.0; };
    const int g = 64;
    PlanarPoint best{};
    double best_v = -1.0;
    for (int i = 0; i <= g; ++i)
        for (int j = 0; j <= g; ++j) {
            const PlanarPoint p(xlo + (xhi - xlo) * i / g, ylo + (yhi - ylo) * j / g);
            const double v = value(p);
            if (v > best_v) {
                best_v = v;
                best = p;
            }
        }
    if (!(best_v > 0))
        throw Error(ErrorKind::Generator, "pocket has no interior");
    double step = std::max(xhi - xlo, yhi - ylo) / g;
    while (step > 1e-10 * std::max(1.0, std::abs(best))) {
        bool moved = false;
        for (int k = 0; k < 8; ++k) {
            const PlanarPoint p = best + std::polar(step, k * pi / 4);
            const double v = value(p);
            if (v > best_v) {
                best_v = v;
                best = p;
                moved = true;
            }
        }
        if (!moved)
            step *= 0.5;
    }
    return {best, best_v};
}

PocketDisc place_disc(const Polyline& pocket, double target) {
    const auto [center, rmax] = largest_inscribed_disc(pocket);
    PocketDisc d;
    d.center = center;
    d.max_area = euclidean_disc_area(center, rmax);
    if (d.max_area <= target) {
        d.radius = rmax;
    } else {
        d.radius = num::bisect([&](double r) { return euclidean_disc_area(center, r) - target; }, 0.0, rmax, 1e-15);
    }
    d.area = euclidean_disc_area(center, d.radius);
    d.min_r = std::abs(center) - d.radius;
    d.clearance = rmax - d.radius;
    return d;
}

}  // namespace

const char* to_string(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::RoundCircle: return "round_circle";
        case GeneratorKind::Ellipse: return "ellipse";
        case GeneratorKind::ChekanovPair: return "chekanov_pair";
        case GeneratorKind::ChekanovLens: return "chekanov_lens";
        case GeneratorKind::PerturbedClifford: return "perturbed_clifford";
        case GeneratorKind::TwoSurgery: return "two_surgery_construction";
        case GeneratorKind::MinimalProfile: return "minimal_profile";
    }
    return "unknown";
}

GeneratorKind generator_kind_from_string(const std::string& name) {
    for (auto k : {GeneratorKind::RoundCircle, GeneratorKind::Ellipse, GeneratorKind::ChekanovPair,
                   GeneratorKind::ChekanovLens, GeneratorKind::PerturbedClifford, GeneratorKind::TwoSurgery,
                   GeneratorKind::MinimalProfile})
        if (name == to_string(k))
            return k;
    throw Error(ErrorKind::Config, "unknown generator '" + name + "'");
}

double shrink_radius_bound(double area) {
    if (!(area > 0 && area < pi / 2))
        throw Error(ErrorKind::Domain, "area must lie in (0, pi/2)");
    return std::sqrt(area / (pi - 2 * area));
}

TwoSurgeryReport check_two_surgery(const ProfileCurve& curve, const TwoSurgeryParams& params) {
    TwoSurgeryReport rep;
    const auto fail = [&](std::string s) { rep.failures.push_back(std::move(s)); };
    if (curve.components.size() != 1 || classify(curve) != SymmetryClass::Clifford)
        throw Error(ErrorKind::Generator, "two-surgery curve must be a single Clifford loop");
    const Polyline& loop = curve.components[0];
    const int n = static_cast<int>(loop.size());
    const int M = first_quadrant_end(curve);

    const int tip = tip_vertex(curve);
    const TrianglePatch patch = make_triangle_patch(curve, 0, n - tip, tip, true);
    rep.psi = patch.psi;
    rep.triangle_area = patch.area;
    if (std::abs(rep.triangle_area - params.triangle_area) > 1e-6)
        fail("triangle area " + num_str(rep.triangle_area) + " differs from " + num_str(params.triangle_area));
    if (!(rep.psi > 2 * pi / 3))
        fail("maximal opening angle " + num_str(rep.psi) + " is not above 2pi/3");

    const MonotoneDefect md = monotone_defect(curve);
    rep.disc_area = md.disc_area;
    if (md.defect > 1e-10)
        fail("monotone defect " + num_str(md.defect));
    rep.wide_cone_crossings = cone_intersections(curve, ConeSpec{0.0, 2 * pi / 3}).count;
    if (rep.wide_cone_crossings != 12)
        fail("C^0_{2pi/3} is crossed " + std::to_string(rep.wide_cone_crossings) + " times instead of 12");
    if (!is_embedded(curve))
        fail("curve is not embedded");

    // crossings of the first-quadrant arc with the ray at pi/3
    const PlanarPoint ray = std::polar(1.0, pi / 3);
    std::vector<std::pair<int, PlanarPoint>> hits;
    for (int i = 0; i < M; ++i) {
        const double a = cross(ray, loop[i]), b = cross(ray, loop[i + 1]);
        if ((a < 0) != (b < 0) && dot(ray, loop[i]) > 0) {
            const double t = a / (a - b);
            hits.emplace_back(i, loop[i] + t * (loop[i + 1] - loop[i]));
        }
    }
    rep.radius_bound = shrink_radius_bound(params.pocket_disc_area);
    if (hits.size() != 3) {
        fail("ray at pi/3 is crossed " + std::to_string(hits.size()) + " times in the first quadrant");
        return rep;
    }
    const auto pocket = [&](int k) {
        Polyline poly{hits[k].second};
        for (int i = hits[k].first + 1; i <= hits[k + 1].first; ++i)
            poly.push_back(loop[i]);
        poly.push_back(hits[k + 1].second);
        return poly;
    };
    const auto check_disc = [&](const PocketDisc& d, const char* name) {
        if (std::abs(d.area - params.pocket_disc_area) > 1e-6)
            fail(std::string(name) + " pocket holds a disc of area at most " + num_str(d.max_area) + ", target " +
                 num_str(params.pocket_disc_area));
        if (!(d.min_r > rep.radius_bound))
            fail(std::string(name) + " pocket disc reaches radius " + num_str(d.min_r) + ", bound " + num_str(rep.radius_bound));
    };
    rep.upper = place_disc(pocket(0), params.pocket_disc_area);
    rep.lower = place_disc(pocket(1), params.pocket_disc_area);
    check_disc(rep.upper, "upper");
    check_disc(rep.lower, "lower");
    return rep;
}

namespace {

ProfileCurve renormalized(const ProfileCurve& c, bool on) { return on ? monotone_renormalize(c).curve : c; }

// Bracketed root to an absolute tolerance in x; every evaluation here rebuilds a dense curve.
template <class F>
double root(const F& f, double lo, double hi, double xtol) {
    std::uintmax_t iters = 100;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, [xtol](double x, double y) { return std::abs(x - y) <= xtol; }, iters);
    return 0.5 * (a + b);
}

Generated generate_two_surgery(const GeneratorSpec& spec, const FlowConfig& config) {
    const TwoSurgeryParams& p = spec.two_surgery;
    validate_two_surgery(p);
    const double target = 2 * pi / 3;
    // outer radius for the monotone area at a given neck radius, tuned on the dense curve
    const auto outer_radius = [&](double r_a) {
        const auto f = [&](double uc) { return enclosed_area(two_surgery_dense(p, r_a, std::exp(uc)), 0) - target; };
        const double lo = std::log(1.5 * p.r_b), hi = std::log(100.0);
        if (!(f(lo) < 0 && f(hi) > 0))
            throw Error(ErrorKind::Generator, "monotone area is out of reach of the outer arc");
        return std::exp(root(f, lo, hi, 1e-13));
    };
    struct Candidate {
        ProfileCurve curve;
        double r_a, r_c, lambda;
    };
    const auto build = [&](double r_a) {
        const double r_c = outer_radius(r_a);
        const ProfileCurve canonical = prepare_curve(two_surgery_dense(p, r_a, r_c), config);
        Renormalization ren = monotone_renormalize(canonical);
        return Candidate{std::move(ren.curve), r_a, r_c, ren.lambda};
    };
    const auto triangle = [&](const Candidate& c) {
        const int n = static_cast<int>(c.curve.components[0].size());
        const int tip = tip_vertex(c.curve);
        return make_triangle_patch(c.curve, 0, n - tip, tip, true).area;
    };
    const auto g = [&](double ua) { return triangle(build(std::exp(ua))) - p.triangle_area; };
    const double lo = std::log(1e-3), hi = std::log(0.5 * p.r_b);
    if (!(g(lo) < 0 && g(hi) > 0))
        throw Error(ErrorKind::Generator, "triangle area target is out of reach");
    const double ua = root(g, lo, hi, 1e-12);
    Candidate best = build(std::exp(ua));

    Generated out;
    TwoSurgeryReport rep = check_two_surgery(best.curve, p);
    rep.r_a = best.r_a;
    rep.r_c = best.r_c;
    rep.lambda = best.lambda;
    out.log.push_back("two-surgery: r_a = " + num_str(rep.r_a) + ", r_c = " + num_str(rep.r_c) + ", lambda = " + num_str(rep.lambda));
    out.log.push_back("two-surgery: triangle area " + num_str(rep.triangle_area) + ", psi " + num_str(rep.psi));
    out.log.push_back("two-surgery: upper pocket disc area " + num_str(rep.upper.area) + " (max " + num_str(rep.upper.max_area) +
                      "), lower " + num_str(rep.lower.area) + " (max " + num_str(rep.lower.max_area) + ")");
    for (const auto& f : rep.failures)
        out.log.push_back("two-surgery self-check failed: " + f);
    out.curve = std::move(best.curve);
    out.two_surgery = std::move(rep);
    return out;
}

}  // namespace

Generated generate(const GeneratorSpec& spec, const FlowConfig& config) {
    config.validate();
    const int n = spec.dense_vertices;
    if (n < 64)
        throw Error(ErrorKind::Config, "dense_vertices must be at least 64");
    Generated out;
    switch (spec.kind) {
        case GeneratorKind::RoundCircle: {
            if (!(spec.radius > 0))
                throw Error(ErrorKind::Config, "radius must be positive");
            ProfileCurve c;
            c.components = {sample_loop(n, [&](double t) { return std::polar(spec.radius, t); })};
            out.curve = renormalized(prepare_curve(c, config), spec.renormalize);
            break;
        }
        case GeneratorKind::Ellipse: {
            if (!(spec.a > 0 && spec.b > 0))
                throw Error(ErrorKind::Config, "semi-axes must be positive");
            ProfileCurve c;
            c.components = {sample_loop(n, [&](double t) { return PlanarPoint(spec.a * std::cos(t), spec.b * std::sin(t)); })};
            out.curve = renormalized(prepare_curve(c, config), spec.renormalize);
            break;
        }
        case GeneratorKind::ChekanovPair: {
            double radius = spec.radius;
            if (spec.target_area) {
                const double A = *spec.target_area;
                const auto f = [&](double r) { return enclosed_area(circle_pair(spec.center, r, n), 0) - A; };
                const double hi = spec.center * (1 - 1e-6);
                if (!(f(1e-6) < 0 && f(hi) > 0))
                    throw Error(ErrorKind::Generator, "component area " + num_str(A) + " is out of reach at centre " + num_str(spec.center));
                radius = num::bisect(f, 1e-6, hi, 1e-15);
                out.log.push_back("chekanov pair radius " + num_str(radius));
            }
            if (!(radius > 0 && radius < spec.center))
                throw Error(ErrorKind::Config, "pair radius must lie in (0, center)");
            out.curve = renormalized(prepare_curve(circle_pair(spec.center, radius, n), config), spec.renormalize);
            break;
        }
        case GeneratorKind::ChekanovLens: {
            const auto pw = [](double x) { return std::copysign(std::pow(std::abs(x), 2 / kLensP), x); };
            const auto loop_at = [&](double u0) {
                return sample_loop(n, [&](double t) {
                    return std::exp(PlanarPoint(u0 + kLensA * pw(std::cos(t)), kLensB * pw(std::sin(t))));
                });
            };
            const double u0 = num::bisect(
                [&](double u) { return enclosed_area(negated_pair(loop_at(u)), 0) - pi / 3; }, -1.2, -0.4, 1e-14);
            out.log.push_back("lens centre log r " + num_str(u0));
            Polyline loop = loop_at(u0);
            out.curve = renormalized(prepare_curve(negated_pair(std::move(loop)), config), spec.renormalize);
            break;
        }
        case GeneratorKind::PerturbedClifford: {
            std::vector<double> amps = spec.amplitudes;
            if (spec.random_amplitude > 0) {
                std::mt19937_64 rng(spec.seed);
                std::uniform_real_distribution<double> u(-spec.random_amplitude, spec.random_amplitude);
                for (auto& a : amps)
                    a += u(rng);
            }
            ProfileCurve c;
            c.components = {sample_loop(n, [&](double t) {
                double r = 1.0;
                for (std::size_t j = 0; j < amps.size(); ++j)
                    r += amps[j] * std::cos(2.0 * (j + 1) * t);
                if (!(r > 0))
                    throw Error(ErrorKind::Generator, "perturbation reaches the origin");
                return std::polar(r, t);
            })};
            out.curve = renormalized(prepare_curve(c, config), spec.renormalize);
            break;
        }
        case GeneratorKind::TwoSurgery:
            return generate_two_surgery(spec, config);
        case GeneratorKind::MinimalProfile: {
            if (spec.m > 0 || spec.k > 0) {
                const auto sol = find_closed(spec.m, spec.k);
                if (!sol)
                    throw Error(ErrorKind::Generator,
                                "no closed minimal profile for (m, k) = (" + std::to_string(spec.m) + ", " + std::to_string(spec.k) + ")");
                out.curve = sol->profile;
                out.log.push_back("closed profile at C = " + num_str(sol->C) + ", closure gap " + num_str(sol->closure_gap));
            } else if (spec.C) {
                out.curve = synthesize_profile(*spec.C, 2048, 1, true);
            } else {
                throw Error(ErrorKind::Config, "minimal_profile needs C or (m, k)");
            }
            break;
        }
    }
    return out;
}

double exact_shrink_time(double r0) {
    if (!(r0 > 0))
        throw Error(ErrorKind::Domain, "radius must be positive");
    const double B = 2 * pi * r0 * r0 / (1 + 2 * r0 * r0);
    if (!(3 * B < 2 * pi))
        throw Error(ErrorKind::InfiniteTime, "monotone or larger circle: no finite extinction time");
    return std::log(2 * pi / (2 * pi - 3 * B)) / 6;
}

double exact_shrink_time_chekanov(double area) {
    if (!(area > 0))
        throw Error(ErrorKind::Domain, "area must be positive");
    if (!(3 * area < pi))
        throw Error(ErrorKind::InfiniteTime, "monotone or larger disc: no finite extinction time");
    return std::log(pi / (pi - 3 * area)) / 6;
}

ShrinkerTiming shrinker_timing(double r0, int vertices) {
    ShrinkerTiming out;
    out.t_exact = exact_shrink_time(r0);
    FlowConfig cfg;
    cfg.vertices_per_component = vertices;
    cfg.cfl = 0.02;
    cfg.sample_interval = 0.002;
    cfg.max_time = 2 * out.t_exact + 0.1;
    GeneratorSpec g;
    g.radius = r0;
    g.renormalize = false;
    g.dense_vertices = vertices;
    const RunResult r = run(FlowState::from_curve(generate(g, cfg).curve), cfg);
    if (r.events.empty() || r.events.back().kind != FlowEventKind::SingularityDetected || !r.events.back().singularity)
        throw Error(ErrorKind::InvariantViolation, "round circle did not collapse");
    const double est = r.events.back().singularity->estimated_T;
    out.t_sim = std::isfinite(est) ? est : r.events.back().t;
    return out;
}

}  // namespace cp2flow
