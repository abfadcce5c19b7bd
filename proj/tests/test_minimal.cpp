#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "cp2flow/flow.hpp"
#include "cp2flow/minimal.hpp"
#include "support.hpp"

using namespace cp2flow;
using testsupport::pi;

namespace {

const double grid[] = {27.5, 30.0, 54.0, 100.0, 1e3, 1e4, 1e5, 1e6, 1e8};

double cubic(double x, double C) { return C * x * x - std::pow(1 + 2 * x, 3); }

// Roots of C x^2 = (1 + 2x)^3 by TOMS 748, independent of the library root finder.
std::pair<double, double> reference_roots(double C) {
    const auto f = [C](double x) { return cubic(x, C); };
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t it = 200;
    const auto a = boost::math::tools::toms748_solve(f, 1e-12, 1.0, tol, it);
    it = 200;
    const auto b = boost::math::tools::toms748_solve(f, 1.0, C, tol, it);
    return {0.5 * (a.first + a.second), 0.5 * (b.first + b.second)};
}

// Twice the integral of dr / (r sqrt(B)) between the turning points, written in x = r^2 with the
// endpoint distance supplied by tanh-sinh so the integrand keeps full precision near the roots.
double reference_period(double C) {
    const auto [x1, x2] = reference_roots(C);
    const auto f = [&](double x, double xc) {
        const double d1 = xc < 0 && x < 0.5 * (x1 + x2) ? -xc : x - x1;
        const double d2 = xc > 0 && x > 0.5 * (x1 + x2) ? xc : x2 - x;
        // C x^2 - (1 + 2x)^3 = 8 (x - x1)(x2 - x)(x - x3) with x1 x2 x3 = -1/8
        const double x3 = -1.0 / (8 * x1 * x2);
        const double w = 1 + 2 * x;
        return std::sqrt(w * w * w / (8 * d1 * d2 * (x - x3))) / (2 * x);
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    return 2 * integrator.integrate(f, x1, x2, 1e-13);
}

// Largest vertex displacement; bounds the Hausdorff distance from above.
double displacement(const ProfileCurve& a, const ProfileCurve& b) {
    double h = 0.0;
    for (std::size_t c = 0; c < a.components.size(); ++c)
        for (std::size_t i = 0; i < a.components[c].size(); ++i)
            h = std::max(h, std::abs(a.components[c][i] - b.components[c][i]));
    return h;
}

}  // namespace

TEST_CASE("turning radii solve the cubic") {
    for (double C : grid) {
        const RadialRoots r = radial_roots(C);
        for (double rr : {r.r1, r.r2}) {
            const double lhs = C * std::pow(rr, 4);
            const double rhs = std::pow(1 + 2 * rr * rr, 3);
            CHECK(std::abs(lhs - rhs) / rhs < 1e-12);
        }
        CHECK(r.r1 < 1);
        CHECK(r.r2 > 1);
        CHECK(r.x3 < 0);
        const auto [x1, x2] = reference_roots(C);
        CHECK(r.r1 * r.r1 == doctest::Approx(x1).epsilon(1e-12));
        CHECK(r.r2 * r.r2 == doctest::Approx(x2).epsilon(1e-12));
        CHECK(std::abs(-8 * std::pow(r.x3, 3) + (C - 12) * r.x3 * r.x3 - 6 * r.x3 - 1) < 1e-10);
    }
    const RadialRoots r = radial_roots(1e6);
    CHECK(r.r1 < 0.05);
    CHECK(r.r2 > 10);
    const RadialRoots near = radial_roots(27 + 1e-9);
    CHECK(near.r1 == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(near.r2 == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("no oscillation at or below the critical constant") {
    CHECK_THROWS_AS(radial_roots(27.0), Error);
    CHECK_THROWS_AS(period(20.0), Error);
    CHECK(-8.0 + 15.0 - 6.0 - 1.0 == 0.0);
}

TEST_CASE("regularised period matches tanh-sinh on the raw integral") {
    for (double C : {30.0, 54.0, 1e3, 1e6}) {
        const double ref = reference_period(C);
        CHECK(std::abs(period(C) - ref) < 1e-8);
        CHECK(period_estimate(C).error < 1e-9);
    }
}

TEST_CASE("period limits") {
    CHECK(std::abs(period(27.0001) - pi * std::sqrt(3.0)) < 1e-3);
    const QuadratureResult p54 = period_estimate(54.0);
    CHECK(p54.value - 1.5 * pi > 10 * std::max(p54.error, 1e-12));
    CHECK(std::abs(period(1e8) - 1.5 * pi) < 0.05);
}

TEST_CASE("period stays inside the observed range") {
    for (double C : grid) {
        const double p = period(C);
        CHECK(p > 1.5 * pi);
        CHECK(p < pi * std::sqrt(3.0));
    }
}

TEST_CASE("inner period") {
    for (double C : grid)
        CHECK(inner_period(C) > pi / 2);
    for (double C : {30.0, 54.0, 1e3, 1e6})
        CHECK(inner_period(C) < period(C));
    CHECK(std::abs(inner_period(27.0001) - 0.5 * period(27.0001)) < 1e-2);
    CHECK(std::abs(inner_period(1e8) - pi / 2) < 0.05);
}

TEST_CASE("angle to radius covers half a period") {
    for (double C : {30.0, 1e4}) {
        const RadialRoots r = radial_roots(C);
        CHECK(angle_to_radius(C, r.r1) == doctest::Approx(0.0));
        CHECK(angle_to_radius(C, r.r2) == doctest::Approx(period(C) / 2).epsilon(1e-12));
        CHECK(angle_to_radius(C, 1.0) == doctest::Approx(inner_period(C) / 2).epsilon(1e-12));
    }
}

TEST_CASE("cone radius") {
    const double Cs[] = {1e2, 1e3, 1e4, 1e5, 1e6};
    double prev = 1e9;
    for (double C : Cs) {
        const MinimalProfile p = minimal_profile(C);
        CHECK(p.cone_radius < prev);
        CHECK(p.r1 < p.cone_radius);
        CHECK(p.cone_radius < p.r2);
        CHECK(angle_to_radius(C, p.cone_radius) == doctest::Approx(pi / 4).epsilon(1e-10));
        prev = p.cone_radius;
    }
    CHECK(cone_radius(1e3) < 0.5);
    // R_C decays roughly like (log C)^(-1/2); 0.1 lies far beyond double-precision reach
    for (double threshold : {0.5, 0.2}) {
        bool reached = false;
        for (double C = 1e2; C <= 1e12; C *= 10)
            reached = reached || cone_radius(C) < threshold;
        CHECK(reached);
    }
    CHECK(cone_radius(27.0001) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("cone radius agrees with tanh-sinh on the raw angle integral") {
    for (double C : {1e3, 1e8}) {
        const double R = cone_radius(C);
        const auto [x1, x2] = reference_roots(C);
        const double X = R * R;
        const auto f = [&](double x, double xc) {
            const double d1 = xc < 0 ? -xc : x - x1;
            const double x3 = -1.0 / (8 * x1 * x2);
            const double w = 1 + 2 * x;
            return std::sqrt(w * w * w / (8 * d1 * (x2 - x) * (x - x3))) / (2 * x);
        };
        boost::math::quadrature::tanh_sinh<double> integrator;
        CHECK(integrator.integrate(f, x1, X, 1e-13) == doctest::Approx(pi / 4).epsilon(1e-9));
    }
}

TEST_CASE("closed (5,4) profile") {
    const auto sol = find_closed(5, 4);
    REQUIRE(sol.has_value());
    CHECK_FALSE(sol->reduced);
    CHECK(std::abs(5 * sol->psi - 8 * pi) < 1e-8);
    CHECK(sol->closure_gap < 1e-6);
    const Polyline& loop = sol->profile.components.at(0);
    CHECK(loop.size() == 5u * 8192u);
    CHECK(winding_number(loop, {0, 0}) == 4);
    CHECK(first_integral_residual(sol->profile, sol->C) < 1e-6);
    double vmax = 0.0;
    const auto speeds = normal_velocity(sol->profile);
    for (double v : speeds[0])
        vmax = std::max(vmax, std::abs(v));
    CHECK(vmax < 1e-4);
    ProfileCurve moved = sol->profile;
    const double elapsed = free_step(moved, 0.2, 100);
    CHECK(elapsed > 0);
    CHECK(displacement(moved, sol->profile) < 1e-3);
}

TEST_CASE("targets outside the period range have no solution") {
    CHECK_FALSE(find_closed(1, 1).has_value());
    CHECK_FALSE(find_closed(2, 3).has_value());
}

TEST_CASE("non-reduced requests are reduced and flagged") {
    ClosureOptions opt;
    opt.vertices_per_period = 256;
    const auto sol = find_closed(10, 8, opt);
    REQUIRE(sol.has_value());
    CHECK(sol->reduced);
    CHECK(sol->m == 5);
    CHECK(sol->k == 4);
}

TEST_CASE("open arc spans half a period") {
    const double C = 100.0;
    const ProfileCurve arc = synthesize_profile(C, 2048, 1, true);
    const Polyline& q = arc.components.at(0);
    const RadialRoots r = radial_roots(C);
    CHECK(std::abs(q.front() - PlanarPoint(r.r1, 0)) < 1e-14);
    CHECK(std::abs(q.back()) == doctest::Approx(r.r2).epsilon(1e-12));
    CHECK(std::arg(q.back()) == doctest::Approx(period(C) / 2).epsilon(1e-10));
    CHECK(first_integral_residual(arc, C) < 1e-6);
    CHECK_THROWS_AS(synthesize_profile(C, 512, 1), Error);
}

TEST_CASE("first integral residual on circles") {
    const ProfileCurve c = testsupport::circle(1.0, 64);
    CHECK(first_integral_residual(c, 27.0) == doctest::Approx(0.0));
    CHECK(first_integral_residual(c, 54.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("catalog") {
    ClosureOptions opt;
    opt.points_per_decade = 16;
    const auto entries = catalog(8, opt);
    REQUIRE_FALSE(entries.empty());
    bool has_54 = false;
    for (const auto& e : entries) {
        CHECK(std::abs(e.m * e.psi - 2 * pi * e.k) < 1e-8);
        has_54 = has_54 || (e.m == 5 && e.k == 4);
    }
    CHECK(has_54);
    std::ostringstream os;
    write_catalog_csv(os, entries);
    CHECK(os.str().rfind("m,k,C,r1,r2,psi,R_C\n", 0) == 0);
}
