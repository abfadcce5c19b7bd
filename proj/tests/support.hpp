#pragma once

#include <cmath>
#include <functional>

#include "cp2flow/core.hpp"

namespace testsupport {

constexpr double pi = 3.14159265358979323846;

inline cp2flow::Polyline sample_loop(const std::function<cp2flow::PlanarPoint(double)>& f, int n) {
    cp2flow::Polyline p(n);
    for (int i = 0; i < n; ++i)
        p[i] = f(2 * pi * i / n);
    return p;
}

inline cp2flow::ProfileCurve circle(double r, int n, cp2flow::PlanarPoint center = {0, 0}) {
    cp2flow::ProfileCurve c;
    c.components.push_back(sample_loop([&](double t) { return center + std::polar(r, t); }, n));
    c.symmetry_class = cp2flow::SymmetryClass::Clifford;
    return c;
}

inline cp2flow::ProfileCurve circle_pair(double center, double r, int n) {
    cp2flow::ProfileCurve c;
    c.components.push_back(
        sample_loop([&](double t) { return cp2flow::PlanarPoint(center, 0) + std::polar(r, t); }, n));
    c.components.push_back(
        sample_loop([&](double t) { return cp2flow::PlanarPoint(-center, 0) + std::polar(r, t); }, n));
    c.symmetry_class = cp2flow::SymmetryClass::Chekanov;
    return c;
}

// Star-shaped loop r(t) = base * (1 + sum a_j cos(2 j t)), symmetric under negation and conjugation.
inline cp2flow::ProfileCurve star(double base, const std::vector<double>& amps, int n) {
    cp2flow::ProfileCurve c;
    c.components.push_back(sample_loop(
        [&](double t) {
            double r = 1.0;
            for (std::size_t j = 0; j < amps.size(); ++j)
                r += amps[j] * std::cos(2.0 * (j + 1) * t);
            return std::polar(base * r, t);
        },
        n));
    return c;
}

// Chekanov pair built from a superellipse in log-polar coordinates around the positive real axis.
inline cp2flow::ProfileCurve lens(double A, double B, double p, double u0, int n) {
    cp2flow::ProfileCurve c;
    c.symmetry_class = cp2flow::SymmetryClass::Chekanov;
    const auto pw = [p](double x) { return std::copysign(std::pow(std::abs(x), 2 / p), x); };
    c.components.push_back(
        sample_loop([&](double t) { return std::exp(cp2flow::PlanarPoint(u0 + A * pw(std::cos(t)), B * pw(std::sin(t)))); }, n));
    cp2flow::Polyline neg;
    for (const auto& q : c.components[0])
        neg.push_back(-q);
    c.components.push_back(neg);
    return c;
}

// Monotone lens that pinches at the origin along the real axis: u0 bisected on the inner branch,
// where the area grows with u0.
inline cp2flow::ProfileCurve monotone_lens(int n) {
    double lo = -1.2, hi = -0.4;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cp2flow::enclosed_area(lens(1.25, 1.4, 4.0, mid, n), 0) < pi / 3 ? lo : hi) = mid;
    }
    return lens(1.25, 1.4, 4.0, 0.5 * (lo + hi), n);
}

}  // namespace testsupport
