#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "cp2flow/core.hpp"

namespace cp2flow {

// Minimal equivariant profiles satisfy f'^2 = B(f, C) = C e^{4f} / (1 + 2 e^{2f})^3 - 1 with
// f = log r as a function of the polar angle. In x = r^2 the turning points solve
// -8x^3 + (C - 12)x^2 - 6x - 1 = 0.

struct RadialRoots {
    double r1 = 0.0;
    double r2 = 0.0;
    double x3 = 0.0;
};

struct MinimalProfile {
    double C = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double x3 = 0.0;
    double period = 0.0;
    double inner_period = 0.0;
    double cone_radius = 0.0;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // difference to the half-resolution rule
};

struct ClosureSolution {
    int m = 0;
    int k = 0;
    double C = 0.0;
    double psi = 0.0;
    double closure_gap = 0.0;
    bool reduced = false;  // the request had gcd(m, k) > 1
    ProfileCurve profile;
};

struct CatalogEntry {
    int m = 0;
    int k = 0;
    double C = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double psi = 0.0;
    double cone_radius = 0.0;
};

double first_integral(double f, double C);

RadialRoots radial_roots(double C);

// Full oscillation angle 2 * int_{r1}^{r2} dr / (r sqrt(B)).
double period(double C);
QuadratureResult period_estimate(double C);
// 2 * int_{r1}^{1} dr / (r sqrt(B)).
double inner_period(double C);
// Polar angle swept from the minimum r1 up to radius R (R in [r1, r2]).
double angle_to_radius(double C, double R);
double cone_radius(double C);

MinimalProfile minimal_profile(double C);

struct ClosureOptions {
    double C_min = 27.0 + 1e-4;
    double C_max = 1e8;
    int points_per_decade = 64;
    int vertices_per_period = 8192;
};

std::optional<ClosureSolution> find_closed(int m, int k, const ClosureOptions& options = {});
std::vector<CatalogEntry> catalog(int max_m, const ClosureOptions& options = {});
void write_catalog_csv(std::ostream& out, const std::vector<CatalogEntry>& entries);

// m full periods starting at (r1, angle 0). With as_arc the result is the single half oscillation
// from r1 to r2 stored as an open polyline; otherwise the curve must close up.
ProfileCurve synthesize_profile(double C, int vertices_per_period, int m, bool as_arc = false);

double first_integral_residual(const ProfileCurve& profile, double C);

}  // namespace cp2flow
