#include "cp2flow/minimal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <iomanip>

#include "cp2flow/numerics.hpp"

namespace cp2flow {

using num::pi;

namespace {

double cubic(double x, double C) { return ((-8.0 * x + (C - 12.0)) * x - 6.0) * x - 1.0; }
double cubic_deriv(double x, double C) { return (-24.0 * x + 2.0 * (C - 12.0)) * x - 6.0; }

double root_in(double lo, double hi, double C) {
    // p(lo) and p(hi) have opposite signs
    const bool lo_neg = cubic(lo, C) < 0;
    for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(std::abs(hi), 1e-300); ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((cubic(mid, C) < 0) == lo_neg)
            lo = mid;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        const double d = cubic_deriv(x, C);
        if (d == 0.0)
            break;
        const double nx = x - cubic(x, C) / d;
        if (!(nx > lo - (hi - lo) && nx < hi + (hi - lo)))
            break;
        x = nx;
    }
    return x;
}

struct Family {
    double C, x1, x2, x3;

    explicit Family(double c) : C(c) {
        const RadialRoots r = radial_roots(c);
        x1 = r.r1 * r.r1;
        x2 = r.r2 * r.r2;
        x3 = r.x3;
    }

    // d(angle)/du for x = x1 + (x2 - x1) sin^2 u
    double x_global(double u) const {
        const double s = std::sin(u);
        return x1 + (x2 - x1) * s * s;
    }
    double g_global(double u) const {
        const double x = x_global(u);
        const double w = 1.0 + 2.0 * x;
        return std::sqrt(w * w * w / (8.0 * (x - x3))) / x;
    }
    double u_of(double X) const {
        const double s = std::clamp((X - x1) / (x2 - x1), 0.0, 1.0);
        return std::asin(std::sqrt(s));
    }

    // d(angle)/dv for x = x1 + (X - x1) sin^2 v; regular at x1 and resolves the peak of 1/x there
    double x_inner(double v, double X) const {
        const double s = std::sin(v);
        return x1 + (X - x1) * s * s;
    }
    double g_inner(double v, double X) const {
        const double x = x_inner(v, X);
        const double w = 1.0 + 2.0 * x;
        return std::sqrt(w * w * w / (8.0 * (x - x3) * (x2 - x))) / x * std::sqrt(X - x1) * std::cos(v);
    }

    // Use the inner substitution below x = 1 when the outer root is far away.
    bool split() const { return x2 > 2.0; }

    // angle swept from r1 to sqrt(X)
    double angle(double X, const num::GaussRule& rule) const {
        X = std::clamp(X, x1, x2);
        if (!split())
            return num::integrate_gl(rule, [&](double u) { return g_global(u); }, 0.0, u_of(X));
        const double Xi = std::min(X, 1.0);
        double a = num::integrate_gl(rule, [&](double v) { return g_inner(v, Xi); }, 0.0, pi / 2);
        if (X > 1.0)
            a += num::integrate_gl(rule, [&](double u) { return g_global(u); }, u_of(1.0), u_of(X));
        return a;
    }
};

const num::GaussRule& rule_256() {
    static const num::GaussRule rule = num::gauss_legendre(256);
    return rule;
}

const num::GaussRule& rule_8() {
    static const num::GaussRule rule = num::gauss_legendre(8);
    return rule;
}

void require_family(double C) {
    if (!(C > 27.0))
        throw Error(ErrorKind::Domain, "first-integral constant must exceed 27");
}

// Fornberg weights for the first derivative at x0 on the given nodes.
std::vector<double> derivative_weights(double x0, const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(2, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = c[i][1];
    return w;
}

int gcd(int a, int b) { return std::gcd(a, b); }

}  // namespace

double first_integral(double f, double C) {
    const double e2 = std::exp(2.0 * f);
    const double w = 1.0 + 2.0 * e2;
    return C * e2 * e2 / (w * w * w) - 1.0;
}

RadialRoots radial_roots(double C) {
    require_family(C);
    RadialRoots out;
    const double x1 = root_in(0.0, 1.0, C);
    const double x2 = root_in(1.0, C / 8.0 + 1.0, C);
    out.r1 = std::sqrt(x1);
    out.r2 = std::sqrt(x2);
    // product of the three roots is -1/8
    out.x3 = -1.0 / (8.0 * x1 * x2);
    return out;
}

QuadratureResult period_estimate(double C) {
    require_family(C);
    const Family fam(C);
    const double full = 2.0 * fam.angle(fam.x2, num::gauss_legendre_512());
    const double half = 2.0 * fam.angle(fam.x2, rule_256());
    return {full, std::abs(full - half)};
}

double period(double C) { return period_estimate(C).value; }

double inner_period(double C) {
    require_family(C);
    const Family fam(C);
    return 2.0 * fam.angle(1.0, num::gauss_legendre_512());
}

double angle_to_radius(double C, double R) {
    require_family(C);
    const Family fam(C);
    return fam.angle(R * R, num::gauss_legendre_512());
}

double cone_radius(double C) {
    require_family(C);
    const Family fam(C);
    const auto f = [&](double R) { return fam.angle(R * R, num::gauss_legendre_512()) - pi / 4; };
    const double lo = std::sqrt(fam.x1);
    const double hi = std::sqrt(fam.x2);
    if (f(hi) < 0)
        return hi;
    return num::bisect(f, lo, hi, 1e-12);
}

MinimalProfile minimal_profile(double C) {
    MinimalProfile p;
    p.C = C;
    const RadialRoots r = radial_roots(C);
    p.r1 = r.r1;
    p.r2 = r.r2;
    p.x3 = r.x3;
    p.period = period(C);
    p.inner_period = inner_period(C);
    p.cone_radius = cone_radius(C);
    return p;
}

namespace {

struct Scan {
    std::vector<double> s;    // log10(C - 27)
    std::vector<double> psi;
};

Scan scan_family(const ClosureOptions& o) {
    Scan sc;
    const double s0 = std::log10(o.C_min - 27.0);
    const double s1 = std::log10(o.C_max - 27.0);
    const int n = static_cast<int>(std::ceil((s1 - s0) * o.points_per_decade));
    for (int j = 0; j <= n; ++j) {
        const double s = std::min(s1, s0 + static_cast<double>(j) / o.points_per_decade);
        sc.s.push_back(s);
        sc.psi.push_back(period(27.0 + std::pow(10.0, s)));
    }
    return sc;
}

// All C in the scan with period(C) = target, in increasing order.
std::vector<double> solve_period(const Scan& sc, double target) {
    std::vector<double> out;
    for (std::size_t j = 0; j + 1 < sc.s.size(); ++j) {
        const double a = sc.psi[j] - target;
        const double b = sc.psi[j + 1] - target;
        if (a == 0.0) {
            out.push_back(27.0 + std::pow(10.0, sc.s[j]));
            continue;
        }
        if ((a < 0) == (b < 0))
            continue;
        double lo = sc.s[j], hi = sc.s[j + 1];
        double flo = a;
        double best = lo;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = period(27.0 + std::pow(10.0, mid)) - target;
            best = mid;
            if (std::abs(fm) < 1e-10 || hi - lo < 1e-15)
                break;
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        out.push_back(27.0 + std::pow(10.0, best));
    }
    return out;
}

}  // namespace

std::optional<ClosureSolution> find_closed(int m, int k, const ClosureOptions& options) {
    if (m < 1 || k < 1)
        throw Error(ErrorKind::Domain, "closure needs m, k >= 1");
    const int g = gcd(m, k);
    ClosureSolution sol;
    sol.reduced = g > 1;
    sol.m = m / g;
    sol.k = k / g;
    const Scan sc = scan_family(options);
    const double target = 2.0 * pi * sol.k / sol.m;
    const std::vector<double> roots = solve_period(sc, target);
    if (roots.empty())
        return std::nullopt;
    sol.C = roots.front();
    sol.psi = period(sol.C);
    const double r1 = radial_roots(sol.C).r1;
    sol.closure_gap = r1 * std::abs(std::polar(1.0, sol.m * sol.psi) - 1.0);
    sol.profile = synthesize_profile(sol.C, options.vertices_per_period, sol.m);
    return sol;
}

std::vector<CatalogEntry> catalog(int max_m, const ClosureOptions& options) {
    const Scan sc = scan_family(options);
    const auto [lo_it, hi_it] = std::minmax_element(sc.psi.begin(), sc.psi.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<CatalogEntry> out;
    for (int m = 1; m <= max_m; ++m) {
        const int k0 = static_cast<int>(std::ceil(m * lo / (2 * pi)));
        const int k1 = static_cast<int>(std::floor(m * hi / (2 * pi)));
        for (int k = std::max(1, k0); k <= k1; ++k) {
            if (gcd(m, k) != 1)
                continue;
            for (double C : solve_period(sc, 2 * pi * k / m)) {
                const MinimalProfile p = minimal_profile(C);
                out.push_back({m, k, C, p.r1, p.r2, p.period, p.cone_radius});
            }
        }
    }
    return out;
}

void write_catalog_csv(std::ostream& out, const std::vector<CatalogEntry>& entries) {
    out << "m,k,C,r1,r2,psi,R_C\n" << std::setprecision(15);
    for (const auto& e : entries)
        out << e.m << ',' << e.k << ',' << e.C << ',' << e.r1 << ',' << e.r2 << ',' << e.psi << ',' << e.cone_radius
            << '\n';
}

namespace {

// Parametrised half oscillation from r1 to r2 as a union of pieces with exact angle integrals.
struct Piece {
    double a, b;
    std::function<double(double)> x;
    std::function<double(double)> dphi;
};

std::vector<Piece> half_oscillation(const Family& fam) {
    std::vector<Piece> pieces;
    if (fam.split()) {
        pieces.push_back({0.0, pi / 2, [&fam](double v) { return fam.x_inner(v, 1.0); },
                          [&fam](double v) { return fam.g_inner(v, 1.0); }});
        pieces.push_back({fam.u_of(1.0), pi / 2, [&fam](double u) { return fam.x_global(u); },
                          [&fam](double u) { return fam.g_global(u); }});
    } else {
        pieces.push_back({0.0, pi / 2, [&fam](double u) { return fam.x_global(u); },
                          [&fam](double u) { return fam.g_global(u); }});
    }
    return pieces;
}

}  // namespace

constexpr double kTurnWeight = 0.3;
constexpr double kTurnPower = 0.67;

ProfileCurve synthesize_profile(double C, int vertices_per_period, int m, bool as_arc) {
    require_family(C);
    if (vertices_per_period < 8 || vertices_per_period % 2 != 0 || m < 1)
        throw Error(ErrorKind::Domain, "need an even vertex count >= 8 and m >= 1");
    const Family fam(C);
    const std::vector<Piece> pieces = half_oscillation(fam);

    // dense exact samples of the half oscillation
    constexpr int dense = 4096;
    struct Node {
        int piece;
        double tau, phi;
        PlanarPoint p;
    };
    std::vector<Node> nodes;
    double phi = 0.0;
    for (int pc = 0; pc < static_cast<int>(pieces.size()); ++pc) {
        const Piece& P = pieces[pc];
        for (int j = 0; j <= dense; ++j) {
            const double tau = P.a + (P.b - P.a) * j / dense;
            if (j > 0)
                phi += num::integrate_gl(rule_8(), P.dphi, P.a + (P.b - P.a) * (j - 1) / dense, tau);
            else if (pc > 0)
                continue;  // shared with the end of the previous piece
            nodes.push_back({pc, tau, phi, std::polar(std::sqrt(P.x(tau)), phi)});
        }
    }
    const double half_angle = phi;
    // equidistribute arclength plus weighted turning so the tight turn near r1 is resolved
    double length = 0.0, turning = 0.0;
    std::vector<double> seg_len(nodes.size(), 0.0), seg_turn(nodes.size(), 0.0);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        seg_len[i] = std::abs(nodes[i].p - nodes[i - 1].p);
        if (i + 1 < nodes.size()) {
            const PlanarPoint a = nodes[i].p - nodes[i - 1].p;
            const PlanarPoint b = nodes[i + 1].p - nodes[i].p;
            seg_turn[i] = std::abs(std::atan2(cross(a, b), dot(a, b)));
        }
        length += seg_len[i];
        turning += seg_turn[i];
    }
    const double weight = kTurnWeight * length / std::max(turning, 1e-12);
    std::vector<double> len(nodes.size(), 0.0);
    for (std::size_t i = 1; i < nodes.size(); ++i)
        len[i] = len[i - 1] + seg_len[i] * std::pow(1.0 + weight * 0.5 * (seg_turn[i - 1] + seg_turn[i]) / seg_len[i], kTurnPower);

    const int H = vertices_per_period / 2;
    Polyline half(H + 1);
    half[0] = nodes.front().p;
    half[H] = nodes.back().p;
    std::size_t seg = 0;
    for (int i = 1; i < H; ++i) {
        const double target = len.back() * i / H;
        while (seg + 2 < nodes.size() && len[seg + 1] < target)
            ++seg;
        const Node& n0 = nodes[seg];
        const Node& n1 = nodes[seg + 1];
        const double f = (target - len[seg]) / (len[seg + 1] - len[seg]);
        // an interval straddling two pieces starts at the beginning of the later one
        const Piece& P = pieces[n1.piece];
        const double tau0 = n1.piece == n0.piece ? n0.tau : P.a;
        const double tau = tau0 + f * (n1.tau - tau0);
        const double ph = n0.phi + num::integrate_gl(rule_8(), P.dphi, tau0, tau);
        half[i] = std::polar(std::sqrt(P.x(tau)), ph);
    }

    ProfileCurve out;
    out.symmetry_class = SymmetryClass::Clifford;
    if (as_arc) {
        out.components.push_back(std::move(half));
        return out;
    }
    const double psi = 2.0 * half_angle;
    const double gap = std::sqrt(fam.x1) * std::abs(std::polar(1.0, m * psi) - 1.0);
    if (gap > 1e-6)
        throw Error(ErrorKind::OpenArc, "profile does not close after the requested number of periods");
    Polyline period_pts(2 * H);
    for (int i = 0; i <= H; ++i)
        period_pts[i] = half[i];
    const PlanarPoint mirror = std::polar(1.0, psi);
    for (int i = H + 1; i < 2 * H; ++i)
        period_pts[i] = mirror * std::conj(half[2 * H - i]);
    Polyline loop;
    loop.reserve(static_cast<std::size_t>(m) * 2 * H);
    for (int l = 0; l < m; ++l) {
        const PlanarPoint rot = std::polar(1.0, l * psi);
        for (auto p : period_pts)
            loop.push_back(rot * p);
    }
    out.components.push_back(std::move(loop));
    return out;
}

double first_integral_residual(const ProfileCurve& profile, double C) {
    double worst = 0.0;
    for (const auto& loop : profile.components) {
        const int n = static_cast<int>(loop.size());
        if (n < 5)
            throw Error(ErrorKind::InvalidArc, "need at least 5 vertices");
        double mean = 0.0;
        for (int i = 0; i + 1 < n; ++i)
            mean += std::abs(loop[i + 1] - loop[i]);
        mean /= (n - 1);
        const bool closed = std::abs(loop.back() - loop.front()) < 3.0 * mean;
        // unwrapped polar angle along the polyline
        std::vector<double> phi(n);
        phi[0] = std::arg(loop[0]);
        for (int i = 1; i < n; ++i)
            phi[i] = phi[i - 1] + std::atan2(cross(loop[i - 1], loop[i]), dot(loop[i - 1], loop[i]));
        const double turn = closed ? phi[n - 1] + std::atan2(cross(loop[n - 1], loop[0]), dot(loop[n - 1], loop[0])) - phi[0] : 0.0;
        const auto at = [&](int j, double& ph, double& f) {
            int w = j;
            double shift = 0.0;
            if (closed) {
                while (w < 0) {
                    w += n;
                    shift -= turn;
                }
                while (w >= n) {
                    w -= n;
                    shift += turn;
                }
            }
            ph = phi[w] + shift;
            f = std::log(std::abs(loop[w]));
        };
        for (int i = 0; i < n; ++i) {
            int start = i - 2;
            if (!closed)
                start = std::clamp(start, 0, n - 5);
            std::vector<double> xs(5), fs(5);
            for (int j = 0; j < 5; ++j)
                at(start + j, xs[j], fs[j]);
            double ph0, f0;
            at(i, ph0, f0);
            const std::vector<double> w = derivative_weights(ph0, xs);
            double df = 0.0;
            for (int j = 0; j < 5; ++j)
                df += w[j] * fs[j];
            worst = std::max(worst, std::abs(df * df - first_integral(f0, C)));
        }
    }
    return worst;
}

}  // namespace cp2flow
