#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cp2flow {

using PlanarPoint = std::complex<double>;
using Polyline = std::vector<PlanarPoint>;  // closed loops omit the closing vertex

enum class SymmetryClass { Clifford, Chekanov };

enum class ErrorKind {
    RegionMalformed,
    DegenerateRegion,
    InvalidArc,
    UnsupportedTopology,
    Domain,
    OnBoundary,
    SymmetryBroken,
    DegenerateTangent,
    NearOrigin,
    InvalidClass,
    OpenArc,
    SurgeryFailed,
    RenormalizationFailed,
    InfiniteTime,
    Generator,
    Config,
    InvariantViolation,
};

const char* to_string(ErrorKind kind);
const char* to_string(SymmetryClass cls);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ProfileCurve {
    std::vector<Polyline> components;
    SymmetryClass symmetry_class = SymmetryClass::Clifford;

    std::size_t vertex_count() const;
};

// Union of the two lines through the origin at angles axis +- opening/2.
struct ConeSpec {
    double axis = 0.0;
    double opening = 0.0;
};

// Vertex range on one component, walked from `first` to `last` in steps of +1 (forward) or -1.
// first == last means the full closed loop.
struct CurveArc {
    int component = 0;
    int first = 0;
    int last = 0;
    bool forward = true;
};

struct ConeRay {
    double angle = 0.0;
    double r_from = 0.0;
    double r_to = 0.0;
};

struct CircleArc {
    double radius = 0.0;
    double phi_from = 0.0;
    double phi_to = 0.0;
};

using Segment = std::variant<CurveArc, ConeRay, CircleArc>;

struct RegionSpec {
    std::vector<Segment> boundary;
    bool counterclockwise = true;  // intended orientation; the sign of the area follows the traversal
};

struct MaslovData {
    int topological_part = 0;
    double corner_part = 0.0;
    double origin_part = 0.0;
    double total = 0.0;
};

struct ConeCrossing {
    PlanarPoint point;
    int component = 0;
    double parameter = 0.0;  // edge index plus fraction along the edge
};

struct ConeIntersections {
    int count = 0;
    std::vector<ConeCrossing> points;  // sorted by radius
};

// ---- area form and mean curvature -------------------------------------------------------

// Boundary primitive of the area form: r^2 / (1 + 2 r^2) dphi.
double area_primitive(double r2);

double symplectic_area(const RegionSpec& region, const ProfileCurve& curve);
double symplectic_area(const RegionSpec& region);  // regions without CurveArc segments

// Area enclosed by a closed component (CurveArc over the full loop).
double enclosed_area(const ProfileCurve& curve, int component);

// Area of the Euclidean disc |w - center| <= radius.
double euclidean_disc_area(PlanarPoint center, double radius);

double mean_curvature_integral(const ProfileCurve& curve, const CurveArc& arc);

// ---- Maslov bookkeeping -----------------------------------------------------------------

int maslov_disc(const ProfileCurve& curve, int component);
double maslov_polygon(double xi, double psi);
MaslovData maslov_polygon_data(double xi, double psi);

// ---- topology and symmetry --------------------------------------------------------------

int winding_number(const Polyline& component, PlanarPoint point);
ConeIntersections cone_intersections(const ProfileCurve& curve, const ConeSpec& cone);
int count_circle_crossings(const ProfileCurve& curve, double radius);
SymmetryClass classify(const ProfileCurve& curve);
ProfileCurve symmetrize(const ProfileCurve& curve);
double asymmetry(const ProfileCurve& curve);  // index-based, on the canonical indexing
// Largest distance from the conjugate or negative of a vertex to the curve; independent of indexing.
double geometric_asymmetry(const ProfileCurve& curve);
double mean_edge_length(const ProfileCurve& curve);
std::vector<std::vector<double>> relative_angle(const ProfileCurve& curve);

bool is_embedded(const ProfileCurve& curve);
double min_radius(const ProfileCurve& curve);
double max_radius(const ProfileCurve& curve);
double hausdorff_distance(const Polyline& a, const Polyline& b);
double hausdorff_to_circle(const ProfileCurve& curve, double radius = 1.0);

// ---- exchange format --------------------------------------------------------------------

// {"class": "clifford"|"chekanov", "components": [[[x, y], ...], ...]}, closing vertex omitted,
// coordinates printed to round-trip precision.
std::string curve_to_json(const ProfileCurve& curve);
// Throws Error(Config) on malformed documents and Error(InvalidClass) when the declared class
// disagrees with classify().
ProfileCurve curve_from_json(const std::string& text);

// ---- discrete geometry helpers ----------------------------------------------------------

inline double cross(PlanarPoint a, PlanarPoint b) { return a.real() * b.imag() - a.imag() * b.real(); }
inline double dot(PlanarPoint a, PlanarPoint b) { return a.real() * b.real() + a.imag() * b.imag(); }

// Signed circumcircle curvature of the vertex b between a and c.
double menger_curvature(PlanarPoint a, PlanarPoint b, PlanarPoint c);
std::vector<double> vertex_curvatures(const Polyline& loop);

// Circular arc edge from a to b with signed curvature kappa (positive turns left).
struct ArcEdge {
    PlanarPoint a;
    PlanarPoint dir;  // unit chord direction
    double chord = 0.0;
    double alpha = 0.0;  // half turning angle
    double length = 0.0;

    ArcEdge(PlanarPoint a, PlanarPoint b, double kappa);
    PlanarPoint point(double tau) const;    // tau in [0, 1]
    PlanarPoint deriv(double tau) const;    // d point / d tau
    PlanarPoint tangent_start() const;
    PlanarPoint tangent_end() const;
};

// Exterior (turning) angle from direction u to direction v, in (-pi, pi].
double turning_angle(PlanarPoint u, PlanarPoint v);

}  // namespace cp2flow
