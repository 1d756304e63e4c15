#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tacpalm::press2d {

// All lengths in meters, stiffnesses in SI.

struct GelLayer {
    bool present = false;
    double thickness = 0.0;  // h, compression cap (rigid backing underneath)
    double stiffness = 0.0;  // Winkler foundation, N/m per unit length (N/m^2)
};

// Two cantilevers anchored at +-half_length whose free ends meet at the palm
// center. Each pivots about its anchor against a torsional spring, limited by
// the hard stop derived from the cantilever's elastic deflection limit
// (theta_max = atan(delta_max / L)). The rigid palm is the theta_max = 0,
// gel-absent special case.
struct PalmConfig {
    double half_length = 0.0;         // per-cantilever span
    int n_beams = 2;
    double torsional_stiffness = 0.0; // k_theta, N*m/rad
    double theta_max = 0.0;           // rad
    GelLayer gel;
    bool structure_compliant = true;

    void validate() const;
};

enum class ShapeKind { Cylinder, Cube, Plus, Star };

ShapeKind shape_of(const std::string& name);
const char* shape_name(ShapeKind kind);

// Closed simple polygon in object coordinates plus a pose. Factories produce
// the default pose: a convex corner pointing down when the shape has one
// (cube and plus rotated 45 degrees, star built point-down); the cylinder is
// rotation invariant.
struct ObjectProfile {
    ShapeKind kind = ShapeKind::Cylinder;
    std::vector<double> xs;  // vertices, counter-clockwise
    std::vector<double> ys;
    double rotation = 0.0;   // extra pose rotation, rad
    double offset_x = 0.0;   // horizontal offset from the beam junction, m

    std::size_t size() const { return xs.size(); }
    double perimeter() const;
};

ObjectProfile make_cylinder(double radius, int vertices = 4096);
ObjectProfile make_cube(double side);
ObjectProfile make_plus(double arm_width, double span);
ObjectProfile make_star(double outer_radius, double inner_radius);

struct ContactInterval {
    double s0 = 0.0;  // arc-length coordinates along the profile, m
    double s1 = 0.0;
    double length() const { return s1 - s0; }
};

struct ContactReport2D {
    std::vector<ContactInterval> contact_intervals;
    double total_contact = 0.0;            // m
    std::array<double, 2> beam_angles{0.0, 0.0};  // (theta_L, theta_R), rad
    double energy = 0.0;                   // J per unit extrusion depth
    double commanded_depth = 0.0;          // m
    double effective_depth = 0.0;          // m, capped by palm feasibility
    bool converged = true;
    std::vector<double> energy_trace;      // energies across refinement
};

// Quasi-static equilibrium of an object pressed straight down into the palm
// by press_depth, measured from first touch of the undeformed palm surface.
// The beam angles minimize
//     E = 1/2 k_theta (thL^2 + thR^2) + 1/2 k_g sum penetration^2 dx
// over [0, theta_max]^2 subject to the rigid-core constraint (gel compression
// <= h; without gel the object may not cross the beam lines). Solved by a
// 64x64 grid search refined by coordinate descent to 1e-4 rad. When the
// commanded depth exceeds what the palm can absorb, the object stops at the
// feasibility limit (reported as effective_depth).
// Contact intervals are profile arcs with gel penetration > 0 (gel present)
// or with clearance to a beam segment below 1e-5 m (gel absent).
ContactReport2D equilibrium(const PalmConfig& palm, const ObjectProfile& obj, double press_depth);

inline constexpr double kRigidContactGap = 1e-5;  // m

// The four palm variants of the paint-test comparison, all derived from one
// base configuration by toggling the two compliance mechanisms.
enum class PalmVariant { None, Structure, Gel, Both };
const char* variant_name(PalmVariant v);
PalmConfig variant_of(const PalmConfig& base, PalmVariant v);

struct SweepReport {
    ShapeKind shape;
    double depth = 0.0;
    std::map<std::string, ContactReport2D> reports;  // keyed by variant name
    std::vector<std::string> ordering;               // by total_contact descending
    std::vector<std::vector<std::string>> ties;
};

// Presses the identical object, pose and commanded depth into all four palm
// variants and orders the resulting contact totals.
SweepReport compliance_sweep(const PalmConfig& base, const ObjectProfile& obj, double press_depth);

// Deterministic SVG 1.1 drawing of the deflected palm, gel surface, object
// and highlighted contact arcs. Identical inputs give identical bytes.
std::string render_svg(const ContactReport2D& report, const PalmConfig& palm,
                       const ObjectProfile& obj);

std::string to_json(const ContactReport2D& report);
std::string to_json(const SweepReport& report);

// Shipped defaults: palm parameters plus per-shape dimensions and press depth.
struct ShapeDefaults {
    ObjectProfile profile;
    double depth = 0.0;
};

struct PressConfig {
    PalmConfig palm;                            // fully compliant base
    std::map<std::string, ShapeDefaults> shapes;
};

PressConfig load_config(const std::filesystem::path& path);

}  // namespace tacpalm::press2d
