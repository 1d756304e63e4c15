#include "tacpalm/press2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "tacpalm/beam.hpp"
#include "tacpalm/errors.hpp"

namespace tacpalm::press2d {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSampleStep = 2e-5;   // m, profile arc sampling
constexpr int kStations = 2001;        // Winkler columns across the palm span
constexpr int kGridPerAxis = 64;       // angle grid (spec-pinned)
// Refinement step floor. The contract is 1e-4 rad; going well below keeps the
// rigid-contact bands stable when the minimizer sits on a feasibility wall.
constexpr double kDescentTol = 1e-7;
constexpr int kDescentBudget = 200;    // outer sweeps before giving up

double tan_safe(double theta) { return std::tan(theta); }

// Beam surface height as a graph over the palm span. The left cantilever is
// anchored at -L and covers x in [-L, 0]; the right mirrors it. Rotating a
// beam down by theta drops its free end (at the junction x = 0) by L*tan(theta).
double beam_height(double x, double half_length, double theta_left, double theta_right) {
    if (x < 0.0) {
        return -(x + half_length) * tan_safe(theta_left);
    }
    return -(half_length - x) * tan_safe(theta_right);
}

struct PosedProfile {
    std::vector<double> vx, vy;   // posed vertices, touch position (y up, palm flat at 0)
    std::vector<double> varc;     // cumulative arc length per vertex (size n+1)
    double perimeter = 0.0;
    // dense arc samples (vertices included exactly)
    std::vector<double> sx, sy, ss;
};

PosedProfile pose_profile(const ObjectProfile& obj, double surface0) {
    const std::size_t n = obj.size();
    if (n < 3) {
        throw UsageError("object profile needs at least 3 vertices");
    }
    PosedProfile posed;
    posed.vx.resize(n);
    posed.vy.resize(n);
    const double c = std::cos(obj.rotation), s = std::sin(obj.rotation);
    for (std::size_t i = 0; i < n; ++i) {
        posed.vx[i] = c * obj.xs[i] - s * obj.ys[i] + obj.offset_x;
        posed.vy[i] = s * obj.xs[i] + c * obj.ys[i];
    }

    posed.varc.resize(n + 1);
    posed.varc[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const double len = std::hypot(posed.vx[j] - posed.vx[i], posed.vy[j] - posed.vy[i]);
        posed.varc[i + 1] = posed.varc[i] + len;
    }
    posed.perimeter = posed.varc[n];

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const double len = posed.varc[i + 1] - posed.varc[i];
        const int steps = std::max(1, static_cast<int>(std::ceil(len / kSampleStep)));
        for (int k = 0; k < steps; ++k) {
            const double t = static_cast<double>(k) / steps;
            posed.sx.push_back(posed.vx[i] + t * (posed.vx[j] - posed.vx[i]));
            posed.sy.push_back(posed.vy[i] + t * (posed.vy[j] - posed.vy[i]));
            posed.ss.push_back(posed.varc[i] + t * len);
        }
    }

    // Drop the object until its lowest point touches the undeformed surface.
    const double ymin = *std::min_element(posed.sy.begin(), posed.sy.end());
    const double shift = surface0 - ymin;
    for (auto& y : posed.sy) y += shift;
    for (auto& y : posed.vy) y += shift;
    return posed;
}

// Everything the equilibrium search needs, precomputed once per press.
struct PressScene {
    PalmConfig palm;
    PosedProfile prof;
    double station_x0 = 0.0;
    double station_dx = 0.0;
    std::vector<double> env0;         // lower envelope at touch, NaN where absent
    std::vector<int> sample_station;  // station index per profile sample
};

PressScene build_scene(const PalmConfig& palm, const ObjectProfile& obj) {
    PressScene scene;
    scene.palm = palm;
    const double surface0 = palm.gel.present ? palm.gel.thickness : 0.0;
    scene.prof = pose_profile(obj, surface0);

    const double L = palm.half_length;
    double max_abs_x = 0.0;
    for (double x : scene.prof.vx) max_abs_x = std::max(max_abs_x, std::abs(x));
    if (max_abs_x > L) {
        throw InputError("object wider than palm span");
    }

    scene.station_x0 = -L;
    scene.station_dx = 2.0 * L / (kStations - 1);
    scene.env0.assign(kStations, std::numeric_limits<double>::quiet_NaN());
    scene.sample_station.resize(scene.prof.sx.size());
    for (std::size_t i = 0; i < scene.prof.sx.size(); ++i) {
        int k = static_cast<int>(std::lround((scene.prof.sx[i] - scene.station_x0) /
                                             scene.station_dx));
        k = std::clamp(k, 0, kStations - 1);
        scene.sample_station[i] = k;
        if (std::isnan(scene.env0[k]) || scene.prof.sy[i] < scene.env0[k]) {
            scene.env0[k] = scene.prof.sy[i];
        }
    }
    return scene;
}

double station_x(const PressScene& scene, int k) {
    return scene.station_x0 + k * scene.station_dx;
}

// Deepest press one side of the palm can absorb at beam angle theta.
double side_descent_limit(const PressScene& scene, bool left, double theta) {
    const double L = scene.palm.half_length;
    double limit = kInf;
    for (int k = 0; k < kStations; ++k) {
        if (std::isnan(scene.env0[k])) continue;
        const double x = station_x(scene, k);
        if (left ? x > 0.0 : x < 0.0) continue;
        const double by = left ? beam_height(std::min(x, 0.0), L, theta, theta)
                               : beam_height(std::max(x, 0.0), L, theta, theta);
        limit = std::min(limit, scene.env0[k] - by);
    }
    return limit;
}

// One side's share of the total energy at press depth d_eff, or +inf when the
// rigid-core constraint is violated. The junction station x = 0 belongs to
// both sides with half weight so the split stays mirror-symmetric.
double side_energy(const PressScene& scene, bool left, double theta, double d_eff) {
    const PalmConfig& palm = scene.palm;
    const double L = palm.half_length;
    double energy = 0.5 * palm.torsional_stiffness * theta * theta;

    double gel_sum = 0.0;
    for (int k = 0; k < kStations; ++k) {
        if (std::isnan(scene.env0[k])) continue;
        const double x = station_x(scene, k);
        if (left ? x > 0.0 : x < 0.0) continue;
        const double by = left ? beam_height(std::min(x, 0.0), L, theta, theta)
                               : beam_height(std::max(x, 0.0), L, theta, theta);
        const double env = scene.env0[k] - d_eff;
        if (env < by - 1e-12) {
            return kInf;  // object would cross the rigid beam line
        }
        if (palm.gel.present) {
            const double c = std::clamp(by + palm.gel.thickness - env, 0.0, palm.gel.thickness);
            const double w = (x == 0.0) ? 0.5 : 1.0;
            gel_sum += w * c * c;
        }
    }
    if (palm.gel.present) {
        energy += 0.5 * palm.gel.stiffness * gel_sum * scene.station_dx;
    }
    return energy;
}

struct Equilibrium {
    double theta_left = 0.0;
    double theta_right = 0.0;
    double energy = 0.0;
    bool converged = true;
    std::vector<double> trace;
};

Equilibrium minimize_energy(const PressScene& scene, double d_eff) {
    const double box = scene.palm.structure_compliant ? scene.palm.theta_max : 0.0;

    Equilibrium eq;
    if (box <= 0.0) {
        eq.energy = side_energy(scene, true, 0.0, d_eff) + side_energy(scene, false, 0.0, d_eff);
        eq.trace.push_back(eq.energy);
        return eq;
    }

    // Coarse 64x64 grid over the angle box. The energy separates per side, so
    // each side's values are evaluated once and the grid scan combines them.
    std::vector<double> el(kGridPerAxis), er(kGridPerAxis);
    const double step0 = box / (kGridPerAxis - 1);
    for (int i = 0; i < kGridPerAxis; ++i) {
        const double theta = i * step0;
        el[i] = side_energy(scene, true, theta, d_eff);
        er[i] = side_energy(scene, false, theta, d_eff);
    }
    int best_i = -1, best_j = -1;
    double best = kInf;
    for (int i = 0; i < kGridPerAxis; ++i) {
        for (int j = 0; j < kGridPerAxis; ++j) {
            const double e = el[i] + er[j];
            if (e < best) {
                best = e;
                best_i = i;
                best_j = j;
            }
        }
    }
    if (best_i < 0) {
        throw NumericError("press2d: no feasible beam configuration found on the angle grid");
    }

    double tl = best_i * step0, tr = best_j * step0;
    double e_l = el[best_i], e_r = er[best_j];
    eq.trace.push_back(e_l + e_r);

    // Coordinate descent, halving the step until below the tolerance.
    double step = step0;
    int sweeps = 0;
    while (step >= kDescentTol && sweeps < kDescentBudget) {
        ++sweeps;
        bool moved = false;
        for (int side = 0; side < 2; ++side) {
            double& theta = side == 0 ? tl : tr;
            double& e_cur = side == 0 ? e_l : e_r;
            for (double cand : {theta - step, theta + step}) {
                if (cand < 0.0 || cand > box) continue;
                const double e_cand = side_energy(scene, side == 0, cand, d_eff);
                if (e_cand < e_cur) {
                    theta = cand;
                    e_cur = e_cand;
                    moved = true;
                }
            }
        }
        if (!moved) step *= 0.5;
        eq.trace.push_back(e_l + e_r);
    }
    eq.converged = step < kDescentTol;
    eq.theta_left = tl;
    eq.theta_right = tr;
    eq.energy = e_l + e_r;
    return eq;
}

// ---------------------------------------------------------------------------
// Contact extraction
// ---------------------------------------------------------------------------

// Merges raw [s0, s1] pieces into disjoint intervals on the circular arc
// coordinate. A run crossing the origin is reported as one interval with
// s1 > perimeter.
std::vector<ContactInterval> merge_intervals(std::vector<ContactInterval> raw, double perimeter) {
    if (raw.empty()) return {};
    std::sort(raw.begin(), raw.end(),
              [](const ContactInterval& a, const ContactInterval& b) { return a.s0 < b.s0; });
    const double eps = 1e-12 * std::max(1.0, perimeter);
    std::vector<ContactInterval> merged;
    for (const auto& iv : raw) {
        if (!merged.empty() && iv.s0 <= merged.back().s1 + eps) {
            merged.back().s1 = std::max(merged.back().s1, iv.s1);
        } else {
            merged.push_back(iv);
        }
    }
    if (merged.size() > 1 && merged.front().s0 <= eps && merged.back().s1 >= perimeter - eps) {
        merged.back().s1 = merged.front().s1 + perimeter;
        merged.erase(merged.begin());
    }
    return merged;
}

// Gel contact: profile arcs whose samples own their Winkler column (they are
// the lower envelope there) and whose column is compressed.
std::vector<ContactInterval> gel_contact(const PressScene& scene, const Equilibrium& eq,
                                         double d_eff) {
    const PalmConfig& palm = scene.palm;
    const double L = palm.half_length;
    const std::size_t n = scene.prof.sx.size();
    std::vector<char> in_contact(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int k = scene.sample_station[i];
        const double env = scene.env0[k] - d_eff;
        const double y = scene.prof.sy[i] - d_eff;
        if (y > env + 1e-12) continue;  // shadowed by a lower part of the profile
        const double by = beam_height(station_x(scene, k), L, eq.theta_left, eq.theta_right);
        const double c = std::clamp(by + palm.gel.thickness - env, 0.0, palm.gel.thickness);
        if (c > 1e-12) in_contact[i] = 1;
    }

    // Runs of contacting samples, circularly; each sample covers one arc step.
    std::vector<ContactInterval> raw;
    std::size_t start = 0;
    while (start < n && in_contact[start]) ++start;
    if (start == n) {
        return {{0.0, scene.prof.perimeter}};  // full wrap
    }
    const double half = kSampleStep / 2.0;
    std::optional<double> run_s0;
    double run_s1 = 0.0;
    for (std::size_t step = 1; step <= n; ++step) {
        const std::size_t i = (start + step) % n;
        if (in_contact[i]) {
            const double s = scene.prof.ss[i];
            const double lo = s - half;
            const double hi = s + half;
            if (run_s0 && lo <= run_s1 + kSampleStep) {
                run_s1 = hi;
            } else {
                if (run_s0) raw.push_back({*run_s0, run_s1});
                run_s0 = lo;
                run_s1 = hi;
            }
        }
    }
    if (run_s0) raw.push_back({*run_s0, run_s1});
    for (auto& iv : raw) {
        iv.s0 = std::max(0.0, iv.s0);
        iv.s1 = std::min(scene.prof.perimeter, iv.s1);
    }
    return merge_intervals(std::move(raw), scene.prof.perimeter);
}

// Appends the parameter sub-ranges of edge A + t(B - A), t in [0, 1], lying
// within `tol` of segment [C, D]. Exact: the perpendicular zone is a linear
// inequality, the endpoint zones are quadratics.
void edge_near_segment(double ax, double ay, double bx, double by, double cx, double cy,
                       double dx, double dy, double tol,
                       std::vector<std::pair<double, double>>& out) {
    const double vx = bx - ax, vy = by - ay;
    const double ex = dx - cx, ey = dy - cy;
    const double seg_len2 = ex * ex + ey * ey;
    if (seg_len2 <= 0.0) return;
    const double seg_len = std::sqrt(seg_len2);

    // Foot-of-perpendicular parameter along [C, D] is linear in t.
    const double u0 = ((ax - cx) * ex + (ay - cy) * ey) / seg_len2;
    const double du = (vx * ex + vy * ey) / seg_len2;

    auto zone_range = [&](double ulo, double uhi) -> std::pair<double, double> {
        // t-range where u(t) lies in [ulo, uhi]
        if (std::abs(du) < 1e-30) {
            return (u0 >= ulo && u0 <= uhi) ? std::make_pair(0.0, 1.0)
                                            : std::make_pair(1.0, 0.0);
        }
        double t0 = (ulo - u0) / du;
        double t1 = (uhi - u0) / du;
        if (t0 > t1) std::swap(t0, t1);
        return {std::max(0.0, t0), std::min(1.0, t1)};
    };
    auto emit = [&](double lo, double hi) {
        if (hi > lo) out.emplace_back(lo, hi);
    };

    // Perpendicular zone: |cross(P(t)-C, e)| / |e| < tol.
    {
        const auto [zlo, zhi] = zone_range(0.0, 1.0);
        if (zhi > zlo) {
            const double w0 = ((ax - cx) * ey - (ay - cy) * ex) / seg_len;
            const double dw = (vx * ey - vy * ex) / seg_len;
            if (std::abs(dw) < 1e-30) {
                if (std::abs(w0) < tol) emit(zlo, zhi);
            } else {
                double t0 = (-tol - w0) / dw;
                double t1 = (tol - w0) / dw;
                if (t0 > t1) std::swap(t0, t1);
                emit(std::max(zlo, t0), std::min(zhi, t1));
            }
        }
    }
    // Endpoint zones: |P(t) - E|^2 < tol^2.
    for (int zone = 0; zone < 2; ++zone) {
        const auto [zlo, zhi] =
            zone == 0 ? zone_range(-kInf, 0.0) : zone_range(1.0, kInf);
        if (zhi <= zlo) continue;
        const double px = zone == 0 ? cx : dx;
        const double py = zone == 0 ? cy : dy;
        const double rx = ax - px, ry = ay - py;
        const double qa = vx * vx + vy * vy;
        const double qb = 2.0 * (rx * vx + ry * vy);
        const double qc = rx * rx + ry * ry - tol * tol;
        if (qa < 1e-30) {
            if (qc < 0.0) emit(zlo, zhi);
            continue;
        }
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc <= 0.0) continue;
        const double sq = std::sqrt(disc);
        const double t0 = (-qb - sq) / (2.0 * qa);
        const double t1 = (-qb + sq) / (2.0 * qa);
        emit(std::max(zlo, t0), std::min(zhi, t1));
    }
}

// Rigid contact: profile arcs whose clearance to a beam segment is below the
// gap threshold, computed exactly per polygon edge.
std::vector<ContactInterval> rigid_contact(const PressScene& scene, const Equilibrium& eq,
                                           double d_eff) {
    const double L = scene.palm.half_length;
    const double tl = eq.theta_left, tr = eq.theta_right;
    // Beam segments: anchor to free end.
    const double left_seg[4] = {-L, 0.0, 0.0, -L * tan_safe(tl)};
    const double right_seg[4] = {0.0, -L * tan_safe(tr), L, 0.0};

    const std::size_t n = scene.prof.vx.size();
    std::vector<ContactInterval> raw;
    std::vector<std::pair<double, double>> ranges;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const double ax = scene.prof.vx[i], ay = scene.prof.vy[i] - d_eff;
        const double bx = scene.prof.vx[j], by = scene.prof.vy[j] - d_eff;
        ranges.clear();
        edge_near_segment(ax, ay, bx, by, left_seg[0], left_seg[1], left_seg[2], left_seg[3],
                          kRigidContactGap, ranges);
        edge_near_segment(ax, ay, bx, by, right_seg[0], right_seg[1], right_seg[2], right_seg[3],
                          kRigidContactGap, ranges);
        const double s_base = scene.prof.varc[i];
        const double len = scene.prof.varc[i + 1] - scene.prof.varc[i];
        for (const auto& [t0, t1] : ranges) {
            raw.push_back({s_base + t0 * len, s_base + t1 * len});
        }
    }
    return merge_intervals(std::move(raw), scene.prof.perimeter);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

void PalmConfig::validate() const {
    if (!(half_length > 0.0)) {
        throw UsageError("palm half_length must be positive");
    }
    if (n_beams != 2) {
        throw UsageError("palm needs n_beams >= 2; this simulator implements exactly 2");
    }
    if (structure_compliant) {
        if (!(torsional_stiffness > 0.0)) {
            throw UsageError("compliant structure needs positive torsional stiffness");
        }
        if (!(theta_max > 0.0 && theta_max < kPi / 2.0)) {
            throw UsageError("compliant structure needs theta_max in (0, pi/2)");
        }
    }
    if (gel.present && !(gel.thickness > 0.0 && gel.stiffness > 0.0)) {
        throw UsageError("gel layer needs positive thickness and stiffness");
    }
}

double ObjectProfile::perimeter() const {
    double total = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const std::size_t j = (i + 1) % size();
        total += std::hypot(xs[j] - xs[i], ys[j] - ys[i]);
    }
    return total;
}

ShapeKind shape_of(const std::string& name) {
    if (name == "cylinder") return ShapeKind::Cylinder;
    if (name == "cube") return ShapeKind::Cube;
    if (name == "plus") return ShapeKind::Plus;
    if (name == "star") return ShapeKind::Star;
    throw UsageError("unknown shape: " + name + " (want cylinder|cube|plus|star)");
}

const char* shape_name(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Cylinder: return "cylinder";
        case ShapeKind::Cube: return "cube";
        case ShapeKind::Plus: return "plus";
        case ShapeKind::Star: return "star";
    }
    return "cylinder";
}

ObjectProfile make_cylinder(double radius, int vertices) {
    if (!(radius > 0.0) || vertices < 256) {
        throw UsageError("cylinder needs positive radius and >= 256 vertices");
    }
    ObjectProfile obj;
    obj.kind = ShapeKind::Cylinder;
    obj.xs.resize(vertices);
    obj.ys.resize(vertices);
    for (int k = 0; k < vertices; ++k) {
        const double a = 2.0 * kPi * k / vertices;
        obj.xs[k] = radius * std::cos(a);
        obj.ys[k] = radius * std::sin(a);
    }
    return obj;
}

ObjectProfile make_cube(double side) {
    if (!(side > 0.0)) {
        throw UsageError("cube needs a positive side");
    }
    // Corner-down pose: the square rotated 45 degrees.
    const double s = side / std::numbers::sqrt2;
    ObjectProfile obj;
    obj.kind = ShapeKind::Cube;
    obj.xs = {s, 0.0, -s, 0.0};
    obj.ys = {0.0, s, 0.0, -s};
    return obj;
}

ObjectProfile make_plus(double arm_width, double span) {
    if (!(arm_width > 0.0 && span > arm_width)) {
        throw UsageError("plus needs 0 < arm_width < span");
    }
    const double h = arm_width / 2.0, H = span / 2.0;
    // Axis-aligned cross, counter-clockwise from the right arm's top corner...
    const double raw_x[12] = {H, h, h, -h, -h, -H, -H, -h, -h, h, h, H};
    const double raw_y[12] = {h, h, H, H, h, h, -h, -h, -H, -H, -h, -h};
    // ...then rotated 45 degrees so two convex arm corners point down.
    ObjectProfile obj;
    obj.kind = ShapeKind::Plus;
    const double c = std::numbers::sqrt2 / 2.0;
    for (int i = 0; i < 12; ++i) {
        obj.xs.push_back(c * raw_x[i] - c * raw_y[i]);
        obj.ys.push_back(c * raw_x[i] + c * raw_y[i]);
    }
    return obj;
}

ObjectProfile make_star(double outer_radius, double inner_radius) {
    if (!(outer_radius > inner_radius && inner_radius > 0.0)) {
        throw UsageError("star needs outer_radius > inner_radius > 0");
    }
    // Five-pointed star with one point straight down; the arc origin sits on
    // an upper point so contact regions stay clear of the wrap.
    ObjectProfile obj;
    obj.kind = ShapeKind::Star;
    for (int k = 0; k < 10; ++k) {
        const double a = (54.0 + 36.0 * k) * kPi / 180.0;
        const double r = (k % 2 == 0) ? outer_radius : inner_radius;
        obj.xs.push_back(r * std::cos(a));
        obj.ys.push_back(r * std::sin(a));
    }
    return obj;
}

const char* variant_name(PalmVariant v) {
    switch (v) {
        case PalmVariant::None: return "none";
        case PalmVariant::Structure: return "structure";
        case PalmVariant::Gel: return "gel";
        case PalmVariant::Both: return "both";
    }
    return "none";
}

PalmConfig variant_of(const PalmConfig& base, PalmVariant v) {
    PalmConfig cfg = base;
    const bool structure = v == PalmVariant::Structure || v == PalmVariant::Both;
    const bool gel = v == PalmVariant::Gel || v == PalmVariant::Both;
    cfg.structure_compliant = structure;
    if (!structure) cfg.theta_max = 0.0;
    cfg.gel.present = gel;
    return cfg;
}

ContactReport2D equilibrium(const PalmConfig& palm, const ObjectProfile& obj,
                            double press_depth) {
    palm.validate();
    if (press_depth < 0.0) {
        throw UsageError("press depth must be non-negative");
    }

    ContactReport2D report;
    report.commanded_depth = press_depth;
    if (press_depth == 0.0) {
        report.energy_trace.push_back(0.0);
        return report;
    }

    PressScene scene = build_scene(palm, obj);

    const double box = palm.structure_compliant ? palm.theta_max : 0.0;
    const double d_max = std::min(side_descent_limit(scene, true, box),
                                  side_descent_limit(scene, false, box));
    const double d_eff = std::min(press_depth, std::max(0.0, d_max));
    report.effective_depth = d_eff;

    Equilibrium eq = minimize_energy(scene, d_eff);
    report.beam_angles = {eq.theta_left, eq.theta_right};
    report.energy = eq.energy;
    report.converged = eq.converged;
    report.energy_trace = eq.trace;

    report.contact_intervals = palm.gel.present ? gel_contact(scene, eq, d_eff)
                                                : rigid_contact(scene, eq, d_eff);
    report.total_contact = 0.0;
    for (const auto& iv : report.contact_intervals) {
        report.total_contact += iv.length();
    }
    return report;
}

SweepReport compliance_sweep(const PalmConfig& base, const ObjectProfile& obj,
                             double press_depth) {
    base.validate();
    SweepReport sweep;
    sweep.shape = obj.kind;
    sweep.depth = press_depth;

    // Canonical listing order: strongest expected contact first.
    const PalmVariant variants[4] = {PalmVariant::Both, PalmVariant::Gel, PalmVariant::Structure,
                                     PalmVariant::None};
    struct Entry {
        std::string name;
        double total;
    };
    std::vector<Entry> entries;
    for (PalmVariant v : variants) {
        ContactReport2D report = equilibrium(variant_of(base, v), obj, press_depth);
        entries.push_back({variant_name(v), report.total_contact});
        sweep.reports.emplace(variant_name(v), std::move(report));
    }

    std::vector<Entry> sorted = entries;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Entry& a, const Entry& b) { return a.total > b.total; });
    for (const auto& e : sorted) sweep.ordering.push_back(e.name);
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j].total == sorted[i].total) ++j;
        if (j - i > 1) {
            std::vector<std::string> group;
            for (std::size_t k = i; k < j; ++k) group.push_back(sorted[k].name);
            sweep.ties.push_back(std::move(group));
        }
        i = j;
    }
    return sweep;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json report_json(const ContactReport2D& report) {
    nlohmann::json j;
    j["commanded_depth_m"] = report.commanded_depth;
    j["effective_depth_m"] = report.effective_depth;
    j["beam_angles_rad"] = {report.beam_angles[0], report.beam_angles[1]};
    j["energy_j"] = report.energy;
    j["converged"] = report.converged;
    j["total_contact_m"] = report.total_contact;
    auto intervals = nlohmann::json::array();
    for (const auto& iv : report.contact_intervals) {
        intervals.push_back({iv.s0, iv.s1});
    }
    j["contact_intervals_m"] = intervals;
    j["energy_trace_j"] = report.energy_trace;
    return j;
}

}  // namespace

std::string to_json(const ContactReport2D& report) { return report_json(report).dump(2); }

std::string to_json(const SweepReport& report) {
    nlohmann::json j;
    j["shape"] = shape_name(report.shape);
    j["depth_m"] = report.depth;
    auto entries = nlohmann::json::array();
    for (const char* name : {"both", "gel", "structure", "none"}) {
        entries.push_back(
            {{"name", name}, {"total_contact_m", report.reports.at(name).total_contact}});
    }
    j["entries"] = entries;
    j["ordering"] = report.ordering;
    j["ties"] = report.ties;
    nlohmann::json reports;
    for (const auto& [name, rep] : report.reports) {
        reports[name] = report_json(rep);
    }
    j["reports"] = reports;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string render_svg(const ContactReport2D& report, const PalmConfig& palm,
                       const ObjectProfile& obj) {
    palm.validate();
    const double L = palm.half_length;
    const double surface0 = palm.gel.present ? palm.gel.thickness : 0.0;
    PosedProfile prof = pose_profile(obj, surface0);
    const double d = report.effective_depth;
    const double tl = report.beam_angles[0], tr = report.beam_angles[1];

    // World box (meters, y up) -> SVG pixels (y down).
    double ymax = surface0;
    for (double y : prof.vy) ymax = std::max(ymax, y);
    const double ymin = -L * std::max(tan_safe(tl), tan_safe(tr)) - 0.2 * L;
    const double pad = 0.15 * L;
    const double scale = 4000.0;
    const double x0 = -L - pad, x1 = L + pad;
    const double yt = ymax + pad, yb = ymin - pad;
    auto X = [&](double x) { return (x - x0) * scale; };
    auto Y = [&](double y) { return (yt - y) * scale; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
        << fmt(X(x1)) << "\" height=\"" << fmt(Y(yb)) << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt(X(x1)) << "\" height=\"" << fmt(Y(yb))
        << "\" fill=\"#ffffff\"/>\n";

    const double end_l = -L * tan_safe(tl);
    const double end_r = -L * tan_safe(tr);
    if (palm.gel.present) {
        const double h = palm.gel.thickness;
        svg << "<polygon class=\"gel\" points=\"" << fmt(X(-L)) << "," << fmt(Y(0)) << " "
            << fmt(X(0)) << "," << fmt(Y(end_l)) << " " << fmt(X(0)) << "," << fmt(Y(end_l + h))
            << " " << fmt(X(-L)) << "," << fmt(Y(h)) << "\" fill=\"#bcd9ea\"/>\n";
        svg << "<polygon class=\"gel\" points=\"" << fmt(X(0)) << "," << fmt(Y(end_r)) << " "
            << fmt(X(L)) << "," << fmt(Y(0)) << " " << fmt(X(L)) << "," << fmt(Y(h)) << " "
            << fmt(X(0)) << "," << fmt(Y(end_r + h)) << "\" fill=\"#bcd9ea\"/>\n";
    }
    svg << "<line class=\"beam\" x1=\"" << fmt(X(-L)) << "\" y1=\"" << fmt(Y(0)) << "\" x2=\""
        << fmt(X(0)) << "\" y2=\"" << fmt(Y(end_l))
        << "\" stroke=\"#444444\" stroke-width=\"4\"/>\n";
    svg << "<line class=\"beam\" x1=\"" << fmt(X(0)) << "\" y1=\"" << fmt(Y(end_r)) << "\" x2=\""
        << fmt(X(L)) << "\" y2=\"" << fmt(Y(0))
        << "\" stroke=\"#444444\" stroke-width=\"4\"/>\n";
    for (double ax : {-L, L}) {
        svg << "<circle cx=\"" << fmt(X(ax)) << "\" cy=\"" << fmt(Y(0))
            << "\" r=\"6\" fill=\"#222222\"/>\n";
    }

    svg << "<polygon class=\"object\" points=\"";
    for (std::size_t i = 0; i < prof.vx.size(); ++i) {
        if (i) svg << " ";
        svg << fmt(X(prof.vx[i])) << "," << fmt(Y(prof.vy[i] - d));
    }
    svg << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n";

    // Contact arcs as red polylines over the profile samples they cover.
    for (const auto& iv : report.contact_intervals) {
        svg << "<polyline class=\"contact\" data-s0=\"" << fmt(iv.s0) << "\" data-s1=\""
            << fmt(iv.s1) << "\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < prof.ss.size(); ++i) {
            const double s = prof.ss[i];
            const bool inside = (s >= iv.s0 && s <= iv.s1) ||
                                (iv.s1 > prof.perimeter && s <= iv.s1 - prof.perimeter);
            if (!inside) continue;
            if (!first) svg << " ";
            first = false;
            svg << fmt(X(prof.sx[i])) << "," << fmt(Y(prof.sy[i] - d));
        }
        svg << "\" fill=\"none\" stroke=\"#cc2222\" stroke-width=\"5\"/>\n";
    }

    svg << "<text x=\"10\" y=\"24\" font-family=\"monospace\" font-size=\"16\">"
        << "theta_L=" << fmt(tl) << " rad, theta_R=" << fmt(tr) << " rad, depth="
        << fmt(report.effective_depth) << " m, contact=" << fmt(report.total_contact)
        << " m</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

PressConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open palm config: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed palm config JSON: " + std::string(e.what()));
    }

    PressConfig cfg;
    try {
        const auto& p = j.at("palm");
        cfg.palm.half_length = p.at("half_length_m").get<double>();
        cfg.palm.n_beams = p.value("n_beams", 2);
        cfg.palm.torsional_stiffness = p.at("torsional_stiffness_nm_per_rad").get<double>();
        if (p.contains("theta_max_rad")) {
            cfg.palm.theta_max = p.at("theta_max_rad").get<double>();
        } else {
            const auto& b = p.at("beam");
            beam::Material mat;
            mat.name = b.value("material", "palm-beam");
            mat.youngs_modulus = b.at("E_pa").get<double>();
            mat.tensile_strength = b.at("tensile_strength_pa").get<double>();
            const auto spec =
                beam::make_spec(b.at("length_m").get<double>(), b.at("thickness_m").get<double>(),
                                b.at("width_m").get<double>(), mat, b.value("sigma_max_pa", 0.0));
            cfg.palm.theta_max =
                std::atan(beam::hard_stop_deflection(spec) / cfg.palm.half_length);
        }
        cfg.palm.structure_compliant = true;
        const auto& g = p.at("gel");
        cfg.palm.gel.present = true;
        cfg.palm.gel.thickness = g.at("thickness_m").get<double>();
        cfg.palm.gel.stiffness = g.at("stiffness_n_per_m2").get<double>();

        for (const auto& [name, s] : j.at("shapes").items()) {
            ShapeDefaults def;
            const ShapeKind kind = shape_of(name);
            switch (kind) {
                case ShapeKind::Cylinder:
                    def.profile = make_cylinder(s.at("radius_m").get<double>());
                    break;
                case ShapeKind::Cube:
                    def.profile = make_cube(s.at("side_m").get<double>());
                    break;
                case ShapeKind::Plus:
                    def.profile =
                        make_plus(s.at("arm_width_m").get<double>(), s.at("span_m").get<double>());
                    break;
                case ShapeKind::Star:
                    def.profile = make_star(s.at("outer_radius_m").get<double>(),
                                            s.at("inner_radius_m").get<double>());
                    break;
            }
            def.profile.rotation = s.value("rotation_rad", 0.0);
            def.profile.offset_x = s.value("offset_x_m", 0.0);
            def.depth = s.at("depth_m").get<double>();
            cfg.shapes.emplace(name, std::move(def));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("palm config missing fields: " + std::string(e.what()));
    }
    cfg.palm.validate();
    return cfg;
}

}  // namespace tacpalm::press2d
