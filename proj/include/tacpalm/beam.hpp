#pragma once

#include <filesystem>
#include <string>

namespace tacpalm::beam {

struct Material {
    std::string name;
    double youngs_modulus = 0.0;    // Pa
    double tensile_strength = 0.0;  // Pa
};

// Tip-loaded cantilever with constant rectangular cross section.
// I = b t^3 / 12; the allowable stress never exceeds half the tensile
// strength (yield margin plus a factor of safety).
struct BeamSpec {
    double length = 0.0;     // m
    double thickness = 0.0;  // m
    double width = 0.0;      // m
    Material material;
    double sigma_max = 0.0;  // Pa, allowable bending stress

    double second_moment() const { return width * thickness * thickness * thickness / 12.0; }
};

// Validates positivity and the sigma_max <= tensile_strength / 2 rule.
BeamSpec make_spec(double length, double thickness, double width, const Material& material,
                   double sigma_max = 0.0);  // 0 -> default to tensile/2

// Tip deflection under force F: delta = F L^3 / (3 E I).
double deflection(const BeamSpec& spec, double force);

// Bending stress at the clamped root: sigma = F L t / (2 I).
double root_stress(const BeamSpec& spec, double force);

// Conservative elastic deflection limit: delta_max = (2/3) sigma_max L^2 / (E t),
// the deflection at the force that brings the root stress to sigma_max.
double hard_stop_deflection(const BeamSpec& spec);

struct DeflectionReport {
    double force = 0.0;        // N
    double delta = 0.0;        // m
    double sigma = 0.0;        // Pa
    double delta_max = 0.0;    // m
    bool within_elastic = false;
};

DeflectionReport design_report(const BeamSpec& spec, double force);
std::string to_json(const DeflectionReport& report, const BeamSpec& spec);

// Material JSON: {"name": ..., "E_pa": ..., "tensile_strength_pa": ...}.
// Entries with null values are placeholders awaiting user-supplied data and
// are rejected with a pointed message.
Material load_material(const std::filesystem::path& path);

}  // namespace tacpalm::beam
