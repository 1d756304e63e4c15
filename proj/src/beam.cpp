#include "tacpalm/beam.hpp"

#include <fstream>

#include <json.hpp>

#include "tacpalm/errors.hpp"

namespace tacpalm::beam {

BeamSpec make_spec(double length, double thickness, double width, const Material& material,
                   double sigma_max) {
    if (!(length > 0.0 && thickness > 0.0 && width > 0.0)) {
        throw UsageError("beam dimensions must be positive");
    }
    if (!(material.youngs_modulus > 0.0 && material.tensile_strength > 0.0)) {
        throw UsageError("material properties must be positive");
    }
    BeamSpec spec;
    spec.length = length;
    spec.thickness = thickness;
    spec.width = width;
    spec.material = material;
    spec.sigma_max = sigma_max > 0.0 ? sigma_max : material.tensile_strength / 2.0;
    if (spec.sigma_max > material.tensile_strength / 2.0) {
        throw UsageError("sigma_max may not exceed half the tensile strength");
    }
    return spec;
}

double deflection(const BeamSpec& spec, double force) {
    if (force < 0.0) {
        throw UsageError("deflection: force must be non-negative");
    }
    const double L = spec.length;
    return force * L * L * L / (3.0 * spec.material.youngs_modulus * spec.second_moment());
}

double root_stress(const BeamSpec& spec, double force) {
    if (force < 0.0) {
        throw UsageError("root_stress: force must be non-negative");
    }
    return force * spec.length * spec.thickness / (2.0 * spec.second_moment());
}

double hard_stop_deflection(const BeamSpec& spec) {
    const double L = spec.length;
    return 2.0 / 3.0 * spec.sigma_max * L * L /
           (spec.material.youngs_modulus * spec.thickness);
}

DeflectionReport design_report(const BeamSpec& spec, double force) {
    DeflectionReport report;
    report.force = force;
    report.delta = deflection(spec, force);
    report.sigma = root_stress(spec, force);
    report.delta_max = hard_stop_deflection(spec);
    report.within_elastic = report.sigma <= spec.sigma_max;
    return report;
}

std::string to_json(const DeflectionReport& report, const BeamSpec& spec) {
    nlohmann::json j;
    j["beam"] = {{"length_m", spec.length},
                 {"thickness_m", spec.thickness},
                 {"width_m", spec.width},
                 {"second_moment_m4", spec.second_moment()},
                 {"sigma_max_pa", spec.sigma_max},
                 {"material", spec.material.name},
                 {"E_pa", spec.material.youngs_modulus},
                 {"tensile_strength_pa", spec.material.tensile_strength}};
    j["force_n"] = report.force;
    j["delta_m"] = report.delta;
    j["sigma_pa"] = report.sigma;
    j["delta_max_m"] = report.delta_max;
    j["within_elastic"] = report.within_elastic;
    return j.dump(2);
}

Material load_material(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open material file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed material JSON: " + std::string(e.what()));
    }
    if (!j.contains("name") || !j.contains("E_pa") || !j.contains("tensile_strength_pa")) {
        throw FormatError("material JSON needs name, E_pa and tensile_strength_pa");
    }
    if (j["E_pa"].is_null() || j["tensile_strength_pa"].is_null()) {
        throw InputError(
            "material '" + j["name"].get<std::string>() +
            "' is a placeholder: fill in E_pa and tensile_strength_pa from your datasheet");
    }
    Material m;
    m.name = j["name"].get<std::string>();
    m.youngs_modulus = j["E_pa"].get<double>();
    m.tensile_strength = j["tensile_strength_pa"].get<double>();
    if (!(m.youngs_modulus > 0.0 && m.tensile_strength > 0.0)) {
        throw InputError("material properties must be positive: " + path.string());
    }
    return m;
}

}  // namespace tacpalm::beam
