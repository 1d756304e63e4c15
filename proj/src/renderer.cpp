#include "tacpalm/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "tacpalm/errors.hpp"

namespace tacpalm::renderer {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMargin = 2;  // required flat ring around any indenter

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// Raised ramp window forcing screw-thread scenes to vanish near the border.
double window1d(double v, double lo, double hi, double ramp) {
    return smoothstep((v - lo) / ramp) * smoothstep((hi - v) / ramp);
}

void validate_rig(const LightRig& rig) {
    if (rig.channels() != 2 && rig.channels() != 3) {
        throw UsageError("light rig must have 2 or 3 lights");
    }
    if (!(rig.albedo > 0.0 && rig.albedo <= 1.0)) {
        throw UsageError("light rig albedo must be in (0, 1]");
    }
    for (const auto& light : rig.lights) {
        const auto& l = light.direction;
        const double norm = std::sqrt(l[0] * l[0] + l[1] * l[1] + l[2] * l[2]);
        if (std::abs(norm - 1.0) > 1e-9 || l[2] <= 0.0) {
            throw UsageError("light directions must be unit vectors with positive z");
        }
        if (!(light.ambient >= 0.0 && light.ambient < 1.0)) {
            throw UsageError("ambient must be in [0, 1)");
        }
    }
}

void validate_grid(int width, int height) {
    if (width < 2 * kMargin + 3 || height < 2 * kMargin + 3) {
        throw UsageError("scene grid too small");
    }
}

void check_margin(const SceneSpec& scene, double reach) {
    const double lo = kMargin;
    if (scene.center_x - reach < lo || scene.center_x + reach > scene.width - 1 - kMargin ||
        scene.center_y - reach < lo || scene.center_y + reach > scene.height - 1 - kMargin) {
        throw UsageError("indenter exceeds the grid margin");
    }
}

struct ScrewField {
    double margin_x0, margin_x1, margin_y0, margin_y1, ramp;
};

ScrewField screw_field(const SceneSpec& scene) {
    const double ramp = 6.0;
    return {kMargin + 0.5, scene.width - 1.0 - kMargin - 0.5, kMargin + 0.5,
            scene.height - 1.0 - kMargin - 0.5, ramp};
}

double scene_depth_at(const SceneSpec& scene, double x, double y) {
    switch (scene.kind) {
        case IndenterKind::Flat:
            return 0.0;
        case IndenterKind::Sphere: {
            const double dx = x - scene.center_x;
            const double dy = y - scene.center_y;
            const double r2 = dx * dx + dy * dy;
            const double R = scene.radius;
            if (r2 >= R * R) return 0.0;
            return std::max(0.0, scene.depth - (R - std::sqrt(R * R - r2)));
        }
        case IndenterKind::Gaussian: {
            const double dx = x - scene.center_x;
            const double dy = y - scene.center_y;
            return scene.amplitude *
                   std::exp(-(dx * dx + dy * dy) / (2.0 * scene.sigma * scene.sigma));
        }
        case IndenterKind::ScrewThread: {
            const auto f = screw_field(scene);
            const double u = x / scene.pitch;
            const double tri = 1.0 - 2.0 * std::abs(u - std::floor(u) - 0.5);
            return scene.depth * tri * window1d(x, f.margin_x0, f.margin_x1, f.ramp) *
                   window1d(y, f.margin_y0, f.margin_y1, f.ramp);
        }
    }
    return 0.0;
}

void validate_scene(const SceneSpec& scene) {
    validate_grid(scene.width, scene.height);
    validate_rig(scene.rig);
    switch (scene.kind) {
        case IndenterKind::Flat:
            break;
        case IndenterKind::Sphere: {
            if (!(scene.radius > 0.0) || !(scene.depth > 0.0)) {
                throw UsageError("sphere scene needs positive radius and depth");
            }
            if (scene.depth > 1.0) {
                throw UsageError("indenter depth exceeds one gel thickness");
            }
            const double cap = std::sqrt(scene.depth * (2.0 * scene.radius - scene.depth));
            check_margin(scene, cap);
            break;
        }
        case IndenterKind::Gaussian: {
            if (!(scene.sigma > 0.0) || !(scene.amplitude > 0.0)) {
                throw UsageError("gaussian scene needs positive sigma and amplitude");
            }
            if (scene.amplitude > 1.0) {
                throw UsageError("indenter depth exceeds one gel thickness");
            }
            check_margin(scene, 4.0 * scene.sigma);
            break;
        }
        case IndenterKind::ScrewThread: {
            if (!(scene.pitch > 1.0) || !(scene.depth > 0.0) || scene.depth > 1.0) {
                throw UsageError("screw scene needs pitch > 1 px and depth in (0, 1]");
            }
            break;
        }
    }
    if (scene.noise_sigma > 0.0 && !scene.seed.has_value()) {
        throw UsageError("scenes with noise_sigma > 0 require a seed");
    }
}

}  // namespace

LightRig default_rig(int channels) {
    if (channels == 3) {
        return make_rig({0.0, 120.0, 240.0}, 60.0, 0.9, 0.05);
    }
    if (channels == 2) {
        return make_rig({0.0, 120.0}, 60.0, 0.9, 0.05);
    }
    throw UsageError("default_rig: channels must be 2 or 3");
}

LightRig make_rig(const std::vector<double>& azimuths_deg, double elevation_deg, double albedo,
                  double ambient) {
    LightRig rig;
    rig.albedo = albedo;
    const double el = elevation_deg * kPi / 180.0;
    for (double az_deg : azimuths_deg) {
        const double az = az_deg * kPi / 180.0;
        Light light;
        light.direction = {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
        light.ambient = ambient;
        rig.lights.push_back(light);
    }
    validate_rig(rig);
    return rig;
}

DepthMap depth_of_scene(const SceneSpec& scene) {
    validate_scene(scene);
    DepthMap depth = DepthMap::zeros(scene.width, scene.height);
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            depth.at(x, y) = scene_depth_at(scene, x, y);
        }
    }
    // The gaussian tail is analytically non-zero everywhere; pin the ring.
    for (int x = 0; x < scene.width; ++x) {
        depth.at(x, 0) = 0.0;
        depth.at(x, scene.height - 1) = 0.0;
    }
    for (int y = 0; y < scene.height; ++y) {
        depth.at(0, y) = 0.0;
        depth.at(scene.width - 1, y) = 0.0;
    }
    return depth;
}

GradientField gradients_of_scene(const SceneSpec& scene) {
    validate_scene(scene);
    GradientField grad = GradientField::zeros(scene.width, scene.height);
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            double p = 0.0, q = 0.0;
            switch (scene.kind) {
                case IndenterKind::Flat:
                    break;
                case IndenterKind::Sphere: {
                    const double dx = x - scene.center_x;
                    const double dy = y - scene.center_y;
                    const double r2 = dx * dx + dy * dy;
                    const double R = scene.radius;
                    const double cap2 = scene.depth * (2.0 * R - scene.depth);
                    if (r2 < cap2) {
                        const double s = std::sqrt(R * R - r2);
                        p = -dx / s;
                        q = -dy / s;
                    }
                    break;
                }
                case IndenterKind::Gaussian: {
                    const double dx = x - scene.center_x;
                    const double dy = y - scene.center_y;
                    const double z = scene.amplitude *
                                     std::exp(-(dx * dx + dy * dy) /
                                              (2.0 * scene.sigma * scene.sigma));
                    p = -z * dx / (scene.sigma * scene.sigma);
                    q = -z * dy / (scene.sigma * scene.sigma);
                    break;
                }
                case IndenterKind::ScrewThread: {
                    // Central differences; the triangle profile has kinks.
                    const double h = 0.5;
                    p = (scene_depth_at(scene, x + h, y) - scene_depth_at(scene, x - h, y)) /
                        (2.0 * h);
                    q = (scene_depth_at(scene, x, y + h) - scene_depth_at(scene, x, y - h)) /
                        (2.0 * h);
                    break;
                }
            }
            grad.p[grad.index(x, y)] = p;
            grad.q[grad.index(x, y)] = q;
        }
    }
    return grad;
}

TactileFrame render(const DepthMap& depth, const LightRig& rig, double noise_sigma,
                    std::optional<std::uint64_t> seed) {
    validate_rig(rig);
    if (noise_sigma > 0.0 && !seed.has_value()) {
        throw UsageError("render: noise_sigma > 0 requires a seed");
    }
    const int w = depth.width, h = depth.height;
    const int ch = rig.channels();
    TactileFrame frame = TactileFrame::zeros(w, h, ch);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Central differences in the interior, one-sided at the edges.
            const int xl = std::max(0, x - 1), xr = std::min(w - 1, x + 1);
            const int yl = std::max(0, y - 1), yr = std::min(h - 1, y + 1);
            const double p = (depth.at(xr, y) - depth.at(xl, y)) / (xr - xl);
            const double q = (depth.at(x, yr) - depth.at(x, yl)) / (yr - yl);
            const double inv_norm = 1.0 / std::sqrt(1.0 + p * p + q * q);
            for (int c = 0; c < ch; ++c) {
                const auto& l = rig.lights[c].direction;
                const double shade = (-p * l[0] - q * l[1] + l[2]) * inv_norm;
                const double v = rig.albedo * std::max(0.0, shade) + rig.lights[c].ambient;
                frame.at(x, y, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    }

    if (noise_sigma > 0.0) {
        std::mt19937_64 rng(*seed);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (double& v : frame.data) {
            v = std::clamp(v + noise(rng), 0.0, 1.0);
        }
    }
    return frame;
}

TactileFrame reference_of(const LightRig& rig, int width, int height) {
    validate_grid(width, height);
    return render(DepthMap::zeros(width, height), rig);
}

// ---------------------------------------------------------------------------
// Scene JSON
// ---------------------------------------------------------------------------

namespace {

const char* kind_name(IndenterKind kind) {
    switch (kind) {
        case IndenterKind::Flat: return "flat";
        case IndenterKind::Sphere: return "sphere";
        case IndenterKind::Gaussian: return "gaussian";
        case IndenterKind::ScrewThread: return "screw_thread";
    }
    return "flat";
}

IndenterKind kind_of(const std::string& name) {
    if (name == "flat") return IndenterKind::Flat;
    if (name == "sphere") return IndenterKind::Sphere;
    if (name == "gaussian") return IndenterKind::Gaussian;
    if (name == "screw_thread") return IndenterKind::ScrewThread;
    throw FormatError("unknown indenter kind: " + name);
}

}  // namespace

SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open scene file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed scene JSON: " + std::string(e.what()));
    }
    SceneSpec scene;
    try {
        scene.kind = kind_of(j.at("indenter").get<std::string>());
        scene.width = j.at("width").get<int>();
        scene.height = j.at("height").get<int>();
        scene.center_x = j.value("center_x", (scene.width - 1) / 2.0);
        scene.center_y = j.value("center_y", (scene.height - 1) / 2.0);
        scene.radius = j.value("radius", 0.0);
        scene.depth = j.value("depth", 0.0);
        scene.sigma = j.value("sigma", 0.0);
        scene.amplitude = j.value("amplitude", 0.0);
        scene.pitch = j.value("pitch", 0.0);
        scene.noise_sigma = j.value("noise_sigma", 0.0);
        if (j.contains("seed")) scene.seed = j.at("seed").get<std::uint64_t>();
        const int channels = j.value("channels", 3);
        if (j.contains("rig")) {
            const auto& r = j.at("rig");
            scene.rig = make_rig(r.at("azimuths_deg").get<std::vector<double>>(),
                                 r.value("elevation_deg", 60.0), r.value("albedo", 0.9),
                                 r.value("ambient", 0.05));
        } else {
            scene.rig = default_rig(channels);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("scene JSON missing fields: " + std::string(e.what()));
    }
    validate_scene(scene);
    return scene;
}

void save_scene(const SceneSpec& scene, const std::filesystem::path& path) {
    nlohmann::json j;
    j["indenter"] = kind_name(scene.kind);
    j["width"] = scene.width;
    j["height"] = scene.height;
    j["center_x"] = scene.center_x;
    j["center_y"] = scene.center_y;
    if (scene.kind == IndenterKind::Sphere) {
        j["radius"] = scene.radius;
        j["depth"] = scene.depth;
    }
    if (scene.kind == IndenterKind::Gaussian) {
        j["sigma"] = scene.sigma;
        j["amplitude"] = scene.amplitude;
    }
    if (scene.kind == IndenterKind::ScrewThread) {
        j["pitch"] = scene.pitch;
        j["depth"] = scene.depth;
    }
    j["channels"] = scene.rig.channels();
    if (scene.noise_sigma > 0.0) {
        j["noise_sigma"] = scene.noise_sigma;
        j["seed"] = *scene.seed;
    }
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write scene file: " + path.string());
    }
    out << j.dump(2) << "\n";
}

}  // namespace tacpalm::renderer
