#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tacpalm/grid.hpp"

namespace tacpalm::renderer {

// Directional colored lights shading the gel, one light per channel.
struct Light {
    std::array<double, 3> direction{0.0, 0.0, 1.0};  // unit vector, z > 0
    double ambient = 0.0;                            // in [0, 1)
};

struct LightRig {
    std::vector<Light> lights;  // one per channel (2 or 3)
    double albedo = 0.9;        // in (0, 1]

    int channels() const { return static_cast<int>(lights.size()); }
};

// Default ring: azimuths 0/120/240 degrees, elevation 60 degrees, albedo 0.9,
// ambient 0.05 per channel. The two-channel preset drops the third light,
// emulating the palm's two-color illumination.
LightRig default_rig(int channels = 3);
LightRig make_rig(const std::vector<double>& azimuths_deg, double elevation_deg, double albedo,
                  double ambient);

enum class IndenterKind { Flat, Sphere, Gaussian, ScrewThread };

// Analytic press geometry; depths are gel-thickness normalized.
struct SceneSpec {
    IndenterKind kind = IndenterKind::Flat;
    int width = 0;
    int height = 0;
    double center_x = 0.0;   // pixels (sphere, gaussian)
    double center_y = 0.0;
    double radius = 0.0;     // sphere radius, pixels
    double depth = 0.0;      // sphere press depth / screw ridge height
    double sigma = 0.0;      // gaussian width, pixels
    double amplitude = 0.0;  // gaussian peak height
    double pitch = 0.0;      // screw thread pitch, pixels
    LightRig rig = default_rig();
    double noise_sigma = 0.0;
    std::optional<std::uint64_t> seed;  // required when noise_sigma > 0
};

SceneSpec load_scene(const std::filesystem::path& path);
void save_scene(const SceneSpec& scene, const std::filesystem::path& path);

// Analytic depth field of the scene. The indenter must leave a flat margin of
// at least 2 pixels; the boundary ring is exactly zero.
DepthMap depth_of_scene(const SceneSpec& scene);

// Analytic surface gradients of the scene (finite differences for the screw
// thread, whose profile has kinks).
GradientField gradients_of_scene(const SceneSpec& scene);

// Lambertian shading under the rig: normals from central differences,
// I_c = albedo * max(0, n . l_c) + ambient_c, clipped to [0, 1]. Optional
// seeded additive Gaussian noise, then clip.
TactileFrame render(const DepthMap& depth, const LightRig& rig, double noise_sigma = 0.0,
                    std::optional<std::uint64_t> seed = std::nullopt);

// Render of a flat gel: the contact-free reference image.
TactileFrame reference_of(const LightRig& rig, int width, int height);

}  // namespace tacpalm::renderer
