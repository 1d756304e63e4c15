#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "tacpalm/grid.hpp"

namespace tacpalm::photometric {

// Linear photometric model: per channel c the difference intensity responds
// to surface slope as D_c ~= a_c * p + b_c * q. The coefficient matrix must
// have full rank 2 so slopes are recoverable.
struct PhotometricCalibration {
    int channels = 0;                                // 2 or 3
    std::vector<std::pair<double, double>> coeffs;   // (a_c, b_c) per channel
    double residual_rms = 0.0;

    // Condition number of the channels x 2 coefficient matrix (recomputed
    // from the coefficients, not serialized).
    double condition() const;
};

// Pixels whose difference magnitude stays below this are treated as no
// contact and map to zero gradient.
inline constexpr double kDefaultNoiseFloor = 0.01;

// Per-pixel difference D = frame - reference; values in [-1, 1].
TactileFrame difference_image(const TactileFrame& frame, const TactileFrame& reference);

// Global least-squares fit of the linear model over all pixels with a
// non-zero known gradient. Throws NumericError when the training gradients
// are collinear (one slope direction unobservable).
PhotometricCalibration fit_calibration(
    const std::vector<std::pair<TactileFrame, GradientField>>& pairs, int channels);

struct GradientEstimate {
    GradientField field;
    std::vector<double> residual;   // per-pixel ||D - A g||, photometric model residual
    std::size_t degenerate_pixels = 0;  // pixels skipped because the system was singular
};

// Inverts the photometric model per pixel: least squares for 3 channels,
// exact 2x2 solve for 2. Pixels below the noise floor map to (0, 0).
// A singular system yields zero gradients plus a counted warning, never a
// crash.
GradientEstimate estimate_gradients(const TactileFrame& difference,
                                    const PhotometricCalibration& calib,
                                    double noise_floor = kDefaultNoiseFloor);

// JSON serialization: {"channels": n, "coeffs": [[a,b],...], "residual_rms": r}
void save_calibration(const PhotometricCalibration& calib, const std::filesystem::path& path);
PhotometricCalibration load_calibration(const std::filesystem::path& path);

}  // namespace tacpalm::photometric
