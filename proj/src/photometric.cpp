#include "tacpalm/photometric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "tacpalm/errors.hpp"

namespace tacpalm::photometric {

namespace {

// Eigenvalues of the symmetric 2x2 Gram matrix [[sxx, sxy], [sxy, syy]].
std::pair<double, double> gram_eigenvalues(double sxx, double sxy, double syy) {
    const double tr = sxx + syy;
    const double det = sxx * syy - sxy * sxy;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return {tr / 2.0 - disc, tr / 2.0 + disc};
}

void require_valid_channels(int channels, const char* where) {
    if (channels != 2 && channels != 3) {
        throw UsageError(std::string(where) + ": channels must be 2 or 3");
    }
}

}  // namespace

double PhotometricCalibration::condition() const {
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [a, b] : coeffs) {
        sxx += a * a;
        sxy += a * b;
        syy += b * b;
    }
    const auto [lo, hi] = gram_eigenvalues(sxx, sxy, syy);
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(hi / lo);
}

TactileFrame difference_image(const TactileFrame& frame, const TactileFrame& reference) {
    if (!frame.same_shape(reference)) {
        throw InputError("difference_image: frame and reference shapes differ");
    }
    TactileFrame diff = frame;
    for (std::size_t i = 0; i < diff.data.size(); ++i) {
        diff.data[i] = frame.data[i] - reference.data[i];
    }
    return diff;
}

PhotometricCalibration fit_calibration(
    const std::vector<std::pair<TactileFrame, GradientField>>& pairs, int channels) {
    require_valid_channels(channels, "fit_calibration");
    if (pairs.empty()) {
        throw UsageError("fit_calibration: no training pairs");
    }

    // Accumulate the 2x2 normal equations shared by all channels plus one
    // right-hand side per channel.
    double spp = 0.0, spq = 0.0, sqq = 0.0;
    std::vector<double> spd(channels, 0.0), sqd(channels, 0.0);
    std::size_t used = 0;

    for (const auto& [diff, grad] : pairs) {
        if (diff.channels != channels) {
            throw InputError("fit_calibration: difference frame channel count mismatch");
        }
        if (diff.width != grad.width || diff.height != grad.height) {
            throw InputError("fit_calibration: frame and gradient shapes differ");
        }
        for (std::size_t px = 0; px < diff.pixel_count(); ++px) {
            const double p = grad.p[px];
            const double q = grad.q[px];
            if (std::abs(p) + std::abs(q) <= 0.0) continue;
            ++used;
            spp += p * p;
            spq += p * q;
            sqq += q * q;
            for (int c = 0; c < channels; ++c) {
                const double d = diff.data[px * channels + c];
                spd[c] += p * d;
                sqd[c] += q * d;
            }
        }
    }
    if (used < 200) {
        throw UsageError("fit_calibration: need >= 200 pixels with non-zero gradient, got " +
                         std::to_string(used));
    }

    const auto [lo, hi] = gram_eigenvalues(spp, spq, sqq);
    if (!(lo > hi * 1e-12)) {
        throw NumericError(
            "fit_calibration: degenerate geometry, training gradients are collinear");
    }
    const double det = spp * sqq - spq * spq;

    PhotometricCalibration calib;
    calib.channels = channels;
    calib.coeffs.resize(channels);
    for (int c = 0; c < channels; ++c) {
        calib.coeffs[c].first = (sqq * spd[c] - spq * sqd[c]) / det;
        calib.coeffs[c].second = (spp * sqd[c] - spq * spd[c]) / det;
    }

    // Residual over the pixels that entered the fit.
    double ss = 0.0;
    for (const auto& [diff, grad] : pairs) {
        for (std::size_t px = 0; px < diff.pixel_count(); ++px) {
            const double p = grad.p[px];
            const double q = grad.q[px];
            if (std::abs(p) + std::abs(q) <= 0.0) continue;
            for (int c = 0; c < channels; ++c) {
                const double r =
                    diff.data[px * channels + c] - calib.coeffs[c].first * p - calib.coeffs[c].second * q;
                ss += r * r;
            }
        }
    }
    calib.residual_rms = std::sqrt(ss / (static_cast<double>(used) * channels));
    return calib;
}

GradientEstimate estimate_gradients(const TactileFrame& difference,
                                    const PhotometricCalibration& calib,
                                    double noise_floor) {
    require_valid_channels(calib.channels, "estimate_gradients");
    if (difference.channels != calib.channels) {
        throw InputError("estimate_gradients: difference has " +
                         std::to_string(difference.channels) + " channels, calibration expects " +
                         std::to_string(calib.channels));
    }

    // The model matrix A is shared across pixels, so the 2x2 normal matrix
    // inverts once.
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [a, b] : calib.coeffs) {
        sxx += a * a;
        sxy += a * b;
        syy += b * b;
    }
    const double det = sxx * syy - sxy * sxy;
    const double scale = std::max({std::abs(sxx), std::abs(syy), 1e-300});
    const bool singular = !(std::abs(det) > scale * scale * 1e-14);

    GradientEstimate out;
    out.field = GradientField::zeros(difference.width, difference.height);
    out.residual.assign(difference.pixel_count(), 0.0);

    const int ch = calib.channels;
    for (std::size_t px = 0; px < difference.pixel_count(); ++px) {
        double dmax = 0.0;
        for (int c = 0; c < ch; ++c) {
            dmax = std::max(dmax, std::abs(difference.data[px * ch + c]));
        }
        if (dmax < noise_floor) {
            continue;  // below noise floor: zero gradient, zero residual
        }
        if (singular) {
            ++out.degenerate_pixels;
            double ss = 0.0;
            for (int c = 0; c < ch; ++c) {
                const double d = difference.data[px * ch + c];
                ss += d * d;
            }
            out.residual[px] = std::sqrt(ss);
            continue;
        }
        double rp = 0.0, rq = 0.0;
        for (int c = 0; c < ch; ++c) {
            const double d = difference.data[px * ch + c];
            rp += calib.coeffs[c].first * d;
            rq += calib.coeffs[c].second * d;
        }
        const double p = (syy * rp - sxy * rq) / det;
        const double q = (sxx * rq - sxy * rp) / det;
        out.field.p[px] = p;
        out.field.q[px] = q;
        double ss = 0.0;
        for (int c = 0; c < ch; ++c) {
            const double r =
                difference.data[px * ch + c] - calib.coeffs[c].first * p - calib.coeffs[c].second * q;
            ss += r * r;
        }
        out.residual[px] = std::sqrt(ss);
    }
    return out;
}

void save_calibration(const PhotometricCalibration& calib, const std::filesystem::path& path) {
    nlohmann::json j;
    j["channels"] = calib.channels;
    auto coeffs = nlohmann::json::array();
    for (const auto& [a, b] : calib.coeffs) {
        coeffs.push_back({a, b});
    }
    j["coeffs"] = coeffs;
    j["residual_rms"] = calib.residual_rms;
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write calibration file: " + path.string());
    }
    out << j.dump(2) << "\n";
}

PhotometricCalibration load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open calibration file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed calibration JSON: " + std::string(e.what()));
    }
    PhotometricCalibration calib;
    try {
        calib.channels = j.at("channels").get<int>();
        for (const auto& pair : j.at("coeffs")) {
            calib.coeffs.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
        calib.residual_rms = j.at("residual_rms").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("calibration JSON missing fields: " + std::string(e.what()));
    }
    require_valid_channels(calib.channels, "load_calibration");
    if (static_cast<int>(calib.coeffs.size()) != calib.channels) {
        throw FormatError("calibration JSON: coeffs length does not match channels");
    }
    if (!(calib.condition() < 1e8)) {
        throw NumericError("calibration coefficient matrix is rank deficient");
    }
    return calib;
}

}  // namespace tacpalm::photometric
