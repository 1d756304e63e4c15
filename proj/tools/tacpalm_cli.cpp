// tacpalm: command-line front end for the tactile palm toolkit.
//
// Flags use millimeters and newtons; everything internal is SI. Reports are
// JSON. Exit codes: 0 success, 1 usage error, 2 input/format error,
// 3 numerical non-convergence; failures print "error:<category>: ..." on
// stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tacpalm/beam.hpp"
#include "tacpalm/contact.hpp"
#include "tacpalm/errors.hpp"
#include "tacpalm/grid.hpp"
#include "tacpalm/ingest.hpp"
#include "tacpalm/photometric.hpp"
#include "tacpalm/poisson.hpp"
#include "tacpalm/press2d.hpp"
#include "tacpalm/renderer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace tacpalm;

std::optional<std::uint64_t> env_seed() {
    const char* value = std::getenv("TACPALM_SEED");
    if (!value) return std::nullopt;
    try {
        return std::stoull(value);
    } catch (...) {
        throw UsageError("TACPALM_SEED must be an unsigned integer");
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << text;
}

renderer::SceneSpec scene_with_seed_override(renderer::SceneSpec scene) {
    if (auto seed = env_seed()) scene.seed = seed;
    return scene;
}

TactileFrame load_frame_for_channels(const fs::path& path, int channels) {
    TactileFrame frame = read_png(path);
    if (frame.channels == channels) return frame;
    if (frame.channels > channels) return select_channels(frame, channels);
    throw InputError(path.string() + " has " + std::to_string(frame.channels) +
                     " channels, need " + std::to_string(channels));
}

int run_render(const fs::path& scene_path, const fs::path& out_path, const fs::path& ref_path) {
    const auto scene = scene_with_seed_override(renderer::load_scene(scene_path));
    const DepthMap depth = renderer::depth_of_scene(scene);
    write_png(renderer::render(depth, scene.rig, scene.noise_sigma, scene.seed), out_path);
    write_png(renderer::reference_of(scene.rig, scene.width, scene.height), ref_path);
    return 0;
}

int run_calibrate(const fs::path& scenes_dir, const fs::path& out_path, int channels) {
    if (!fs::is_directory(scenes_dir)) {
        throw InputError("not a directory: " + scenes_dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(scenes_dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw InputError("no scene .json files in " + scenes_dir.string());
    }
    std::vector<std::pair<TactileFrame, GradientField>> pairs;
    for (const auto& file : files) {
        auto scene = scene_with_seed_override(renderer::load_scene(file));
        if (scene.rig.channels() != channels) {
            scene.rig = renderer::default_rig(channels);
        }
        const DepthMap depth = renderer::depth_of_scene(scene);
        const TactileFrame frame =
            renderer::render(depth, scene.rig, scene.noise_sigma, scene.seed);
        const TactileFrame reference =
            renderer::reference_of(scene.rig, scene.width, scene.height);
        pairs.emplace_back(photometric::difference_image(frame, reference),
                           renderer::gradients_of_scene(scene));
    }
    const auto calib = photometric::fit_calibration(pairs, channels);
    photometric::save_calibration(calib, out_path);
    std::cout << "calibrated " << channels << " channels from " << files.size()
              << " scene(s), residual_rms=" << calib.residual_rms << "\n";
    return 0;
}

int run_reconstruct(const fs::path& ref_path, const fs::path& frame_path,
                    const fs::path& calib_path, const fs::path& out_path, int channels,
                    double noise_floor) {
    const auto calib = photometric::load_calibration(calib_path);
    if (calib.channels != channels) {
        throw InputError("calibration has " + std::to_string(calib.channels) +
                         " channels, requested " + std::to_string(channels));
    }
    const TactileFrame reference = load_frame_for_channels(ref_path, channels);
    const TactileFrame frame = load_frame_for_channels(frame_path, channels);
    const TactileFrame diff = photometric::difference_image(frame, reference);
    const auto estimate = photometric::estimate_gradients(diff, calib, noise_floor);
    write_pfm(poisson::integrate(estimate.field), out_path);
    if (estimate.degenerate_pixels > 0) {
        std::cerr << "warning: " << estimate.degenerate_pixels
                  << " pixels had a singular photometric system\n";
    }
    return 0;
}

int run_contact_area(const fs::path& ref_path, const fs::path& frame_path, double tau,
                     const fs::path& mask_path, const fs::path& report_path) {
    const TactileFrame reference = read_png(ref_path);
    const TactileFrame frame = read_png(frame_path);
    const auto mask = contact::segment(photometric::difference_image(frame, reference), tau);
    write_png(to_frame(mask), mask_path);

    nlohmann::json j;
    j["tau"] = tau;
    j["area_px"] = mask.area_px;
    j["components"] = nlohmann::json::array();
    for (const auto& comp : contact::components(mask)) {
        j["components"].push_back({{"label", comp.label},
                                   {"area_px", comp.area_px},
                                   {"bbox", {comp.min_x, comp.min_y, comp.max_x, comp.max_y}}});
    }
    write_text(report_path, j.dump(2) + "\n");
    return 0;
}

int run_design_beam(const fs::path& material_path, double length_mm, double thickness_mm,
                    double width_mm, double force_n, double sigma_max_mpa,
                    const fs::path& report_path) {
    const auto material = beam::load_material(material_path);
    const auto spec = beam::make_spec(length_mm / 1000.0, thickness_mm / 1000.0,
                                      width_mm / 1000.0, material, sigma_max_mpa * 1e6);
    const auto report = beam::design_report(spec, force_n);
    write_text(report_path, beam::to_json(report, spec) + "\n");
    std::cout << "delta=" << report.delta * 1000.0 << " mm, sigma=" << report.sigma / 1e6
              << " MPa, delta_max=" << report.delta_max * 1000.0 << " mm, within_elastic="
              << (report.within_elastic ? "yes" : "no") << "\n";
    return 0;
}

press2d::PressConfig load_press_config(std::string palm_path) {
    if (palm_path.empty()) {
        const char* env = std::getenv("TACPALM_CONFIG");
        palm_path = env ? env : "data/default_palm.json";
    }
    return press2d::load_config(palm_path);
}

std::pair<press2d::ObjectProfile, double> shape_of_config(const press2d::PressConfig& config,
                                                          const std::string& shape,
                                                          double depth_mm) {
    const auto it = config.shapes.find(shape);
    if (it == config.shapes.end()) {
        throw InputError("shape '" + shape + "' not present in the palm config");
    }
    const double depth = depth_mm >= 0.0 ? depth_mm / 1000.0 : it->second.depth;
    return {it->second.profile, depth};
}

int run_press(const std::string& palm_path, const std::string& shape, double depth_mm,
              const std::string& variant, const fs::path& report_path,
              const std::string& svg_path) {
    const auto config = load_press_config(palm_path);
    const auto [profile, depth] = shape_of_config(config, shape, depth_mm);
    press2d::PalmConfig palm = config.palm;
    if (variant == "none") palm = press2d::variant_of(palm, press2d::PalmVariant::None);
    else if (variant == "structure") palm = press2d::variant_of(palm, press2d::PalmVariant::Structure);
    else if (variant == "gel") palm = press2d::variant_of(palm, press2d::PalmVariant::Gel);
    else if (variant != "both") throw UsageError("variant must be none|structure|gel|both");

    const auto report = press2d::equilibrium(palm, profile, depth);
    write_text(report_path, press2d::to_json(report) + "\n");
    if (!svg_path.empty()) {
        write_text(svg_path, press2d::render_svg(report, palm, profile));
    }
    if (!report.converged) {
        throw NumericError("press equilibrium did not converge within the iteration budget");
    }
    std::cout << "total_contact=" << report.total_contact * 1000.0 << " mm over "
              << report.contact_intervals.size() << " interval(s)\n";
    return 0;
}

int run_sweep(const std::string& palm_path, const std::string& shape, double depth_mm,
              const fs::path& report_path) {
    const auto config = load_press_config(palm_path);
    const auto [profile, depth] = shape_of_config(config, shape, depth_mm);
    const auto sweep = press2d::compliance_sweep(config.palm, profile, depth);
    write_text(report_path, press2d::to_json(sweep) + "\n");
    for (const auto& name : sweep.ordering) {
        std::cout << name << " total_contact=" << sweep.reports.at(name).total_contact * 1000.0
                  << " mm\n";
    }
    for (const auto& [name, rep] : sweep.reports) {
        if (!rep.converged) {
            throw NumericError("sweep variant '" + name + "' did not converge");
        }
    }
    return 0;
}

int run_stream(const std::string& url, const fs::path& calib_path, const fs::path& out_dir,
               const std::string& ref_path, int max_frames, double timeout_s,
               double noise_floor) {
    const auto calib = photometric::load_calibration(calib_path);
    fs::create_directories(out_dir);

    ingest::HttpSourceSpec spec;
    spec.url = url;
    spec.timeout_s = timeout_s;
    auto source = ingest::FrameSource::open(spec);

    std::optional<TactileFrame> reference;
    if (!ref_path.empty()) {
        reference = load_frame_for_channels(ref_path, calib.channels);
    }

    nlohmann::json manifest;
    manifest["frames"] = nlohmann::json::array();
    std::size_t produced = 0;
    while (max_frames < 0 || produced < static_cast<std::size_t>(max_frames)) {
        auto frame = source.next_frame();
        if (!frame) break;
        TactileFrame image = frame->image.channels == calib.channels
                                 ? frame->image
                                 : select_channels(frame->image, calib.channels);
        if (!reference) {
            reference = image;  // first frame doubles as the contact-free reference
            continue;
        }
        const auto diff = photometric::difference_image(image, *reference);
        const auto estimate = photometric::estimate_gradients(diff, calib, noise_floor);
        char name[32];
        std::snprintf(name, sizeof(name), "depth_%05zu.pfm", produced);
        write_pfm(poisson::integrate(estimate.field), out_dir / name);
        manifest["frames"].push_back({{"file", name}, {"timestamp_s", frame->timestamp}});
        ++produced;
    }
    manifest["delivered"] = produced;
    manifest["decode_drops"] = source.decode_drops();
    manifest["queue_drops"] = source.queue_drops();
    if (auto err = source.error()) manifest["stream_error"] = *err;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "reconstructed " << produced << " frame(s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tacpalm: tactile palm reconstruction and compliance toolkit"};
    app.require_subcommand(1);

    // render
    auto* render_cmd = app.add_subcommand("render", "Render a synthetic tactile scene to PNG");
    std::string scene_path, out_path, ref_path;
    render_cmd->add_option("--scene", scene_path, "Scene JSON")->required();
    render_cmd->add_option("--out", out_path, "Pressed-frame PNG")->required();
    render_cmd->add_option("--ref", ref_path, "Reference-frame PNG")->required();

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "Fit a photometric calibration from scenes");
    std::string scenes_dir, calib_out;
    int cal_channels = 3;
    cal_cmd->add_option("--scenes", scenes_dir, "Directory of scene JSONs")->required();
    cal_cmd->add_option("--out", calib_out, "Calibration JSON output")->required();
    cal_cmd->add_option("--channels", cal_channels, "2 or 3 (default 3)");

    // reconstruct
    auto* rec_cmd = app.add_subcommand("reconstruct", "Difference -> gradients -> depth (PFM)");
    std::string rec_ref, rec_frame, rec_calib, rec_out;
    int rec_channels = 3;
    double rec_floor = photometric::kDefaultNoiseFloor;
    rec_cmd->add_option("--ref", rec_ref, "Reference PNG")->required();
    rec_cmd->add_option("--frame", rec_frame, "Tactile PNG")->required();
    rec_cmd->add_option("--calib", rec_calib, "Calibration JSON")->required();
    rec_cmd->add_option("--out", rec_out, "Depth PFM output")->required();
    rec_cmd->add_option("--channels", rec_channels, "2 or 3 (default 3)");
    rec_cmd->add_option("--noise-floor", rec_floor, "Gradient noise floor (default 0.01)");

    // contact-area
    auto* area_cmd = app.add_subcommand("contact-area", "Segment contact and report pixel area");
    std::string area_ref, area_frame, area_mask, area_report;
    double tau = contact::kDefaultThreshold;
    area_cmd->add_option("--ref", area_ref, "Reference PNG")->required();
    area_cmd->add_option("--frame", area_frame, "Tactile PNG")->required();
    area_cmd->add_option("--tau", tau, "Difference threshold (default 0.03)");
    area_cmd->add_option("--mask", area_mask, "Mask PNG output")->required();
    area_cmd->add_option("--report", area_report, "Report JSON output")->required();

    // design-beam
    auto* beam_cmd = app.add_subcommand("design-beam", "Cantilever sizing report");
    std::string beam_material, beam_report;
    double length_mm = 0.0, thickness_mm = 0.0, width_mm = 0.0, force_n = 0.0;
    double sigma_max_mpa = 0.0;
    beam_cmd->add_option("--material", beam_material, "Material JSON")->required();
    beam_cmd->add_option("--length-mm", length_mm, "Beam length, mm")->required();
    beam_cmd->add_option("--thickness-mm", thickness_mm, "Beam thickness, mm")->required();
    beam_cmd->add_option("--width-mm", width_mm, "Beam width, mm")->required();
    beam_cmd->add_option("--force-n", force_n, "Tip force, N")->required();
    beam_cmd->add_option("--sigma-max-mpa", sigma_max_mpa,
                         "Allowable stress, MPa (default: tensile/2)");
    beam_cmd->add_option("--report", beam_report, "Report JSON output")->required();

    // press
    auto* press_cmd = app.add_subcommand("press", "Press a shape into the palm");
    std::string press_palm, press_shape, press_variant = "both", press_report, press_svg;
    double press_depth_mm = -1.0;
    press_cmd->add_option("--palm", press_palm, "Palm config JSON (default data/default_palm.json)");
    press_cmd->add_option("--shape", press_shape, "cylinder|cube|plus|star")->required();
    press_cmd->add_option("--depth-mm", press_depth_mm, "Press depth, mm (default: config)");
    press_cmd->add_option("--variant", press_variant, "none|structure|gel|both (default both)");
    press_cmd->add_option("--report", press_report, "Report JSON output")->required();
    press_cmd->add_option("--svg", press_svg, "Optional SVG drawing output");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Four-palm compliance comparison");
    std::string sweep_palm, sweep_shape, sweep_report;
    double sweep_depth_mm = -1.0;
    sweep_cmd->add_option("--palm", sweep_palm, "Palm config JSON (default data/default_palm.json)");
    sweep_cmd->add_option("--shape", sweep_shape, "cylinder|cube|plus|star")->required();
    sweep_cmd->add_option("--depth-mm", sweep_depth_mm, "Press depth, mm (default: config)");
    sweep_cmd->add_option("--report", sweep_report, "Report JSON output")->required();

    // stream
    auto* stream_cmd = app.add_subcommand("stream", "Reconstruct depth from an MJPEG stream");
    std::string stream_url, stream_calib, stream_out, stream_ref;
    int stream_max = -1;
    double stream_timeout = 5.0, stream_floor = photometric::kDefaultNoiseFloor;
    stream_cmd->add_option("--url", stream_url, "http://host:port/path")->required();
    stream_cmd->add_option("--calib", stream_calib, "Calibration JSON")->required();
    stream_cmd->add_option("--out-dir", stream_out, "Output directory")->required();
    stream_cmd->add_option("--ref", stream_ref, "Reference PNG (default: first frame)");
    stream_cmd->add_option("--max-frames", stream_max, "Stop after N frames");
    stream_cmd->add_option("--timeout-s", stream_timeout, "Connect/read timeout (default 5)");
    stream_cmd->add_option("--noise-floor", stream_floor, "Gradient noise floor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error:usage: " << e.what() << "\n";
        return 1;
    }

    try {
        if (render_cmd->parsed()) return run_render(scene_path, out_path, ref_path);
        if (cal_cmd->parsed()) return run_calibrate(scenes_dir, calib_out, cal_channels);
        if (rec_cmd->parsed()) {
            return run_reconstruct(rec_ref, rec_frame, rec_calib, rec_out, rec_channels,
                                   rec_floor);
        }
        if (area_cmd->parsed()) {
            return run_contact_area(area_ref, area_frame, tau, area_mask, area_report);
        }
        if (beam_cmd->parsed()) {
            return run_design_beam(beam_material, length_mm, thickness_mm, width_mm, force_n,
                                   sigma_max_mpa, beam_report);
        }
        if (press_cmd->parsed()) {
            return run_press(press_palm, press_shape, press_depth_mm, press_variant,
                             press_report, press_svg);
        }
        if (sweep_cmd->parsed()) {
            return run_sweep(sweep_palm, sweep_shape, sweep_depth_mm, sweep_report);
        }
        if (stream_cmd->parsed()) {
            return run_stream(stream_url, stream_calib, stream_out, stream_ref, stream_max,
                              stream_timeout, stream_floor);
        }
    } catch (const Error& e) {
        std::cerr << "error:" << e.category() << ": " << e.what() << "\n";
        if (e.category() == "usage") return 1;
        if (e.category() == "numeric") return 3;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error:internal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
