// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0
//
// lfd: command-line front end. Diagnostics go to stderr; machine output is
// JSON, written to files or stdout. Exit codes: 0 success, 1 usage error,
// 2 data/format error, 3 solver divergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lfdeblur/forward_model.hpp"
#include "lfdeblur/fourier.hpp"
#include "lfdeblur/io.hpp"
#include "lfdeblur/light_field.hpp"
#include "lfdeblur/motion_path.hpp"
#include "lfdeblur/solver.hpp"
#include "lfdeblur/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Atomic text write matching the library's temp-file-then-rename policy.
void write_text(const fs::path &path, const std::string &text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw lfd::FormatError("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out)
            throw lfd::FormatError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

// Texture wide enough that every ray lands inside it at slope z:
// |x·z + u| <= (nx-1)/2·|z| + (nu-1)/2. Odd size keeps the texture grid
// aligned with the light field's centered coordinates.
int texture_size(const std::vector<int> &dims, double max_abs_depth) {
    double reach = 0.5 * (std::max(dims[0], dims[1]) - 1) * std::max(1.0, max_abs_depth) +
                   0.5 * (std::max(dims[2], dims[3]) - 1);
    return std::max(2 * (int)std::ceil(reach) + 1, 9);
}

lfd::Image disk_alpha(int size, double radius_frac) {
    lfd::Image a(size, size, 1);
    double c = 0.5 * (size - 1), r = radius_frac * size;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            a.at(y, x) = std::hypot(y - c, x - c) <= r ? 1.f : 0.f;
    return a;
}

lfd::LightField run_synth(const std::string &kind, const std::vector<int> &dims,
                          std::vector<double> depths, uint32_t seed) {
    int ny = dims[0], nx = dims[1], nv = dims[2], nu = dims[3];
    if (kind == "plane") {
        if (depths.empty())
            depths = {0.5};
        if (depths.size() != 1)
            throw std::invalid_argument("synth: kind plane takes exactly one depth");
        int size = texture_size(dims, std::fabs(depths[0]));
        return lfd::plane_lightfield(lfd::make_noise(size, seed), depths[0], ny, nx, nv, nu);
    }
    if (kind == "two-plane") {
        if (depths.empty())
            depths = {0.2, 0.8};
        if (depths.size() != 2)
            throw std::invalid_argument("synth: kind two-plane takes exactly two depths");
        int size = texture_size(dims, std::max(std::fabs(depths[0]), std::fabs(depths[1])));
        lfd::PlaneScene scene;
        scene.planes.push_back({lfd::make_noise(size, seed), disk_alpha(size, 0.3), depths[0]});
        scene.planes.push_back({lfd::make_noise(size, seed + 1), std::nullopt, depths[1]});
        scene.background = {0.f};
        return lfd::multiplane_lightfield(scene, ny, nx, nv, nu);
    }
    // checker-scene: opaque checker backdrop at the last depth, one
    // disk-masked checker per depth in front of it.
    if (depths.empty())
        depths = {0.4};
    double max_depth = 0.0;
    for (double d : depths)
        max_depth = std::max(max_depth, std::fabs(d));
    int size = texture_size(dims, max_depth);
    lfd::PlaneScene scene;
    int fronts = (int)depths.size() - 1;
    for (int i = 0; i < fronts; ++i)
        scene.planes.push_back({lfd::make_checker(size, 2 + 2 * i),
                                disk_alpha(size, 0.35 * (i + 1) / fronts), depths[i]});
    scene.planes.push_back({lfd::make_checker(size, 2 + 2 * fronts), std::nullopt, depths.back()});
    scene.background = {0.f};
    return lfd::multiplane_lightfield(scene, ny, nx, nv, nu);
}

void report_path_warnings(const lfd::MotionPath &path, int nu) {
    for (const auto &w : path.validate(nu))
        std::cerr << "warning: " << w << "\n";
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1)
        throw std::invalid_argument("slope grid needs at least one entry");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return g;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"lfd: light field motion blur toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    // synth
    std::string sy_kind, sy_out;
    std::vector<int> sy_dims;
    std::vector<double> sy_depths;
    uint32_t sy_seed = 0;
    auto *synth = app.add_subcommand("synth", "render a synthetic light field (single channel)");
    synth->add_option("--kind", sy_kind, "plane | two-plane | checker-scene")
        ->required()
        ->check(CLI::IsMember({"plane", "two-plane", "checker-scene"}));
    synth->add_option("--dims", sy_dims, "NY NX NV NU")->required()->expected(4)->check(CLI::PositiveNumber);
    synth->add_option("--depths", sy_depths, "epipolar slopes, front to back (increasing)");
    synth->add_option("--seed", sy_seed, "texture seed");
    synth->add_option("-o,--output", sy_out, "output .lfz")->required();
    synth->callback([&] { lfd::write_lfz(run_synth(sy_kind, sy_dims, sy_depths, sy_seed), sy_out); });

    // blur
    std::string bl_in, bl_path, bl_out;
    int bl_samples = 32;
    auto *blur = app.add_subcommand("blur", "apply motion blur along a path");
    blur->add_option("-i,--input", bl_in, "sharp .lfz")->required();
    blur->add_option("--path", bl_path, "motion path .json")->required();
    blur->add_option("--time-samples", bl_samples, "exposure time samples")->check(CLI::PositiveNumber);
    blur->add_option("-o,--output", bl_out, "output .lfz")->required();
    blur->callback([&] {
        lfd::LightField lf = lfd::read_lfz(fs::path(bl_in));
        lfd::MotionPath path = lfd::read_path_json(bl_path);
        report_path_warnings(path, lf.nu());
        lfd::LightField out = lfd::blur(lf, path, {bl_samples});
        out.spatial_pitch = lf.spatial_pitch;
        out.angular_pitch = lf.angular_pitch;
        lfd::write_lfz(out, fs::path(bl_out));
    });

    // deconv-inplane
    std::string dc_in, dc_path, dc_out;
    double dc_eps = 1e-3;
    int dc_samples = 32;
    auto *deconv = app.add_subcommand("deconv-inplane", "Wiener deconvolution of an in-plane blur");
    deconv->add_option("-i,--input", dc_in, "blurred .lfz")->required();
    deconv->add_option("--path", dc_path, "in-plane motion path .json")->required();
    deconv->add_option("--wiener-eps", dc_eps, "Wiener regularizer")->check(CLI::PositiveNumber);
    deconv->add_option("--time-samples", dc_samples, "kernel rasterization samples")->check(CLI::PositiveNumber);
    deconv->add_option("-o,--output", dc_out, "output .lfz")->required();
    deconv->callback([&] {
        lfd::LightField lf = lfd::read_lfz(fs::path(dc_in));
        lfd::MotionPath path = lfd::read_path_json(dc_path);
        report_path_warnings(path, lf.nu());
        lfd::BlurKernel kernel = lfd::rasterize_kernel(path, {dc_samples}, lf.nv(), lf.nu());
        lfd::LightField out = lfd::deconvolve_inplane(lf, kernel, dc_eps);
        out.spatial_pitch = lf.spatial_pitch;
        out.angular_pitch = lf.angular_pitch;
        lfd::write_lfz(out, fs::path(dc_out));
    });

    // recover-texture
    std::string rt_in, rt_out, rt_weights;
    double rt_zmin = 0.0, rt_zmax = 0.0;
    int rt_slopes = 0;
    auto *recover = app.add_subcommand("recover-texture", "blind texture recovery from an out-of-plane blur");
    recover->add_option("-i,--input", rt_in, "blurred .lfz")->required();
    recover->add_option("--zmin", rt_zmin, "lowest slope in the grid")->required();
    recover->add_option("--zmax", rt_zmax, "highest slope in the grid")->required();
    recover->add_option("--slopes", rt_slopes, "grid size")->required()->check(CLI::PositiveNumber);
    recover->add_option("-o,--output", rt_out, "recovered texture .png")->required();
    recover->add_option("--weights", rt_weights, "slope weight report .json");
    recover->callback([&] {
        lfd::LightField lf = lfd::read_lfz(fs::path(rt_in));
        lfd::TextureRecovery rec = lfd::recover_texture(lf, linspace(rt_zmin, rt_zmax, rt_slopes));
        lfd::write_png16(rec.texture, rt_out);
        if (!rt_weights.empty()) {
            json j;
            j["slopes"] = rec.slopes;
            j["weights"] = rec.weights;
            j["zeta"] = rec.zeta;
            j["selected"] = rec.selected;
            j["degenerate"] = rec.degenerate;
            write_text(rt_weights, j.dump(2) + "\n");
        }
    });

    // deblur-blind
    std::string db_in, db_cfg, db_out, db_path_out, db_report;
    auto *deblur = app.add_subcommand("deblur-blind", "jointly estimate the sharp light field and motion path");
    deblur->add_option("-i,--input", db_in, "blurred .lfz")->required();
    deblur->add_option("--config", db_cfg, "solver config .json (missing fields keep defaults)");
    deblur->add_option("-o,--output", db_out, "deblurred .lfz")->required();
    deblur->add_option("--path-out", db_path_out, "recovered path .json");
    deblur->add_option("--report", db_report, "solver report .json");
    deblur->callback([&] {
        lfd::LightField observed = lfd::read_lfz(fs::path(db_in));
        lfd::SolverConfig cfg;
        if (!db_cfg.empty())
            cfg = lfd::read_solver_config(db_cfg);
        lfd::SolverReport rep = lfd::blind_deblur(observed, cfg);
        rep.final_lf.spatial_pitch = observed.spatial_pitch;
        rep.final_lf.angular_pitch = observed.angular_pitch;
        lfd::write_lfz(rep.final_lf, fs::path(db_out));
        if (!db_path_out.empty())
            lfd::write_path_json(rep.final_path, db_path_out);
        if (!db_report.empty())
            lfd::write_solver_report(rep, db_report);
        std::cerr << "deblur-blind: " << rep.data_trace.size() << " iterations, final loss "
                  << rep.final_loss << "\n";
        if (rep.diverged) {
            std::cerr << "error: solver diverged" << (rep.note.empty() ? "" : ": " + rep.note) << "\n";
            rc = 3;
        }
    });

    // metrics
    std::string mt_a, mt_b;
    bool mt_central = false;
    auto *metrics = app.add_subcommand("metrics", "RMSE between two light fields, as JSON on stdout");
    metrics->add_option("--a", mt_a, "first .lfz")->required();
    metrics->add_option("--b", mt_b, "second .lfz")->required();
    metrics->add_flag("--central-view", mt_central, "compare central views only");
    metrics->callback([&] {
        lfd::LightField a = lfd::read_lfz(fs::path(mt_a));
        lfd::LightField b = lfd::read_lfz(fs::path(mt_b));
        json j;
        j["rmse"] = mt_central ? lfd::rmse(lfd::central_view(a), lfd::central_view(b)) : lfd::rmse(a, b);
        std::cout << j.dump() << "\n";
    });

    // view
    std::string vw_in, vw_out;
    std::vector<int> vw_sub, vw_epi;
    double vw_slope = 0.0;
    auto *view = app.add_subcommand("view", "export a 2D slice as 16-bit PNG");
    view->add_option("-i,--input", vw_in, "input .lfz")->required();
    auto *mode = view->add_option_group("mode")->require_option(1);
    auto *opt_sub = mode->add_option("--sub", vw_sub, "sub-aperture view U V")->expected(2);
    auto *opt_epi = mode->add_option("--epi", vw_epi, "epipolar slice Y V")->expected(2);
    mode->add_option("--refocus", vw_slope, "refocus at slope S");
    view->add_option("-o,--output", vw_out, "output .png")->required();
    view->callback([&] {
        lfd::LightField lf = lfd::read_lfz(fs::path(vw_in));
        lfd::Image img;
        if (*opt_sub)
            img = lfd::subaperture(lf, vw_sub[1], vw_sub[0]);
        else if (*opt_epi)
            img = lfd::epipolar_slice(lf, vw_epi[0], vw_epi[1]);
        else
            img = lfd::refocus(lf, vw_slope);
        lfd::write_png16(img, vw_out);
    });

    try {
        app.parse(argc, argv);
        return rc;
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const lfd::FormatError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
