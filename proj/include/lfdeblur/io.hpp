// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "lfdeblur/light_field.hpp"
#include "lfdeblur/motion_path.hpp"
#include "lfdeblur/solver.hpp"

namespace lfd {

// Malformed or unreadable data (bad magic, truncated payload, broken PNG,
// invalid JSON); distinct from usage errors so the CLI can map exit codes.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// LFZ container: "LFZ1", five u32 LE dims (ny nx nv nu nc), two f64 LE
// pitches, then float32 LE samples in (y, x, v, u, c) order. Round trips
// bit-exactly. File writes go through a temp file and rename.
void write_lfz(const LightField &lf, std::ostream &sink);
void write_lfz(const LightField &lf, const std::filesystem::path &path);
LightField read_lfz(std::istream &source);
LightField read_lfz(const std::filesystem::path &path);

// PNG images: 8- or 16-bit, grayscale or RGB, mapped linearly to [0,1].
// Exports clamp to [0,1] and encode 16-bit, so export/import round trips
// are pixel-exact. srgb_to_linear applies the inverse sRGB curve on load.
Image read_png(const std::filesystem::path &path, bool srgb_to_linear = false);
void write_png16(const Image &img, const std::filesystem::path &path);

// Sub-aperture grid interchange, one "view_vVV_uUU.png" per view.
std::string view_filename(int v, int u);
LightField import_png_grid(const std::filesystem::path &dir, int nv, int nu,
                           bool srgb_to_linear = false);
void export_png_grid(const LightField &lf, const std::filesystem::path &dir);

// Motion path sidecar: {"version":1, "n":…, "control_points":[[px,py,pz]…],
// "units":…}; the first point must be the origin.
MotionPath read_path_json(const std::filesystem::path &path);
void write_path_json(const MotionPath &path, const std::filesystem::path &file);

// Solver config (missing fields keep their defaults) and report sidecars.
SolverConfig read_solver_config(const std::filesystem::path &path);
void write_solver_report(const SolverReport &report, const std::filesystem::path &path);

} // namespace lfd
