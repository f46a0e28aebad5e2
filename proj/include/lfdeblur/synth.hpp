// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lfdeblur/light_field.hpp"

namespace lfd {

// One fronto-parallel plane of a synthetic scene. depth is the epipolar
// slope in sample units (angular samples per spatial sample). alpha, if
// present, must match the texture's spatial dims (single channel).
struct ScenePlane {
    Image texture;
    std::optional<Image> alpha; // absent = fully opaque
    double depth = 0.0;
};

// Planes ordered front to back (depths strictly increasing) over a constant
// background color.
struct PlaneScene {
    std::vector<ScenePlane> planes;
    std::vector<float> background; // one entry per channel
};

// Procedural textures, deterministic in (kind, size, seed).
// kinds: "checker" (period-2 blocks), "noise" (uniform [0,1)).
// An image file can be loaded with make_texture_from_file in lfdeblur/io.hpp.
Image make_texture(const std::string &kind, int size, uint32_t seed);
Image make_checker(int size, int period);
Image make_noise(int size, uint32_t seed);

// Light field of a textured plane at epipolar slope z_prime: each ray
// (y, x, v, u) samples the texture at centered coordinates
// (x·z' + u, y·z' + v), bilinear with clamp-to-edge.
LightField plane_lightfield(const Image &texture, double z_prime, int ny, int nx, int nv, int nu);

// Multi-plane scene with front-to-back over-compositing per ray.
LightField multiplane_lightfield(const PlaneScene &scene, int ny, int nx, int nv, int nu);

} // namespace lfd
