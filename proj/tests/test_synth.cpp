// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <lfdeblur/light_field.hpp>
#include <lfdeblur/synth.hpp>

#include "helpers.hpp"

using namespace lfd;
using namespace lfd::test;

namespace {

// Straightforward per-ray compositing reference: front-to-back over operator.
LightField composite_reference(const PlaneScene& scene, int ny, int nx, int nv, int nu) {
    int nc = scene.planes.front().texture.nc();
    LightField lf(ny, nx, nv, nu, nc);
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x)
            for (int v = 0; v < nv; ++v)
                for (int u = 0; u < nu; ++u) {
                    double yc = grid_to_centered(y, ny), xc = grid_to_centered(x, nx);
                    double vc = grid_to_centered(v, nv), uc = grid_to_centered(u, nu);
                    for (int c = 0; c < nc; ++c) {
                        double color = 0.0, trans = 1.0;
                        for (const auto& pl : scene.planes) {
                            double row = centered_to_grid(yc * pl.depth + vc, pl.texture.ny());
                            double col = centered_to_grid(xc * pl.depth + uc, pl.texture.nx());
                            double a = pl.alpha ? pl.alpha->sample(row, col, 0) : 1.0;
                            color += trans * a * pl.texture.sample(row, col, c);
                            trans *= 1.0 - a;
                        }
                        color += trans * scene.background[c];
                        lf.at(y, x, v, u, c) = float(color);
                    }
                }
    return lf;
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("checker texture alternates blocks") {
    Image t = make_checker(4, 2);
    std::vector<float> want = {0, 0, 1, 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 0, 0};
    REQUIRE(t.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) CHECK(t.data()[i] == want[i]);
}

TEST_CASE("noise texture is deterministic per seed with sane statistics") {
    Image a = make_noise(64, 123);
    Image b = make_noise(64, 123);
    Image c = make_noise(64, 124);
    CHECK(max_abs_diff(a, b) == 0.0);
    CHECK(max_abs_diff(a, c) > 0.0);
    double mean = 0.0;
    for (size_t i = 0; i < a.size(); ++i) mean += a.data()[i];
    mean /= double(a.size());
    CHECK(mean > 0.45);
    CHECK(mean < 0.55);
}

TEST_CASE("make_texture rejects unknown kinds") {
    CHECK_NOTHROW(make_texture("checker", 16, 0));
    CHECK_NOTHROW(make_texture("noise", 16, 0));
    CHECK_THROWS_AS(make_texture("plasma", 16, 0), std::invalid_argument);
}

TEST_CASE("zero-depth plane has no parallax") {
    Image tex = random_image(31, 31, 1, 41);
    LightField lf = plane_lightfield(tex, 0.0, 10, 12, 3, 5);
    for (int v = 0; v < 3; ++v)
        for (int u = 0; u < 5; ++u) {
            float first = lf.at(0, 0, v, u, 0);
            for (int y = 0; y < 10; ++y)
                for (int x = 0; x < 12; ++x) CHECK(lf.at(y, x, v, u, 0) == first);
        }
}

TEST_CASE("unit-depth plane samples the texture at exact integer offsets") {
    // 161-wide texture + even spatial/angular extents: all sample positions integral.
    Image tex = random_image(161, 161, 1, 42);
    LightField lf = plane_lightfield(tex, 1.0, 128, 128, 4, 4);
    for (int y : {0, 17, 64, 127})
        for (int x : {0, 40, 99, 127})
            for (int v = 0; v < 4; ++v)
                for (int u = 0; u < 4; ++u) {
                    double row =
                        centered_to_grid(grid_to_centered(y, 128) + grid_to_centered(v, 4), 161);
                    double col =
                        centered_to_grid(grid_to_centered(x, 128) + grid_to_centered(u, 4), 161);
                    CHECK(double(lf.at(y, x, v, u, 0)) ==
                          doctest::Approx(tex.at(int(std::lround(row)), int(std::lround(col)), 0))
                              .epsilon(1e-7));
                }
}

TEST_CASE("plane rays are constant along the characteristic direction") {
    Image tex = random_image(61, 61, 1, 43);
    LightField lf = plane_lightfield(tex, 0.5, 24, 24, 1, 8);
    // At slope 1/2, stepping x by +2 and u by -1 tracks the same scene point.
    for (int x = 0; x + 2 < 24; ++x)
        for (int u = 1; u < 8; ++u)
            CHECK(double(lf.at(12, x + 2, 0, u - 1, 0)) ==
                  doctest::Approx(lf.at(12, x, 0, u, 0)).epsilon(1e-6));
}

TEST_CASE("refocusing a plane at its own slope is sharp away from the border") {
    Image tex = make_texture("checker", 161, 0);
    for (double zp : {1.0, -1.0}) {
        LightField lf = plane_lightfield(tex, zp, 64, 64, 6, 6);
        Image got = refocus(lf, zp);
        Image want(64, 64, 1);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                want.at(y, x, 0) =
                    float(tex.sample(centered_to_grid(grid_to_centered(y, 64), 161),
                                     centered_to_grid(grid_to_centered(x, 64), 161), 0));
        int border = int(std::ceil(6 * std::abs(zp) / 2.0)) + 1;
        CHECK(rmse_border(got, want, border) < 1e-3);
    }
}

TEST_CASE("single opaque plane matches plane_lightfield") {
    Image tex = random_image(41, 41, 1, 44);
    PlaneScene scene;
    scene.planes.push_back({tex, std::nullopt, 0.8});
    scene.background = {0.0f};
    LightField a = multiplane_lightfield(scene, 16, 16, 3, 3);
    LightField b = plane_lightfield(tex, 0.8, 16, 16, 3, 3);
    CHECK(max_abs_diff(a, b) == 0.0);
}

TEST_CASE("fully transparent front plane leaves the back plane visible") {
    Image front = random_image(41, 41, 1, 45);
    Image back = random_image(41, 41, 1, 46);
    Image clear(41, 41, 1); // alpha == 0
    PlaneScene scene;
    scene.planes.push_back({front, clear, 0.3});
    scene.planes.push_back({back, std::nullopt, 1.1});
    scene.background = {0.0f};
    LightField got = multiplane_lightfield(scene, 16, 16, 3, 3);
    LightField want = plane_lightfield(back, 1.1, 16, 16, 3, 3);
    CHECK(max_abs_diff(got, want) < 1e-6);
}

TEST_CASE("occluding disk over a backdrop matches the brute-force compositor") {
    Image disk_tex(41, 41, 3);
    Image disk_alpha(41, 41, 1);
    for (int y = 0; y < 41; ++y)
        for (int x = 0; x < 41; ++x) {
            double dy = y - 20.0, dx = x - 20.0;
            bool in = dy * dy + dx * dx <= 100.0;
            disk_alpha.at(y, x, 0) = in ? 1.0f : 0.0f;
            for (int c = 0; c < 3; ++c) disk_tex.at(y, x, c) = in ? 0.2f * (c + 1) : 0.0f;
        }
    Image back = random_image(61, 61, 3, 47);

    PlaneScene scene;
    scene.planes.push_back({disk_tex, disk_alpha, 0.4});
    scene.planes.push_back({back, std::nullopt, 1.2});
    scene.background = {0.1f, 0.2f, 0.3f};

    LightField got = multiplane_lightfield(scene, 20, 20, 4, 4);
    LightField want = composite_reference(scene, 20, 20, 4, 4);
    CHECK(max_abs_diff(got, want) < 1e-6);
}

TEST_CASE("scene validation rejects malformed inputs") {
    Image tex = random_image(8, 8, 1, 48);
    PlaneScene empty;
    empty.background = {0.0f};
    CHECK_THROWS_AS(multiplane_lightfield(empty, 4, 4, 2, 2), std::invalid_argument);

    PlaneScene unsorted;
    unsorted.planes.push_back({tex, std::nullopt, 1.0});
    unsorted.planes.push_back({tex, std::nullopt, 0.5});
    unsorted.background = {0.0f};
    CHECK_THROWS_AS(multiplane_lightfield(unsorted, 4, 4, 2, 2), std::invalid_argument);

    PlaneScene badalpha;
    badalpha.planes.push_back({tex, random_image(4, 4, 1, 1), 1.0});
    badalpha.background = {0.0f};
    CHECK_THROWS_AS(multiplane_lightfield(badalpha, 4, 4, 2, 2), std::invalid_argument);
}

} // TEST_SUITE
