// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#include "lfdeblur/synth.hpp"

#include <random>
#include <stdexcept>

namespace lfd {

Image make_checker(int size, int period) {
    if (size < 1 || period < 1)
        throw std::invalid_argument("make_checker: size and period must be >= 1");
    Image img(size, size, 1);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            img.at(y, x) = ((y / period + x / period) % 2 == 0) ? 0.f : 1.f;
    return img;
}

Image make_noise(int size, uint32_t seed) {
    if (size < 1)
        throw std::invalid_argument("make_noise: size must be >= 1");
    Image img(size, size, 1);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(0.f, 1.f);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            img.at(y, x) = dist(rng);
    return img;
}

Image make_texture(const std::string &kind, int size, uint32_t seed) {
    if (kind == "checker")
        return make_checker(size, 2);
    if (kind == "noise")
        return make_noise(size, seed);
    throw std::invalid_argument("make_texture: unknown kind '" + kind + "'");
}

LightField plane_lightfield(const Image &texture, double z_prime, int ny, int nx, int nv,
                            int nu) {
    LightField lf(ny, nx, nv, nu, texture.nc());
    for (int y = 0; y < ny; ++y) {
        double yc = grid_to_centered(y, ny);
        for (int x = 0; x < nx; ++x) {
            double xc = grid_to_centered(x, nx);
            float *blk = lf.ray_block(y, x);
            int i = 0;
            for (int v = 0; v < nv; ++v) {
                double ty = centered_to_grid(yc * z_prime + grid_to_centered(v, nv),
                                             texture.ny());
                for (int u = 0; u < nu; ++u) {
                    double tx = centered_to_grid(xc * z_prime + grid_to_centered(u, nu),
                                                 texture.nx());
                    for (int c = 0; c < texture.nc(); ++c)
                        blk[i++] = (float)texture.sample(ty, tx, c);
                }
            }
        }
    }
    return lf;
}

LightField multiplane_lightfield(const PlaneScene &scene, int ny, int nx, int nv, int nu) {
    if (scene.planes.empty())
        throw std::invalid_argument("multiplane_lightfield: scene has no planes");
    int nc = scene.planes.front().texture.nc();
    for (const auto &p : scene.planes) {
        if (p.texture.nc() != nc)
            throw std::invalid_argument("multiplane_lightfield: mixed channel counts");
        if (p.alpha && (p.alpha->ny() != p.texture.ny() || p.alpha->nx() != p.texture.nx()))
            throw std::invalid_argument("multiplane_lightfield: alpha dims mismatch texture");
    }
    for (size_t i = 1; i < scene.planes.size(); ++i)
        if (!(scene.planes[i].depth > scene.planes[i - 1].depth))
            throw std::invalid_argument(
                "multiplane_lightfield: depths must increase front to back");
    std::vector<float> bg(nc, 0.f);
    for (int c = 0; c < nc && c < (int)scene.background.size(); ++c)
        bg[c] = scene.background[c];

    LightField lf(ny, nx, nv, nu, nc);
    std::vector<double> color(nc);
    for (int y = 0; y < ny; ++y) {
        double yc = grid_to_centered(y, ny);
        for (int x = 0; x < nx; ++x) {
            double xc = grid_to_centered(x, nx);
            float *blk = lf.ray_block(y, x);
            int i = 0;
            for (int v = 0; v < nv; ++v) {
                double vc = grid_to_centered(v, nv);
                for (int u = 0; u < nu; ++u) {
                    double uc = grid_to_centered(u, nu);
                    std::fill(color.begin(), color.end(), 0.0);
                    double remaining = 1.0;
                    for (const auto &p : scene.planes) {
                        double ty = centered_to_grid(yc * p.depth + vc, p.texture.ny());
                        double tx = centered_to_grid(xc * p.depth + uc, p.texture.nx());
                        double a = p.alpha ? p.alpha->sample(ty, tx) : 1.0;
                        if (a <= 0.0)
                            continue;
                        for (int c = 0; c < nc; ++c)
                            color[c] += remaining * a * p.texture.sample(ty, tx, c);
                        remaining *= 1.0 - a;
                        if (remaining <= 0.0)
                            break;
                    }
                    for (int c = 0; c < nc; ++c)
                        blk[i++] = (float)(color[c] + remaining * bg[c]);
                }
            }
        }
    }
    return lf;
}

} // namespace lfd
