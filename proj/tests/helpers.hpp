// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <lfdeblur/image.hpp>
#include <lfdeblur/light_field.hpp>

namespace lfd::test {

inline LightField random_lf(int ny, int nx, int nv, int nu, int nc, uint32_t seed) {
    LightField lf(ny, nx, nv, nu, nc);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (size_t i = 0; i < lf.size(); ++i) lf.data()[i] = dist(rng);
    return lf;
}

inline Image random_image(int ny, int nx, int nc, uint32_t seed) {
    Image im(ny, nx, nc);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (size_t i = 0; i < im.size(); ++i) im.data()[i] = dist(rng);
    return im;
}

// Seeded noise field smoothed with a separable Gaussian along all four
// axes (clamp-to-edge), so bilinear kinks are gentle and finite-difference
// probes stay clean.
inline LightField smooth_random_lf(int ny, int nx, int nv, int nu, int nc, uint32_t seed,
                                   double sigma = 1.0) {
    LightField lf = random_lf(ny, nx, nv, nu, nc, seed);
    int radius = int(std::ceil(3.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double norm = 0.0;
    for (int i = -radius; i <= radius; ++i)
        norm += taps[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (auto& t : taps) t /= norm;

    auto pass = [&](auto&& index, int n) {
        LightField out = lf;
        for (int y = 0; y < lf.ny(); ++y)
            for (int x = 0; x < lf.nx(); ++x)
                for (int v = 0; v < lf.nv(); ++v)
                    for (int u = 0; u < lf.nu(); ++u)
                        for (int c = 0; c < lf.nc(); ++c) {
                            double acc = 0.0;
                            for (int i = -radius; i <= radius; ++i) {
                                int yy = y, xx = x, vv = v, uu = u;
                                index(yy, xx, vv, uu, i, n);
                                acc += taps[i + radius] * lf.at(yy, xx, vv, uu, c);
                            }
                            out.at(y, x, v, u, c) = float(acc);
                        }
        lf = out;
    };
    auto clampi = [](int i, int n) { return std::max(0, std::min(n - 1, i)); };
    pass([&](int& y, int&, int&, int&, int i, int n) { y = clampi(y + i, n); }, ny);
    pass([&](int&, int& x, int&, int&, int i, int n) { x = clampi(x + i, n); }, nx);
    pass([&](int&, int&, int& v, int&, int i, int n) { v = clampi(v + i, n); }, nv);
    pass([&](int&, int&, int&, int& u, int i, int n) { u = clampi(u + i, n); }, nu);
    return lf;
}

inline double dot(const LightField& a, const LightField& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += double(a.data()[i]) * double(b.data()[i]);
    return acc;
}

inline double max_abs_diff(const LightField& a, const LightField& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(double(a.data()[i]) - double(b.data()[i])));
    return m;
}

inline double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(double(a.data()[i]) - double(b.data()[i])));
    return m;
}

// RMSE over pixels at least `border` samples from every image edge.
inline double rmse_border(const Image& a, const Image& b, int border) {
    double acc = 0.0;
    size_t n = 0;
    for (int y = border; y < a.ny() - border; ++y)
        for (int x = border; x < a.nx() - border; ++x)
            for (int c = 0; c < a.nc(); ++c) {
                double d = double(a.at(y, x, c)) - double(b.at(y, x, c));
                acc += d * d;
                ++n;
            }
    return std::sqrt(acc / double(n));
}

} // namespace lfd::test
