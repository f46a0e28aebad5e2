// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#include "lfdeblur/light_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lfd {

double rmse(const Image &a, const Image &b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("rmse: image shapes differ");
    double acc = 0.0;
    const float *pa = a.data(), *pb = b.data();
    for (size_t i = 0; i < a.size(); ++i) {
        double d = (double)pa[i] - pb[i];
        acc += d * d;
    }
    return std::sqrt(acc / (double)a.size());
}

double rmse_interior(const Image &a, const Image &b, double border_frac) {
    if (!a.same_shape(b))
        throw std::invalid_argument("rmse: image shapes differ");
    int by = (int)std::ceil(a.ny() * border_frac);
    int bx = (int)std::ceil(a.nx() * border_frac);
    if (a.ny() - 2 * by <= 0 || a.nx() - 2 * bx <= 0)
        throw std::invalid_argument("rmse_interior: border leaves no interior");
    double acc = 0.0;
    size_t n = 0;
    for (int y = by; y < a.ny() - by; ++y)
        for (int x = bx; x < a.nx() - bx; ++x)
            for (int c = 0; c < a.nc(); ++c) {
                double d = (double)a.at(y, x, c) - b.at(y, x, c);
                acc += d * d;
                ++n;
            }
    return std::sqrt(acc / (double)n);
}

double rmse(const LightField &a, const LightField &b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("rmse: light field shapes differ");
    double acc = 0.0;
    const float *pa = a.data(), *pb = b.data();
    for (size_t i = 0; i < a.size(); ++i) {
        double d = (double)pa[i] - pb[i];
        acc += d * d;
    }
    return std::sqrt(acc / (double)a.size());
}

double LightField::sample_angular(int y, int x, double v, double u, int c) const {
    double vc = std::clamp(v, 0.0, (double)(nv_ - 1));
    double uc = std::clamp(u, 0.0, (double)(nu_ - 1));
    int v0 = (int)std::floor(vc), u0 = (int)std::floor(uc);
    int v1 = std::min(v0 + 1, nv_ - 1), u1 = std::min(u0 + 1, nu_ - 1);
    double fv = vc - v0, fu = uc - u0;
    double s00 = at(y, x, v0, u0, c), s01 = at(y, x, v0, u1, c);
    double s10 = at(y, x, v1, u0, c), s11 = at(y, x, v1, u1, c);
    return (1 - fv) * ((1 - fu) * s00 + fu * s01) + fv * ((1 - fu) * s10 + fu * s11);
}

double LightField::sample_spatial(double y, double x, int v, int u, int c) const {
    double yc = std::clamp(y, 0.0, (double)(ny_ - 1));
    double xc = std::clamp(x, 0.0, (double)(nx_ - 1));
    int y0 = (int)std::floor(yc), x0 = (int)std::floor(xc);
    int y1 = std::min(y0 + 1, ny_ - 1), x1 = std::min(x0 + 1, nx_ - 1);
    double fy = yc - y0, fx = xc - x0;
    double s00 = at(y0, x0, v, u, c), s01 = at(y0, x1, v, u, c);
    double s10 = at(y1, x0, v, u, c), s11 = at(y1, x1, v, u, c);
    return (1 - fy) * ((1 - fx) * s00 + fx * s01) + fy * ((1 - fx) * s10 + fx * s11);
}

static void check_view_index(const LightField &lf, int v, int u) {
    if (v < 0 || v >= lf.nv())
        throw std::out_of_range("view index v=" + std::to_string(v) + " out of range [0," +
                                std::to_string(lf.nv()) + ")");
    if (u < 0 || u >= lf.nu())
        throw std::out_of_range("view index u=" + std::to_string(u) + " out of range [0," +
                                std::to_string(lf.nu()) + ")");
}

Image subaperture(const LightField &lf, int v, int u) {
    check_view_index(lf, v, u);
    Image out(lf.ny(), lf.nx(), lf.nc());
    for (int y = 0; y < lf.ny(); ++y)
        for (int x = 0; x < lf.nx(); ++x)
            for (int c = 0; c < lf.nc(); ++c)
                out.at(y, x, c) = lf.at(y, x, v, u, c);
    return out;
}

Image central_view(const LightField &lf) { return subaperture(lf, lf.nv() / 2, lf.nu() / 2); }

Image epipolar_slice(const LightField &lf, int y, int v) {
    if (y < 0 || y >= lf.ny())
        throw std::out_of_range("slice index y=" + std::to_string(y) + " out of range [0," +
                                std::to_string(lf.ny()) + ")");
    if (v < 0 || v >= lf.nv())
        throw std::out_of_range("slice index v=" + std::to_string(v) + " out of range [0," +
                                std::to_string(lf.nv()) + ")");
    Image out(lf.nx(), lf.nu(), lf.nc());
    for (int x = 0; x < lf.nx(); ++x)
        for (int u = 0; u < lf.nu(); ++u)
            for (int c = 0; c < lf.nc(); ++c)
                out.at(x, u, c) = lf.at(y, x, v, u, c);
    return out;
}

Image full_aperture(const LightField &lf) {
    Image out(lf.ny(), lf.nx(), lf.nc());
    double inv = 1.0 / ((double)lf.nv() * lf.nu());
    std::vector<double> acc(lf.nc());
    for (int y = 0; y < lf.ny(); ++y)
        for (int x = 0; x < lf.nx(); ++x) {
            std::fill(acc.begin(), acc.end(), 0.0);
            const float *blk = lf.ray_block(y, x);
            int n = lf.nv() * lf.nu();
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < lf.nc(); ++c)
                    acc[c] += blk[i * lf.nc() + c];
            for (int c = 0; c < lf.nc(); ++c)
                out.at(y, x, c) = (float)(acc[c] * inv);
        }
    return out;
}

Image refocus(const LightField &lf, double slope) {
    if (slope == 0.0)
        return full_aperture(lf);

    // The projection samples views at spatial coordinate (x - u_c) / slope;
    // reject slopes so shallow that it reaches past 4x the grid extent.
    double half_x = 0.5 * (lf.nx() - 1), half_u = 0.5 * (lf.nu() - 1);
    double half_y = 0.5 * (lf.ny() - 1), half_v = 0.5 * (lf.nv() - 1);
    double reach_x = (half_x + half_u) / std::abs(slope);
    double reach_y = (half_y + half_v) / std::abs(slope);
    if (reach_x > 4.0 * std::max(half_x, 1.0) || reach_y > 4.0 * std::max(half_y, 1.0))
        throw std::domain_error("refocus: |slope|=" + std::to_string(std::abs(slope)) +
                                " projects past 4x the spatial extent");

    Image out(lf.ny(), lf.nx(), lf.nc());
    double inv = 1.0 / ((double)lf.nv() * lf.nu());
    std::vector<double> acc(lf.nc());
    for (int y = 0; y < lf.ny(); ++y) {
        double yc = grid_to_centered(y, lf.ny());
        for (int x = 0; x < lf.nx(); ++x) {
            double xc = grid_to_centered(x, lf.nx());
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int v = 0; v < lf.nv(); ++v) {
                double sy = centered_to_grid((yc - grid_to_centered(v, lf.nv())) / slope, lf.ny());
                for (int u = 0; u < lf.nu(); ++u) {
                    double sx =
                        centered_to_grid((xc - grid_to_centered(u, lf.nu())) / slope, lf.nx());
                    for (int c = 0; c < lf.nc(); ++c)
                        acc[c] += lf.sample_spatial(sy, sx, v, u, c);
                }
            }
            for (int c = 0; c < lf.nc(); ++c)
                out.at(y, x, c) = (float)(acc[c] * inv);
        }
    }
    return out;
}

} // namespace lfd
