// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "lfdeblur/image.hpp"

namespace lfd {

// Centered continuous coordinate of grid index i on an axis with n samples.
// Index (n-1)/2 maps to coordinate 0, so axes are symmetric about zero.
inline double grid_to_centered(int i, int n) { return i - 0.5 * (n - 1); }
inline double centered_to_grid(double coord, int n) { return coord + 0.5 * (n - 1); }

// Two-plane light field, stored row-major as (y, x, v, u, c) with c fastest.
// (x, y) index the spatial plane, (u, v) the angular plane at unit
// separation; a ray (x, u) crosses depth z at spatial coordinate x*z + u
// in centered coordinates.
class LightField {
  public:
    LightField() = default;
    LightField(int ny, int nx, int nv, int nu, int nc = 1, float fill = 0.f)
        : ny_(ny), nx_(nx), nv_(nv), nu_(nu), nc_(nc),
          data_((size_t)ny * nx * nv * nu * nc, fill) {
        if (ny < 1 || nx < 1 || nv < 1 || nu < 1)
            throw std::invalid_argument("LightField: dimensions must be positive");
        if (nc != 1 && nc != 3)
            throw std::invalid_argument("LightField: channel count must be 1 or 3");
    }

    // Separation between the spatial and angular planes; fixed by convention.
    static constexpr double plane_separation = 1.0;

    int ny() const { return ny_; }
    int nx() const { return nx_; }
    int nv() const { return nv_; }
    int nu() const { return nu_; }
    int nc() const { return nc_; }
    size_t size() const { return data_.size(); }

    float &at(int y, int x, int v, int u, int c = 0) { return data_[idx(y, x, v, u, c)]; }
    float at(int y, int x, int v, int u, int c = 0) const { return data_[idx(y, x, v, u, c)]; }

    float *data() { return data_.data(); }
    const float *data() const { return data_.data(); }

    // Pointer to the (nv*nu*nc)-sample angular block of one ray bundle (y, x).
    float *ray_block(int y, int x) { return data_.data() + idx(y, x, 0, 0, 0); }
    const float *ray_block(int y, int x) const { return data_.data() + idx(y, x, 0, 0, 0); }

    // Bilinear sample in the angular plane at continuous (v, u) for fixed
    // spatial index (y, x), clamp-to-edge.
    double sample_angular(int y, int x, double v, double u, int c = 0) const;

    // Bilinear sample in the spatial plane at continuous (y, x) for fixed
    // view (v, u), clamp-to-edge.
    double sample_spatial(double y, double x, int v, int u, int c = 0) const;

    bool same_shape(const LightField &o) const {
        return ny_ == o.ny_ && nx_ == o.nx_ && nv_ == o.nv_ && nu_ == o.nu_ && nc_ == o.nc_;
    }

    // Physical sample pitches carried through I/O; no computation uses them.
    double spatial_pitch = 1.0;
    double angular_pitch = 1.0;

  private:
    size_t idx(int y, int x, int v, int u, int c) const {
        return ((((size_t)y * nx_ + x) * nv_ + v) * nu_ + u) * nc_ + c;
    }

    int ny_ = 0, nx_ = 0, nv_ = 0, nu_ = 0, nc_ = 0;
    std::vector<float> data_;
};

// Single view at angular index (v, u).
Image subaperture(const LightField &lf, int v, int u);

// Central view, angular index (nv/2, nu/2).
Image central_view(const LightField &lf);

// 2D slice at fixed (y, v): rows are x, columns are u.
Image epipolar_slice(const LightField &lf, int y, int v);

// Mean over all views.
Image full_aperture(const LightField &lf);

// Synthetic refocus at a given depth slope (angular samples per spatial
// sample). Each view is projected onto the spatial plane by scaling about
// its own angular position, then the views are averaged: content lying at
// depth `slope` aligns across views and comes out sharp. slope == 0
// degenerates to the plain view average. |slope| small enough that the
// projection would stretch past 4x the spatial extent is rejected.
Image refocus(const LightField &lf, double slope);

double rmse(const LightField &a, const LightField &b);

} // namespace lfd
