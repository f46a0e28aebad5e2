// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace lfd {

// Row-major float image, layout (y, x, c) with c fastest.
class Image {
  public:
    Image() = default;
    Image(int ny, int nx, int nc = 1, float fill = 0.f)
        : ny_(ny), nx_(nx), nc_(nc), data_((size_t)ny * nx * nc, fill) {
        if (ny < 1 || nx < 1 || nc < 1)
            throw std::invalid_argument("Image: dimensions must be positive");
    }

    int ny() const { return ny_; }
    int nx() const { return nx_; }
    int nc() const { return nc_; }
    size_t size() const { return data_.size(); }

    float &at(int y, int x, int c = 0) { return data_[idx(y, x, c)]; }
    float at(int y, int x, int c = 0) const { return data_[idx(y, x, c)]; }

    float *data() { return data_.data(); }
    const float *data() const { return data_.data(); }

    // Bilinear sample at continuous grid position (y, x), clamp-to-edge.
    double sample(double y, double x, int c = 0) const {
        double yc = std::clamp(y, 0.0, (double)(ny_ - 1));
        double xc = std::clamp(x, 0.0, (double)(nx_ - 1));
        int y0 = (int)std::floor(yc), x0 = (int)std::floor(xc);
        int y1 = std::min(y0 + 1, ny_ - 1), x1 = std::min(x0 + 1, nx_ - 1);
        double fy = yc - y0, fx = xc - x0;
        double v00 = at(y0, x0, c), v01 = at(y0, x1, c);
        double v10 = at(y1, x0, c), v11 = at(y1, x1, c);
        return (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
    }

    bool same_shape(const Image &o) const {
        return ny_ == o.ny_ && nx_ == o.nx_ && nc_ == o.nc_;
    }

  private:
    size_t idx(int y, int x, int c) const { return ((size_t)y * nx_ + x) * nc_ + c; }

    int ny_ = 0, nx_ = 0, nc_ = 0;
    std::vector<float> data_;
};

// RMSE over all samples; shapes must match.
double rmse(const Image &a, const Image &b);

// RMSE over an interior window that excludes a relative border on each
// spatial edge (border_frac of the extent, rounded up).
double rmse_interior(const Image &a, const Image &b, double border_frac);

} // namespace lfd
