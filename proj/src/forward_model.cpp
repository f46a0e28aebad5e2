// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#include "lfdeblur/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lfd {

namespace {

struct PathSamples {
    std::vector<std::array<double, 3>> p;       // path position per time sample
    std::vector<std::vector<double>> basis;     // Bernstein weights per time sample
    double wt;                                  // 1/T
};

PathSamples sample_path(const MotionPath &path, const ExposureConfig &cfg) {
    if (cfg.num_time_samples < 1)
        throw std::invalid_argument("blur: num_time_samples must be >= 1");
    PathSamples s;
    s.wt = 1.0 / cfg.num_time_samples;
    for (double t : midpoint_times(cfg.num_time_samples)) {
        s.basis.push_back(bernstein_weights(path.n(), t));
        std::array<double, 3> pt = {0.0, 0.0, 0.0};
        for (int i = 0; i < path.n(); ++i)
            for (int k = 0; k < 3; ++k)
                pt[k] += s.basis.back()[i] * path.control_points[i][k];
        s.p.push_back(pt);
    }
    return s;
}

// Clamped bilinear footprint along one axis: positions i0/i1 with weights
// (1-f)/f for a gather at (i + offset). live is 0 when the position was
// clamped: the sample no longer varies with the offset there, so its
// derivative contribution must vanish.
struct AxisTap {
    int i0, i1;
    double f;
    double live;
};

inline AxisTap axis_tap(int i, double offset, int n) {
    double q = i + offset;
    double live = (q >= 0.0 && q <= (double)(n - 1)) ? 1.0 : 0.0;
    q = std::clamp(q, 0.0, (double)(n - 1));
    int i0 = (int)std::floor(q);
    int i1 = std::min(i0 + 1, n - 1);
    return {i0, i1, q - i0, live};
}

} // namespace

LightField shear_and_shift(const LightField &lf, double p_x, double p_y, double p_z) {
    MotionPath path(std::vector<std::array<double, 3>>{{p_x, p_y, p_z}, {p_x, p_y, p_z}});
    ExposureConfig cfg;
    cfg.num_time_samples = 1;
    return blur(lf, path, cfg);
}

LightField blur(const LightField &lf, const MotionPath &path, const ExposureConfig &cfg) {
    PathSamples ps = sample_path(path, cfg);
    const int ny = lf.ny(), nx = lf.nx(), nv = lf.nv(), nu = lf.nu(), nc = lf.nc();
    const int T = cfg.num_time_samples;

    LightField out(ny, nx, nv, nu, nc);
    out.spatial_pitch = lf.spatial_pitch;
    out.angular_pitch = lf.angular_pitch;
    std::vector<double> acc((size_t)nv * nu * nc);

    for (int y = 0; y < ny; ++y) {
        double yc = grid_to_centered(y, ny);
        for (int x = 0; x < nx; ++x) {
            double xc = grid_to_centered(x, nx);
            const float *in = lf.ray_block(y, x);
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int k = 0; k < T; ++k) {
                double du = ps.p[k][0] - xc * ps.p[k][2];
                double dv = ps.p[k][1] - yc * ps.p[k][2];
                size_t o = 0;
                for (int v = 0; v < nv; ++v) {
                    AxisTap tv = axis_tap(v, dv, nv);
                    const float *r0 = in + (size_t)tv.i0 * nu * nc;
                    const float *r1 = in + (size_t)tv.i1 * nu * nc;
                    for (int u = 0; u < nu; ++u) {
                        AxisTap tu = axis_tap(u, du, nu);
                        for (int c = 0; c < nc; ++c) {
                            double s0 = (1 - tu.f) * r0[tu.i0 * nc + c] +
                                        tu.f * r0[tu.i1 * nc + c];
                            double s1 = (1 - tu.f) * r1[tu.i0 * nc + c] +
                                        tu.f * r1[tu.i1 * nc + c];
                            acc[o++] += ps.wt * ((1 - tv.f) * s0 + tv.f * s1);
                        }
                    }
                }
            }
            float *dst = out.ray_block(y, x);
            for (size_t i = 0; i < acc.size(); ++i)
                dst[i] = (float)acc[i];
        }
    }
    return out;
}

LightField blur_adjoint(const LightField &residual, const MotionPath &path,
                        const ExposureConfig &cfg) {
    PathSamples ps = sample_path(path, cfg);
    const int ny = residual.ny(), nx = residual.nx(), nv = residual.nv(), nu = residual.nu(),
              nc = residual.nc();
    const int T = cfg.num_time_samples;

    LightField out(ny, nx, nv, nu, nc);
    std::vector<double> acc((size_t)nv * nu * nc);

    for (int y = 0; y < ny; ++y) {
        double yc = grid_to_centered(y, ny);
        for (int x = 0; x < nx; ++x) {
            double xc = grid_to_centered(x, nx);
            const float *in = residual.ray_block(y, x);
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int k = 0; k < T; ++k) {
                double du = ps.p[k][0] - xc * ps.p[k][2];
                double dv = ps.p[k][1] - yc * ps.p[k][2];
                size_t o = 0;
                for (int v = 0; v < nv; ++v) {
                    AxisTap tv = axis_tap(v, dv, nv);
                    double *a0 = acc.data() + (size_t)tv.i0 * nu * nc;
                    double *a1 = acc.data() + (size_t)tv.i1 * nu * nc;
                    for (int u = 0; u < nu; ++u) {
                        AxisTap tu = axis_tap(u, du, nu);
                        for (int c = 0; c < nc; ++c) {
                            double g = ps.wt * in[o++];
                            a0[tu.i0 * nc + c] += (1 - tv.f) * (1 - tu.f) * g;
                            a0[tu.i1 * nc + c] += (1 - tv.f) * tu.f * g;
                            a1[tu.i0 * nc + c] += tv.f * (1 - tu.f) * g;
                            a1[tu.i1 * nc + c] += tv.f * tu.f * g;
                        }
                    }
                }
            }
            float *dst = out.ray_block(y, x);
            for (size_t i = 0; i < acc.size(); ++i)
                dst[i] = (float)acc[i];
        }
    }
    return out;
}

std::vector<std::array<double, 3>> path_gradient(const LightField &lf, const MotionPath &path,
                                                 const LightField &residual,
                                                 const ExposureConfig &cfg) {
    if (!lf.same_shape(residual))
        throw std::invalid_argument("path_gradient: lf and residual shapes differ");
    PathSamples ps = sample_path(path, cfg);
    const int ny = lf.ny(), nx = lf.nx(), nv = lf.nv(), nu = lf.nu(), nc = lf.nc();
    const int T = cfg.num_time_samples;
    const int n = path.n();

    std::vector<std::array<double, 3>> grad(n, {0.0, 0.0, 0.0});
    for (int y = 0; y < ny; ++y) {
        double yc = grid_to_centered(y, ny);
        for (int x = 0; x < nx; ++x) {
            double xc = grid_to_centered(x, nx);
            const float *in = lf.ray_block(y, x);
            const float *res = residual.ray_block(y, x);
            for (int k = 0; k < T; ++k) {
                double du = ps.p[k][0] - xc * ps.p[k][2];
                double dv = ps.p[k][1] - yc * ps.p[k][2];
                // Accumulate d<blur, residual>/d(du) and /d(dv) for this
                // ray bundle and time sample.
                double s_du = 0.0, s_dv = 0.0;
                size_t o = 0;
                for (int v = 0; v < nv; ++v) {
                    AxisTap tv = axis_tap(v, dv, nv);
                    const float *r0 = in + (size_t)tv.i0 * nu * nc;
                    const float *r1 = in + (size_t)tv.i1 * nu * nc;
                    for (int u = 0; u < nu; ++u) {
                        AxisTap tu = axis_tap(u, du, nu);
                        for (int c = 0; c < nc; ++c) {
                            double r = res[o++];
                            double du0 = r0[tu.i1 * nc + c] - r0[tu.i0 * nc + c];
                            double du1 = r1[tu.i1 * nc + c] - r1[tu.i0 * nc + c];
                            s_du += r * tu.live * ((1 - tv.f) * du0 + tv.f * du1);
                            double v0 = (1 - tu.f) * r0[tu.i0 * nc + c] +
                                        tu.f * r0[tu.i1 * nc + c];
                            double v1 = (1 - tu.f) * r1[tu.i0 * nc + c] +
                                        tu.f * r1[tu.i1 * nc + c];
                            s_dv += r * tv.live * (v1 - v0);
                        }
                    }
                }
                double gx = ps.wt * s_du;
                double gy = ps.wt * s_dv;
                double gz = ps.wt * (-xc * s_du - yc * s_dv);
                for (int i = 0; i < n; ++i) {
                    double b = ps.basis[k][i];
                    grad[i][0] += b * gx;
                    grad[i][1] += b * gy;
                    grad[i][2] += b * gz;
                }
            }
        }
    }
    return grad;
}

} // namespace lfd
