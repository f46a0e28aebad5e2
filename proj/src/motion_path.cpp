// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#include "lfdeblur/motion_path.hpp"

#include <cmath>
#include <stdexcept>

namespace lfd {

MotionPath::MotionPath(std::vector<std::array<double, 3>> pts)
    : control_points(std::move(pts)) {
    if (control_points.size() < 2)
        throw std::invalid_argument("MotionPath: need at least 2 control points");
    for (const auto &p : control_points)
        for (double v : p)
            if (!std::isfinite(v))
                throw std::invalid_argument("MotionPath: non-finite control point");
}

bool MotionPath::pinned() const {
    const auto &p0 = control_points.front();
    return p0[0] == 0.0 && p0[1] == 0.0 && p0[2] == 0.0;
}

MotionPath MotionPath::zero(int n) {
    return MotionPath(std::vector<std::array<double, 3>>(n, {0.0, 0.0, 0.0}));
}

std::vector<std::string> MotionPath::validate(int nu) const {
    std::vector<std::string> warnings;
    if (!pinned())
        warnings.push_back("first control point is not at the origin (gauge not fixed)");
    for (int i = 0; i < n(); ++i) {
        const auto &p = control_points[i];
        if (std::abs(p[0]) > nu || std::abs(p[1]) > nu)
            warnings.push_back("control point " + std::to_string(i) +
                               " has in-plane magnitude beyond the angular window");
        if (std::abs(p[2]) > 2.0)
            warnings.push_back("control point " + std::to_string(i) +
                               " has |p_z| > 2 slope units");
    }
    return warnings;
}

std::vector<double> bernstein_weights(int n_points, double t) {
    if (n_points < 1)
        throw std::invalid_argument("bernstein_weights: need n >= 1");
    // Iterative de Casteljau-style construction of B_{i,d}(t), d = n-1.
    std::vector<double> w(n_points, 0.0);
    w[0] = 1.0;
    for (int d = 1; d < n_points; ++d)
        for (int i = d; i >= 0; --i)
            w[i] = (i > 0 ? t * w[i - 1] : 0.0) + (i < d ? (1.0 - t) * w[i] : 0.0);
    return w;
}

std::array<double, 3> bezier_eval(const MotionPath &path, double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::domain_error("bezier_eval: t must lie in [0,1]");
    std::vector<double> w = bernstein_weights(path.n(), t);
    std::array<double, 3> p = {0.0, 0.0, 0.0};
    for (int i = 0; i < path.n(); ++i)
        for (int k = 0; k < 3; ++k)
            p[k] += w[i] * path.control_points[i][k];
    return p;
}

std::vector<double> midpoint_times(int T) {
    if (T < 1)
        throw std::invalid_argument("midpoint_times: T must be >= 1");
    std::vector<double> t(T);
    for (int k = 0; k < T; ++k)
        t[k] = (k + 0.5) / T;
    return t;
}

} // namespace lfd
