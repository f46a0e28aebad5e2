// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

namespace lfd {

// Camera translation over the exposure as a Bézier curve of n >= 2 control
// points (p_x, p_y, p_z). p_x, p_y are in angular-sample units, p_z in slope
// units (angular samples per spatial sample). The first control point is
// pinned at the origin by convention (a constant p_x/p_y offset is
// indistinguishable from translating the light field, a constant p_z offset
// from refocusing it); evaluation itself accepts un-pinned paths so that
// shifted/perturbed variants can be probed directly.
struct MotionPath {
    std::vector<std::array<double, 3>> control_points;

    MotionPath() = default;
    explicit MotionPath(std::vector<std::array<double, 3>> pts);

    int n() const { return (int)control_points.size(); }
    bool pinned() const;

    // Zero path with n control points at the origin.
    static MotionPath zero(int n);

    // NaN/Inf are hard errors; magnitude/pinning issues come back as
    // human-readable warnings.
    std::vector<std::string> validate(int nu) const;
};

// Bernstein basis weights B_{i,n-1}(t) for all i; these are also
// d(point)/d(control_point_i).
std::vector<double> bernstein_weights(int n_points, double t);

// Curve position at t in [0,1]; t outside the range is an error.
std::array<double, 3> bezier_eval(const MotionPath &path, double t);

// Time discretization of the unit exposure.
struct ExposureConfig {
    int num_time_samples = 32;
};

// Midpoint-rule sample times (k + 0.5)/T.
std::vector<double> midpoint_times(int T);

} // namespace lfd
