// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lfdeblur/light_field.hpp"
#include "lfdeblur/motion_path.hpp"

namespace lfd {

// Single camera-offset transform: gather with bilinear interpolation in the
// angular plane at (v + p_y - y·p_z, u + p_x - x·p_z), clamp-to-edge, where
// (x, y) are centered spatial coordinates. blur() is the exposure-time
// average of this transform along the path.
LightField shear_and_shift(const LightField &lf, double p_x, double p_y, double p_z);

// Motion-blurred light field: midpoint-rule time average over the Bézier
// path, f = (1/T) sum_k shear_and_shift(lf, p(t_k)). A zero path is a
// bit-exact identity.
LightField blur(const LightField &lf, const MotionPath &path, const ExposureConfig &cfg);

// Exact transpose of the linear operator blur(·, path, cfg): the same
// bilinear weights scattered instead of gathered.
LightField blur_adjoint(const LightField &residual, const MotionPath &path,
                        const ExposureConfig &cfg);

// Gradient of <blur(lf, path, cfg), residual> with respect to the control
// points, one (d/dp_x, d/dp_y, d/dp_z) triple per point. The first control
// point's gradient is reported like the rest; optimizers enforcing the
// origin pin must mask it to zero themselves.
std::vector<std::array<double, 3>> path_gradient(const LightField &lf, const MotionPath &path,
                                                 const LightField &residual,
                                                 const ExposureConfig &cfg);

} // namespace lfd
