// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "lfdeblur/forward_model.hpp"
#include "lfdeblur/light_field.hpp"

namespace lfd {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
};

struct SolverConfig {
    double lambda = 2e-3;      // sparse-gradient prior weight, stage 1
    double eps_start = 0.2;    // prior threshold annealing schedule
    double eps_end = 0.01;
    double eps_decay = 0.995;
    double lr_lightfield = 5e-3;
    double lr_path = 0.03;
    int iters_stage1 = 1500;
    int iters_stage2 = 500;
    double lambda_tv = 5e-3;   // TV prior weight, stage 2
    int num_time_samples = 16;
    int control_points = 3;
    AdamConfig adam;
    uint64_t seed = 0;

    void validate() const; // throws std::invalid_argument on bad values
};

struct SolverReport {
    // Per-iteration traces, stage 1 followed by stage 2 (first stage1_iters
    // entries are stage 1). prior_trace holds the raw (unweighted) prior
    // value of whichever prior the stage uses; eps_trace holds the prior
    // threshold in effect (fixed at eps_end during stage 2).
    std::vector<double> data_trace;
    std::vector<double> prior_trace;
    std::vector<double> eps_trace;
    int stage1_iters = 0;
    MotionPath final_path;
    LightField final_lf;
    // Final objective, data + lambda_tv * tv at the reported lf and path;
    // re-evaluating it on the report's outputs must reproduce this value.
    double final_loss = 0.0;
    bool diverged = false;
    std::string note;
};

struct DataTerm {
    double value = 0.0;
    LightField grad_lf;
    std::vector<std::array<double, 3>> grad_path;
};

// ||blur(lf, path) - observed||^2 (sum of squares) with gradients; the path
// gradient can be skipped when only the light field is being optimized.
DataTerm data_term(const LightField &lf, const MotionPath &path, const LightField &observed,
                   const ExposureConfig &cfg, bool want_path_grad = true);

struct ValueGrad {
    double value = 0.0;
    LightField grad;
};

// Thresholded-quadratic gradient sparsity over forward differences on all
// four axes: |d| <= eps contributes d^2/eps^2, anything larger a flat 1.
// Approaches the count of nonzero-gradient samples as eps -> 0.
ValueGrad sparse_gradient_prior(const LightField &lf, double eps);

// Anisotropic 4D total variation with Charbonnier smoothing
// (sqrt(d^2 + delta^2) - delta, delta = 1e-4), so constants score exactly 0.
ValueGrad tv_prior(const LightField &lf);

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
};

// One bias-corrected Adam update. Gradients must be masked by the caller
// (e.g. the pinned control point) before stepping.
void adam_step(AdamState &state, std::span<float> params, std::span<const float> grads,
               double lr, const AdamConfig &cfg);
void adam_step(AdamState &state, std::span<double> params, std::span<const double> grads,
               double lr, const AdamConfig &cfg);

// Two-stage blind deblurring: joint Adam over (light field, path) under the
// annealed sparse-gradient prior, then fixed-path refinement under TV.
// Between the stages the stage-1 path is disambiguated from its mirror image
// (blind deconvolution's sign ambiguity): both candidates are polished by
// texture-resolve/joint-continuation rounds against the observation, the one
// with the lower data term wins, and its refined path plus a fresh texture
// solve seed stage 2. Deterministic given (observed, cfg). Divergence
// (non-finite loss) aborts with diverged=true and the partial traces.
SolverReport blind_deblur(const LightField &observed, const SolverConfig &cfg);

} // namespace lfd
