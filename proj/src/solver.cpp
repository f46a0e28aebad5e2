// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#include "lfdeblur/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace lfd {

void SolverConfig::validate() const {
    if (!(lambda > 0) || !(lambda_tv > 0))
        throw std::invalid_argument("SolverConfig: prior weights must be > 0");
    if (!(eps_start > 0) || !(eps_end > 0) || eps_end > eps_start)
        throw std::invalid_argument("SolverConfig: need 0 < eps_end <= eps_start");
    if (!(eps_decay > 0) || eps_decay > 1)
        throw std::invalid_argument("SolverConfig: eps_decay must be in (0, 1]");
    if (!(lr_lightfield > 0) || !(lr_path > 0))
        throw std::invalid_argument("SolverConfig: learning rates must be > 0");
    if (iters_stage1 < 0 || iters_stage2 < 0)
        throw std::invalid_argument("SolverConfig: iteration counts must be >= 0");
    if (num_time_samples < 1)
        throw std::invalid_argument("SolverConfig: num_time_samples must be >= 1");
    if (control_points < 2)
        throw std::invalid_argument("SolverConfig: need at least 2 control points");
    if (!(adam.beta1 >= 0) || adam.beta1 >= 1 || !(adam.beta2 >= 0) || adam.beta2 >= 1 ||
        !(adam.eps_hat > 0))
        throw std::invalid_argument("SolverConfig: bad Adam parameters");
}

DataTerm data_term(const LightField &lf, const MotionPath &path, const LightField &observed,
                   const ExposureConfig &cfg, bool want_path_grad) {
    if (!lf.same_shape(observed))
        throw std::invalid_argument("data_term: lf and observed shapes differ");
    LightField residual = blur(lf, path, cfg);
    double value = 0.0;
    float *r = residual.data();
    const float *o = observed.data();
    for (size_t i = 0; i < residual.size(); ++i) {
        double d = (double)r[i] - o[i];
        value += d * d;
        r[i] = (float)d;
    }

    DataTerm out;
    out.value = value;
    out.grad_lf = blur_adjoint(residual, path, cfg);
    float *g = out.grad_lf.data();
    for (size_t i = 0; i < out.grad_lf.size(); ++i)
        g[i] *= 2.f;
    if (want_path_grad) {
        out.grad_path = path_gradient(lf, path, residual, cfg);
        for (auto &p : out.grad_path)
            for (double &c : p)
                c *= 2.0;
    }
    return out;
}

namespace {

// Apply fn(diff, lf_index, neighbor_index) to the forward difference along
// each of the four axes, skipping the last sample of each axis (clamp-to-
// edge makes that difference identically zero).
template <typename F> void for_each_forward_diff(const LightField &lf, F &&fn) {
    const int ny = lf.ny(), nx = lf.nx(), nv = lf.nv(), nu = lf.nu(), nc = lf.nc();
    const size_t sy = (size_t)nx * nv * nu * nc, sx = (size_t)nv * nu * nc,
                 sv = (size_t)nu * nc, su = nc;
    const float *p = lf.data();
    size_t i = 0;
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x)
            for (int v = 0; v < nv; ++v)
                for (int u = 0; u < nu; ++u)
                    for (int c = 0; c < nc; ++c, ++i) {
                        if (y + 1 < ny)
                            fn((double)p[i + sy] - p[i], i, i + sy);
                        if (x + 1 < nx)
                            fn((double)p[i + sx] - p[i], i, i + sx);
                        if (v + 1 < nv)
                            fn((double)p[i + sv] - p[i], i, i + sv);
                        if (u + 1 < nu)
                            fn((double)p[i + su] - p[i], i, i + su);
                    }
}

LightField to_lightfield_like(const LightField &shape, const std::vector<double> &acc) {
    LightField g(shape.ny(), shape.nx(), shape.nv(), shape.nu(), shape.nc());
    float *p = g.data();
    for (size_t i = 0; i < acc.size(); ++i)
        p[i] = (float)acc[i];
    return g;
}

} // namespace

ValueGrad sparse_gradient_prior(const LightField &lf, double eps) {
    if (!(eps > 0))
        throw std::invalid_argument("sparse_gradient_prior: eps must be > 0");
    double value = 0.0;
    std::vector<double> acc(lf.size(), 0.0);
    double inv_eps2 = 1.0 / (eps * eps);
    for_each_forward_diff(lf, [&](double d, size_t i, size_t j) {
        if (std::abs(d) <= eps) {
            value += d * d * inv_eps2;
            if (std::abs(d) < eps) { // subgradient 0 at the kink
                double g = 2.0 * d * inv_eps2;
                acc[j] += g;
                acc[i] -= g;
            }
        } else {
            value += 1.0;
        }
    });
    return {value, to_lightfield_like(lf, acc)};
}

ValueGrad tv_prior(const LightField &lf) {
    const double delta = 1e-4;
    double value = 0.0;
    std::vector<double> acc(lf.size(), 0.0);
    for_each_forward_diff(lf, [&](double d, size_t i, size_t j) {
        double s = std::sqrt(d * d + delta * delta);
        value += s - delta;
        double g = d / s;
        acc[j] += g;
        acc[i] -= g;
    });
    return {value, to_lightfield_like(lf, acc)};
}

namespace {

template <typename T>
void adam_step_impl(AdamState &state, std::span<T> params, std::span<const T> grads, double lr,
                    const AdamConfig &cfg) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam_step: params/grads size mismatch");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: state size mismatch");
    state.step += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, (double)state.step);
    double bc2 = 1.0 - std::pow(cfg.beta2, (double)state.step);
    for (size_t i = 0; i < params.size(); ++i) {
        double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        params[i] = (T)(params[i] - lr * mhat / (std::sqrt(vhat) + cfg.eps_hat));
    }
}

} // namespace

void adam_step(AdamState &state, std::span<float> params, std::span<const float> grads,
               double lr, const AdamConfig &cfg) {
    adam_step_impl(state, params, grads, lr, cfg);
}

void adam_step(AdamState &state, std::span<double> params, std::span<const double> grads,
               double lr, const AdamConfig &cfg) {
    adam_step_impl(state, params, grads, lr, cfg);
}

SolverReport blind_deblur(const LightField &observed, const SolverConfig &cfg) {
    cfg.validate();
    for (size_t i = 0; i < observed.size(); ++i)
        if (!std::isfinite(observed.data()[i]))
            throw std::invalid_argument("blind_deblur: observed light field has non-finite samples");

    ExposureConfig ecfg;
    ecfg.num_time_samples = cfg.num_time_samples;

    SolverReport rep;
    rep.final_lf = observed;
    MotionPath path = MotionPath::zero(cfg.control_points);
    // Seeded symmetry-breaking perturbation on the non-pinned points. With
    // no stage-1 iterations the path must stay exactly zero.
    if (cfg.iters_stage1 > 0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> pert(-1e-2, 1e-2);
        for (int i = 1; i < cfg.control_points; ++i)
            for (int k = 0; k < 3; ++k)
                path.control_points[i][k] = pert(rng);
    }

    LightField &lf = rep.final_lf;
    std::span<float> lf_params(lf.data(), lf.size());
    std::vector<float> lf_grad(lf.size());
    std::vector<double> path_params(3 * cfg.control_points);
    std::vector<double> path_grad(3 * cfg.control_points);
    AdamState lf_state, path_state;
    double eps = cfg.eps_start;

    auto blowup = [&](double v, const char *stage) {
        if (std::isfinite(v))
            return false;
        rep.diverged = true;
        rep.note = std::string("non-finite loss in ") + stage + " at iteration " +
                   std::to_string(rep.data_trace.size());
        return true;
    };

    for (int it = 0; it < cfg.iters_stage1; ++it) {
        DataTerm dt = data_term(lf, path, observed, ecfg, true);
        ValueGrad pr = sparse_gradient_prior(lf, eps);
        if (blowup(dt.value + pr.value, "stage 1"))
            break;
        rep.data_trace.push_back(dt.value);
        rep.prior_trace.push_back(pr.value);
        rep.eps_trace.push_back(eps);

        const float *gd = dt.grad_lf.data();
        const float *gp = pr.grad.data();
        for (size_t i = 0; i < lf_grad.size(); ++i)
            lf_grad[i] = (float)(gd[i] + cfg.lambda * gp[i]);
        adam_step(lf_state, lf_params, std::span<const float>(lf_grad), cfg.lr_lightfield,
                  cfg.adam);

        dt.grad_path[0] = {0.0, 0.0, 0.0}; // gauge pin
        for (int i = 0; i < cfg.control_points; ++i)
            for (int k = 0; k < 3; ++k) {
                path_params[3 * i + k] = path.control_points[i][k];
                path_grad[3 * i + k] = dt.grad_path[i][k];
            }
        adam_step(path_state, std::span<double>(path_params),
                  std::span<const double>(path_grad), cfg.lr_path, cfg.adam);
        for (int i = 0; i < cfg.control_points; ++i)
            for (int k = 0; k < 3; ++k)
                path.control_points[i][k] = path_params[3 * i + k];

        eps = std::max(cfg.eps_end, eps * cfg.eps_decay);
    }
    rep.stage1_iters = (int)rep.data_trace.size();

    // Blind deconvolution cannot tell a path from its mirror image: negating
    // the path and compensating the texture explains in-plane blur (nearly)
    // equally well, so stage 1 lands on either with roughly equal odds. Only
    // out-of-plane motion breaks the symmetry, and only in the data term --
    // the prior actively favours the under-deblurred mirror solution. So:
    // polish both candidates with alternation rounds (re-solve the texture
    // from the observation at the fixed path, then continue jointly so the
    // path settles against the clean texture), pick the lower DATA term,
    // refine the winner with more rounds, and seed stage 2 with a fresh
    // fixed-path solve at the refined path. A path under 0.05 samples of
    // displacement is its own mirror for all practical purposes: nothing to
    // disambiguate, and the joint continuation would only wander in the flat
    // data valley, so the whole step is skipped.
    double stage1_amplitude = 0.0;
    {
        double x_half = 0.5 * (observed.nx() - 1);
        for (int i = 1; i < cfg.control_points; ++i) {
            const auto &c = path.control_points[i];
            stage1_amplitude = std::max({stage1_amplitude, std::abs(c[0]), std::abs(c[1]),
                                         std::abs(c[2]) * x_half});
        }
    }
    if (cfg.iters_stage1 > 0 && !rep.diverged && stage1_amplitude > 0.05) {
        constexpr int kAnchorIters = 300;
        constexpr int kPolishIters = 300;
        constexpr int kRefineRounds = 3;

        LightField scratch = observed;
        auto round = [&](MotionPath &cand) {
            std::copy(observed.data(), observed.data() + observed.size(), scratch.data());
            AdamState lf_st, path_st;
            std::span<float> params(scratch.data(), scratch.size());
            std::vector<float> grad(scratch.size());
            std::vector<double> pp(3 * cfg.control_points), pg(3 * cfg.control_points);
            for (int it = 0; it < kAnchorIters + kPolishIters; ++it) {
                bool joint = it >= kAnchorIters;
                DataTerm dt = data_term(scratch, cand, observed, ecfg, joint);
                ValueGrad pr = sparse_gradient_prior(scratch, cfg.eps_end);
                const float *gd = dt.grad_lf.data();
                const float *gp = pr.grad.data();
                for (size_t i = 0; i < grad.size(); ++i)
                    grad[i] = (float)(gd[i] + cfg.lambda * gp[i]);
                adam_step(lf_st, params, std::span<const float>(grad), cfg.lr_lightfield,
                          cfg.adam);
                if (!joint)
                    continue;
                dt.grad_path[0] = {0.0, 0.0, 0.0};
                for (int i = 0; i < cfg.control_points; ++i)
                    for (int k = 0; k < 3; ++k) {
                        pp[3 * i + k] = cand.control_points[i][k];
                        pg[3 * i + k] = dt.grad_path[i][k];
                    }
                adam_step(path_st, std::span<double>(pp), std::span<const double>(pg),
                          cfg.lr_path, cfg.adam);
                for (int i = 0; i < cfg.control_points; ++i)
                    for (int k = 0; k < 3; ++k)
                        cand.control_points[i][k] = pp[3 * i + k];
            }
            return data_term(scratch, cand, observed, ecfg, false).value;
        };

        MotionPath mirror = path;
        for (int i = 1; i < cfg.control_points; ++i)
            for (int k = 0; k < 3; ++k)
                mirror.control_points[i][k] = -mirror.control_points[i][k];
        double keep_data = round(path);
        double flip_data = round(mirror);
        bool keep_ok = std::isfinite(keep_data), flip_ok = std::isfinite(flip_data);
        if (!keep_ok && !flip_ok) {
            rep.diverged = true;
            rep.note = "non-finite loss in flip disambiguation";
        } else {
            if (flip_ok && (!keep_ok || flip_data < keep_data))
                path = mirror;
            for (int r = 1; r < kRefineRounds; ++r)
                round(path);

            std::copy(observed.data(), observed.data() + observed.size(), lf.data());
            AdamState fin_st;
            for (int it = 0; it < kAnchorIters && !rep.diverged; ++it) {
                DataTerm dt = data_term(lf, path, observed, ecfg, false);
                ValueGrad pr = sparse_gradient_prior(lf, cfg.eps_end);
                if (blowup(dt.value + pr.value, "flip disambiguation"))
                    break;
                const float *gd = dt.grad_lf.data();
                const float *gp = pr.grad.data();
                for (size_t i = 0; i < lf_grad.size(); ++i)
                    lf_grad[i] = (float)(gd[i] + cfg.lambda * gp[i]);
                adam_step(fin_st, lf_params, std::span<const float>(lf_grad), cfg.lr_lightfield,
                          cfg.adam);
            }
        }
    }

    if (!rep.diverged) {
        AdamState lf_state2;
        for (int it = 0; it < cfg.iters_stage2; ++it) {
            DataTerm dt = data_term(lf, path, observed, ecfg, false);
            ValueGrad tv = tv_prior(lf);
            if (blowup(dt.value + tv.value, "stage 2"))
                break;
            rep.data_trace.push_back(dt.value);
            rep.prior_trace.push_back(tv.value);
            rep.eps_trace.push_back(cfg.eps_end);

            const float *gd = dt.grad_lf.data();
            const float *gp = tv.grad.data();
            for (size_t i = 0; i < lf_grad.size(); ++i)
                lf_grad[i] = (float)(gd[i] + cfg.lambda_tv * gp[i]);
            adam_step(lf_state2, lf_params, std::span<const float>(lf_grad), cfg.lr_lightfield,
                      cfg.adam);
        }
    }

    rep.final_path = path;
    DataTerm dt = data_term(lf, path, observed, ecfg, false);
    ValueGrad tv = tv_prior(lf);
    rep.final_loss = dt.value + cfg.lambda_tv * tv.value;
    return rep;
}

} // namespace lfd
