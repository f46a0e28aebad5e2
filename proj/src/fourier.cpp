// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#include "lfdeblur/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace lfd {

namespace {

std::mutex fftw_planner_mutex; // FFTW planning is not thread-safe

// In-place DFT over the leading `rank` dims; `howmany` interleaved
// transforms (channels) with stride `howmany`.
void run_dft(int rank, const int *dims, int howmany, std::complex<double> *buf, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        plan = fftw_plan_many_dft(rank, dims, howmany, reinterpret_cast<fftw_complex *>(buf),
                                  nullptr, howmany, 1, reinterpret_cast<fftw_complex *>(buf),
                                  nullptr, howmany, 1, sign, FFTW_ESTIMATE);
    }
    if (!plan)
        throw std::runtime_error("FFT planning failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }
}

void scale(std::vector<std::complex<double>> &v, double s) {
    for (auto &z : v)
        z *= s;
}

// Plain (unnormalized) 2D DFT of the kernel rolled so its center bin lands
// at index 0; multiplying a unitary spectrum by this implements circular
// convolution with the kernel.
std::vector<std::complex<double>> kernel_spectrum(const BlurKernel &kernel) {
    int nv = kernel.k.ny(), nu = kernel.k.nx();
    int cv = kernel.center_v(), cu = kernel.center_u();
    std::vector<std::complex<double>> buf((size_t)nv * nu);
    for (int v = 0; v < nv; ++v)
        for (int u = 0; u < nu; ++u)
            buf[(size_t)v * nu + u] = kernel.k.at((v + cv) % nv, (u + cu) % nu);
    int dims[2] = {nv, nu};
    run_dft(2, dims, 1, buf.data(), FFTW_FORWARD);
    return buf;
}

inline std::complex<double> wiener(std::complex<double> K, double eps) {
    return std::conj(K) / (std::norm(K) + eps);
}

} // namespace

Spectrum4D fft4d(const LightField &lf) {
    Spectrum4D s(lf.ny(), lf.nx(), lf.nv(), lf.nu(), lf.nc());
    const float *p = lf.data();
    for (size_t i = 0; i < lf.size(); ++i)
        s.data[i] = p[i];
    int dims[4] = {s.ny, s.nx, s.nv, s.nu};
    run_dft(4, dims, s.nc, s.data.data(), FFTW_FORWARD);
    scale(s.data, 1.0 / std::sqrt((double)s.ny * s.nx * s.nv * s.nu));
    return s;
}

LightField ifft4d(const Spectrum4D &s) {
    std::vector<std::complex<double>> buf = s.data;
    int dims[4] = {s.ny, s.nx, s.nv, s.nu};
    run_dft(4, dims, s.nc, buf.data(), FFTW_BACKWARD);
    LightField lf(s.ny, s.nx, s.nv, s.nu, s.nc);
    double norm = 1.0 / std::sqrt((double)s.ny * s.nx * s.nv * s.nu);
    float *p = lf.data();
    for (size_t i = 0; i < buf.size(); ++i)
        p[i] = (float)(buf[i].real() * norm);
    return lf;
}

Spectrum2D fft2d(const Image &img) {
    Spectrum2D s(img.ny(), img.nx(), img.nc());
    const float *p = img.data();
    for (size_t i = 0; i < img.size(); ++i)
        s.data[i] = p[i];
    int dims[2] = {s.ny, s.nx};
    run_dft(2, dims, s.nc, s.data.data(), FFTW_FORWARD);
    scale(s.data, 1.0 / std::sqrt((double)s.ny * s.nx));
    return s;
}

Image ifft2d(const Spectrum2D &s) {
    std::vector<std::complex<double>> buf = s.data;
    int dims[2] = {s.ny, s.nx};
    run_dft(2, dims, s.nc, buf.data(), FFTW_BACKWARD);
    Image img(s.ny, s.nx, s.nc);
    double norm = 1.0 / std::sqrt((double)s.ny * s.nx);
    float *p = img.data();
    for (size_t i = 0; i < buf.size(); ++i)
        p[i] = (float)(buf[i].real() * norm);
    return img;
}

BlurKernel rasterize_kernel(const MotionPath &path, const ExposureConfig &cfg, int nv, int nu) {
    if (cfg.num_time_samples < 1)
        throw std::invalid_argument("rasterize_kernel: num_time_samples must be >= 1");
    BlurKernel kernel{Image(nv, nu, 1)};
    int cv = kernel.center_v(), cu = kernel.center_u();
    double wt = 1.0 / cfg.num_time_samples;
    for (double t : midpoint_times(cfg.num_time_samples)) {
        auto p = bezier_eval(path, t);
        if (p[2] != 0.0)
            throw std::invalid_argument("kernel undefined for out-of-plane motion");
        double qv = std::clamp(cv - p[1], 0.0, (double)(nv - 1));
        double qu = std::clamp(cu - p[0], 0.0, (double)(nu - 1));
        int v0 = (int)std::floor(qv), u0 = (int)std::floor(qu);
        int v1 = std::min(v0 + 1, nv - 1), u1 = std::min(u0 + 1, nu - 1);
        double fv = qv - v0, fu = qu - u0;
        kernel.k.at(v0, u0) += (float)(wt * (1 - fv) * (1 - fu));
        kernel.k.at(v0, u1) += (float)(wt * (1 - fv) * fu);
        kernel.k.at(v1, u0) += (float)(wt * fv * (1 - fu));
        kernel.k.at(v1, u1) += (float)(wt * fv * fu);
    }
    double sum = 0.0;
    for (size_t i = 0; i < kernel.k.size(); ++i)
        sum += kernel.k.data()[i];
    for (size_t i = 0; i < kernel.k.size(); ++i)
        kernel.k.data()[i] = (float)(kernel.k.data()[i] / sum);
    return kernel;
}

static void check_kernel_dims(const LightField &lf, const BlurKernel &kernel) {
    if (kernel.k.ny() != lf.nv() || kernel.k.nx() != lf.nu())
        throw std::invalid_argument("kernel dims do not match the angular dims");
}

LightField convolve_inplane(const LightField &lf, const BlurKernel &kernel) {
    check_kernel_dims(lf, kernel);
    auto K = kernel_spectrum(kernel);
    Spectrum4D s = fft4d(lf);
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x)
            for (int v = 0; v < s.nv; ++v)
                for (int u = 0; u < s.nu; ++u)
                    for (int c = 0; c < s.nc; ++c)
                        s.at(y, x, v, u, c) *= K[(size_t)v * s.nu + u];
    return ifft4d(s);
}

LightField deconvolve_inplane(const LightField &blurred, const BlurKernel &kernel,
                              double wiener_eps) {
    check_kernel_dims(blurred, kernel);
    if (!(wiener_eps > 0))
        throw std::invalid_argument("deconvolve_inplane: wiener_eps must be > 0");
    auto K = kernel_spectrum(kernel);
    Spectrum4D s = fft4d(blurred);
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x)
            for (int v = 0; v < s.nv; ++v)
                for (int u = 0; u < s.nu; ++u) {
                    auto w = wiener(K[(size_t)v * s.nu + u], wiener_eps);
                    for (int c = 0; c < s.nc; ++c)
                        s.at(y, x, v, u, c) *= w;
                }
    return ifft4d(s);
}

Image deconvolve_image(const Image &img, const BlurKernel &kernel, double wiener_eps) {
    if (kernel.k.ny() != img.ny() || kernel.k.nx() != img.nx())
        throw std::invalid_argument("deconvolve_image: kernel dims must match the image");
    if (!(wiener_eps > 0))
        throw std::invalid_argument("deconvolve_image: wiener_eps must be > 0");
    auto K = kernel_spectrum(kernel);
    Spectrum2D s = fft2d(img);
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x) {
            auto w = wiener(K[(size_t)y * s.nx + x], wiener_eps);
            for (int c = 0; c < s.nc; ++c)
                s.at(y, x, c) *= w;
        }
    return ifft2d(s);
}

Spectrum2D extract_fourier_slice(const LightField &lf, double slope) {
    return fft2d(refocus(lf, slope));
}

TextureRecovery recover_texture(const LightField &blurred,
                                const std::vector<double> &slope_grid) {
    if (slope_grid.empty())
        throw std::invalid_argument("recover_texture: slope_grid is empty");
    const int ny = blurred.ny(), nx = blurred.nx(), nc = blurred.nc();
    const int J = (int)slope_grid.size();

    // Channel-averaged slice magnitudes, plus each slice's band energy in a
    // mid/high radial band: mismatched slopes are angularly box-blurred, so
    // the best-supported slope carries the most band energy.
    std::vector<std::vector<double>> mag(J);
    std::vector<double> band_energy(J, 0.0);
    std::vector<Spectrum2D> slices(J);
    std::vector<size_t> annulus;
    const double r_lo = 0.05, r_hi = 0.45; // cycles/sample
    for (int j = 0; j < J; ++j) {
        slices[j] = extract_fourier_slice(blurred, slope_grid[j]);
        mag[j].resize((size_t)ny * nx);
        for (int y = 0; y < ny; ++y) {
            double fy = (double)centered_bin(y, ny) / ny;
            for (int x = 0; x < nx; ++x) {
                double fx = (double)centered_bin(x, nx) / nx;
                double m = 0.0;
                for (int c = 0; c < nc; ++c)
                    m += std::abs(slices[j].at(y, x, c));
                m /= nc;
                mag[j][(size_t)y * nx + x] = m;
                double r = std::sqrt(fx * fx + fy * fy);
                if (r >= r_lo && r <= r_hi) {
                    band_energy[j] += m * m;
                    if (j == 0)
                        annulus.push_back((size_t)y * nx + x);
                }
            }
        }
    }

    TextureRecovery out;
    out.slopes = slope_grid;
    out.selected =
        (int)(std::max_element(band_energy.begin(), band_energy.end()) - band_energy.begin());
    const auto &ref = mag[out.selected];

    // Frequencies where the reference slice has solid support: modulus above
    // its 70th percentile within the comparison band. Low frequencies are
    // left out on purpose: misfocused slices keep most of their low-band
    // magnitude, so ratios there say little about dwell time.
    std::vector<double> ref_sorted;
    ref_sorted.reserve(annulus.size());
    for (size_t i : annulus)
        ref_sorted.push_back(ref[i]);
    std::vector<size_t> support;
    if (!ref_sorted.empty()) {
        size_t q = (size_t)(0.70 * (ref_sorted.size() - 1));
        std::nth_element(ref_sorted.begin(), ref_sorted.begin() + q, ref_sorted.end());
        double threshold = ref_sorted[q];
        for (size_t i : annulus)
            if (ref[i] > threshold)
                support.push_back(i);
    }

    // Median magnitude ratio against the reference = relative attenuation of
    // each slope's slice (the reference's own ratio is 1).
    std::vector<double> raw(J, 1.0);
    std::vector<double> ratios(support.size());
    for (int j = 0; j < J && !support.empty(); ++j) {
        for (size_t i = 0; i < support.size(); ++i)
            ratios[i] = mag[j][support[i]] / ref[support[i]];
        std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
        raw[j] = ratios[ratios.size() / 2];
    }

    double lo = *std::min_element(raw.begin(), raw.end());
    double hi = *std::max_element(raw.begin(), raw.end());
    out.degenerate = support.empty() || (hi - lo) <= 1e-9 * std::max(hi, 1e-300);
    out.weights.assign(J, 1.0 / J);
    if (!out.degenerate) {
        // Even a slope nothing dwells at keeps a residual ratio: the finite
        // aperture leaks every slice into every other. That leakage floor is
        // content-dependent (swept inputs lose high frequencies, which lifts
        // all ratios), but within one instance the smallest ratio is a solid
        // estimate of it. Deduct half of it, then cube: cubing suppresses
        // near-floor residue while keeping the ordering of genuine dwell.
        double floor_level = 0.5 * lo;
        std::vector<double> w(J);
        for (int j = 0; j < J; ++j) {
            double e = std::max(0.0, raw[j] - floor_level);
            w[j] = e * e * e;
        }
        // Trace weights below half a percent of the peak are fit noise, and
        // they matter: spurious tails widen the estimated sweep.
        double wmax = *std::max_element(w.begin(), w.end());
        double sum = 0.0;
        for (double &wk : w) {
            if (wk < 0.005 * wmax)
                wk = 0.0;
            sum += wk;
        }
        for (int j = 0; j < J; ++j)
            out.weights[j] = w[j] / sum;
    }

    // Effective sweep width around the selected slope sets the dilution
    // ramp: frequencies spread across the swept shears lose amplitude
    // linearly in |Omega|, stronger for wider sweeps and larger apertures.
    double z_star = slope_grid[out.selected];
    double w_eff = 0.0;
    for (int j = 0; j < J; ++j)
        w_eff += out.weights[j] * std::abs(slope_grid[j] - z_star);
    w_eff *= 2.0;
    const double c0 = 1.2;
    double zeta_x = (blurred.nu() - 1) * w_eff / (c0 * std::abs(z_star));
    double zeta_y = (blurred.nv() - 1) * w_eff / (c0 * std::abs(z_star));
    out.zeta = zeta_x;

    Spectrum2D corrected = slices[out.selected];
    for (int y = 0; y < ny; ++y) {
        double fy = (double)centered_bin(y, ny) / ny;
        for (int x = 0; x < nx; ++x) {
            double fx = (double)centered_bin(x, nx) / nx;
            double ramp = (std::abs(zeta_x * fx) + 1.0) * (std::abs(zeta_y * fy) + 1.0);
            for (int c = 0; c < nc; ++c)
                corrected.at(y, x, c) *= ramp;
        }
    }
    out.texture = ifft2d(corrected);
    for (size_t i = 0; i < out.texture.size(); ++i)
        out.texture.data()[i] = std::clamp(out.texture.data()[i], 0.f, 1.f);
    return out;
}

} // namespace lfd
