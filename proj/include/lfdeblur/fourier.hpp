// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <vector>

#include "lfdeblur/forward_model.hpp"
#include "lfdeblur/light_field.hpp"

namespace lfd {

// Complex spectra, same layouts as Image / LightField with channels fastest.
struct Spectrum2D {
    int ny = 0, nx = 0, nc = 0;
    std::vector<std::complex<double>> data;

    Spectrum2D() = default;
    Spectrum2D(int ny_, int nx_, int nc_)
        : ny(ny_), nx(nx_), nc(nc_), data((size_t)ny_ * nx_ * nc_) {}
    std::complex<double> &at(int y, int x, int c = 0) {
        return data[((size_t)y * nx + x) * nc + c];
    }
    const std::complex<double> &at(int y, int x, int c = 0) const {
        return data[((size_t)y * nx + x) * nc + c];
    }
};

struct Spectrum4D {
    int ny = 0, nx = 0, nv = 0, nu = 0, nc = 0;
    std::vector<std::complex<double>> data;

    Spectrum4D() = default;
    Spectrum4D(int ny_, int nx_, int nv_, int nu_, int nc_)
        : ny(ny_), nx(nx_), nv(nv_), nu(nu_), nc(nc_),
          data((size_t)ny_ * nx_ * nv_ * nu_ * nc_) {}
    std::complex<double> &at(int y, int x, int v, int u, int c = 0) {
        return data[((((size_t)y * nx + x) * nv + v) * nu + u) * nc + c];
    }
    const std::complex<double> &at(int y, int x, int v, int u, int c = 0) const {
        return data[((((size_t)y * nx + x) * nv + v) * nu + u) * nc + c];
    }
};

// Unitary DFTs (scaled by 1/sqrt(N) in both directions) over the spatial
// and angular axes, per channel. The inverse transforms return the real
// part.
Spectrum4D fft4d(const LightField &lf);
LightField ifft4d(const Spectrum4D &s);
Spectrum2D fft2d(const Image &img);
Image ifft2d(const Spectrum2D &s);

// Centered frequency index of DFT bin i (standard FFT bin order).
inline int centered_bin(int i, int n) { return i > n / 2 ? i - n : i; }

// Angular-domain blur kernel for in-plane motion, normalized to unit mass.
// The kernel's center (zero offset) sits at integer bin (nv/2, nu/2) so a
// zero path rasterizes to an exact delta.
struct BlurKernel {
    Image k; // (nv, nu), single channel
    int center_v() const { return k.ny() / 2; }
    int center_u() const { return k.nx() / 2; }
};

// Splat 1/T at (-p_y, -p_x) relative to the kernel center for each time
// sample, with the forward model's bilinear weights; convolving a light
// field with the result equals blur() for in-plane paths. Out-of-plane
// paths have no such kernel and are an error.
BlurKernel rasterize_kernel(const MotionPath &path, const ExposureConfig &cfg, int nv, int nu);

// Circular FFT convolution of the angular axes with the kernel; spatial
// frequencies pass through untouched.
LightField convolve_inplane(const LightField &lf, const BlurKernel &kernel);

// Wiener inverse of convolve_inplane: spectrum * conj(K) / (|K|^2 + eps)
// per angular frequency.
LightField deconvolve_inplane(const LightField &blurred, const BlurKernel &kernel,
                              double wiener_eps = 1e-3);

// Same Wiener division applied to a single 2D image; the kernel must have
// the image's dims (e.g. an angular kernel projected onto the spatial grid
// at unit depth). This is the conventional-photograph baseline.
Image deconvolve_image(const Image &img, const BlurKernel &kernel, double wiener_eps = 1e-3);

// 2D slice of the 4D spectrum along the line of a given depth slope,
// computed in the primal domain: fft2d(refocus(lf, slope)) exactly.
Spectrum2D extract_fourier_slice(const LightField &lf, double slope);

// Result of blind plane-texture recovery.
struct TextureRecovery {
    Image texture;               // recovered plane texture, clamped to [0,1]
    std::vector<double> slopes;  // the probed slope grid
    std::vector<double> weights; // relative time per slope, sums to 1
    double zeta = 0.0;           // frequency-ramp constant used
    int selected = 0;            // index of the slice the texture came from
    bool degenerate = false;     // all slice magnitudes equal; weights fell back to uniform
};

// Blind recovery of a fronto-parallel plane texture from an out-of-plane
// motion-blurred light field: probe Fourier slices over slope_grid, weight
// slopes by band-limited magnitude against the strongest slice, then undo
// the per-frequency time dilution with a (|zeta*Wx|+1)(|zeta_y*Wy|+1) ramp
// on that slice and invert.
TextureRecovery recover_texture(const LightField &blurred,
                                const std::vector<double> &slope_grid);

} // namespace lfd
