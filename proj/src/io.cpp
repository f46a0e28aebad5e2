// lfdeblur: blind motion deblurring for 4D light fields
// SPDX-License-Identifier: Apache-2.0

#include "lfdeblur/io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace lfd {

namespace {

static_assert(std::endian::native == std::endian::little,
              "LFZ serialization assumes a little-endian host");

void put_u32(std::ostream &os, uint32_t v) { os.write(reinterpret_cast<char *>(&v), 4); }
void put_f64(std::ostream &os, double v) { os.write(reinterpret_cast<char *>(&v), 8); }

uint32_t get_u32(std::istream &is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char *>(&v), 4);
    return v;
}
double get_f64(std::istream &is) {
    double v = 0;
    is.read(reinterpret_cast<char *>(&v), 8);
    return v;
}

// Write to a sibling temp file, then rename over the target.
template <typename Fn> void atomic_write(const std::filesystem::path &path, Fn &&fn) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    fn(tmp);
    std::filesystem::rename(tmp, path);
}

} // namespace

void write_lfz(const LightField &lf, std::ostream &sink) {
    sink.write("LFZ1", 4);
    put_u32(sink, (uint32_t)lf.ny());
    put_u32(sink, (uint32_t)lf.nx());
    put_u32(sink, (uint32_t)lf.nv());
    put_u32(sink, (uint32_t)lf.nu());
    put_u32(sink, (uint32_t)lf.nc());
    put_f64(sink, lf.spatial_pitch);
    put_f64(sink, lf.angular_pitch);
    sink.write(reinterpret_cast<const char *>(lf.data()), (std::streamsize)(lf.size() * 4));
    if (!sink)
        throw FormatError("write failed");
}

void write_lfz(const LightField &lf, const std::filesystem::path &path) {
    atomic_write(path, [&](const std::filesystem::path &tmp) {
        std::ofstream os(tmp, std::ios::binary);
        if (!os)
            throw FormatError("cannot open " + tmp.string() + " for writing");
        write_lfz(lf, os);
    });
}

LightField read_lfz(std::istream &source) {
    char magic[4] = {};
    source.read(magic, 4);
    if (!source || std::memcmp(magic, "LFZ1", 4) != 0)
        throw FormatError("not an LFZ file");
    uint32_t ny = get_u32(source), nx = get_u32(source), nv = get_u32(source),
             nu = get_u32(source), nc = get_u32(source);
    double sp = get_f64(source), ap = get_f64(source);
    if (!source)
        throw FormatError("size error: truncated header");
    if (ny == 0 || nx == 0 || nv == 0 || nu == 0 || nc == 0)
        throw FormatError("format error: zero dimension in header");
    if (nc != 1 && nc != 3)
        throw FormatError("format error: channel count must be 1 or 3");
    if (!(sp > 0) || !(ap > 0) || !std::isfinite(sp) || !std::isfinite(ap))
        throw FormatError("format error: sample pitches must be positive");
    size_t count = (size_t)ny * nx * nv * nu * nc;
    if (count > (size_t)1 << 31)
        throw FormatError("format error: unreasonably large dimensions");
    LightField lf((int)ny, (int)nx, (int)nv, (int)nu, (int)nc);
    lf.spatial_pitch = sp;
    lf.angular_pitch = ap;
    source.read(reinterpret_cast<char *>(lf.data()), (std::streamsize)(count * 4));
    if ((size_t)source.gcount() != count * 4)
        throw FormatError("size error: truncated payload");
    for (size_t i = 0; i < count; ++i)
        if (!std::isfinite(lf.data()[i]))
            throw FormatError("format error: non-finite sample values");
    return lf;
}

LightField read_lfz(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw FormatError("cannot open " + path.string());
    LightField lf = read_lfz(is);
    is.peek();
    if (!is.eof())
        throw FormatError("size error: trailing bytes after payload");
    return lf;
}

// ---------------------------------------------------------------------------
// PNG

namespace {

double srgb_decode(double v) {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

struct PngReader {
    FILE *fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png)
            png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp)
            fclose(fp);
    }
};

struct PngWriter {
    FILE *fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png)
            png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp)
            fclose(fp);
    }
};

} // namespace

Image read_png(const std::filesystem::path &path, bool srgb_to_linear) {
    PngReader r;
    r.fp = std::fopen(path.string().c_str(), "rb");
    if (!r.fp)
        throw FormatError("cannot open " + path.string());
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    r.info = r.png ? png_create_info_struct(r.png) : nullptr;
    if (!r.png || !r.info)
        throw FormatError("png: allocation failed");

    std::vector<uint16_t> row16;
    std::vector<uint8_t> row8;
    Image img;
    bool failed = false;
    if (setjmp(png_jmpbuf(r.png)))
        failed = true;
    if (!failed) {
        png_init_io(r.png, r.fp);
        png_read_info(r.png, r.info);
        png_set_palette_to_rgb(r.png);
        png_set_expand_gray_1_2_4_to_8(r.png);
        png_set_strip_alpha(r.png);
        int bit_depth = png_get_bit_depth(r.png, r.info);
        if (bit_depth == 16)
            png_set_swap(r.png); // native-endian u16 samples
        png_read_update_info(r.png, r.info);

        int w = (int)png_get_image_width(r.png, r.info);
        int h = (int)png_get_image_height(r.png, r.info);
        int channels = png_get_channels(r.png, r.info);
        bit_depth = png_get_bit_depth(r.png, r.info);
        if (channels != 1 && channels != 3)
            png_error(r.png, "unsupported channel count");
        img = Image(h, w, channels);
        double denom = bit_depth == 16 ? 65535.0 : 255.0;
        row16.resize((size_t)w * channels);
        row8.resize((size_t)w * channels);
        for (int y = 0; y < h && !failed; ++y) {
            if (bit_depth == 16) {
                png_read_row(r.png, reinterpret_cast<png_bytep>(row16.data()), nullptr);
                for (size_t i = 0; i < row16.size(); ++i)
                    img.data()[(size_t)y * w * channels + i] = (float)(row16[i] / denom);
            } else {
                png_read_row(r.png, row8.data(), nullptr);
                for (size_t i = 0; i < row8.size(); ++i)
                    img.data()[(size_t)y * w * channels + i] = (float)(row8[i] / denom);
            }
        }
    }
    if (failed)
        throw FormatError("png: failed to read " + path.string());
    if (srgb_to_linear)
        for (size_t i = 0; i < img.size(); ++i)
            img.data()[i] = (float)srgb_decode(img.data()[i]);
    return img;
}

void write_png16(const Image &img, const std::filesystem::path &path) {
    atomic_write(path, [&](const std::filesystem::path &tmp) {
        PngWriter w;
        w.fp = std::fopen(tmp.string().c_str(), "wb");
        if (!w.fp)
            throw FormatError("cannot open " + tmp.string() + " for writing");
        w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        w.info = w.png ? png_create_info_struct(w.png) : nullptr;
        if (!w.png || !w.info)
            throw FormatError("png: allocation failed");

        std::vector<uint16_t> row((size_t)img.nx() * img.nc());
        bool failed = false;
        if (setjmp(png_jmpbuf(w.png)))
            failed = true;
        if (!failed) {
            png_init_io(w.png, w.fp);
            int color = img.nc() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
            png_set_IHDR(w.png, w.info, img.nx(), img.ny(), 16, color, PNG_INTERLACE_NONE,
                         PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
            // fixed settings keep output byte-stable
            png_set_compression_level(w.png, 6);
            png_set_filter(w.png, 0, PNG_FILTER_NONE);
            png_write_info(w.png, w.info);
            png_set_swap(w.png);
            for (int y = 0; y < img.ny() && !failed; ++y) {
                for (int i = 0; i < img.nx() * img.nc(); ++i) {
                    float v = img.data()[(size_t)y * img.nx() * img.nc() + i];
                    v = std::clamp(v, 0.f, 1.f);
                    row[i] = (uint16_t)std::lround(v * 65535.0);
                }
                png_write_row(w.png, reinterpret_cast<png_bytep>(row.data()));
            }
            if (!failed)
                png_write_end(w.png, nullptr);
        }
        if (failed)
            throw FormatError("png: failed to write " + tmp.string());
    });
}

std::string view_filename(int v, int u) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "view_v%02d_u%02d.png", v, u);
    return buf;
}

LightField import_png_grid(const std::filesystem::path &dir, int nv, int nu,
                           bool srgb_to_linear) {
    if (nv < 1 || nu < 1)
        throw FormatError("import_png_grid: angular dims must be >= 1");
    LightField lf;
    for (int v = 0; v < nv; ++v)
        for (int u = 0; u < nu; ++u) {
            std::filesystem::path file = dir / view_filename(v, u);
            if (!std::filesystem::exists(file))
                throw FormatError("missing view (v=" + std::to_string(v) +
                                  ", u=" + std::to_string(u) + "): " + file.string());
            Image view = read_png(file, srgb_to_linear);
            if (v == 0 && u == 0)
                lf = LightField(view.ny(), view.nx(), nv, nu, view.nc());
            else if (view.ny() != lf.ny() || view.nx() != lf.nx() || view.nc() != lf.nc())
                throw FormatError("view size mismatch at " + file.string());
            for (int y = 0; y < lf.ny(); ++y)
                for (int x = 0; x < lf.nx(); ++x)
                    for (int c = 0; c < lf.nc(); ++c)
                        lf.at(y, x, v, u, c) = view.at(y, x, c);
        }
    return lf;
}

void export_png_grid(const LightField &lf, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    for (int v = 0; v < lf.nv(); ++v)
        for (int u = 0; u < lf.nu(); ++u)
            write_png16(subaperture(lf, v, u), dir / view_filename(v, u));
}

// ---------------------------------------------------------------------------
// JSON sidecars

using json = nlohmann::ordered_json;

namespace {

json parse_json_file(const std::filesystem::path &path) {
    std::ifstream is(path);
    if (!is)
        throw FormatError("cannot open " + path.string());
    json j = json::parse(is, nullptr, false);
    if (j.is_discarded())
        throw FormatError("invalid JSON in " + path.string());
    return j;
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
    atomic_write(path, [&](const std::filesystem::path &tmp) {
        std::ofstream os(tmp, std::ios::binary);
        if (!os)
            throw FormatError("cannot open " + tmp.string() + " for writing");
        os << text;
        if (!os)
            throw FormatError("write failed: " + tmp.string());
    });
}

} // namespace

MotionPath read_path_json(const std::filesystem::path &path) {
    json j = parse_json_file(path);
    try {
        if (j.value("version", 1) != 1)
            throw FormatError("unsupported path file version in " + path.string());
        std::vector<std::array<double, 3>> pts;
        for (const auto &p : j.at("control_points"))
            pts.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
        if (j.contains("n") && (int)pts.size() != j["n"].get<int>())
            throw FormatError("path file n does not match control_points length");
        MotionPath mp(pts);
        if (!mp.pinned())
            throw FormatError("first control point must be [0,0,0] in " + path.string());
        return mp;
    } catch (const json::exception &e) {
        throw FormatError("bad path file " + path.string() + ": " + e.what());
    } catch (const std::invalid_argument &e) {
        throw FormatError("bad path file " + path.string() + ": " + e.what());
    }
}

void write_path_json(const MotionPath &path, const std::filesystem::path &file) {
    json j;
    j["version"] = 1;
    j["n"] = path.n();
    j["control_points"] = json::array();
    for (const auto &p : path.control_points)
        j["control_points"].push_back({p[0], p[1], p[2]});
    j["units"] = "p_x, p_y in angular samples; p_z in angular samples per spatial sample";
    write_text_file(file, j.dump(2) + "\n");
}

SolverConfig read_solver_config(const std::filesystem::path &path) {
    json j = parse_json_file(path);
    SolverConfig cfg;
    try {
        cfg.lambda = j.value("lambda", cfg.lambda);
        cfg.eps_start = j.value("eps_start", cfg.eps_start);
        cfg.eps_end = j.value("eps_end", cfg.eps_end);
        cfg.eps_decay = j.value("eps_decay", cfg.eps_decay);
        cfg.lr_lightfield = j.value("lr_lightfield", cfg.lr_lightfield);
        cfg.lr_path = j.value("lr_path", cfg.lr_path);
        cfg.iters_stage1 = j.value("iters_stage1", cfg.iters_stage1);
        cfg.iters_stage2 = j.value("iters_stage2", cfg.iters_stage2);
        cfg.lambda_tv = j.value("lambda_tv", cfg.lambda_tv);
        cfg.num_time_samples = j.value("num_time_samples", cfg.num_time_samples);
        cfg.control_points = j.value("control_points", cfg.control_points);
        cfg.adam.beta1 = j.value("beta1", cfg.adam.beta1);
        cfg.adam.beta2 = j.value("beta2", cfg.adam.beta2);
        cfg.adam.eps_hat = j.value("eps_hat", cfg.adam.eps_hat);
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const json::exception &e) {
        throw FormatError("bad solver config " + path.string() + ": " + e.what());
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw FormatError("bad solver config " + path.string() + ": " + e.what());
    }
    return cfg;
}

void write_solver_report(const SolverReport &report, const std::filesystem::path &path) {
    json j;
    j["diverged"] = report.diverged;
    if (!report.note.empty())
        j["note"] = report.note;
    j["stage1_iters"] = report.stage1_iters;
    j["final_loss"] = report.final_loss;
    j["final_path"] = json::array();
    for (const auto &p : report.final_path.control_points)
        j["final_path"].push_back({p[0], p[1], p[2]});
    j["data_trace"] = report.data_trace;
    j["prior_trace"] = report.prior_trace;
    j["eps_trace"] = report.eps_trace;
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace lfd
