#include "realonly/imagio.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <jpeglib.h>

namespace realonly {

namespace {

std::uint8_t quantize(double v) {
    double q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
    return static_cast<std::uint8_t>(q);
}

Raster raster_from_bytes(const std::vector<std::uint8_t>& bytes, int w, int h, int channels) {
    Raster r;
    r.width = w;
    r.height = h;
    r.planes.assign(channels, Plane::Zero(h, w));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                r.planes[c](y, x) = bytes[(static_cast<std::size_t>(y) * w + x) * channels + c] / 255.0;
    return r;
}

std::vector<std::uint8_t> bytes_from_raster(const Raster& r) {
    const int channels = r.channels();
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(r.width) * r.height * channels);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x)
            for (int c = 0; c < channels; ++c)
                bytes[(static_cast<std::size_t>(y) * r.width + x) * channels + c] =
                    quantize(r.planes[c](y, x));
    return bytes;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& cause) {
    throw std::runtime_error("image error: " + path + ": " + cause);
}

// ---- PNG ----

Raster load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(path, "cannot open for reading");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "corrupt PNG stream");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported PNG channel layout");
    }

    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * channels);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = bytes.data() + static_cast<std::size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    return raster_from_bytes(bytes, static_cast<int>(w), static_cast<int>(h), channels);
}

void save_png(const Raster& r, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) fail(path, "cannot open for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(path, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "PNG write failed");
    }
    png_init_io(png, fp.get());
    int color = r.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, r.width, r.height, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<std::uint8_t> bytes = bytes_from_raster(r);
    for (int y = 0; y < r.height; ++y)
        png_write_row(png, bytes.data() + static_cast<std::size_t>(y) * r.width * r.channels());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---- PPM (binary P6, maxval 255) ----

Raster load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open for reading");
    std::string magic;
    in >> magic;
    if (magic != "P6") fail(path, "unsupported PPM variant (only P6)");
    auto next_int = [&]() {
        // Skips whitespace and '#' comment lines between header tokens.
        int c;
        while ((c = in.peek()) != EOF) {
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v = -1;
        in >> v;
        return v;
    };
    long w = next_int(), h = next_int(), maxval = next_int();
    if (!in || w <= 0 || h <= 0) fail(path, "corrupt PPM header");
    if (maxval != 255) fail(path, "unsupported PPM maxval (only 255)");
    in.get();  // single whitespace after maxval

    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) fail(path, "truncated PPM data");
    return raster_from_bytes(bytes, static_cast<int>(w), static_cast<int>(h), 3);
}

void save_ppm(const Raster& r, const std::string& path) {
    Raster rgb = r;
    if (rgb.channels() == 1) rgb.planes = {r.planes[0], r.planes[0], r.planes[0]};
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P6\n" << rgb.width << " " << rgb.height << "\n255\n";
    std::vector<std::uint8_t> bytes = bytes_from_raster(rgb);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(path, "PPM write failed");
}

// ---- JPEG ----

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

}  // namespace

std::vector<std::uint8_t> encode_jpeg(const Raster& raster, int quality) {
    if (quality < 1 || quality > 100) throw std::invalid_argument("jpeg quality must be in 1..100");
    jpeg_compress_struct cinfo{};
    JpegErrorMgr jerr{};
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    unsigned char* buf = nullptr;
    unsigned long buf_size = 0;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_compress(&cinfo);
        std::free(buf);
        throw std::runtime_error("JPEG encode failed");
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buf, &buf_size);
    cinfo.image_width = static_cast<JDIMENSION>(raster.width);
    cinfo.image_height = static_cast<JDIMENSION>(raster.height);
    cinfo.input_components = raster.channels();
    cinfo.in_color_space = raster.channels() == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);

    std::vector<std::uint8_t> bytes = bytes_from_raster(raster);
    const std::size_t stride = static_cast<std::size_t>(raster.width) * raster.channels();
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = bytes.data() + cinfo.next_scanline * stride;
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::vector<std::uint8_t> out(buf, buf + buf_size);
    std::free(buf);
    return out;
}

Raster decode_jpeg(const std::uint8_t* data, std::size_t size) {
    jpeg_decompress_struct cinfo{};
    JpegErrorMgr jerr{};
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error("corrupt JPEG stream");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
    jpeg_read_header(&cinfo, TRUE);
    jpeg_start_decompress(&cinfo);

    int channels = cinfo.output_components;
    if (channels != 1 && channels != 3) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error("unsupported JPEG channel layout");
    }
    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * channels);
    const std::size_t stride = static_cast<std::size_t>(w) * channels;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = bytes.data() + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return raster_from_bytes(bytes, w, h, channels);
}

namespace {

Raster load_jpeg(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open for reading");
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    try {
        return decode_jpeg(data.data(), data.size());
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
}

void save_jpeg(const Raster& r, const std::string& path, int quality) {
    std::vector<std::uint8_t> data = encode_jpeg(r, quality);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) fail(path, "JPEG write failed");
}

bool has_suffix(const std::string& s, const std::string& suf) {
    if (s.size() < suf.size()) return false;
    std::string tail = s.substr(s.size() - suf.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return tail == suf;
}

}  // namespace

bool Raster::valid() const {
    if (width <= 0 || height <= 0) return false;
    if (channels() != 1 && channels() != 3) return false;
    for (const Plane& p : planes) {
        if (p.rows() != height || p.cols() != width) return false;
        if (!p.isFinite().all()) return false;
    }
    return true;
}

void Raster::clamp01() {
    for (Plane& p : planes) p = p.min(1.0).max(0.0);
}

Raster load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail(path, "unreadable file");
    unsigned char sig[8] = {};
    probe.read(reinterpret_cast<char*>(sig), 8);
    probe.close();

    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (std::memcmp(sig, png_sig, 8) == 0) return load_png(path);
    if (sig[0] == 'P' && sig[1] == '6') return load_ppm(path);
    if (sig[0] == 0xff && sig[1] == 0xd8) return load_jpeg(path);
    fail(path, "unsupported format (expected PNG, P6 PPM or JPEG)");
}

void save_image(const Raster& raster, const std::string& path, ImageFormat format,
                int jpeg_quality) {
    if (!raster.valid()) throw std::invalid_argument("save_image: invalid raster");
    switch (format) {
        case ImageFormat::Png: save_png(raster, path); return;
        case ImageFormat::Ppm: save_ppm(raster, path); return;
        case ImageFormat::Jpeg: save_jpeg(raster, path, jpeg_quality); return;
    }
    throw std::invalid_argument("save_image: unknown format");
}

void save_image(const Raster& raster, const std::string& path, int jpeg_quality) {
    if (has_suffix(path, ".png")) save_image(raster, path, ImageFormat::Png, jpeg_quality);
    else if (has_suffix(path, ".ppm")) save_image(raster, path, ImageFormat::Ppm, jpeg_quality);
    else if (has_suffix(path, ".jpg") || has_suffix(path, ".jpeg"))
        save_image(raster, path, ImageFormat::Jpeg, jpeg_quality);
    else fail(path, "cannot infer format from extension");
}

Raster center_crop(const Raster& raster, int size) {
    if (size <= 0 || size > std::min(raster.width, raster.height))
        throw std::invalid_argument("center_crop: size exceeds dimensions");
    const int x0 = (raster.width - size) / 2;
    const int y0 = (raster.height - size) / 2;
    Raster out;
    out.width = size;
    out.height = size;
    out.planes.reserve(raster.planes.size());
    for (const Plane& p : raster.planes) out.planes.push_back(p.block(y0, x0, size, size));
    return out;
}

Plane resize_plane(const Plane& plane, int new_w, int new_h, ResizeMethod method) {
    if (new_w < 1 || new_h < 1) throw std::invalid_argument("resize: zero dimension");
    const int w = static_cast<int>(plane.cols());
    const int h = static_cast<int>(plane.rows());
    const double sx = static_cast<double>(w) / new_w;
    const double sy = static_cast<double>(h) / new_h;
    Plane out(new_h, new_w);
    for (int y = 0; y < new_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < new_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            if (method == ResizeMethod::Nearest) {
                int iy = std::clamp(static_cast<int>(std::lround(fy)), 0, h - 1);
                int ix = std::clamp(static_cast<int>(std::lround(fx)), 0, w - 1);
                out(y, x) = plane(iy, ix);
            } else {
                int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, h - 1);
                int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, w - 1);
                int y1 = std::min(y0 + 1, h - 1);
                int x1 = std::min(x0 + 1, w - 1);
                double ty = std::clamp(fy - y0, 0.0, 1.0);
                double tx = std::clamp(fx - x0, 0.0, 1.0);
                out(y, x) = (1 - ty) * ((1 - tx) * plane(y0, x0) + tx * plane(y0, x1)) +
                            ty * ((1 - tx) * plane(y1, x0) + tx * plane(y1, x1));
            }
        }
    }
    return out;
}

Raster resize(const Raster& raster, int new_w, int new_h, ResizeMethod method) {
    Raster out;
    out.width = new_w;
    out.height = new_h;
    out.planes.reserve(raster.planes.size());
    for (const Plane& p : raster.planes) out.planes.push_back(resize_plane(p, new_w, new_h, method));
    out.clamp01();
    return out;
}

}  // namespace realonly
