#include "fetmosaic/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

namespace fetmosaic {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct RawPng {
    int width = 0;
    int height = 0;
    int channels = 0; // 1 or 3 after transforms
    std::vector<uint8_t> pixels;
};

RawPng read_raw(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             nullptr, nullptr);
    if (!png) throw IoError("libpng init failed for " + path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng init failed for " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode " + path);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_packing(png);
    png_set_expand(png); // palette -> rgb, low-bit gray -> 8 bit
    png_read_update_info(png, info);

    RawPng out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = static_cast<int>(png_get_channels(png, info));
    if (out.channels != 1 && out.channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path + ": unsupported channel count " +
                      std::to_string(out.channels));
    }

    out.pixels.resize(static_cast<size_t>(out.width) * out.height * out.channels);
    std::vector<png_bytep> rows(out.height);
    const size_t stride = static_cast<size_t>(out.width) * out.channels;
    for (int y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_raw(const std::string& path, int width, int height, int channels,
               const std::vector<uint8_t>& pixels) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, nullptr);
    if (!png) throw IoError("libpng init failed for " + path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng init failed for " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode " + path);
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_bytep> rows(height);
    const size_t stride = static_cast<size_t>(width) * channels;
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(pixels.data() + y * stride);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace

Image read_png(const std::string& path) {
    const RawPng raw = read_raw(path);
    Image img(raw.width, raw.height, raw.channels);
    for (size_t i = 0; i < raw.pixels.size(); ++i)
        img.data[i] = raw.pixels[i] / 255.0;
    return img;
}

LabelMask read_png_labels(const std::string& path) {
    const RawPng raw = read_raw(path);
    if (raw.channels != 1)
        throw IoError(path + ": label masks must be single-channel");
    LabelMask labels(raw.width, raw.height);
    labels.data = raw.pixels;
    return labels;
}

FovMask read_png_mask(const std::string& path) {
    const RawPng raw = read_raw(path);
    if (raw.channels != 1)
        throw IoError(path + ": masks must be single-channel");
    FovMask mask(raw.width, raw.height);
    for (size_t i = 0; i < raw.pixels.size(); ++i)
        mask.data[i] = raw.pixels[i] ? 1 : 0;
    return mask;
}

void write_png(const std::string& path, const Image& img) {
    std::vector<uint8_t> pixels(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double v = std::clamp(img.data[i], 0.0, 1.0);
        pixels[i] = static_cast<uint8_t>(std::lround(v * 255.0));
    }
    write_raw(path, img.width, img.height, img.channels, pixels);
}

void write_png(const std::string& path, const LabelMask& labels) {
    write_raw(path, labels.width, labels.height, 1, labels.data);
}

void write_png(const std::string& path, const FovMask& mask) {
    std::vector<uint8_t> pixels(mask.data.size());
    for (size_t i = 0; i < mask.data.size(); ++i)
        pixels[i] = mask.data[i] ? 255 : 0;
    write_raw(path, mask.width, mask.height, 1, pixels);
}

} // namespace fetmosaic
