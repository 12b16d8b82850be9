#pragma once

#include <cstdint>
#include <vector>

#include "fetmosaic/errors.hpp"

namespace fetmosaic {

// Dense pixel grid, row-major, channel-interleaved, samples in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c = 1, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Boolean validity grid marking the usable field of view.
struct FovMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    FovMask() = default;
    FovMask(int w, int h, bool fill = false)
        : width(w), height(h),
          data(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

    uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    bool at(int x, int y) const { return data[static_cast<size_t>(y) * width + x] != 0; }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += (v != 0);
        return n;
    }
};

// Per-pixel class ids in {0: background, 1: vessel, 2: tool, 3: fetus}.
struct LabelMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    LabelMask() = default;
    LabelMask(int w, int h, uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

inline constexpr int kNumClasses = 4;

// RGB to luma, BT.601 weights. Single-channel images pass through unchanged.
Image to_gray(const Image& img);

} // namespace fetmosaic
