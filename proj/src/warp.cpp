#include "fetmosaic/warp.hpp"

#include <algorithm>
#include <cmath>

namespace fetmosaic {

namespace {

struct BilinearTap {
    int x0, x1, y0, y1;
    double fx, fy;
};

// Valid iff 0 <= u <= w-1 and 0 <= v <= h-1; an integral coordinate counts
// its own pixel with unit weight so identity preserves the full frame.
inline bool bilinear_tap(double u, double v, int w, int h, BilinearTap& t) {
    if (!(u >= 0.0 && u <= w - 1.0 && v >= 0.0 && v <= h - 1.0)) return false;
    t.x0 = static_cast<int>(std::floor(u));
    t.y0 = static_cast<int>(std::floor(v));
    t.fx = u - t.x0;
    t.fy = v - t.y0;
    t.x1 = std::min(t.x0 + 1, w - 1);
    t.y1 = std::min(t.y0 + 1, h - 1);
    return true;
}

} // namespace

std::pair<Image, FovMask> warp_image(const Image& src, const Homography& h,
                                     int out_width, int out_height) {
    const Homography back = invert(h);
    Image out(out_width, out_height, src.channels, 0.0);
    FovMask valid(out_width, out_height, false);

    const double* b = back.m.data();
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            const double wp = b[6] * x + b[7] * y + b[8];
            if (std::abs(wp) <= 1e-12) continue;
            const double u = (b[0] * x + b[1] * y + b[2]) / wp;
            const double v = (b[3] * x + b[4] * y + b[5]) / wp;
            BilinearTap t;
            if (!bilinear_tap(u, v, src.width, src.height, t)) continue;
            valid.at(x, y) = 1;
            for (int c = 0; c < src.channels; ++c) {
                const double v00 = src.at(t.x0, t.y0, c);
                const double v10 = src.at(t.x1, t.y0, c);
                const double v01 = src.at(t.x0, t.y1, c);
                const double v11 = src.at(t.x1, t.y1, c);
                const double top = v00 + t.fx * (v10 - v00);
                const double bot = v01 + t.fx * (v11 - v01);
                out.at(x, y, c) = top + t.fy * (bot - top);
            }
        }
    }
    return {std::move(out), std::move(valid)};
}

FovMask warp_mask(const FovMask& src, const Homography& h,
                  int out_width, int out_height) {
    const Homography back = invert(h);
    FovMask out(out_width, out_height, false);
    const double* b = back.m.data();
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            const double wp = b[6] * x + b[7] * y + b[8];
            if (std::abs(wp) <= 1e-12) continue;
            const double u = (b[0] * x + b[1] * y + b[2]) / wp;
            const double v = (b[3] * x + b[4] * y + b[5]) / wp;
            if (!(u >= 0.0 && u <= src.width - 1.0 &&
                  v >= 0.0 && v <= src.height - 1.0))
                continue;
            const int su = static_cast<int>(std::lround(u));
            const int sv = static_cast<int>(std::lround(v));
            if (src.at(std::min(su, src.width - 1), std::min(sv, src.height - 1)))
                out.at(x, y) = 1;
        }
    }
    return out;
}

FovMask circular_mask(int width, int height, double margin_fraction) {
    FovMask mask(width, height, false);
    const double cx = width / 2.0;
    const double cy = height / 2.0;
    const double r = std::min(width, height) / 2.0 * (1.0 - margin_fraction);
    const double r2 = r * r;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            if (dx * dx + dy * dy < r2) mask.at(x, y) = 1;
        }
    return mask;
}

} // namespace fetmosaic
