#include "fetmosaic/filter.hpp"

#include <cmath>

namespace fetmosaic {

std::vector<double> gaussian_kernel(int radius, double sigma) {
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

namespace {

inline int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

} // namespace

Image separable_convolve(const Image& img, const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size()) / 2;
    const int w = img.width, h = img.height, nc = img.channels;

    Image tmp(w, h, nc);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < nc; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k)
                    acc += kernel[k + radius] * img.at(reflect101(x + k, w), y, c);
                tmp.at(x, y, c) = acc;
            }

    Image out(w, h, nc);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < nc; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k)
                    acc += kernel[k + radius] * tmp.at(x, reflect101(y + k, h), c);
                out.at(x, y, c) = acc;
            }
    return out;
}

} // namespace fetmosaic
