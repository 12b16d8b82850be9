#include "fetmosaic/image.hpp"

namespace fetmosaic {

Image to_gray(const Image& img) {
    if (img.channels == 1) return img;
    if (img.channels != 3)
        throw DimensionMismatch("to_gray: expected 1 or 3 channels");
    Image out(img.width, img.height, 1);
    for (size_t px = 0; px < out.data.size(); ++px) {
        const double r = img.data[3 * px];
        const double g = img.data[3 * px + 1];
        const double b = img.data[3 * px + 2];
        out.data[px] = 0.299 * r + 0.587 * g + 0.114 * b;
    }
    return out;
}

} // namespace fetmosaic
