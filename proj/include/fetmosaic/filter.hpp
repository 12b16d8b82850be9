#pragma once

#include <vector>

#include "fetmosaic/image.hpp"

namespace fetmosaic {

// Symmetric 1D Gaussian taps at integer offsets -radius..radius, normalized
// to sum exactly 1.
std::vector<double> gaussian_kernel(int radius, double sigma);

// Separable convolution with the same odd-length kernel in x then y,
// reflect-101 border extension (edge pixel not repeated).
Image separable_convolve(const Image& img, const std::vector<double>& kernel);

} // namespace fetmosaic
