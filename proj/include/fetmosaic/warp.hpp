#pragma once

#include <utility>

#include "fetmosaic/homography.hpp"
#include "fetmosaic/image.hpp"

namespace fetmosaic {

// Perspective warp with bilinear interpolation, destination scan through
// invert(h). The mask is true exactly where the back-projected sample falls
// inside [0, w-1] x [0, h-1]; invalid pixels are written as 0.
std::pair<Image, FovMask> warp_image(const Image& src, const Homography& h,
                                     int out_width, int out_height);

// Nearest-neighbor warp of a boolean mask under the same bounds convention.
FovMask warp_mask(const FovMask& src, const Homography& h,
                  int out_width, int out_height);

// Disk of radius min(w,h)/2 * (1 - margin_fraction) about the frame center.
FovMask circular_mask(int width, int height, double margin_fraction = 0.0);

} // namespace fetmosaic
