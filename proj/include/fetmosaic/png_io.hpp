#pragma once

#include <string>

#include "fetmosaic/image.hpp"

namespace fetmosaic {

// 8-bit PNG readers/writers. Images quantize with round(v * 255); label
// masks store raw class ids.

Image read_png(const std::string& path);           // gray -> 1ch, color -> 3ch
LabelMask read_png_labels(const std::string& path); // raw 8-bit gray values
FovMask read_png_mask(const std::string& path);     // nonzero -> true

void write_png(const std::string& path, const Image& img);
void write_png(const std::string& path, const LabelMask& labels);
void write_png(const std::string& path, const FovMask& mask);

} // namespace fetmosaic
