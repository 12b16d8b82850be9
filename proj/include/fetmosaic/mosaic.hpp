#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fetmosaic/homography.hpp"
#include "fetmosaic/image.hpp"
#include "fetmosaic/registration.hpp"

namespace fetmosaic {

struct MosaicLayout {
    size_t anchor_index = 0;
    std::vector<Homography> per_frame_to_canvas; // frame i -> canvas coords
    int canvas_width = 0;
    int canvas_height = 0;
    Point2 offset; // canvas origin in anchor coordinates
    // Frames whose warped corners exceeded the canvas cap; excluded from the
    // hull and skipped when rendering.
    std::vector<size_t> excluded_frames;
};

enum class BlendMode { overwrite_latest, running_mean };

// A diverging chain can explode the hull; frames mapping outside this extent
// are excluded and reported instead of rendered.
inline constexpr int kDefaultCanvasCap = 8192;

// Chains pairwise transforms to the anchor frame and computes the canvas
// hull of all warped frame corners. pairwise[i] maps frame i into frame i+1.
MosaicLayout layout(std::span<const RegistrationResult> pairwise,
                    int frame_width, int frame_height, size_t anchor_index,
                    int canvas_cap = kDefaultCanvasCap);

MosaicLayout layout(std::span<const Homography> pairwise,
                    int frame_width, int frame_height, size_t anchor_index,
                    int canvas_cap = kDefaultCanvasCap);

std::pair<Image, FovMask> render(std::span<const Image> frames,
                                 std::span<const FovMask> masks,
                                 const MosaicLayout& lay, BlendMode blend);

// Convenience overload: one shared field-of-view mask for every frame.
std::pair<Image, FovMask> render(std::span<const Image> frames,
                                 const FovMask& shared_mask,
                                 const MosaicLayout& lay, BlendMode blend);

struct DriftEntry {
    size_t frame_index = 0;
    bool available = false;
    double corner_error_px = 0.0;
};

// Max reprojection error of the four frame corners between the layout and
// ground-truth absolute transforms (frame i -> anchor coordinates). Without
// ground truth only the anchor row carries a (zero) error.
std::vector<DriftEntry> drift_report(const MosaicLayout& lay,
                                     int frame_width, int frame_height,
                                     std::span<const Homography> ground_truth = {});

} // namespace fetmosaic
