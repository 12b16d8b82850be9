#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fetmosaic/homography.hpp"
#include "fetmosaic/image.hpp"

namespace fetmosaic {

struct CropRect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

enum class ConsistencyStatus { scored, failed_low_overlap };

struct ConsistencyOutcome {
    ConsistencyStatus status = ConsistencyStatus::failed_low_overlap;
    std::optional<double> ssim; // present iff scored
    double overlap_fraction = 0.0;
    CropRect crop;
};

struct PairSpec {
    size_t source_index = 0;
    size_t target_index = 0;
    size_t gap = 0; // target - source
};

inline constexpr double kOverlapFailThreshold = 0.25;

// 9x9 Gaussian, sigma 2, reflect-101 borders.
Image smooth(const Image& img);

// Overlap = fov AND warp_mask(fov, h); fraction relative to |fov|.
std::pair<FovMask, double> overlap_region(const Homography& h, const FovMask& fov);

// Mean SSIM between a and b (shared shape), standard stabilizers
// C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L = 1, local statistics from an
// 11x11 Gaussian window (sigma 1.5). The local map is averaged over mask
// pixels when a mask is given, over all pixels otherwise. Multi-channel
// images are scored per channel and averaged.
double ssim(const Image& a, const Image& b, const FovMask* mask = nullptr);

// Pipeline: smooth both -> warp source by h -> overlap test (< 25% fails)
// -> crop to the overlap bounding box -> SSIM restricted to overlap pixels.
ConsistencyOutcome consistency_score(const Image& source, const Image& target,
                                     const Homography& h, const FovMask& fov);

// Scores frame i against frame i+gap under the chained pairwise transforms,
// for every i in [0, N-gap).
std::vector<std::pair<PairSpec, ConsistencyOutcome>>
sequence_consistency(std::span<const Image> frames,
                     std::span<const Homography> pairwise,
                     size_t gap, const FovMask& fov);

} // namespace fetmosaic
