#pragma once

#include <cstdint>
#include <vector>

#include "fetmosaic/homography.hpp"
#include "fetmosaic/image.hpp"

namespace fetmosaic {

struct TrajectorySpec {
    int n_frames = 50;
    int frame_size = 448;            // square frames
    double max_step_translation = 2.0; // px/frame
    double max_step_rotation = 0.5;    // degrees/frame
    double max_step_scale = 0.005;     // fraction/frame
    double perspective_jitter = 0.0;   // row-3 magnitude
    double noise_sigma = 0.0;          // additive Gaussian, sample units
    uint64_t seed = 0;
};

struct SyntheticSequence {
    std::vector<Image> frames;
    // Binary vessel-map variant of each frame (strokes only), for the
    // segmentation-map registration path.
    std::vector<Image> vessel_frames;
    FovMask fov;
    std::vector<Homography> gt_pairwise; // frame i -> frame i+1
    std::vector<Homography> gt_absolute; // frame i -> frame 0
};

// Deterministic band-limited noise texture in [0,1] with dark curvilinear
// strokes mimicking vessels.
Image generate_texture(int size, uint64_t seed);

// Planar scene viewed through a bounded random-walk homography trajectory;
// exact ground-truth transforms are recorded alongside the frames.
SyntheticSequence generate_sequence(const TrajectorySpec& spec);

} // namespace fetmosaic
