#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fetmosaic/synthetic.hpp"
#include "fetmosaic/warp.hpp"
#include "test_util.hpp"

using namespace fetmosaic;
using namespace testutil;

TEST_CASE("texture is deterministic, in range and textured") {
    const Image a = generate_texture(128, 42);
    const Image b = generate_texture(128, 42);
    CHECK(a.data == b.data); // bit-identical

    const Image c = generate_texture(128, 43);
    CHECK(a.data != c.data);

    double lo = 1e9, hi = -1e9, sum = 0.0;
    for (double v : a.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
    const double mean = sum / a.data.size();
    double var = 0.0;
    for (double v : a.data) var += (v - mean) * (v - mean);
    var /= a.data.size();
    CHECK(var > 0.005); // enough contrast to register against

    CHECK_THROWS_AS(generate_texture(32, 1), SizeTooSmall);
}

TEST_CASE("sequence is deterministic per seed") {
    TrajectorySpec spec;
    spec.n_frames = 4;
    spec.frame_size = 96;
    spec.seed = 7;
    const SyntheticSequence a = generate_sequence(spec);
    const SyntheticSequence b = generate_sequence(spec);
    for (int i = 0; i < 4; ++i) {
        CHECK(a.frames[i].data == b.frames[i].data);
        CHECK(a.vessel_frames[i].data == b.vessel_frames[i].data);
    }
    for (int i = 0; i < 3; ++i)
        CHECK(max_elem_diff(a.gt_pairwise[i], b.gt_pairwise[i]) == 0.0);

    spec.seed = 8;
    const SyntheticSequence c = generate_sequence(spec);
    CHECK(a.frames[0].data != c.frames[0].data);
}

TEST_CASE("sequence shapes and bookkeeping") {
    TrajectorySpec spec;
    spec.n_frames = 5;
    spec.frame_size = 96;
    spec.seed = 11;
    const SyntheticSequence seq = generate_sequence(spec);
    CHECK(seq.frames.size() == 5);
    CHECK(seq.vessel_frames.size() == 5);
    CHECK(seq.gt_pairwise.size() == 4);
    CHECK(seq.gt_absolute.size() == 5);
    CHECK(seq.fov.width == 96);
    CHECK(seq.frames[0].width == 96);
    CHECK(seq.frames[0].channels == 1);
    CHECK(max_elem_diff(seq.gt_absolute[0], Homography::identity()) == 0.0);

    TrajectorySpec tiny = spec;
    tiny.n_frames = 1;
    CHECK_THROWS_AS(generate_sequence(tiny), SizeTooSmall);
    TrajectorySpec small = spec;
    small.frame_size = 32;
    CHECK_THROWS_AS(generate_sequence(small), SizeTooSmall);
}

TEST_CASE("a static spec produces identical frames and identity transforms") {
    TrajectorySpec spec;
    spec.n_frames = 3;
    spec.frame_size = 96;
    spec.max_step_translation = 0.0;
    spec.max_step_rotation = 0.0;
    spec.max_step_scale = 0.0;
    spec.seed = 5;
    const SyntheticSequence seq = generate_sequence(spec);
    for (int i = 0; i < 2; ++i)
        CHECK(max_elem_diff(seq.gt_pairwise[i], Homography::identity()) < 1e-12);
    for (int i = 1; i < 3; ++i) CHECK(seq.frames[i].data == seq.frames[0].data);
}

TEST_CASE("chained pairwise transforms reproduce the absolute ones") {
    TrajectorySpec spec;
    spec.n_frames = 8;
    spec.frame_size = 96;
    spec.perspective_jitter = 1e-5;
    spec.seed = 17;
    const SyntheticSequence seq = generate_sequence(spec);
    for (size_t i = 1; i < 8; ++i) {
        const Homography chained =
            invert(chain(seq.gt_pairwise, 0, i));
        CHECK(max_corner_error(chained, seq.gt_absolute[i], 96, 96) < 1e-9);
    }
}

TEST_CASE("ground truth actually relates consecutive frames") {
    // Warp frame i+1's content back through gt_pairwise inverse and compare
    // with frame i on the shared field of view.
    TrajectorySpec spec;
    spec.n_frames = 3;
    spec.frame_size = 128;
    spec.max_step_translation = 3.0;
    spec.seed = 29;
    const SyntheticSequence seq = generate_sequence(spec);
    for (int i = 0; i < 2; ++i) {
        // gt_pairwise maps frame i coords to frame i+1 coords; warp_image
        // wants the src-to-output transform, here frame i+1 -> frame i.
        auto [recon, valid] = warp_image(seq.frames[i + 1],
                                         invert(seq.gt_pairwise[i]), 128, 128);
        // Only compare where the sample came from inside frame i+1's disk;
        // outside it the source pixels are zeroed.
        const FovMask src_fov =
            warp_mask(seq.fov, invert(seq.gt_pairwise[i]), 128, 128);
        double err = 0.0;
        size_t n = 0;
        for (int y = 0; y < 128; ++y)
            for (int x = 0; x < 128; ++x)
                if (seq.fov.at(x, y) && valid.at(x, y) && src_fov.at(x, y)) {
                    err += std::abs(recon.at(x, y) - seq.frames[i].at(x, y));
                    ++n;
                }
        REQUIRE(n > 1000);
        CHECK(err / n < 0.01); // bilinear resampling noise only
    }
}

TEST_CASE("pixels outside the field of view are exactly zero") {
    TrajectorySpec spec;
    spec.n_frames = 2;
    spec.frame_size = 96;
    spec.seed = 3;
    const SyntheticSequence seq = generate_sequence(spec);
    for (const Image& f : seq.frames)
        for (int y = 0; y < 96; ++y)
            for (int x = 0; x < 96; ++x)
                if (!seq.fov.at(x, y)) CHECK(f.at(x, y) == 0.0);
}

TEST_CASE("vessel frames are binary and nonempty") {
    TrajectorySpec spec;
    spec.n_frames = 2;
    spec.frame_size = 128;
    spec.seed = 31;
    const SyntheticSequence seq = generate_sequence(spec);
    size_t on = 0;
    for (double v : seq.vessel_frames[0].data) {
        CHECK((v == 0.0 || v == 1.0));
        on += v == 1.0;
    }
    CHECK(on > 50); // strokes visible inside the frame
}

TEST_CASE("additive noise changes frames but not the ground truth") {
    TrajectorySpec spec;
    spec.n_frames = 2;
    spec.frame_size = 96;
    spec.seed = 13;
    const SyntheticSequence clean = generate_sequence(spec);
    spec.noise_sigma = 0.01;
    const SyntheticSequence noisy = generate_sequence(spec);
    CHECK(clean.frames[0].data != noisy.frames[0].data);
    CHECK(max_elem_diff(clean.gt_pairwise[0], noisy.gt_pairwise[0]) == 0.0);
    for (double v : noisy.frames[0].data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
