#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fetmosaic/registration.hpp"
#include "fetmosaic/synthetic.hpp"
#include "fetmosaic/warp.hpp"
#include "test_util.hpp"

using namespace fetmosaic;
using namespace testutil;

namespace {

RegistrationConfig small_cfg() {
    RegistrationConfig cfg;
    cfg.pyramid_levels = 3;
    cfg.max_iterations_per_level = 40;
    return cfg;
}

double mean_masked_residual(const Image& fixed, const Image& moving,
                            const FovMask& mask, std::span<const double> p) {
    double sum = 0.0;
    size_t n = 0;
    for (int y = 0; y < fixed.height; ++y)
        for (int x = 0; x < fixed.width; ++x) {
            if (!mask.at(x, y)) continue;
            double r;
            if (detail::residual_at(fixed, moving, x, y, p, false, &r, nullptr)) {
                sum += r * r;
                ++n;
            }
        }
    return n ? sum / n : 0.0;
}

} // namespace

TEST_CASE("build_pyramid shapes, constants and conservative masks") {
    const FovMask full(64, 64, true);

    const Image img = smooth_test_image(64, 64);
    const auto single = build_pyramid(img, full, 1);
    CHECK(single.size() == 1);
    CHECK(single[0].first.data == img.data);

    const Image constant(64, 64, 1, 0.7);
    const auto levels = build_pyramid(constant, circular_mask(64, 64), 3);
    CHECK(levels.size() == 3);
    CHECK(levels[0].first.width == 64);
    CHECK(levels[1].first.width == 32);
    CHECK(levels[2].first.width == 16);
    for (const auto& [li, lm] : levels)
        for (double v : li.data) CHECK(std::abs(v - 0.7) < 1e-12);
    for (size_t l = 1; l < levels.size(); ++l)
        CHECK(levels[l].second.count() * 4 <= levels[l - 1].second.count());

    CHECK_THROWS_AS(build_pyramid(Image(4, 4, 1), FovMask(4, 4, true), 4),
                    ImageTooSmall);
}

TEST_CASE("analytic jacobian matches central finite differences") {
    Image moving = generate_texture(96, 3);
    const Image fixed = generate_texture(96, 3); // residual content irrelevant
    std::mt19937 rng(15);

    std::array<double, 8> p{};
    p[0] = 0.01;
    p[1] = -0.004;
    p[2] = 0.006;
    p[3] = -0.012;
    p[4] = 1.7;
    p[5] = -2.3;

    int tested = 0;
    while (tested < 50) {
        const int x = 8 + static_cast<int>(uniform(rng, 0, 80));
        const int y = 8 + static_cast<int>(uniform(rng, 0, 80));
        // Keep the warped point away from cell boundaries so the finite
        // difference stays within one bilinear cell.
        const double u = (1 + p[0]) * x + p[2] * y + p[4];
        const double v = p[1] * x + (1 + p[3]) * y + p[5];
        auto frac = [](double t) { return t - std::floor(t); };
        if (std::min(frac(u), 1 - frac(u)) < 1e-3 ||
            std::min(frac(v), 1 - frac(v)) < 1e-3)
            continue;

        double r;
        std::array<double, 8> jac;
        if (!detail::residual_at(fixed, moving, x, y, p, false, &r, &jac)) continue;
        for (int i = 0; i < 6; ++i) {
            const double eps = i >= 4 ? 1e-7 : 1e-9; // linear params scale with x, y
            auto pp = p, pm = p;
            pp[i] += eps;
            pm[i] -= eps;
            double rp, rm;
            REQUIRE(detail::residual_at(fixed, moving, x, y, pp, false, &rp, nullptr));
            REQUIRE(detail::residual_at(fixed, moving, x, y, pm, false, &rm, nullptr));
            const double fd = (rp - rm) / (2 * eps);
            const double scale = std::max({std::abs(jac[i]), std::abs(fd), 1e-6});
            CHECK(std::abs(jac[i] - fd) / scale < 1e-4);
        }
        ++tested;
    }
}

TEST_CASE("self-registration returns identity") {
    const Image img = generate_texture(96, 7);
    const FovMask fov = circular_mask(96, 96);
    const auto result = register_pair(img, img, fov, small_cfg());
    CHECK(result.converged);
    CHECK(result.final_residual < 1e-12);
    CHECK(max_corner_error(result.h, Homography::identity(), 96, 96) < 1e-3);
}

TEST_CASE("self-registration converges from a small perturbation") {
    const Image img = generate_texture(128, 9);
    const FovMask fov = circular_mask(128, 128);
    for (double dx : {-2.0, 1.5}) {
        const auto result = register_pair(img, img, fov, small_cfg(),
                                          Homography::translation(dx, -dx / 2));
        CHECK(result.converged);
        CHECK(max_corner_error(result.h, Homography::identity(), 128, 128) < 0.05);
    }
}

TEST_CASE("recovers a known translation to subpixel accuracy") {
    TrajectorySpec spec;
    spec.n_frames = 2;
    spec.frame_size = 128;
    spec.max_step_translation = 4.0;
    spec.max_step_rotation = 0.0;
    spec.max_step_scale = 0.0;
    spec.seed = 33;
    const SyntheticSequence seq = generate_sequence(spec);

    const auto result =
        register_pair(seq.frames[1], seq.frames[0], seq.fov, small_cfg());
    CHECK(result.converged);
    CHECK(max_corner_error(result.h, seq.gt_pairwise[0], 128, 128) < 0.1);
}

TEST_CASE("recovers a known affine warp on a full-size frame") {
    const int n = 448;
    const Image master = generate_texture(3 * n, 13);
    const Point2 c{n / 2.0, n / 2.0};
    const Homography pose0 = Homography::translation(n, n);
    const Homography motion = compose(
        Homography::rotation(5.0 * std::numbers::pi / 180.0, c),
        compose(Homography::scaling(1.03, c), Homography::translation(2, 1)));
    const Homography pose1 = compose(pose0, motion);

    const Image fixed = warp_image(master, invert(pose1), n, n).first;
    const Image moving = warp_image(master, invert(pose0), n, n).first;
    const Homography gt = compose(invert(pose1), pose0); // moving -> fixed

    RegistrationConfig cfg; // defaults: 4 levels
    const auto result = register_pair(fixed, moving, circular_mask(n, n), cfg);
    CHECK(max_corner_error(result.h, gt, n, n) < 0.5);
}

TEST_CASE("residual does not increase relative to the initial guess") {
    TrajectorySpec spec;
    spec.n_frames = 2;
    spec.frame_size = 128;
    spec.seed = 55;
    const SyntheticSequence seq = generate_sequence(spec);
    const auto result =
        register_pair(seq.frames[1], seq.frames[0], seq.fov, small_cfg());
    const std::array<double, 8> ident{};
    const double init_residual =
        mean_masked_residual(seq.frames[1], seq.frames[0], seq.fov, ident);
    CHECK(result.final_residual <= init_residual + 1e-15);
}

TEST_CASE("forward and backward registrations are mutually inverse") {
    TrajectorySpec spec;
    spec.n_frames = 2;
    spec.frame_size = 128;
    spec.seed = 77;
    const SyntheticSequence seq = generate_sequence(spec);
    const auto fwd =
        register_pair(seq.frames[1], seq.frames[0], seq.fov, small_cfg());
    const auto bwd =
        register_pair(seq.frames[0], seq.frames[1], seq.fov, small_cfg());
    CHECK(max_corner_error(compose(fwd.h, bwd.h), Homography::identity(), 128, 128) <
          0.5);
}

TEST_CASE("far-off init raises InsufficientOverlap") {
    const Image img = generate_texture(96, 19);
    const FovMask fov = circular_mask(96, 96);
    CHECK_THROWS_AS(register_pair(img, img, fov, small_cfg(),
                                  Homography::translation(1000, 0)),
                    InsufficientOverlap);
}

TEST_CASE("register_sequence tracks a synthetic trajectory") {
    TrajectorySpec spec;
    spec.n_frames = 10;
    spec.frame_size = 128;
    spec.max_step_translation = 1.0;
    spec.max_step_rotation = 0.0;
    spec.max_step_scale = 0.0;
    spec.seed = 101;
    const SyntheticSequence seq = generate_sequence(spec);

    const auto results = register_sequence(seq.frames, seq.fov, small_cfg());
    CHECK(results.size() == 9);
    for (size_t i = 0; i < results.size(); ++i)
        CHECK(max_corner_error(results[i].h, seq.gt_pairwise[i], 128, 128) < 0.1);
}

TEST_CASE("register_sequence survives an all-black frame") {
    TrajectorySpec spec;
    spec.n_frames = 5;
    spec.frame_size = 96;
    spec.max_step_translation = 1.0;
    spec.max_step_rotation = 0.0;
    spec.max_step_scale = 0.0;
    spec.seed = 23;
    SyntheticSequence seq = generate_sequence(spec);
    seq.frames[2] = Image(96, 96, 1, 0.0);

    const auto results = register_sequence(seq.frames, seq.fov, small_cfg());
    CHECK(results.size() == 4);
    CHECK_FALSE(results[1].converged); // fixed frame black
    CHECK(max_elem_diff(results[1].h, Homography::identity()) == 0.0);
    CHECK_FALSE(results[2].converged); // moving frame black
    CHECK(results[0].converged);
    CHECK(max_corner_error(results[0].h, seq.gt_pairwise[0], 96, 96) < 0.1);
    CHECK(results[3].converged);
    CHECK(max_corner_error(results[3].h, seq.gt_pairwise[3], 96, 96) < 0.1);
}

TEST_CASE("register_sequence rejects short input") {
    const std::vector<Image> one(1, generate_texture(64, 1));
    CHECK_THROWS_AS(register_sequence(one, circular_mask(64, 64), small_cfg()),
                    TooFewFrames);
}

TEST_CASE("two identical frames yield one identity result") {
    const Image img = generate_texture(96, 29);
    const std::vector<Image> frames(2, img);
    const auto results = register_sequence(frames, circular_mask(96, 96), small_cfg());
    CHECK(results.size() == 1);
    CHECK(results[0].converged);
    CHECK(max_corner_error(results[0].h, Homography::identity(), 96, 96) < 1e-3);
}
