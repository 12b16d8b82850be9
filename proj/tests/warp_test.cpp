#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fetmosaic/warp.hpp"
#include "test_util.hpp"

using namespace fetmosaic;
using namespace testutil;

TEST_CASE("warp_image identity is exact and fully valid") {
    const Image img = smooth_test_image(17, 13);
    const auto [out, mask] = warp_image(img, Homography::identity(), 17, 13);
    for (size_t i = 0; i < img.data.size(); ++i) CHECK(out.data[i] == img.data[i]);
    CHECK(mask.count() == img.pixel_count());
}

TEST_CASE("warp_image integer translation shifts indices exactly") {
    Image img(10, 10, 1);
    std::mt19937 rng(5);
    for (double& v : img.data) v = uniform(rng, 0.0, 1.0);

    const auto [out, mask] = warp_image(img, Homography::translation(2, 3), 10, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) {
            if (x >= 2 && y >= 3) {
                CHECK(mask.at(x, y));
                CHECK(out.at(x, y) == img.at(x - 2, y - 3));
            } else {
                CHECK_FALSE(mask.at(x, y));
                CHECK(out.at(x, y) == 0.0);
            }
        }
}

TEST_CASE("warp_image half-pixel bilinear average") {
    Image img(2, 2, 1);
    img.at(0, 0) = 0.0;
    img.at(1, 0) = 1.0;
    img.at(0, 1) = 0.0;
    img.at(1, 1) = 1.0;
    // Shift right by half a pixel: destination x=1 samples source x=0.5.
    const auto [out, mask] = warp_image(img, Homography::translation(0.5, 0.0), 2, 2);
    CHECK(mask.at(1, 0));
    CHECK(std::abs(out.at(1, 0) - 0.5) < 1e-12);
    CHECK(std::abs(out.at(1, 1) - 0.5) < 1e-12);
    CHECK_FALSE(mask.at(0, 0));
}

TEST_CASE("warp then inverse warp reproduces smooth images") {
    const Image img = smooth_test_image(64, 64);
    std::mt19937 rng(17);
    const Homography h = random_affine(rng);
    const auto [fwd, fwd_mask] = warp_image(img, h, 64, 64);
    const auto [back, back_mask] = warp_image(fwd, invert(h), 64, 64);
    size_t checked = 0;
    for (int y = 1; y < 63; ++y)
        for (int x = 1; x < 63; ++x) {
            if (!back_mask.at(x, y)) continue;
            // Doubly-valid region: all four warped samples read by the
            // round trip must themselves be valid.
            const Point2 u = map_point(h, {double(x), double(y)});
            const int x0 = static_cast<int>(std::floor(u.x));
            const int y0 = static_cast<int>(std::floor(u.y));
            bool interior = true;
            for (int dy = 0; dy <= 1 && interior; ++dy)
                for (int dx = 0; dx <= 1 && interior; ++dx) {
                    const int sx = std::min(x0 + dx, 63);
                    const int sy = std::min(y0 + dy, 63);
                    interior = sx >= 0 && sy >= 0 && fwd_mask.at(sx, sy);
                }
            if (!interior) continue;
            CHECK(std::abs(back.at(x, y) - img.at(x, y)) < 0.02);
            ++checked;
        }
    CHECK(checked > 500);
}

TEST_CASE("warp output stays in [0,1]") {
    std::mt19937 rng(23);
    Image img(32, 32, 1);
    for (double& v : img.data) v = uniform(rng, 0.0, 1.0);
    const auto [out, mask] = warp_image(img, random_projective(rng), 32, 32);
    for (double v : out.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("warp_image validity is a subset of warp_mask of all-true") {
    std::mt19937 rng(31);
    const Image img = smooth_test_image(40, 40);
    for (int trial = 0; trial < 5; ++trial) {
        const Homography h = random_projective(rng);
        const auto [out, valid] = warp_image(img, h, 40, 40);
        const FovMask allowed = warp_mask(FovMask(40, 40, true), h, 40, 40);
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 40; ++x)
                if (valid.at(x, y)) CHECK(allowed.at(x, y));
    }
}

TEST_CASE("warp_mask identity and disjoint translation") {
    const FovMask disk = circular_mask(32, 32);
    const FovMask same = warp_mask(disk, Homography::identity(), 32, 32);
    CHECK(same.data == disk.data);

    const FovMask gone = warp_mask(disk, Homography::translation(100, 0), 32, 32);
    CHECK(gone.count() == 0);
}

TEST_CASE("warp_mask of a centered disk is rotation invariant up to the rim") {
    const int n = 64;
    const FovMask disk = circular_mask(n, n);
    const Homography rot =
        Homography::rotation(std::numbers::pi / 2.0, {n / 2.0, n / 2.0});
    const FovMask rotated = warp_mask(disk, rot, n, n);
    size_t disagreements = 0;
    for (size_t i = 0; i < disk.data.size(); ++i)
        disagreements += disk.data[i] != rotated.data[i];
    const double perimeter = 2.0 * std::numbers::pi * (n / 2.0);
    CHECK(disagreements <= static_cast<size_t>(perimeter));
}

TEST_CASE("circular_mask geometry") {
    const FovMask m = circular_mask(100, 100, 0.0);
    CHECK(m.at(50, 50));
    CHECK_FALSE(m.at(0, 0));

    // Margin shrinks the radius linearly: 0.5 margin halves it.
    const FovMask half = circular_mask(100, 100, 0.5);
    const double quarter_area = std::numbers::pi * 25.0 * 25.0;
    CHECK(std::abs(static_cast<double>(half.count()) - quarter_area) <
          0.05 * quarter_area);

    const FovMask tiny = circular_mask(100, 100, 0.98);
    CHECK(tiny.count() > 0);
    CHECK(tiny.count() < 20);
    CHECK(tiny.at(50, 50));
}

TEST_CASE("circular_mask area approximates a disk") {
    for (int n : {100, 128, 257}) {
        const FovMask m = circular_mask(n, n, 0.0);
        const double r = n / 2.0;
        const double expected = std::numbers::pi * r * r;
        CHECK(std::abs(static_cast<double>(m.count()) - expected) < 0.02 * expected);
    }
}
