#pragma once

#include <array>
#include <span>

#include "fetmosaic/errors.hpp"

namespace fetmosaic {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// 3x3 projective transform between 2D pixel coordinates, defined up to scale.
// Stored row-major.
struct Homography {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double& operator()(int r, int c) { return m[r * 3 + c]; }
    double operator()(int r, int c) const { return m[r * 3 + c]; }

    static Homography identity() { return {}; }
    static Homography translation(double tx, double ty);
    // Rotation by angle (radians) about a center point, counter-clockwise in
    // image coordinates with y pointing down.
    static Homography rotation(double angle_rad, Point2 center = {0, 0});
    static Homography scaling(double s, Point2 center = {0, 0});
};

// Canonical form: m[2][2] = 1 when |m[2][2]| > 1e-12, otherwise unit
// Frobenius norm (sign of the largest-magnitude entry made positive).
Homography normalize(const Homography& h);

// (x', y', w') = m * (x, y, 1); returns (x'/w', y'/w').
// Throws PointAtInfinity when |w'| <= 1e-12.
Point2 map_point(const Homography& h, Point2 p);

// normalize(a * b): apply b first, then a.
Homography compose(const Homography& a, const Homography& b);

// normalize(hs[i+n-1] * ... * hs[i]); the earliest transform applies first.
// n = 0 yields identity.
Homography chain(std::span<const Homography> hs, size_t i, size_t n);

Homography invert(const Homography& h);

double determinant(const Homography& h);

// Max deviation over the four corners of a w x h frame between the two
// mappings, in pixels.
double max_corner_error(const Homography& a, const Homography& b,
                        int width, int height);

} // namespace fetmosaic
