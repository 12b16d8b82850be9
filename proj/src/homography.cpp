#include "fetmosaic/homography.hpp"

#include <algorithm>
#include <cmath>

namespace fetmosaic {

Homography Homography::translation(double tx, double ty) {
    Homography h;
    h(0, 2) = tx;
    h(1, 2) = ty;
    return h;
}

Homography Homography::rotation(double angle_rad, Point2 center) {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    Homography h;
    h(0, 0) = c;
    h(0, 1) = -s;
    h(1, 0) = s;
    h(1, 1) = c;
    h(0, 2) = center.x - c * center.x + s * center.y;
    h(1, 2) = center.y - s * center.x - c * center.y;
    return h;
}

Homography Homography::scaling(double s, Point2 center) {
    Homography h;
    h(0, 0) = s;
    h(1, 1) = s;
    h(0, 2) = center.x * (1.0 - s);
    h(1, 2) = center.y * (1.0 - s);
    return h;
}

Homography normalize(const Homography& h) {
    Homography out = h;
    const double w = h.m[8];
    if (std::abs(w) > 1e-12) {
        for (double& v : out.m) v /= w;
        return out;
    }
    double frob = 0.0;
    for (double v : h.m) frob += v * v;
    frob = std::sqrt(frob);
    if (frob == 0.0) throw ZeroMatrix("normalize: zero matrix");
    // Fix the overall sign so the canonical form is unique.
    const auto it = std::max_element(h.m.begin(), h.m.end(),
        [](double a, double b) { return std::abs(a) < std::abs(b); });
    const double sign = (*it < 0.0) ? -1.0 : 1.0;
    for (double& v : out.m) v = v * sign / frob;
    return out;
}

Point2 map_point(const Homography& h, Point2 p) {
    const double xp = h.m[0] * p.x + h.m[1] * p.y + h.m[2];
    const double yp = h.m[3] * p.x + h.m[4] * p.y + h.m[5];
    const double wp = h.m[6] * p.x + h.m[7] * p.y + h.m[8];
    if (std::abs(wp) <= 1e-12)
        throw PointAtInfinity("map_point: homogeneous coordinate vanished");
    return {xp / wp, yp / wp};
}

static Homography multiply(const Homography& a, const Homography& b) {
    Homography r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

Homography compose(const Homography& a, const Homography& b) {
    return normalize(multiply(a, b));
}

Homography chain(std::span<const Homography> hs, size_t i, size_t n) {
    if (i > hs.size() || n > hs.size() - i)
        throw IndexOutOfRange("chain: range [" + std::to_string(i) + ", " +
                              std::to_string(i + n) + ") exceeds " +
                              std::to_string(hs.size()) + " transforms");
    Homography acc = Homography::identity();
    for (size_t k = 0; k < n; ++k)
        acc = multiply(hs[i + k], acc);
    return normalize(acc);
}

double determinant(const Homography& h) {
    const auto& m = h.m;
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography invert(const Homography& h) {
    const double det = determinant(h);
    double scale = 0.0;
    for (double v : h.m) scale = std::max(scale, std::abs(v));
    if (std::abs(det) <= 1e-14 * scale * scale * scale)
        throw SingularMatrix("invert: determinant too small");
    const auto& m = h.m;
    Homography r;
    r.m = {
        (m[4] * m[8] - m[5] * m[7]) / det,
        (m[2] * m[7] - m[1] * m[8]) / det,
        (m[1] * m[5] - m[2] * m[4]) / det,
        (m[5] * m[6] - m[3] * m[8]) / det,
        (m[0] * m[8] - m[2] * m[6]) / det,
        (m[2] * m[3] - m[0] * m[5]) / det,
        (m[3] * m[7] - m[4] * m[6]) / det,
        (m[1] * m[6] - m[0] * m[7]) / det,
        (m[0] * m[4] - m[1] * m[3]) / det,
    };
    return normalize(r);
}

double max_corner_error(const Homography& a, const Homography& b,
                        int width, int height) {
    const Point2 corners[4] = {
        {0.0, 0.0},
        {static_cast<double>(width - 1), 0.0},
        {0.0, static_cast<double>(height - 1)},
        {static_cast<double>(width - 1), static_cast<double>(height - 1)},
    };
    double worst = 0.0;
    for (const Point2& c : corners) {
        const Point2 pa = map_point(a, c);
        const Point2 pb = map_point(b, c);
        worst = std::max(worst, std::hypot(pa.x - pb.x, pa.y - pb.y));
    }
    return worst;
}

} // namespace fetmosaic
