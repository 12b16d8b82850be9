#include "fetmosaic/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fetmosaic/filter.hpp"
#include "fetmosaic/warp.hpp"

namespace fetmosaic {

namespace {

// Thin deterministic layer over mt19937_64: distribution results do not
// depend on the standard library's <random> distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    double uniform() { return (gen_() >> 11) * 0x1.0p-53; } // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

Image upsample_bilinear(const Image& coarse, int size) {
    Image out(size, size, 1);
    const double sx = static_cast<double>(coarse.width - 1) / (size - 1);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double u = x * sx;
            const double v = y * sx;
            const int x0 = std::min(static_cast<int>(u), coarse.width - 2);
            const int y0 = std::min(static_cast<int>(v), coarse.height - 2);
            const double fx = u - x0, fy = v - y0;
            const double top = coarse.at(x0, y0) +
                               fx * (coarse.at(x0 + 1, y0) - coarse.at(x0, y0));
            const double bot = coarse.at(x0, y0 + 1) +
                               fx * (coarse.at(x0 + 1, y0 + 1) - coarse.at(x0, y0 + 1));
            out.at(x, y) = top + fy * (bot - top);
        }
    return out;
}

void stamp_disk(Image& strokes, double cx, double cy, double radius) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(strokes.width - 1, static_cast<int>(std::ceil(cx + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(strokes.height - 1, static_cast<int>(std::ceil(cy + radius)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= radius * radius) strokes.at(x, y) = 1.0;
        }
}

// Texture plus a binary stroke map drawn from the same random stream.
std::pair<Image, Image> texture_with_strokes(int size, uint64_t seed) {
    if (size < 64)
        throw SizeTooSmall("generate_texture: size must be >= 64, got " +
                           std::to_string(size));
    Rng rng(seed);

    // Coarsest cell 64 px, finest 16 px: anything finer would alias under
    // bilinear resampling and put a floor on achievable alignment accuracy.
    Image tex(size, size, 1, 0.0);
    const int cell_sizes[3] = {64, 32, 16};
    const double amplitudes[3] = {1.0, 0.6, 0.35};
    for (int oct = 0; oct < 3; ++oct) {
        const int cells = size / cell_sizes[oct] + 2;
        Image coarse(cells, cells, 1);
        for (double& v : coarse.data) v = rng.uniform();
        const Image up = upsample_bilinear(coarse, size);
        for (size_t i = 0; i < tex.data.size(); ++i)
            tex.data[i] += amplitudes[oct] * up.data[i];
    }
    const auto [lo_it, hi_it] = std::minmax_element(tex.data.begin(), tex.data.end());
    const double lo = *lo_it, span = std::max(*hi_it - lo, 1e-9);
    for (double& v : tex.data) v = 0.2 + 0.75 * (v - lo) / span;

    Image strokes(size, size, 1, 0.0);
    const int n_strokes = size / 64 + 3;
    for (int s = 0; s < n_strokes; ++s) {
        double x = rng.uniform(0.1 * size, 0.9 * size);
        double y = rng.uniform(0.1 * size, 0.9 * size);
        double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double width = rng.uniform(2.0, 6.0);
        const double darken = rng.uniform(0.3, 0.6);
        const int steps = static_cast<int>(size * 1.2);
        Image stroke_mask(size, size, 1, 0.0);
        for (int t = 0; t < steps; ++t) {
            stamp_disk(stroke_mask, x, y, width / 2.0);
            angle += rng.uniform(-0.12, 0.12);
            x += std::cos(angle);
            y += std::sin(angle);
            if (x < 1 || x > size - 2 || y < 1 || y > size - 2) break;
        }
        for (size_t i = 0; i < tex.data.size(); ++i)
            if (stroke_mask.data[i] > 0.0) {
                tex.data[i] = std::max(0.0, tex.data[i] - darken);
                strokes.data[i] = 1.0;
            }
    }
    // Low-pass so the texture is smooth at the pixel scale: the piecewise
    // linear value noise and hard stroke edges otherwise alias under
    // bilinear resampling, which would make sub-pixel alignment ill-posed.
    tex = separable_convolve(tex, gaussian_kernel(5, 2.0));
    return {std::move(tex), std::move(strokes)};
}

double reflect_into(double v, double lo, double hi) {
    while (v < lo || v > hi) {
        if (v < lo) v = 2.0 * lo - v;
        if (v > hi) v = 2.0 * hi - v;
    }
    return v;
}

} // namespace

Image generate_texture(int size, uint64_t seed) {
    return texture_with_strokes(size, seed).first;
}

SyntheticSequence generate_sequence(const TrajectorySpec& spec) {
    if (spec.n_frames < 2)
        throw SizeTooSmall("generate_sequence: n_frames must be >= 2, got " +
                           std::to_string(spec.n_frames));
    if (spec.frame_size < 64)
        throw SizeTooSmall("generate_sequence: frame_size must be >= 64, got " +
                           std::to_string(spec.frame_size));

    const int fs = spec.frame_size;
    const int master_size = 3 * fs;
    auto [master, master_strokes] = texture_with_strokes(master_size, spec.seed);
    Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ull);

    SyntheticSequence seq;
    seq.fov = circular_mask(fs, fs);

    // Random-walk pose with reflecting bounds so every frame stays inside
    // the master texture.
    double tx = master_size / 2.0, ty = master_size / 2.0;
    double theta = 0.0, log_s = 0.0;
    const double t_lo = 1.1 * fs, t_hi = master_size - 1.1 * fs;
    const double th_lim = 0.5;
    const double ls_lo = std::log(0.85), ls_hi = std::log(1.2);
    const double max_rot_rad = spec.max_step_rotation * std::numbers::pi / 180.0;
    const Point2 frame_center{fs / 2.0, fs / 2.0};

    std::vector<Homography> poses; // frame i coords -> master coords
    for (int i = 0; i < spec.n_frames; ++i) {
        if (i > 0) {
            tx = reflect_into(tx + rng.uniform(-spec.max_step_translation,
                                               spec.max_step_translation),
                              t_lo, t_hi);
            ty = reflect_into(ty + rng.uniform(-spec.max_step_translation,
                                               spec.max_step_translation),
                              t_lo, t_hi);
            theta = reflect_into(theta + rng.uniform(-max_rot_rad, max_rot_rad),
                                 -th_lim, th_lim);
            log_s = reflect_into(log_s + rng.uniform(-spec.max_step_scale,
                                                     spec.max_step_scale),
                                 ls_lo, ls_hi);
        }
        Homography pose = compose(
            Homography::translation(tx - frame_center.x, ty - frame_center.y),
            compose(Homography::rotation(theta, frame_center),
                    Homography::scaling(std::exp(log_s), frame_center)));
        if (spec.perspective_jitter > 0.0) {
            Homography persp;
            persp.m[6] = rng.uniform(-spec.perspective_jitter, spec.perspective_jitter);
            persp.m[7] = rng.uniform(-spec.perspective_jitter, spec.perspective_jitter);
            pose = compose(pose, persp);
        }
        poses.push_back(pose);
    }

    // Render frames with 2x2 supersampling: plain bilinear point sampling has
    // a phase-dependent blur that would bias sub-pixel registration away from
    // the recorded ground truth.
    auto render = [&](const Image& src, const Homography& pose) {
        Image out(fs, fs, 1, 0.0);
        for (double dy : {-0.25, 0.25})
            for (double dx : {-0.25, 0.25}) {
                const Homography h = compose(pose, Homography::translation(dx, dy));
                const Image sub = warp_image(src, invert(h), fs, fs).first;
                for (size_t k = 0; k < out.data.size(); ++k)
                    out.data[k] += 0.25 * sub.data[k];
            }
        return out;
    };

    for (int i = 0; i < spec.n_frames; ++i) {
        Image frame = render(master, poses[i]);
        Image vessels = render(master_strokes, poses[i]);
        for (int y = 0; y < fs; ++y)
            for (int x = 0; x < fs; ++x) {
                if (!seq.fov.at(x, y)) {
                    frame.at(x, y) = 0.0;
                    vessels.at(x, y) = 0.0;
                    continue;
                }
                double v = frame.at(x, y);
                if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
                frame.at(x, y) = std::clamp(v, 0.0, 1.0);
                vessels.at(x, y) = vessels.at(x, y) >= 0.5 ? 1.0 : 0.0;
            }
        seq.frames.push_back(std::move(frame));
        seq.vessel_frames.push_back(std::move(vessels));
    }

    for (int i = 0; i < spec.n_frames; ++i) {
        seq.gt_absolute.push_back(compose(invert(poses[0]), poses[i]));
        if (i + 1 < spec.n_frames)
            seq.gt_pairwise.push_back(compose(invert(poses[i + 1]), poses[i]));
    }
    return seq;
}

} // namespace fetmosaic
