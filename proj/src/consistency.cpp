#include "fetmosaic/consistency.hpp"

#include <algorithm>
#include <cmath>

#include "fetmosaic/filter.hpp"
#include "fetmosaic/warp.hpp"

namespace fetmosaic {

Image smooth(const Image& img) {
    static const std::vector<double> kernel = gaussian_kernel(4, 2.0);
    return separable_convolve(img, kernel);
}

std::pair<FovMask, double> overlap_region(const Homography& h, const FovMask& fov) {
    FovMask warped = warp_mask(fov, h, fov.width, fov.height);
    FovMask overlap(fov.width, fov.height, false);
    size_t fov_count = 0, overlap_count = 0;
    for (size_t i = 0; i < fov.data.size(); ++i) {
        if (!fov.data[i]) continue;
        ++fov_count;
        if (warped.data[i]) {
            overlap.data[i] = 1;
            ++overlap_count;
        }
    }
    const double frac = fov_count ? static_cast<double>(overlap_count) / fov_count : 0.0;
    return {std::move(overlap), frac};
}

double ssim(const Image& a, const Image& b, const FovMask* mask) {
    if (!a.same_shape(b))
        throw DimensionMismatch("ssim: image shapes differ");
    if (mask && (mask->width != a.width || mask->height != a.height))
        throw DimensionMismatch("ssim: mask shape differs from images");

    static const std::vector<double> window = gaussian_kernel(5, 1.5);
    constexpr double C1 = 0.01 * 0.01;
    constexpr double C2 = 0.03 * 0.03;

    const int nc = a.channels;
    Image aa(a.width, a.height, nc), bb(a.width, a.height, nc), ab(a.width, a.height, nc);
    for (size_t i = 0; i < a.data.size(); ++i) {
        aa.data[i] = a.data[i] * a.data[i];
        bb.data[i] = b.data[i] * b.data[i];
        ab.data[i] = a.data[i] * b.data[i];
    }
    const Image mu_a = separable_convolve(a, window);
    const Image mu_b = separable_convolve(b, window);
    const Image m_aa = separable_convolve(aa, window);
    const Image m_bb = separable_convolve(bb, window);
    const Image m_ab = separable_convolve(ab, window);

    double sum = 0.0;
    size_t n = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (mask && !mask->at(x, y)) continue;
            double per_px = 0.0;
            for (int c = 0; c < nc; ++c) {
                const double ma = mu_a.at(x, y, c);
                const double mb = mu_b.at(x, y, c);
                const double va = m_aa.at(x, y, c) - ma * ma;
                const double vb = m_bb.at(x, y, c) - mb * mb;
                const double cov = m_ab.at(x, y, c) - ma * mb;
                const double num = (2.0 * ma * mb + C1) * (2.0 * cov + C2);
                const double den = (ma * ma + mb * mb + C1) * (va + vb + C2);
                per_px += std::clamp(num / den, -1.0, 1.0);
            }
            sum += per_px / nc;
            ++n;
        }
    return n ? sum / n : 0.0;
}

ConsistencyOutcome consistency_score(const Image& source, const Image& target,
                                     const Homography& h, const FovMask& fov) {
    if (source.width != fov.width || source.height != fov.height ||
        !source.same_shape(target))
        throw DimensionMismatch("consistency_score: shapes differ");

    const Image src_s = smooth(source);
    const Image tgt_s = smooth(target);
    auto [warped, warp_valid] = warp_image(src_s, h, fov.width, fov.height);
    auto [overlap, frac] = overlap_region(h, fov);

    ConsistencyOutcome out;
    out.overlap_fraction = frac;
    if (frac < kOverlapFailThreshold) {
        out.status = ConsistencyStatus::failed_low_overlap;
        return out;
    }

    int x0 = fov.width, y0 = fov.height, x1 = -1, y1 = -1;
    for (int y = 0; y < fov.height; ++y)
        for (int x = 0; x < fov.width; ++x)
            if (overlap.at(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    out.crop = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};

    Image ca(out.crop.width, out.crop.height, source.channels);
    Image cb(out.crop.width, out.crop.height, source.channels);
    FovMask cm(out.crop.width, out.crop.height, false);
    for (int y = 0; y < out.crop.height; ++y)
        for (int x = 0; x < out.crop.width; ++x) {
            for (int c = 0; c < source.channels; ++c) {
                ca.at(x, y, c) = warped.at(x0 + x, y0 + y, c);
                cb.at(x, y, c) = tgt_s.at(x0 + x, y0 + y, c);
            }
            cm.at(x, y) = overlap.at(x0 + x, y0 + y);
        }

    out.status = ConsistencyStatus::scored;
    out.ssim = ssim(ca, cb, &cm);
    return out;
}

std::vector<std::pair<PairSpec, ConsistencyOutcome>>
sequence_consistency(std::span<const Image> frames,
                     std::span<const Homography> pairwise,
                     size_t gap, const FovMask& fov) {
    if (gap < 1 || frames.size() <= gap)
        throw TooFewFrames("sequence_consistency: need more than gap=" +
                           std::to_string(gap) + " frames, got " +
                           std::to_string(frames.size()));
    if (pairwise.size() + 1 != frames.size())
        throw LengthMismatch("sequence_consistency: expected " +
                             std::to_string(frames.size() - 1) +
                             " pairwise transforms, got " +
                             std::to_string(pairwise.size()));

    std::vector<std::pair<PairSpec, ConsistencyOutcome>> results;
    results.reserve(frames.size() - gap);
    for (size_t i = 0; i + gap < frames.size(); ++i) {
        const Homography h = chain(pairwise, i, gap);
        PairSpec spec{i, i + gap, gap};
        results.emplace_back(spec, consistency_score(frames[i], frames[i + gap], h, fov));
    }
    return results;
}

} // namespace fetmosaic
