#include "fetmosaic/mosaic.hpp"

#include <algorithm>
#include <cmath>

#include "fetmosaic/warp.hpp"

namespace fetmosaic {

MosaicLayout layout(std::span<const RegistrationResult> pairwise,
                    int frame_width, int frame_height, size_t anchor_index,
                    int canvas_cap) {
    std::vector<Homography> hs;
    hs.reserve(pairwise.size());
    for (const auto& r : pairwise) hs.push_back(r.h);
    return layout(std::span<const Homography>(hs), frame_width, frame_height,
                  anchor_index, canvas_cap);
}

MosaicLayout layout(std::span<const Homography> pairwise,
                    int frame_width, int frame_height, size_t anchor_index,
                    int canvas_cap) {
    const size_t n_frames = pairwise.size() + 1;
    if (anchor_index >= n_frames)
        throw IndexOutOfRange("layout: anchor " + std::to_string(anchor_index) +
                              " out of range for " + std::to_string(n_frames) +
                              " frames");

    // Frame i -> anchor coordinates.
    std::vector<Homography> to_anchor(n_frames);
    for (size_t i = 0; i < n_frames; ++i) {
        if (i < anchor_index)
            to_anchor[i] = chain(pairwise, i, anchor_index - i);
        else if (i > anchor_index)
            to_anchor[i] = invert(chain(pairwise, anchor_index, i - anchor_index));
        else
            to_anchor[i] = Homography::identity();
    }

    const Point2 corners[4] = {
        {0.0, 0.0},
        {frame_width - 1.0, 0.0},
        {0.0, frame_height - 1.0},
        {frame_width - 1.0, frame_height - 1.0},
    };

    MosaicLayout lay;
    lay.anchor_index = anchor_index;
    double min_x = 0.0, min_y = 0.0, max_x = frame_width - 1.0,
           max_y = frame_height - 1.0; // anchor frame always included
    std::vector<bool> excluded(n_frames, false);
    for (size_t i = 0; i < n_frames; ++i) {
        if (i == anchor_index) continue;
        double fx0 = 1e300, fy0 = 1e300, fx1 = -1e300, fy1 = -1e300;
        bool bad = false;
        for (const Point2& c : corners) {
            try {
                const Point2 p = map_point(to_anchor[i], c);
                if (!std::isfinite(p.x) || !std::isfinite(p.y)) { bad = true; break; }
                fx0 = std::min(fx0, p.x);
                fy0 = std::min(fy0, p.y);
                fx1 = std::max(fx1, p.x);
                fy1 = std::max(fy1, p.y);
            } catch (const PointAtInfinity&) {
                bad = true;
                break;
            }
        }
        if (bad || fx1 - fx0 > canvas_cap || fy1 - fy0 > canvas_cap ||
            std::abs(fx0) > canvas_cap || std::abs(fy0) > canvas_cap ||
            std::abs(fx1) > canvas_cap || std::abs(fy1) > canvas_cap) {
            excluded[i] = true;
            lay.excluded_frames.push_back(i);
            continue;
        }
        min_x = std::min(min_x, fx0);
        min_y = std::min(min_y, fy0);
        max_x = std::max(max_x, fx1);
        max_y = std::max(max_y, fy1);
    }

    lay.offset = {std::floor(min_x), std::floor(min_y)};
    lay.canvas_width = static_cast<int>(std::ceil(max_x) - lay.offset.x) + 1;
    lay.canvas_height = static_cast<int>(std::ceil(max_y) - lay.offset.y) + 1;

    const Homography shift = Homography::translation(-lay.offset.x, -lay.offset.y);
    lay.per_frame_to_canvas.resize(n_frames);
    for (size_t i = 0; i < n_frames; ++i)
        lay.per_frame_to_canvas[i] = compose(shift, to_anchor[i]);
    return lay;
}

std::pair<Image, FovMask> render(std::span<const Image> frames,
                                 std::span<const FovMask> masks,
                                 const MosaicLayout& lay, BlendMode blend) {
    if (frames.size() != lay.per_frame_to_canvas.size() ||
        masks.size() != frames.size())
        throw DimensionMismatch("render: frame count does not match layout");
    const int cw = lay.canvas_width, ch = lay.canvas_height;
    const int channels = frames.empty() ? 1 : frames[0].channels;

    Image canvas(cw, ch, channels, 0.0);
    FovMask covered(cw, ch, false);
    std::vector<uint32_t> contrib;
    if (blend == BlendMode::running_mean)
        contrib.assign(static_cast<size_t>(cw) * ch, 0);

    for (size_t i = 0; i < frames.size(); ++i) {
        if (std::find(lay.excluded_frames.begin(), lay.excluded_frames.end(), i) !=
            lay.excluded_frames.end())
            continue;
        auto [warped, valid] = warp_image(frames[i], lay.per_frame_to_canvas[i], cw, ch);
        const FovMask fov_warped = warp_mask(masks[i], lay.per_frame_to_canvas[i], cw, ch);
        for (int y = 0; y < ch; ++y)
            for (int x = 0; x < cw; ++x) {
                if (!valid.at(x, y) || !fov_warped.at(x, y)) continue;
                const size_t px = static_cast<size_t>(y) * cw + x;
                if (blend == BlendMode::overwrite_latest) {
                    for (int c = 0; c < channels; ++c)
                        canvas.at(x, y, c) = warped.at(x, y, c);
                } else {
                    const uint32_t n = ++contrib[px];
                    for (int c = 0; c < channels; ++c)
                        canvas.at(x, y, c) +=
                            (warped.at(x, y, c) - canvas.at(x, y, c)) / n;
                }
                covered.data[px] = 1;
            }
    }
    return {std::move(canvas), std::move(covered)};
}

std::pair<Image, FovMask> render(std::span<const Image> frames,
                                 const FovMask& shared_mask,
                                 const MosaicLayout& lay, BlendMode blend) {
    std::vector<FovMask> masks(frames.size(), shared_mask);
    return render(frames, std::span<const FovMask>(masks), lay, blend);
}

std::vector<DriftEntry> drift_report(const MosaicLayout& lay,
                                     int frame_width, int frame_height,
                                     std::span<const Homography> ground_truth) {
    const size_t n = lay.per_frame_to_canvas.size();
    if (!ground_truth.empty() && ground_truth.size() != n)
        throw LengthMismatch("drift_report: " + std::to_string(ground_truth.size()) +
                             " ground-truth transforms for " + std::to_string(n) +
                             " frames");
    const Homography unshift = Homography::translation(lay.offset.x, lay.offset.y);
    std::vector<DriftEntry> report(n);
    for (size_t i = 0; i < n; ++i) {
        report[i].frame_index = i;
        if (ground_truth.empty()) {
            if (i == lay.anchor_index) {
                report[i].available = true;
                report[i].corner_error_px = 0.0;
            }
            continue;
        }
        // Compare in anchor coordinates (strip the canvas offset).
        const Homography in_anchor = compose(unshift, lay.per_frame_to_canvas[i]);
        report[i].available = true;
        report[i].corner_error_px =
            max_corner_error(in_anchor, ground_truth[i], frame_width, frame_height);
    }
    return report;
}

} // namespace fetmosaic
