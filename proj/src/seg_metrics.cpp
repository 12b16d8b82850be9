#include "fetmosaic/seg_metrics.hpp"

#include <algorithm>

#include "fetmosaic/errors.hpp"

namespace fetmosaic {

ConfusionCounts confusion(const LabelMask& pred, const LabelMask& gt,
                          const FovMask* valid) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw DimensionMismatch("confusion: mask shapes differ");
    if (valid && (valid->width != gt.width || valid->height != gt.height))
        throw DimensionMismatch("confusion: valid mask shape differs");

    ConfusionCounts counts;
    for (size_t i = 0; i < gt.data.size(); ++i) {
        if (valid && !valid->data[i]) continue;
        const uint8_t p = pred.data[i];
        const uint8_t g = gt.data[i];
        if (p == g) {
            ++counts.tp[p];
        } else {
            ++counts.fp[p];
            ++counts.fn[g];
        }
    }
    return counts;
}

std::optional<double> iou(const ConfusionCounts& counts, int class_id) {
    const uint64_t denom = counts.tp[class_id] + counts.fp[class_id] +
                           counts.fn[class_id];
    if (denom == 0) return std::nullopt;
    return static_cast<double>(counts.tp[class_id]) / denom;
}

namespace {

GroupIou summarize_group(const std::string& name,
                         const std::vector<const ConfusionCounts*>& frames,
                         IouPooling pooling) {
    GroupIou row;
    row.group = name;
    row.frame_count = frames.size();
    for (int c = 0; c < kNumClasses; ++c) {
        if (pooling == IouPooling::pixel_pooled) {
            ConfusionCounts pooled;
            for (const ConfusionCounts* f : frames) pooled += *f;
            row.class_iou[c] = iou(pooled, c);
        } else {
            double sum = 0.0;
            size_t n = 0;
            for (const ConfusionCounts* f : frames)
                if (auto v = iou(*f, c)) {
                    sum += *v;
                    ++n;
                }
            if (n) row.class_iou[c] = sum / n;
        }
    }
    double sum = 0.0;
    size_t n = 0;
    for (const auto& v : row.class_iou)
        if (v) {
            sum += *v;
            ++n;
        }
    if (n) row.overall = sum / n;
    return row;
}

} // namespace

std::vector<GroupIou> aggregate(const std::vector<FrameCounts>& per_frame,
                                Grouping grouping,
                                const std::map<std::string, int>* fold_of,
                                IouPooling pooling) {
    if (per_frame.empty()) throw EmptyInput("aggregate: no frames");

    std::map<std::string, std::vector<const ConfusionCounts*>> groups;
    for (const FrameCounts& f : per_frame) {
        std::string key;
        switch (grouping) {
            case Grouping::per_video:
                key = f.video_id;
                break;
            case Grouping::per_fold: {
                if (!fold_of)
                    throw EmptyInput("aggregate: per_fold grouping needs a fold map");
                auto it = fold_of->find(f.video_id);
                if (it == fold_of->end())
                    throw IncompleteAssignment("aggregate: no fold for video " +
                                               f.video_id);
                key = "fold" + std::to_string(it->second);
                break;
            }
            case Grouping::overall:
                key = "all";
                break;
        }
        groups[key].push_back(&f.counts);
    }

    std::vector<GroupIou> rows;
    for (const auto& [name, frames] : groups)
        rows.push_back(summarize_group(name, frames, pooling));

    // Trailing row: per-class means across groups.
    if (rows.size() > 1) {
        GroupIou overall;
        overall.group = "overall";
        for (int c = 0; c < kNumClasses; ++c) {
            double sum = 0.0;
            size_t n = 0;
            for (const GroupIou& r : rows)
                if (r.class_iou[c]) {
                    sum += *r.class_iou[c];
                    ++n;
                }
            if (n) overall.class_iou[c] = sum / n;
        }
        double sum = 0.0;
        size_t n = 0;
        for (const auto& v : overall.class_iou)
            if (v) {
                sum += *v;
                ++n;
            }
        if (n) overall.overall = sum / n;
        for (const GroupIou& r : rows) overall.frame_count += r.frame_count;
        rows.push_back(std::move(overall));
    }
    return rows;
}

} // namespace fetmosaic
