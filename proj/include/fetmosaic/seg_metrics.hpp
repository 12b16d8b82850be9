#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fetmosaic/image.hpp"

namespace fetmosaic {

struct ConfusionCounts {
    std::array<uint64_t, kNumClasses> tp{};
    std::array<uint64_t, kNumClasses> fp{};
    std::array<uint64_t, kNumClasses> fn{};

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        for (int c = 0; c < kNumClasses; ++c) {
            tp[c] += o.tp[c];
            fp[c] += o.fp[c];
            fn[c] += o.fn[c];
        }
        return *this;
    }
};

// Per-class pixel tallies, restricted to valid pixels when a mask is given.
ConfusionCounts confusion(const LabelMask& pred, const LabelMask& gt,
                          const FovMask* valid = nullptr);

// TP / (TP + FP + FN); nullopt when the class is absent from both prediction
// and ground truth (excluded from averages).
std::optional<double> iou(const ConfusionCounts& counts, int class_id);

enum class Grouping { per_video, per_fold, overall };
enum class IouPooling { frame_mean, pixel_pooled };

struct FrameCounts {
    std::string video_id;
    ConfusionCounts counts;
};

struct GroupIou {
    std::string group; // video id, fold id, or "overall"
    std::array<std::optional<double>, kNumClasses> class_iou;
    std::optional<double> overall; // mean of the defined class values
    size_t frame_count = 0;
};

// Mean per-class IoU per group plus a trailing row averaging the per-class
// means across groups. fold_of maps video ids to fold labels and is required
// for per_fold grouping.
std::vector<GroupIou> aggregate(const std::vector<FrameCounts>& per_frame,
                                Grouping grouping,
                                const std::map<std::string, int>* fold_of = nullptr,
                                IouPooling pooling = IouPooling::frame_mean);

} // namespace fetmosaic
