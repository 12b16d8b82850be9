#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fetmosaic/image.hpp"

namespace fetmosaic {

// One video clip on disk:
//   <dir>/images/*.png   8-bit frames, lexicographic order
//   <dir>/labels/*.png   optional single-channel class-id masks
struct SequenceManifest {
    std::string video_id;
    int width = 0;
    int height = 0;
    std::vector<std::filesystem::path> frame_paths;
    std::vector<std::filesystem::path> label_paths; // empty when absent
    double fov_margin_fraction = 0.0;
};

struct FoldConfig {
    std::map<std::string, int> fold_of; // video id -> fold 1..6
};

SequenceManifest load_sequence(const std::filesystem::path& dir, bool expect_labels);

// Plain-text "video_id fold_id" lines; '#' starts a comment.
FoldConfig load_fold_config(const std::filesystem::path& file);

// The standard 6-fold, 3-videos-per-fold assignment.
FoldConfig default_fold_config();

// 1.0 where label == class_id, else 0.0.
Image to_probability_map(const LabelMask& label, int class_id);

std::string manifest_to_json(const SequenceManifest& m);

} // namespace fetmosaic
