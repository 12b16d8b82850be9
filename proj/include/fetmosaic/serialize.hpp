#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fetmosaic/homography.hpp"

namespace fetmosaic {

// Shortest round-trip decimal form; stable across runs.
std::string format_double(double v);

struct HomographySet {
    std::string video_id;
    size_t frame_count = 0;
    std::vector<Homography> pairwise;          // frame i -> frame i+1
    std::vector<Homography> absolute;          // frame i -> frame 0; may be empty
};

// Envelope: {"video_id", "frame_count", "pairwise": [[9 numbers]...]} with an
// optional "absolute" array of the same shape.
std::string homographies_to_json(const HomographySet& set);
HomographySet homographies_from_json(const std::string& text);
HomographySet load_homographies(const std::filesystem::path& file);
void save_homographies(const std::filesystem::path& file, const HomographySet& set);

void write_text_file(const std::filesystem::path& file, const std::string& content);

} // namespace fetmosaic
