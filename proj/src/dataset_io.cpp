#include "fetmosaic/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fetmosaic/png_io.hpp"

namespace fs = std::filesystem;

namespace fetmosaic {

namespace {

std::vector<fs::path> list_pngs(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

SequenceManifest load_sequence(const fs::path& dir, bool expect_labels) {
    const fs::path images_dir = dir / "images";
    if (!fs::is_directory(images_dir))
        throw MissingDirectory("load_sequence: " + images_dir.string() +
                               " does not exist");

    SequenceManifest m;
    m.video_id = dir.filename().string();
    m.frame_paths = list_pngs(images_dir);
    if (m.frame_paths.empty())
        throw EmptyInput("load_sequence: no frames in " + images_dir.string());

    for (const fs::path& p : m.frame_paths) {
        const Image img = read_png(p.string());
        if (m.width == 0) {
            m.width = img.width;
            m.height = img.height;
        } else if (img.width != m.width || img.height != m.height) {
            throw ResolutionMismatch("load_sequence: " + p.string() + " is " +
                                     std::to_string(img.width) + "x" +
                                     std::to_string(img.height) + ", expected " +
                                     std::to_string(m.width) + "x" +
                                     std::to_string(m.height));
        }
    }
    if (m.width != m.height)
        throw ResolutionMismatch("load_sequence: frames must be square, got " +
                                 std::to_string(m.width) + "x" +
                                 std::to_string(m.height));

    if (expect_labels) {
        const fs::path labels_dir = dir / "labels";
        if (!fs::is_directory(labels_dir))
            throw MissingDirectory("load_sequence: " + labels_dir.string() +
                                   " does not exist");
        m.label_paths = list_pngs(labels_dir);
        if (m.label_paths.size() != m.frame_paths.size())
            throw LengthMismatch(
                "load_sequence: " + std::to_string(m.label_paths.size()) +
                " labels for " + std::to_string(m.frame_paths.size()) + " frames");
        for (const fs::path& p : m.label_paths) {
            const LabelMask labels = read_png_labels(p.string());
            if (labels.width != m.width || labels.height != m.height)
                throw ResolutionMismatch("load_sequence: label " + p.string() +
                                         " resolution differs from frames");
            for (uint8_t v : labels.data)
                if (v >= kNumClasses)
                    throw IllegalLabelValue("load_sequence: " + p.string() +
                                            " contains label value " +
                                            std::to_string(int(v)));
        }
    }
    return m;
}

FoldConfig default_fold_config() {
    FoldConfig cfg;
    cfg.fold_of = {
        {"Video001", 1}, {"Video006", 1}, {"Video016", 1},
        {"Video002", 2}, {"Video011", 2}, {"Video018", 2},
        {"Video004", 3}, {"Video019", 3}, {"Video023", 3},
        {"Video003", 4}, {"Video005", 4}, {"Video014", 4},
        {"Video007", 5}, {"Video008", 5}, {"Video022", 5},
        {"Video009", 6}, {"Video013", 6}, {"Video017", 6},
    };
    return cfg;
}

namespace {

void validate_folds(const FoldConfig& cfg) {
    if (cfg.fold_of.size() != 18)
        throw IncompleteAssignment("fold config assigns " +
                                   std::to_string(cfg.fold_of.size()) +
                                   " videos, expected 18");
    std::map<int, int> sizes;
    for (const auto& [video, fold] : cfg.fold_of) {
        if (fold < 1 || fold > 6)
            throw IncompleteAssignment("fold config: fold " + std::to_string(fold) +
                                       " for " + video + " outside 1..6");
        ++sizes[fold];
    }
    for (int f = 1; f <= 6; ++f)
        if (sizes[f] != 3)
            throw FoldSizeViolation("fold " + std::to_string(f) + " has " +
                                    std::to_string(sizes[f]) + " videos, expected 3");
}

} // namespace

FoldConfig load_fold_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open fold config " + file.string());
    FoldConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string video;
        int fold;
        if (ls >> video >> fold) cfg.fold_of[video] = fold;
    }
    validate_folds(cfg);
    return cfg;
}

Image to_probability_map(const LabelMask& label, int class_id) {
    Image out(label.width, label.height, 1);
    for (size_t i = 0; i < label.data.size(); ++i)
        out.data[i] = label.data[i] == class_id ? 1.0 : 0.0;
    return out;
}

std::string manifest_to_json(const SequenceManifest& m) {
    nlohmann::json j;
    j["video_id"] = m.video_id;
    j["resolution"] = {m.width, m.height};
    j["fov_margin_fraction"] = m.fov_margin_fraction;
    j["frames"] = nlohmann::json::array();
    for (const auto& p : m.frame_paths) j["frames"].push_back(p.filename().string());
    if (!m.label_paths.empty()) {
        j["labels"] = nlohmann::json::array();
        for (const auto& p : m.label_paths) j["labels"].push_back(p.filename().string());
    }
    return j.dump(2) + "\n";
}

} // namespace fetmosaic
